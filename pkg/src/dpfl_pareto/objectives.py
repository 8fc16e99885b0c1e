"""Objective functions for the utility/privacy/efficiency trade-off.

Three quantities are computed for a candidate configuration (T, sigma, q):

* privacy leakage  eps_p = C * c_clip * sqrt(q T log(1/delta)) / (sqrt(K) sigma)
* utility loss     f1    = 1/T + k sigma^2 / (q K)   (theoretical form)
                   or the averaged test loss read from a simulation trace
* efficiency       eps_e = c_t * T

eps_p is a positive affine multiple of the simplified privacy objective
f2 = sqrt(qT)/sigma, so both induce the same Pareto structure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "ParamPoint",
    "ObjectiveSource",
    "ObjectivePoint",
    "PrivacyParams",
    "TheoryParams",
    "privacy_leakage",
    "privacy_f2",
    "utility_f1",
    "efficiency",
    "is_feasible",
    "lemma1_bound",
    "empirical_utility",
]


@dataclass(frozen=True, order=True)
class ParamPoint:
    """A candidate configuration in the (T, sigma, q) decision space.

    Ordering is lexicographic in (T, sigma, q); this is the tie-break
    order used when deduplicating objective-space duplicates.
    """

    T: int
    sigma: float
    q: float

    def __post_init__(self):
        if self.T < 1:
            raise ValueError(f"T must be >= 1, got {self.T}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")
        if not 0 < self.q <= 1:
            raise ValueError(f"q must be in (0, 1], got {self.q}")


class ObjectiveSource(Enum):
    EMPIRICAL = "empirical"
    THEORETICAL = "theoretical"


@dataclass(frozen=True)
class ObjectivePoint:
    """A (utility, privacy) pair with provenance back to its ParamPoint.

    ``utility`` and ``privacy`` are both minimized.  ``privacy`` may be
    ``math.inf`` (the sigma = 0 sentinel); any finite value dominates it
    in that coordinate.
    """

    utility: float
    privacy: float
    source: ObjectiveSource
    origin: ParamPoint

    def __post_init__(self):
        if math.isnan(self.utility) or math.isnan(self.privacy):
            raise ValueError("objective values must not be NaN")


@dataclass(frozen=True)
class PrivacyParams:
    """Constants of the closed-form privacy accountant."""

    C: float = 1.0
    c_clip: float = 1.0
    delta: float = 1e-5
    K: int = 1

    def __post_init__(self):
        if self.C <= 0 or self.c_clip <= 0:
            raise ValueError("C and c_clip must be positive")
        if not 0 < self.delta < 1:
            raise ValueError(f"delta must be in (0, 1), got {self.delta}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")


@dataclass(frozen=True)
class TheoryParams:
    """Constants entering the theoretical objectives and the T constraint."""

    k: float
    K: int
    c_t: float = 1.0
    eff_budget: float = 1.0

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"k must be positive, got {self.k}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.c_t <= 0:
            raise ValueError(f"c_t must be positive, got {self.c_t}")
        if self.eff_budget < self.c_t:
            raise ValueError("efficiency budget below one round's cost")

    @property
    def T_max(self) -> int:
        return int(self.eff_budget // self.c_t)


def privacy_leakage(T, sigma: float, q: float, p: PrivacyParams) -> float:
    """Privacy budget consumed after T rounds at noise sigma and ratio q.

    Returns ``math.inf`` when sigma == 0: an unprotected run leaks
    without bound, and the sentinel keeps grid sweeps total.
    """
    if sigma == 0:
        return math.inf
    return p.C * p.c_clip * math.sqrt(q * T * math.log(1.0 / p.delta)) / (math.sqrt(p.K) * sigma)


def privacy_f2(T, sigma: float, q: float) -> float:
    """Simplified privacy objective sqrt(qT)/sigma (inf sentinel at sigma=0)."""
    if sigma == 0:
        return math.inf
    return math.sqrt(q * T) / sigma


def utility_f1(T, sigma: float, q: float, tp: TheoryParams) -> float:
    """Theoretical utility loss 1/T + k sigma^2 / (qK)."""
    return 1.0 / T + tp.k * sigma * sigma / (q * tp.K)


def efficiency(T, c_t: float) -> float:
    """Total training time c_t * T."""
    return c_t * T


def is_feasible(T, tp: TheoryParams) -> bool:
    """Whether T rounds fit the efficiency budget (T <= floor(budget/c_t))."""
    return 1 <= T <= tp.T_max


def lemma1_bound(
    T,
    E: int,
    eta: float,
    sigma: float,
    q: float,
    K: int,
    big_o_constants: tuple[float, float] = (1.0, 1.0),
) -> float:
    """Full convergence upper bound with caller-supplied leading constants.

    a1 scales the optimization terms, a2 the noise term; the simplified
    f1 keeps a single constant k because positive affine rescalings do
    not change the Pareto set.
    """
    a1, a2 = big_o_constants
    opt = 1.0 / (eta * E * T) + eta * eta * E * E + eta
    noise = sigma * sigma / (eta * q * K * E)
    return a1 * opt + a2 * noise


def empirical_utility(trace: np.ndarray, T: int, baseline: np.ndarray | None = None) -> float:
    """Averaged test loss after round T (1-based) of a simulation trace.

    With ``baseline`` (a sigma = 0 trace of the same shape) the loss
    difference at round T is returned instead of the raw loss.
    """
    trace = np.asarray(trace)
    if not 1 <= T <= len(trace):
        raise IndexError(f"round {T} outside trace of length {len(trace)}")
    if baseline is None:
        return float(trace[T - 1])
    baseline = np.asarray(baseline)
    if len(baseline) != len(trace):
        raise ValueError("baseline length does not match trace")
    return float(trace[T - 1] - baseline[T - 1])
