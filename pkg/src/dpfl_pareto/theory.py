"""Closed-form Pareto solutions for the noise/rounds/ratio trade-off.

The unconstrained Pareto-optimal configurations satisfy the manifold law

    k * sigma^2 * T = q * K.

With a fixed sample ratio and a noise-level cap sigma_max, the solution
set splits into three regimes:

* Case I   (no cap):      sigma = sqrt(qK/(kT)) for every feasible T.
* Case II  (wide cap,  k sigma_max^2 T_max >  qK): sigma_max up to the
  breakpoint T = qK/(k sigma_max^2), the curve after it, and a vertical
  interval [0, sqrt(qK/(k T_max))] at T_max.
* Case III (tight cap, k sigma_max^2 T_max <= qK): sigma_max for every
  T < T_max and the full interval [0, sigma_max] at T_max.

The analysis runs through the change of variables X = 1/T + (k/K) s^2/q,
under which the attainable privacy at utility level X is bounded below
by 2 sqrt(k) / (sqrt(K) X); equality holds exactly on the manifold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .objectives import ParamPoint

__all__ = [
    "CaseLabel",
    "SigmaRule",
    "SolutionSegment",
    "classify_case",
    "analytical_solutions",
    "manifold_residual",
    "x_transform",
    "theoretical_front",
    "design_T_max",
    "curve_sigma",
    "snap_to_grid",
    "solution_grid_points",
    "InfeasibleBudgetError",
]


class InfeasibleBudgetError(ValueError):
    """Efficiency budget too small for even one round."""


class CaseLabel(Enum):
    CASE_I_UNCONSTRAINED = "case_i"
    CASE_II_WIDE_SIGMA = "case_ii"
    CASE_III_TIGHT_SIGMA = "case_iii"


class SigmaRule(Enum):
    FIXED = "fixed"  # sigma equals a constant on the whole T range
    CURVE = "curve"  # sigma = sqrt(curve_const / T), the manifold law
    INTERVAL = "interval"  # every sigma in [lo, hi] is Pareto-optimal


@dataclass(frozen=True)
class SolutionSegment:
    """One piece of a piecewise analytical solution over a T range."""

    t_lo: int
    t_hi: int
    rule: SigmaRule
    value: float = math.nan  # FIXED
    lo: float = math.nan  # INTERVAL
    hi: float = math.nan  # INTERVAL
    curve_const: float = math.nan  # CURVE: sigma = sqrt(curve_const / T)

    def __post_init__(self):
        if self.t_lo < 1 or self.t_hi < self.t_lo:
            raise ValueError(f"bad T range [{self.t_lo}, {self.t_hi}]")

    def sigma_at(self, T: int) -> float:
        """Representative sigma at T (largest sigma for interval rules)."""
        if not self.t_lo <= T <= self.t_hi:
            raise ValueError(f"T={T} outside segment [{self.t_lo}, {self.t_hi}]")
        if self.rule is SigmaRule.FIXED:
            return self.value
        if self.rule is SigmaRule.CURVE:
            return math.sqrt(self.curve_const / T)
        return self.hi


def curve_sigma(T, q: float, K: int, k: float) -> float:
    """Manifold noise level sqrt(qK/(kT))."""
    return math.sqrt(q * K / (k * T))


def classify_case(q: float, K: int, k: float, sigma_max: float | None, T_max: int) -> CaseLabel:
    """Which analytical regime applies (equality goes to the tight case)."""
    if T_max < 1:
        raise ValueError(f"T_max must be >= 1, got {T_max}")
    if sigma_max is None:
        return CaseLabel.CASE_I_UNCONSTRAINED
    if k * sigma_max * sigma_max * T_max > q * K:
        return CaseLabel.CASE_II_WIDE_SIGMA
    return CaseLabel.CASE_III_TIGHT_SIGMA


def analytical_solutions(
    q: float, K: int, k: float, sigma_max: float | None, T_max: int
) -> list[SolutionSegment]:
    """Piecewise-analytical Pareto solution; segments tile [1, T_max]."""
    case = classify_case(q, K, k, sigma_max, T_max)
    cc = q * K / k  # sigma^2 = cc / T on the manifold

    if T_max == 1:
        # only one feasible T: every admissible sigma trades utility
        # against privacy, so the whole sigma range is Pareto-optimal
        hi = sigma_max if sigma_max is not None else math.inf
        return [SolutionSegment(t_lo=1, t_hi=1, rule=SigmaRule.INTERVAL, lo=0.0, hi=hi)]

    if case is CaseLabel.CASE_I_UNCONSTRAINED:
        return [SolutionSegment(t_lo=1, t_hi=T_max, rule=SigmaRule.CURVE, curve_const=cc)]

    if case is CaseLabel.CASE_III_TIGHT_SIGMA:
        return [
            SolutionSegment(t_lo=1, t_hi=T_max - 1, rule=SigmaRule.FIXED, value=sigma_max),
            SolutionSegment(t_lo=T_max, t_hi=T_max, rule=SigmaRule.INTERVAL, lo=0.0, hi=sigma_max),
        ]

    # Case II: breakpoint where the cap meets the curve
    b = q * K / (k * sigma_max * sigma_max)
    if b == math.floor(b):
        # cap and curve agree exactly at T = b; give that T to the curve
        # so the two segments cannot overlap
        t_fixed_hi = int(b) - 1
        t_curve_lo = int(b)
    else:
        t_fixed_hi = math.floor(b)
        t_curve_lo = math.ceil(b)

    segments: list[SolutionSegment] = []
    if t_fixed_hi >= 1:
        segments.append(
            SolutionSegment(t_lo=1, t_hi=min(t_fixed_hi, T_max - 1), rule=SigmaRule.FIXED, value=sigma_max)
        )
    if t_curve_lo <= T_max - 1:
        segments.append(
            SolutionSegment(
                t_lo=max(1, t_curve_lo), t_hi=T_max - 1, rule=SigmaRule.CURVE, curve_const=cc
            )
        )
    segments.append(
        SolutionSegment(
            t_lo=T_max, t_hi=T_max, rule=SigmaRule.INTERVAL, lo=0.0, hi=math.sqrt(cc / T_max)
        )
    )
    return segments


def manifold_residual(point: ParamPoint, k: float, K: int) -> float:
    """k sigma^2 T - qK; zero exactly on the Pareto manifold."""
    return k * point.sigma * point.sigma * point.T - point.q * K


def x_transform(T, sigma: float, q: float, k: float, K: int) -> float:
    """Proof-space utility coordinate X = 1/T + (k/K) sigma^2 / q.

    Numerically identical to the theoretical utility loss f1.
    """
    return 1.0 / T + k * sigma * sigma / (q * K)


def theoretical_front(X: float, k: float, K: int) -> float:
    """Minimal attainable privacy objective at utility level X (no cap)."""
    if X <= 0:
        raise ValueError(f"X must be positive, got {X}")
    return 2.0 * math.sqrt(k) / (math.sqrt(K) * X)


def design_T_max(eff_budget: float, c_t: float) -> int:
    """Largest feasible round count floor(budget / c_t)."""
    if c_t <= 0:
        raise ValueError(f"c_t must be positive, got {c_t}")
    if eff_budget < c_t:
        raise InfeasibleBudgetError(
            f"budget {eff_budget} cannot cover one round of cost {c_t}"
        )
    return int(eff_budget // c_t)


def snap_to_grid(value: float, grid: list[float]) -> float:
    """Nearest grid value (grid ascending; clamps at the ends)."""
    if not grid:
        raise ValueError("empty grid")
    return min(grid, key=lambda g: (abs(g - value), g))


def solution_grid_points(
    segments: list[SolutionSegment], sigma_grid: list[float]
) -> set[tuple[int, float]]:
    """Grid snap of an analytical solution, as a set of (T, sigma) pairs.

    Fixed and curve rules snap to the nearest grid value; interval rules
    expand to every grid value inside [lo, hi].
    """
    grid = sorted(sigma_grid)
    snapped: set[tuple[int, float]] = set()
    for seg in segments:
        for T in range(seg.t_lo, seg.t_hi + 1):
            if seg.rule is SigmaRule.INTERVAL:
                snapped.update((T, g) for g in grid if seg.lo <= g <= seg.hi)
            else:
                snapped.add((T, snap_to_grid(seg.sigma_at(T), grid)))
    return snapped
