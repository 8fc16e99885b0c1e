"""Pareto dominance, non-dominated filtering, and the grid-evaluation driver.

Both objectives are minimized.  The non-dominated filter runs as an
O(n log n) lexicographic sweep so that dense theoretical grids (10^5+
points) stay fast; the definition-direct O(n^2) pairwise filter lives in
the test suite as an independent oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .objectives import ObjectivePoint, ParamPoint, TheoryParams

__all__ = [
    "dominates",
    "ParetoSet",
    "non_dominated_sort",
    "CellFailure",
    "GridResult",
    "grid_search",
    "theoretical_evaluator",
]


def dominates(a: ObjectivePoint, b: ObjectivePoint) -> bool:
    """True iff a is no worse than b in both objectives and better in one."""
    if a.utility > b.utility or a.privacy > b.privacy:
        return False
    return a.utility < b.utility or a.privacy < b.privacy


@dataclass(frozen=True)
class ParetoSet:
    """The non-dominated subset of an evaluated point set.

    ``members`` hold one representative per distinct objective value
    (exact ties keep the lexicographically smallest (T, sigma, q)
    origin); ``dominated_count`` counts every input point that did not
    make it in, duplicates included.
    """

    members: tuple[ObjectivePoint, ...]
    dominated_count: int

    @property
    def origins(self) -> tuple[ParamPoint, ...]:
        return tuple(p.origin for p in self.members)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def non_dominated_sort(points: Sequence[ObjectivePoint]) -> ParetoSet:
    """Filter a point list down to its non-dominated subset.

    Sweep over points sorted by (utility, privacy): a point survives iff
    its privacy is the minimum within its utility class and strictly
    below the best privacy seen at any smaller utility.  Exact
    objective duplicates collapse onto one representative.
    """
    if not points:
        raise ValueError("non_dominated_sort requires a non-empty point list")

    order = sorted(
        range(len(points)),
        key=lambda i: (points[i].utility, points[i].privacy, points[i].origin),
    )

    members: list[ObjectivePoint] = []
    best_privacy = np.inf  # over all strictly-smaller utility values
    i = 0
    n = len(points)
    while i < n:
        u = points[order[i]].utility
        j = i
        while j < n and points[order[j]].utility == u:
            j += 1
        block_min = points[order[i]].privacy  # sorted, so first is minimal
        if block_min < best_privacy:
            # ties on (u, block_min) are objective duplicates; the sort
            # order already puts the smallest origin first
            members.append(points[order[i]])
            best_privacy = block_min
        i = j

    members.sort(key=lambda p: p.origin)
    return ParetoSet(members=tuple(members), dominated_count=len(points) - len(members))


@dataclass(frozen=True)
class CellFailure:
    """A grid cell whose evaluation raised, recorded instead of skipped."""

    q: float
    sigma: float
    error: str


@dataclass(frozen=True)
class GridResult:
    points: tuple[ObjectivePoint, ...]
    failures: tuple[CellFailure, ...] = field(default=())

    @property
    def ok(self) -> bool:
        return not self.failures


# A cell evaluator maps one (q, sigma) cell to objective points for every
# requested T.  Empirical evaluators run a single simulation per cell and
# read all T values off its trace.
CellEvaluator = Callable[[float, float, Sequence[int]], Iterable[ObjectivePoint]]


def grid_search(
    q_list: Sequence[float],
    sigma_list: Sequence[float],
    tp: TheoryParams,
    evaluator: CellEvaluator,
) -> GridResult:
    """Evaluate every (q, sigma) cell for all feasible T in [1, T_max].

    The result list is canonically ordered by (q, sigma, T) so output is
    independent of evaluation order.
    """
    if not q_list or not sigma_list:
        raise ValueError("q_list and sigma_list must be non-empty")
    t_values = list(range(1, tp.T_max + 1))

    points: list[ObjectivePoint] = []
    failures: list[CellFailure] = []
    for q in q_list:
        for sigma in sigma_list:
            try:
                points.extend(evaluator(q, sigma, t_values))
            except Exception as exc:  # noqa: BLE001 - recorded, not hidden
                failures.append(CellFailure(q=q, sigma=sigma, error=f"{type(exc).__name__}: {exc}"))
    points.sort(key=lambda p: (p.origin.q, p.origin.sigma, p.origin.T))
    return GridResult(points=tuple(points), failures=tuple(failures))


def theoretical_evaluator(tp: TheoryParams) -> CellEvaluator:
    """Cell evaluator computing (f1, f2) from the closed forms."""
    from .objectives import ObjectiveSource, privacy_f2, utility_f1

    def evaluate(q: float, sigma: float, t_values: Sequence[int]):
        return [
            ObjectivePoint(
                utility=utility_f1(t, sigma, q, tp),
                privacy=privacy_f2(t, sigma, q),
                source=ObjectiveSource.THEORETICAL,
                origin=ParamPoint(T=t, sigma=sigma, q=q),
            )
            for t in t_values
        ]

    return evaluate
