"""Empirical grid evaluation: one DP-FedSGD run per (q, sigma) cell.

A cell's simulation is run once per seed and averaged; every round of
the averaged trace then yields one objective point, so a grid over
n_q x n_sigma cells costs n_q * n_sigma simulations rather than
n_q * n_sigma * T_max.

Cells are independent, so they may be fanned out over worker processes;
results are canonically ordered afterwards and do not depend on the
worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from typing import Sequence

import numpy as np

from .datasets import DatasetBundle
from .fedsim import FedConfig, multi_seed_trace
from .objectives import (
    ObjectivePoint,
    ObjectiveSource,
    ParamPoint,
    PrivacyParams,
    TheoryParams,
    privacy_f2,
    privacy_leakage,
)
from .pareto import CellEvaluator, CellFailure, GridResult

__all__ = ["empirical_evaluator", "run_empirical_grid", "cell_trace"]


def cell_trace(
    bundle: DatasetBundle, base_cfg: FedConfig, q: float, sigma: float, seeds: Sequence[int]
) -> np.ndarray:
    """Seed-averaged loss trace for one (q, sigma) cell."""
    cfg = replace(base_cfg, q=q, sigma=sigma)
    return multi_seed_trace(cfg, bundle, list(seeds))


def _points_from_trace(
    trace: np.ndarray,
    q: float,
    sigma: float,
    t_values: Sequence[int],
    privacy: PrivacyParams | None,
) -> list[ObjectivePoint]:
    points = []
    for t in t_values:
        if privacy is None:
            leak = privacy_f2(t, sigma, q)
        else:
            leak = privacy_leakage(t, sigma, q, privacy)
        points.append(
            ObjectivePoint(
                utility=float(trace[t - 1]),
                privacy=leak,
                source=ObjectiveSource.EMPIRICAL,
                origin=ParamPoint(T=t, sigma=sigma, q=q),
            )
        )
    return points


def empirical_evaluator(
    bundle: DatasetBundle,
    base_cfg: FedConfig,
    seeds: Sequence[int],
    privacy: PrivacyParams | None = None,
) -> CellEvaluator:
    """Cell evaluator backed by the simulator (serial execution).

    ``privacy=None`` uses the simplified objective sqrt(qT)/sigma;
    passing accountant constants uses the closed-form leakage instead.
    Both are positive multiples of each other, so the Pareto set is the
    same either way.
    """

    def evaluate(q: float, sigma: float, t_values: Sequence[int]):
        trace = cell_trace(bundle, base_cfg, q, sigma, seeds)
        if max(t_values) > len(trace):
            raise ValueError(f"trace has {len(trace)} rounds, need T={max(t_values)}")
        return _points_from_trace(trace, q, sigma, t_values, privacy)

    return evaluate


def _run_cell(args) -> tuple[float, float, np.ndarray | None, str | None]:
    bundle, base_cfg, q, sigma, seeds = args
    try:
        return q, sigma, cell_trace(bundle, base_cfg, q, sigma, seeds), None
    except Exception as exc:  # noqa: BLE001 - recorded by the caller
        return q, sigma, None, f"{type(exc).__name__}: {exc}"


def run_empirical_grid(
    bundle: DatasetBundle,
    base_cfg: FedConfig,
    q_list: Sequence[float],
    sigma_list: Sequence[float],
    tp: TheoryParams,
    seeds: Sequence[int],
    privacy: PrivacyParams | None = None,
    jobs: int = 1,
) -> GridResult:
    """Evaluate all (q, sigma) cells, optionally across worker processes."""
    if not q_list or not sigma_list:
        raise ValueError("q_list and sigma_list must be non-empty")
    t_values = list(range(1, tp.T_max + 1))
    if tp.T_max > base_cfg.T_max:
        raise ValueError(f"config runs {base_cfg.T_max} rounds, budget wants {tp.T_max}")

    cells = [(bundle, base_cfg, q, sigma, list(seeds)) for q in q_list for sigma in sigma_list]
    points: list[ObjectivePoint] = []
    failures: list[CellFailure] = []

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_run_cell, cells))
    else:
        outcomes = [_run_cell(c) for c in cells]

    for q, sigma, trace, err in outcomes:
        if err is not None:
            failures.append(CellFailure(q=q, sigma=sigma, error=err))
            continue
        points.extend(_points_from_trace(trace, q, sigma, t_values, privacy))

    points.sort(key=lambda p: (p.origin.q, p.origin.sigma, p.origin.T))
    return GridResult(points=tuple(points), failures=tuple(failures))
