#!/usr/bin/env python3
"""Desk-scale inverse-law experiment: sweep noise levels on synthetic
2-class data, extract the empirical Pareto set, and fit k sigma^2 T = qK.

Writes objectives.csv, pareto.json, law.json, and a solution-space
overlay (CSV + SVG) under --out.
"""

import argparse
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dpfl_pareto import datasets
from dpfl_pareto.cli import _write_csv, _write_json, _objective_rows, pareto_json  # noqa: E402
from dpfl_pareto.design import complexity_report, fit_k
from dpfl_pareto.experiment import run_empirical_grid
from dpfl_pareto.fedsim import FedConfig
from dpfl_pareto.models import ModelArch, ModelKind
from dpfl_pareto.objectives import ParamPoint, PrivacyParams, TheoryParams
from dpfl_pareto.pareto import non_dominated_sort

SIGMAS = [0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/inverse_law")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--feature-dim", type=int, default=600)
    ap.add_argument("--n-train", type=int, default=400)
    ap.add_argument("--n-test", type=int, default=800)
    ap.add_argument("--jobs", type=int, default=1)
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    bundle = datasets.repartition(
        datasets.synth_dataset(2, args.feature_dim, args.n_train, args.n_test, seed=7),
        K=10, seed=7,
    )
    arch = ModelArch(kind=ModelKind.LOGISTIC_REGRESSION,
                     feature_dim=args.feature_dim, num_classes=2)
    base = FedConfig(K=10, E=5, q=1.0, sigma=0.0, T_max=100, eta=0.01, B=64,
                     c_clip=1.0, arch=arch, seed=0)
    tp = TheoryParams(k=1.0, K=10, c_t=1.0, eff_budget=100.0)
    privacy = PrivacyParams(C=1.0, c_clip=1.0, delta=1e-5, K=10)

    t0 = time.time()
    grid = run_empirical_grid(bundle, base, [1.0], SIGMAS, tp,
                              seeds=list(range(args.seeds)), privacy=privacy, jobs=args.jobs)
    pre_time = time.time() - t0
    _write_csv(out / "objectives.csv",
               ["T", "sigma", "q", "utility", "privacy", "efficiency", "feasible"],
               _objective_rows(grid.points, tp, 1.0))

    members = pareto_json(list(grid.points))
    _write_json(out / "pareto.json", members)
    law = fit_k([ParamPoint(T=m["T"], sigma=m["sigma"], q=m["q"]) for m in members],
                q0=1.0, K0=10)
    _write_json(out / "law.json", {"k": law.k, "fit_r2": law.fit_r2,
                                   "n_points": law.n_points, "free_slope": law.free_slope})
    report = complexity_report(n_sigma=len(SIGMAS), n_q=1, T_r=100,
                               t0=pre_time, pre_cells=len(SIGMAS))

    print(f"{len(members)} Pareto members of {len(grid.points)} grid points")
    print(f"fitted k = {law.k:.1f}, fixed-slope r^2 = {law.fit_r2:.3f}, "
          f"free slope = {law.free_slope:.3f}")
    print(report.to_text())
    print(f"artifacts in {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
