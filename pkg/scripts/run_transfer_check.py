#!/usr/bin/env python3
"""Low-cost design transfer check: fit k on a 10% pre-experiment, design
noise levels for a larger deployment, and test whether the designed
points are non-dominated against the deployment's own objective grid.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from dpfl_pareto import datasets
from dpfl_pareto.cli import _write_json, pareto_json  # noqa: E402
from dpfl_pareto.design import design_sigma, fit_k
from dpfl_pareto.experiment import empirical_evaluator, run_empirical_grid
from dpfl_pareto.fedsim import FedConfig
from dpfl_pareto.models import ModelArch, ModelKind
from dpfl_pareto.objectives import ParamPoint, PrivacyParams, TheoryParams
from dpfl_pareto.pareto import non_dominated_sort

SIGMAS = [0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/transfer")
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--feature-dim", type=int, default=600)
    ap.add_argument("--n-train", type=int, default=2000)
    ap.add_argument("--t-targets", default="20,50,80")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seeds = list(range(args.seeds))
    t_targets = [int(t) for t in args.t_targets.split(",")]

    full = datasets.synth_dataset(2, args.feature_dim, args.n_train, 800, seed=7)
    arch = ModelArch(kind=ModelKind.LOGISTIC_REGRESSION,
                     feature_dim=args.feature_dim, num_classes=2)
    tp = TheoryParams(k=1.0, K=10, c_t=1.0, eff_budget=100.0)

    # pre-experiment: 10% of the data, K0=10 clients, q0=1
    t0 = time.time()
    pre_bundle = datasets.subset_bundle(full, 0.10, K=10, seed=11)
    pre_cfg = FedConfig(K=10, E=5, q=1.0, sigma=0.0, T_max=100, eta=0.01, B=64,
                        c_clip=1.0, arch=arch, seed=0)
    pre_privacy = PrivacyParams(C=1.0, c_clip=1.0, delta=1e-5, K=10)
    pre_grid = run_empirical_grid(pre_bundle, pre_cfg, [1.0], SIGMAS, tp, seeds,
                                  privacy=pre_privacy)
    pre_members = pareto_json(list(pre_grid.points))
    law = fit_k([ParamPoint(T=m["T"], sigma=m["sigma"], q=m["q"]) for m in pre_members],
                q0=1.0, K0=10)
    pre_time = time.time() - t0
    print(f"pre-experiment ({pre_time:.0f}s): k = {law.k:.1f}, r^2 = {law.fit_r2:.3f}")

    # deployment: K=20, q=0.5, full data
    K_r, q_r = 20, 0.5
    deploy_bundle = datasets.repartition(full, K=K_r, seed=13)
    deploy_cfg = FedConfig(K=K_r, E=5, q=q_r, sigma=0.0, T_max=100, eta=0.01, B=64,
                           c_clip=1.0, arch=arch, seed=0)
    deploy_privacy = PrivacyParams(C=1.0, c_clip=1.0, delta=1e-5, K=K_r)
    deploy_tp = TheoryParams(k=law.k, K=K_r, c_t=1.0, eff_budget=100.0)
    grid = run_empirical_grid(deploy_bundle, deploy_cfg, [q_r], SIGMAS, deploy_tp, seeds,
                              privacy=deploy_privacy)

    evaluate = empirical_evaluator(deploy_bundle, deploy_cfg, seeds, privacy=deploy_privacy)
    designed = []
    for t_r in t_targets:
        sigma_r = design_sigma(q_r, K_r, law.k, t_r)
        cell = evaluate(q_r, sigma_r, list(range(1, 101)))
        designed.append(cell[t_r - 1])
        print(f"T_r={t_r}: designed sigma_r = {sigma_r:.5f}")

    combined = non_dominated_sort(list(grid.points) + designed)
    member_origins = set(combined.origins)
    hits = [d for d in designed if d.origin in member_origins]
    print(f"{len(hits)} of {len(designed)} designed points are non-dominated "
          f"in the augmented deployment grid")
    _write_json(out / "transfer.json", {
        "k": law.k,
        "designed": [
            {"T": d.origin.T, "sigma": d.origin.sigma, "q": d.origin.q,
             "utility": d.utility, "privacy": d.privacy,
             "non_dominated": d.origin in member_origins}
            for d in designed
        ],
    })
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
