"""Scratch: calibrate the criterion-11 experiment shape.

Pinned: LR, K=10, q=1.0, E=5, B=64, eta=0.01, seeds>=10,
sigma in {0.02..0.14} (7), T_max=100, c_t=1, budget=100, C=1, delta=1e-5.
Free: synthetic dataset shape (d, n), c_clip, clip mode.
"""
import sys
import time

import numpy as np

from dpfl_pareto import datasets, design, experiment, fedsim, models, pareto
from dpfl_pareto.objectives import PrivacyParams, TheoryParams

d = int(sys.argv[1]) if len(sys.argv) > 1 else 10
n_train = int(sys.argv[2]) if len(sys.argv) > 2 else 1000
c_clip = float(sys.argv[3]) if len(sys.argv) > 3 else 1.0
n_seeds = int(sys.argv[4]) if len(sys.argv) > 4 else 10

bundle = datasets.repartition(datasets.synth_dataset(2, d, n_train, 400, seed=7), K=10, seed=7)
arch = models.ModelArch(kind=models.ModelKind.LOGISTIC_REGRESSION, feature_dim=d, num_classes=2)
cfg = fedsim.FedConfig(K=10, E=5, q=1.0, sigma=0.0, T_max=100, eta=0.01, B=64,
                       c_clip=c_clip, arch=arch, seed=0)
tp = TheoryParams(k=1.0, K=10, c_t=1.0, eff_budget=100.0)
priv = PrivacyParams(C=1.0, c_clip=c_clip, delta=1e-5, K=10)
sigmas = [0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14]

t0 = time.time()
grid = experiment.run_empirical_grid(bundle, cfg, [1.0], sigmas, tp, seeds=list(range(n_seeds)), privacy=priv)
dt = time.time() - t0
ps = pareto.non_dominated_sort(list(grid.points))
members = sorted(ps.origins)
per_sigma = {}
for m in members:
    per_sigma.setdefault(m.sigma, []).append(m.T)
print(f"d={d} n={n_train} c_clip={c_clip} seeds={n_seeds}: grid {dt:.1f}s, {len(members)} members")
for s, ts in sorted(per_sigma.items()):
    print(f"  sigma={s}: T in [{min(ts)},{max(ts)}] ({len(ts)} members)")
law = design.fit_k(list(members), q0=1.0, K0=10)
print(f"fit: k={law.k:.1f} r2={law.fit_r2:.3f} free_slope={law.free_slope:.3f} n={law.n_points}")
