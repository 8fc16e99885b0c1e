"""Variant calibration: configurable n_test, full-shard batches."""
import sys, time
import numpy as np
from dpfl_pareto import datasets, design, experiment, fedsim, models, pareto
from dpfl_pareto.objectives import PrivacyParams, TheoryParams

d, n_train, n_test, n_seeds = (int(x) for x in sys.argv[1:5])
bundle = datasets.repartition(datasets.synth_dataset(2, d, n_train, n_test, seed=7), K=10, seed=7)
arch = models.ModelArch(kind=models.ModelKind.LOGISTIC_REGRESSION, feature_dim=d, num_classes=2)
cfg = fedsim.FedConfig(K=10, E=5, q=1.0, sigma=0.0, T_max=100, eta=0.01, B=64, c_clip=1.0, arch=arch, seed=0)
tp = TheoryParams(k=1.0, K=10, c_t=1.0, eff_budget=100.0)
priv = PrivacyParams(C=1.0, c_clip=1.0, delta=1e-5, K=10)
sigmas = [0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14]
t0 = time.time()
grid = experiment.run_empirical_grid(bundle, cfg, [1.0], sigmas, tp, seeds=list(range(n_seeds)), privacy=priv)
ps = pareto.non_dominated_sort(list(grid.points))
members = sorted(ps.origins)
per_sigma = {}
for m in members:
    per_sigma.setdefault(m.sigma, []).append(m.T)
print(f"d={d} n={n_train}/{n_test} seeds={n_seeds}: {time.time()-t0:.0f}s, {len(members)} members")
for s, ts in sorted(per_sigma.items()):
    print(f"  sigma={s}: T in [{min(ts)},{max(ts)}] ({len(ts)})")
law = design.fit_k(list(members), q0=1.0, K0=10)
print(f"fit: k={law.k:.1f} r2={law.fit_r2:.3f} slope={law.free_slope:.3f}")
