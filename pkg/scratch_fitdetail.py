import sys, time, math
import numpy as np
from dpfl_pareto import datasets, design, experiment, fedsim, models, pareto
from dpfl_pareto.objectives import PrivacyParams, TheoryParams

d, n_train, n_test, n_seeds = (int(x) for x in sys.argv[1:5])
mom = float(sys.argv[5]) if len(sys.argv) > 5 else 0.0
bundle = datasets.repartition(datasets.synth_dataset(2, d, n_train, n_test, seed=7), K=10, seed=7)
arch = models.ModelArch(kind=models.ModelKind.LOGISTIC_REGRESSION, feature_dim=d, num_classes=2)
cfg = fedsim.FedConfig(K=10, E=5, q=1.0, sigma=0.0, T_max=100, eta=0.01, B=64, c_clip=1.0, arch=arch, seed=0, momentum=mom)
tp = TheoryParams(k=1.0, K=10, c_t=1.0, eff_budget=100.0)
priv = PrivacyParams(C=1.0, c_clip=1.0, delta=1e-5, K=10)
sigmas = [0.02, 0.04, 0.06, 0.08, 0.10, 0.12, 0.14]
grid = experiment.run_empirical_grid(bundle, cfg, [1.0], sigmas, tp, seeds=list(range(n_seeds)), privacy=priv)
ps = pareto.non_dominated_sort(list(grid.points))
members = sorted(ps.origins)
law = design.fit_k(list(members), q0=1.0, K0=10)
print(f"d={d} n={n_train} seeds={n_seeds} mom={mom}: k={law.k:.1f} r2={law.fit_r2:.3f} slope={law.free_slope:.3f} n={law.n_points}")
per = {}
for m in members:
    per.setdefault(m.sigma, []).append(m)
ssres_by = {}
for s, ms in sorted(per.items()):
    res = [math.log(law.k * m.sigma**2 * m.T / 10.0) for m in ms]
    ssres_by[s] = sum(r*r for r in res)
    ts = [m.T for m in ms]
    print(f"  sigma={s}: n={len(ms)} T=[{min(ts)},{max(ts)}] T*={10/(law.k*s*s):.1f} SSres={ssres_by[s]:.1f} resid range [{min(res):+.2f},{max(res):+.2f}]")
