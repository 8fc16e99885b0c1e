"""Scratch study: grid Pareto geometry vs snapped analytical solutions.

Run before freezing acceptance tests for criteria 3-6.
"""
import math
import time

import numpy as np

from dpfl_pareto import theory


def grid_front(q_vals, sigma_vals, T_max, k, K):
    """Vectorized (f1, f2) grid + sweep non-dominated filter.

    Returns member mask arrays (q, sigma, T triples).
    """
    Q, S, T = np.meshgrid(np.asarray(q_vals), np.asarray(sigma_vals), np.arange(1, T_max + 1), indexing="ij")
    Q, S, T = Q.ravel(), S.ravel(), T.ravel()
    f1 = 1.0 / T + k * S * S / (Q * K)
    f2 = np.sqrt(Q * T) / S
    # sweep: sort by (f1, f2); member iff f2 < running min over strictly smaller f1
    # handle equal-f1 blocks: only block-min f2 survives (dedup exact (f1,f2) dupes)
    order = np.lexsort((f2, f1))
    f1s, f2s = f1[order], f2[order]
    keep = np.zeros(len(f1s), dtype=bool)
    best = np.inf
    i = 0
    n = len(f1s)
    while i < n:
        j = i
        while j < n and f1s[j] == f1s[i]:
            j += 1
        if f2s[i] < best:
            keep[i] = True  # representative of ties; dupes collapsed
            best = f2s[i]
        i = j
    idx = order[keep.nonzero()[0]]
    return T[idx], S[idx], Q[idx], f1[idx], f2[idx]


def study_fixed_q(name, sigma_vals, T_max, k, K, q, sigma_max):
    print(f"--- {name}: q={q} K={K} k={k} sigma_max={sigma_max} T_max={T_max}, "
          f"{len(sigma_vals)} sigmas x {T_max} T")
    t0 = time.time()
    Tm, Sm, Qm, f1m, f2m = grid_front([q], sigma_vals, T_max, k, K)
    dt = time.time() - t0
    members = set(zip(Tm.tolist(), np.round(Sm, 9).tolist()))
    segs = theory.analytical_solutions(q, K, k, sigma_max, T_max)
    snap = theory.solution_grid_points(segs, list(sigma_vals))
    snap = {(t, round(s, 9)) for t, s in snap}
    extra = members - snap
    missing = snap - members
    print(f"  members={len(members)} snap={len(snap)} extra={len(extra)} missing={len(missing)} ({dt:.2f}s)")
    if extra:
        ex = sorted(extra)[:12]
        print(f"  sample extra: {ex}")
        # distance in sigma-steps from the rule
        step = sigma_vals[1] - sigma_vals[0]
        dists = []
        for (t, s) in extra:
            rule = [seg for seg in segs if seg.t_lo <= t <= seg.t_hi][0]
            if rule.rule is theory.SigmaRule.INTERVAL:
                d = 0 if rule.lo <= s <= rule.hi else min(abs(s - rule.lo), abs(s - rule.hi)) / step
            else:
                d = abs(s - rule.sigma_at(t)) / step
            dists.append(d)
        print(f"  extra dist from rule (sigma-steps): max={max(dists):.2f} mean={np.mean(dists):.2f}")
    if missing:
        print(f"  sample missing: {sorted(missing)[:12]}")
    return members, snap


def study_manifold(q_vals, sigma_vals, T_max, k, K, h):
    print(f"--- 3-param manifold: {len(q_vals)} q x {len(sigma_vals)} sigmas x {T_max} T")
    t0 = time.time()
    Tm, Sm, Qm, f1m, f2m = grid_front(q_vals, sigma_vals, T_max, k, K)
    dt = time.time() - t0
    res = k * Sm * Sm * Tm - Qm * K
    rel = np.abs(res) / (Qm * K)
    slack = k * Tm * (2 * Sm * h + h * h)
    viol = np.abs(res) > slack
    print(f"  members={len(Tm)} ({dt:.2f}s); violations of per-member slack: {viol.sum()}")
    print(f"  median rel residual: {np.median(rel)*100:.3f}%  max rel: {rel.max()*100:.2f}%")
    if viol.any():
        vi = np.argsort(-(np.abs(res) - slack))[:10]
        for i in vi:
            if viol[i]:
                print(f"    T={Tm[i]} sigma={Sm[i]:.3f} q={Qm[i]} res={res[i]:.4f} slack={slack[i]:.4f} rel={rel[i]*100:.1f}%")
    print(f"  member T range: [{Tm.min()}, {Tm.max()}]")


sig_001 = lambda lo, hi: np.round(np.arange(lo, hi + 1e-12, 0.001), 9)

# Criterion 3: q=1, K=10, k=25, sigma 0.010..0.150, T 1..200
study_fixed_q("C3 (CaseI-as-stated)", sig_001(0.010, 0.150), 200, 25, 10, 1.0, 0.150)

# Criterion 4: CaseII fig3(b): sigma_max=0.10, T_max=150
study_fixed_q("C4 (CaseII)", sig_001(0.010, 0.100), 150, 25, 10, 1.0, 0.100)

# Criterion 5: CaseIII: sigma_max=0.050, T_max=75
study_fixed_q("C5 (CaseIII)", sig_001(0.010, 0.050), 75, 25, 10, 1.0, 0.050)

# Criterion 6 candidate instantiation: T_max=1000, sigma 0.020..0.041
study_manifold([0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875, 1.0],
               sig_001(0.020, 0.041), 1000, 25, 10, 0.001)
