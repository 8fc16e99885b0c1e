#!/usr/bin/env python3
"""Render the three closed-form solution regimes as SVG figures, each
overlaying the analytical segments on the dense theoretical grid front.
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from dpfl_pareto import theory
from dpfl_pareto.objectives import TheoryParams
from dpfl_pareto.pareto import grid_search, non_dominated_sort, theoretical_evaluator
from dpfl_pareto.svgplot import Series, render_svg

CASES = [
    ("case_i", dict(q=1.0, K=10, k=25.0, sigma_max=None, T_max=200, sigma_hi=0.15)),
    ("case_ii", dict(q=1.0, K=10, k=25.0, sigma_max=0.10, T_max=150, sigma_hi=0.10)),
    ("case_iii", dict(q=1.0, K=10, k=25.0, sigma_max=0.050, T_max=75, sigma_hi=0.05)),
]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results/theory_cases")
    args = ap.parse_args()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    for name, p in CASES:
        sigmas = list(np.round(np.arange(0.010, p["sigma_hi"] + 5e-4, 0.001), 9))
        tp = TheoryParams(k=p["k"], K=p["K"], c_t=1.0, eff_budget=float(p["T_max"]))
        result = grid_search([p["q"]], sigmas, tp, theoretical_evaluator(tp))
        front = non_dominated_sort(list(result.points))
        segments = theory.analytical_solutions(p["q"], p["K"], p["k"], p["sigma_max"], p["T_max"])

        series = [Series(
            label="grid front",
            x=[float(m.origin.T) for m in front.members],
            y=[m.origin.sigma for m in front.members],
            kind="scatter", color="#111111",
        )]
        for i, seg in enumerate(segments):
            ts = list(range(seg.t_lo, seg.t_hi + 1))
            series.append(Series(
                label=f"analytical ({seg.rule.value})",
                x=[float(t) for t in ts] if seg.rule is not theory.SigmaRule.INTERVAL
                else [float(seg.t_lo), float(seg.t_lo)],
                y=[seg.sigma_at(t) for t in ts] if seg.rule is not theory.SigmaRule.INTERVAL
                else [seg.lo, seg.hi],
                kind="line", color="#2ca02c",
            ))
        case = theory.classify_case(p["q"], p["K"], p["k"], p["sigma_max"], p["T_max"])
        svg = render_svg(series, x_label="communication rounds T", y_label="noise level sigma",
                         title=f"{case.value}: analytical vs grid front")
        (out / f"{name}.svg").write_text(svg)
        print(f"{name}: {len(front.members)} grid-front members -> {out / (name + '.svg')}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
