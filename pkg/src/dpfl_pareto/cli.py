"""Command-line pipeline: simulate, grid, pareto, theory, fit, design, report.

A single JSON config file describes the dataset, the federation
constants, the (sigma, q) grids, and the accountant/theory constants;
subcommands read it with --config and write their artifacts under
--out.  All emitted CSV/JSON artifacts are byte-deterministic for a
fixed config, independent of --jobs.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, datasets, theory
from .design import complexity_report, design_sigma, fit_k
from .experiment import cell_trace, run_empirical_grid
from .fedsim import ClipMode, FedConfig
from .models import ModelArch, ModelKind
from .objectives import (
    ObjectivePoint,
    ObjectiveSource,
    ParamPoint,
    PrivacyParams,
    TheoryParams,
    efficiency,
    is_feasible,
)
from .pareto import grid_search, non_dominated_sort, theoretical_evaluator
from .svgplot import Series, render_svg

__all__ = ["main", "ExperimentConfig", "load_config"]


class ConfigError(ValueError):
    """Bad or incomplete experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: dict
    fed: FedConfig
    sigma_list: list[float]
    q_list: list[float]
    privacy: PrivacyParams
    theory_k: float | None
    c_t: float
    eff_budget: float
    sigma_max: float | None
    seeds: list[int]
    output_dir: Path

    @property
    def theory_params(self) -> TheoryParams:
        k = self.theory_k if self.theory_k is not None else 1.0
        return TheoryParams(k=k, K=self.fed.K, c_t=self.c_t, eff_budget=self.eff_budget)


def _arch_from_dict(d: dict, feature_dim: int, num_classes: int) -> ModelArch:
    kind = {"lr": ModelKind.LOGISTIC_REGRESSION, "mlp": ModelKind.MLP}.get(d.get("kind", "lr"))
    if kind is None:
        raise ConfigError(f"unknown model kind {d.get('kind')!r}")
    return ModelArch(
        kind=kind,
        feature_dim=feature_dim,
        num_classes=num_classes,
        hidden_units=int(d.get("hidden_units", 0)),
    )


def load_bundle(dataset: dict, K: int, seed: int) -> datasets.DatasetBundle:
    kind = dataset.get("type")
    if kind == "synthetic":
        bundle = datasets.synth_dataset(
            num_classes=int(dataset.get("num_classes", 2)),
            feature_dim=int(dataset["feature_dim"]),
            n_train=int(dataset["n_train"]),
            n_test=int(dataset["n_test"]),
            seed=int(dataset.get("seed", 0)),
        )
        fraction = dataset.get("subset_fraction")
        if fraction is not None and float(fraction) < 1.0:
            return datasets.subset_bundle(bundle, float(fraction), K, seed)
        return datasets.repartition(bundle, K, seed)
    if kind == "mnist":
        for key in ("train_images", "train_labels", "test_images", "test_labels"):
            if key not in dataset:
                raise ConfigError(f"mnist dataset config needs {key!r}")
            if not Path(dataset[key]).exists():
                raise ConfigError(f"dataset file not found: {dataset[key]}")
        return datasets.load_mnist_bundle(
            dataset["train_images"],
            dataset["train_labels"],
            dataset["test_images"],
            dataset["test_labels"],
            K=K,
            seed=seed,
            subset_fraction=float(dataset.get("subset_fraction", 1.0)),
        )
    raise ConfigError(f"unknown dataset type {kind!r}")


def load_config(path) -> ExperimentConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")

    try:
        ds = raw["dataset"]
        fed_raw = dict(raw["fed"])
        grid = raw.get("grid", {})
        privacy_raw = raw.get("privacy", {})
        theory_raw = raw.get("theory", {})

        if ds.get("type") == "synthetic":
            feature_dim = int(ds["feature_dim"])
            num_classes = int(ds.get("num_classes", 2))
        else:
            feature_dim = int(ds.get("feature_dim", 784))
            num_classes = int(ds.get("num_classes", 10))
        arch = _arch_from_dict(fed_raw.pop("model", {}), feature_dim, num_classes)

        clip_mode = ClipMode(fed_raw.pop("clip_mode", "squared_norm"))
        fed = FedConfig(arch=arch, clip_mode=clip_mode, **fed_raw)

        sigma_list = [float(s) for s in grid.get("sigma_list", [fed.sigma])]
        q_list = [float(q) for q in grid.get("q_list", [fed.q])]
        if not sigma_list or not q_list:
            raise ConfigError("grid.sigma_list and grid.q_list must be non-empty")
        if any(s < 0 for s in sigma_list):
            raise ConfigError("all sigma values must be >= 0")
        if any(not 0 < q <= 1 for q in q_list):
            raise ConfigError("all q values must be in (0, 1]")

        privacy = PrivacyParams(
            C=float(privacy_raw.get("C", 1.0)),
            c_clip=float(privacy_raw.get("c_clip", fed.c_clip)),
            delta=float(privacy_raw.get("delta", 1e-5)),
            K=fed.K,
        )
        seeds = [int(s) for s in raw.get("seeds", [fed.seed])]
        if not seeds:
            raise ConfigError("seeds list must be non-empty")

        k = theory_raw.get("k")
        sigma_max = theory_raw.get("sigma_max")
        return ExperimentConfig(
            dataset=ds,
            fed=fed,
            sigma_list=sigma_list,
            q_list=q_list,
            privacy=privacy,
            theory_k=float(k) if k is not None else None,
            c_t=float(theory_raw.get("c_t", 1.0)),
            eff_budget=float(theory_raw.get("eff_budget", float(fed.T_max))),
            sigma_max=float(sigma_max) if sigma_max is not None else None,
            seeds=seeds,
            output_dir=Path(raw.get("output_dir", "out")),
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad config: {exc}")


def _fmt(x) -> str:
    """Shortest round-trip decimal form; deterministic across runs."""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_manifest(out: Path, cfg_echo: dict, files: list[str]) -> None:
    for rel in files:
        if not (out / rel).exists():
            raise RuntimeError(f"manifest lists missing file {rel}")
    _write_json(out / "manifest.json", {
        "config": cfg_echo,
        "files": sorted(files),
        "tool_version": __version__,
    })


def _out_dir(args, cfg: ExperimentConfig | None = None) -> Path:
    out = Path(args.out) if args.out else (cfg.output_dir if cfg else Path("out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    if args.seed_list:
        cfg = ExperimentConfig(**{**cfg.__dict__, "seeds": [int(s) for s in args.seed_list.split(",")]})
    out = _out_dir(args, cfg)
    t_start = time.time()
    bundle = load_bundle(cfg.dataset, cfg.fed.K, cfg.fed.seed)

    files = []
    traces = []
    for seed in cfg.seeds:
        trace = cell_trace(bundle, cfg.fed, cfg.fed.q, cfg.fed.sigma, [seed])
        # n_participants is seed-independent in count, still recorded per round
        m = max(1, int(np.floor(cfg.fed.q * cfg.fed.K + 0.5)))
        name = f"trace_seed{seed}.csv"
        _write_csv(out / name, ["round", "mean_test_loss", "n_participants"],
                   [(t + 1, float(trace[t]), m) for t in range(len(trace))])
        files.append(name)
        traces.append(trace)
    mean_trace = np.mean(traces, axis=0)
    m = max(1, int(np.floor(cfg.fed.q * cfg.fed.K + 0.5)))
    _write_csv(out / "trace_mean.csv", ["round", "mean_test_loss", "n_participants"],
               [(t + 1, float(mean_trace[t]), m) for t in range(len(mean_trace))])
    files.append("trace_mean.csv")
    (out / "timings.txt").write_text(f"simulate: {time.time() - t_start:.3f}s\n")
    _write_manifest(out, {"config_path": str(args.config), "sigma": cfg.fed.sigma,
                          "q": cfg.fed.q, "seeds": cfg.seeds}, files)
    print(f"wrote {len(files)} trace files to {out}")
    return 0


def _objective_rows(points, tp: TheoryParams, c_t: float):
    for p in points:
        yield (
            p.origin.T, p.origin.sigma, p.origin.q, p.utility, p.privacy,
            efficiency(p.origin.T, c_t), int(is_feasible(p.origin.T, tp)),
        )


def cmd_grid(args) -> int:
    cfg = load_config(args.config)
    out = _out_dir(args, cfg)
    t_start = time.time()
    tp_k = args.k if args.k is not None else cfg.theory_k
    c_t = args.ct if args.ct is not None else cfg.c_t
    budget = args.budget if args.budget is not None else cfg.eff_budget
    files = []

    if args.theoretical:
        if tp_k is None:
            raise ConfigError("--theoretical needs k (flag --k or config theory.k)")
        tp = TheoryParams(k=tp_k, K=cfg.fed.K, c_t=c_t, eff_budget=budget)
        result = grid_search(cfg.q_list, cfg.sigma_list, tp, theoretical_evaluator(tp))
    else:
        tp = TheoryParams(k=tp_k if tp_k is not None else 1.0, K=cfg.fed.K,
                          c_t=c_t, eff_budget=budget)
        bundle = load_bundle(cfg.dataset, cfg.fed.K, cfg.fed.seed)
        base = FedConfig(**{**cfg.fed.__dict__, "T_max": tp.T_max})
        result = run_empirical_grid(
            bundle, base, cfg.q_list, cfg.sigma_list, tp, cfg.seeds,
            privacy=cfg.privacy, jobs=args.jobs,
        )

    _write_csv(out / "objectives.csv",
               ["T", "sigma", "q", "utility", "privacy", "efficiency", "feasible"],
               _objective_rows(result.points, tp, c_t))
    files.append("objectives.csv")
    if result.failures:
        _write_json(out / "failures.json",
                    [{"q": f.q, "sigma": f.sigma, "error": f.error} for f in result.failures])
        files.append("failures.json")
    (out / "timings.txt").write_text(f"grid: {time.time() - t_start:.3f}s\n")
    _write_manifest(out, {"config_path": str(args.config), "theoretical": bool(args.theoretical),
                          "n_q": len(cfg.q_list), "n_sigma": len(cfg.sigma_list),
                          "T_max": tp.T_max, "seeds": cfg.seeds}, files)
    print(f"wrote {len(result.points)} objective rows to {out / 'objectives.csv'}"
          + (f" ({len(result.failures)} failed cells)" if result.failures else ""))
    return 1 if result.failures else 0


def read_objectives_csv(path) -> list[ObjectivePoint]:
    points = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            points.append(ObjectivePoint(
                utility=float(row["utility"]),
                privacy=float(row["privacy"]),
                source=ObjectiveSource.EMPIRICAL,
                origin=ParamPoint(T=int(row["T"]), sigma=float(row["sigma"]), q=float(row["q"])),
            ))
    if not points:
        raise ConfigError(f"no objective rows in {path}")
    return points


def pareto_json(points) -> list[dict]:
    ps = non_dominated_sort(points)
    return [
        {"T": p.origin.T, "sigma": p.origin.sigma, "q": p.origin.q,
         "utility": p.utility, "privacy": p.privacy}
        for p in ps.members
    ]


def cmd_pareto(args) -> int:
    out = _out_dir(args)
    points = read_objectives_csv(args.input)
    members = pareto_json(points)
    _write_json(out / "pareto.json", members)
    print(f"{len(members)} non-dominated of {len(points)} points -> {out / 'pareto.json'}")
    return 0


def cmd_theory(args) -> int:
    out = _out_dir(args)
    t_max = theory.design_T_max(args.budget, args.ct)
    case = theory.classify_case(args.q, args.K, args.k, args.sigma_max, t_max)
    segments = theory.analytical_solutions(args.q, args.K, args.k, args.sigma_max, t_max)
    _write_json(out / "segments.json", {
        "case": case.value,
        "T_max": t_max,
        "segments": [
            {"t_lo": s.t_lo, "t_hi": s.t_hi, "rule": s.rule.value,
             **({"sigma": s.value} if s.rule is theory.SigmaRule.FIXED else {}),
             **({"lo": s.lo, "hi": s.hi} if s.rule is theory.SigmaRule.INTERVAL else {}),
             **({"curve_const": s.curve_const} if s.rule is theory.SigmaRule.CURVE else {})}
            for s in segments
        ],
    })
    rows = []
    for seg in segments:
        for t in range(seg.t_lo, seg.t_hi + 1):
            rows.append((t, seg.sigma_at(t)))
    _write_csv(out / "solution_curve.csv", ["T", "sigma"], rows)
    print(f"{case.value}: {len(segments)} segments, T_max={t_max} -> {out}")
    return 0


def cmd_fit(args) -> int:
    out = _out_dir(args)
    members = json.loads(Path(args.input).read_text())
    points = [ParamPoint(T=int(m["T"]), sigma=float(m["sigma"]), q=float(m["q"])) for m in members]
    law = fit_k(points, q0=args.q0, K0=args.K0)
    _write_json(out / "law.json", {
        "k": law.k, "fit_r2": law.fit_r2, "n_points": law.n_points,
        "q0": law.source_config[0], "K0": law.source_config[1],
        "n_excluded": law.n_excluded, "free_slope": law.free_slope,
    })
    print(f"k={law.k:.6g} r2={law.fit_r2:.4f} n={law.n_points} -> {out / 'law.json'}")
    return 0


def cmd_design(args) -> int:
    out = _out_dir(args)
    if args.k is None and args.law is None:
        raise ConfigError("design needs --k or --law")
    k = args.k if args.k is not None else float(json.loads(Path(args.law).read_text())["k"])
    sigma_r = design_sigma(args.q, args.K, k, args.T)
    report = complexity_report(
        n_sigma=args.n_sigma, n_q=args.n_q, T_r=args.T, t0=args.t0, pre_cells=args.pre_cells
    )
    _write_json(out / "design.json", {
        "q": args.q, "K": args.K, "k": k, "T_r": args.T, "sigma_r": sigma_r,
        "manifold_residual": theory.manifold_residual(
            ParamPoint(T=args.T, sigma=sigma_r, q=args.q), k, args.K),
        "complexity": {
            "ours_guiding": "t_0 + Θ(T_r)",
            "baseline_guiding": "Θ(n_σT_r)",
            "ours_pareto": "t_0 + Θ(n_σT_r)",
            "baseline_pareto": "Θ(n_qn_σT_r)",
            "ours_sim_count": report.ours_sim_count,
            "baseline_pareto_sim_count": report.baseline_pareto_sim_count,
        },
    })
    print(f"sigma_r = {sigma_r!r}")
    print(report.to_text())
    return 0


def cmd_report(args) -> int:
    out = _out_dir(args)
    members = json.loads(Path(args.pareto).read_text())
    if not members:
        raise ConfigError("empty Pareto set; nothing to report")
    k, K = args.k, args.K

    residuals = []
    for m in members:
        point = ParamPoint(T=int(m["T"]), sigma=float(m["sigma"]), q=float(m["q"]))
        denominator = point.q * K
        residuals.append(abs(theory.manifold_residual(point, k, K)) / denominator)
    med = float(np.median(residuals))

    rows = [("experimental", m["T"], m["sigma"], m["q"], m["utility"], m["privacy"])
            for m in members]
    q_values = sorted({float(m["q"]) for m in members})
    curve_series = []
    t_max = max(int(m["T"]) for m in members)
    for q in q_values:
        ts = list(range(1, t_max + 1))
        sig = [theory.curve_sigma(t, q, K, k) for t in ts]
        rows.extend(("theoretical", t, s, q, "", "") for t, s in zip(ts, sig))
        curve_series.append(Series(label=f"theoretical q={q:g}", x=[float(t) for t in ts],
                                   y=sig, kind="line", color="#2ca02c"))

    _write_csv(out / "overlay.csv", ["series", "T", "sigma", "q", "utility", "privacy"], rows)
    svg = render_svg(
        [Series(label="experimental",
                x=[float(m["T"]) for m in members],
                y=[float(m["sigma"]) for m in members], kind="scatter", color="#111111")]
        + curve_series,
        x_label="communication rounds T", y_label="noise level sigma",
        title=f"Pareto solutions vs k*sigma^2*T = q*K (k={k:g}, K={K})",
    )
    (out / "overlay.svg").write_text(svg)
    print(f"median relative manifold residual |k sigma^2 T - qK| / qK: {med:.6f}")
    print(f"wrote {out / 'overlay.csv'} and {out / 'overlay.svg'}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dpfl-pareto",
        description="DPFL simulation, Pareto analysis, and low-cost parameter design",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one (sigma, q) cell across seeds")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--seed-list", default=None, help="comma-separated seed override")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("grid", help="evaluate the full (q, sigma, T) objective grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--theoretical", action="store_true",
                   help="use closed-form objectives instead of simulation")
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--ct", type=float, default=None)
    p.add_argument("--budget", type=float, default=None)
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("pareto", help="non-dominated filter over an objective CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_pareto)

    p = sub.add_parser("theory", help="closed-form solution segments")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--sigma-max", type=float, default=None)
    p.add_argument("--ct", type=float, required=True)
    p.add_argument("--budget", type=float, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("fit", help="fit the law constant k from a Pareto-set JSON")
    p.add_argument("--input", required=True)
    p.add_argument("--q0", type=float, required=True)
    p.add_argument("--K0", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("design", help="solve the deployment noise level from the law")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--k", type=float, default=None)
    p.add_argument("--law", default=None, help="law.json from the fit subcommand")
    p.add_argument("--T", type=int, required=True)
    p.add_argument("--n-sigma", type=int, default=1)
    p.add_argument("--n-q", type=int, default=1)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--pre-cells", type=int, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_design)

    p = sub.add_parser("report", help="overlay experimental Pareto points on the law")
    p.add_argument("--pareto", required=True)
    p.add_argument("--k", type=float, required=True)
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_report)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
