"""Command line interface: data generation, feature scoring, batch and online runs.

Every command writes a manifest.json capturing the fully resolved
configuration; `vennpred rerun manifest.json` reproduces the run
bit-identically.  Exit codes: 0 success, 1 usage, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .dataset import CsvFormatError, Dataset, SyntheticSpec, generate_synthetic, load_csv, write_csv
from .featsel import score_features, scores_to_csv
from .harness import BatchPlan, run_batch, run_online
from .metrics import MetricReport, miscalibration_pvalue
from .network import MLPBinaryClassifier, NumericalError
from .svgplot import render_curves_svg
from .venn import VennPredictor


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_synth_flags(p):
    p.add_argument("--dim", type=int, default=34, help="number of binary features")
    p.add_argument("--prevalence", type=float, default=0.1852,
                   help="target positive frequency of the generator")
    p.add_argument("--noise-scale", type=float, default=0.0,
                   help="std of latent logit noise")


def _add_data_flags(p):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--data", help="labeled CSV (label column last)")
    src.add_argument("--synthetic", type=int, metavar="N",
                     help="generate N synthetic examples instead of reading a file")
    _add_synth_flags(p)


def _add_predictor_flags(p):
    p.add_argument("--predictor", choices=("vp", "ann"), default="vp")
    p.add_argument("--mode", choices=("none", "mo", "mu"), default="mo",
                   help="class rebalancing mode")
    p.add_argument("--lambda", dest="n_bins", type=int, default=None,
                   help="taxonomy bins (vp only, default 6)")
    p.add_argument("--theta", default=None,
                   help="decision threshold; a float or 'auto' (default: auto for vp, 0.5 for ann)")
    p.add_argument("--hidden", type=int, default=5, help="hidden units")


def build_parser() -> _Parser:
    parser = _Parser(prog="vennpred",
                     description="Venn prediction with calibrated probability bounds")
    parser.add_argument("--version", action="version", version=f"vennpred {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic dataset and its true probabilities")
    p.add_argument("--n", type=int, required=True, help="number of examples")
    _add_synth_flags(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="output directory")

    p = sub.add_parser("featsel", help="score features by chi-squared and information gain")
    p.add_argument("--data", required=True, help="labeled CSV with binary features")
    p.add_argument("--criterion", choices=("chi2", "ig"), default="chi2")
    p.add_argument("--epsilon", type=float, default=0.0, help="retain threshold")
    p.add_argument("--out", default=None)

    p = sub.add_parser("batch", help="repeated stratified cross-validation")
    _add_data_flags(p)
    _add_predictor_flags(p)
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--repeats", type=int, default=10)
    p.add_argument("--bins", type=int, default=20, help="reliability bins")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default=None)

    p = sub.add_parser("online", help="prequential run with cumulative curves")
    _add_data_flags(p)
    _add_predictor_flags(p)
    p.add_argument("--initial", type=int, default=5, help="initial training examples")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None)

    p = sub.add_parser("rerun", help="reproduce a previous run from its manifest")
    p.add_argument("manifest", help="path to a manifest.json")
    p.add_argument("--out", default=None, help="override output directory")

    return parser


def _outdir(args) -> Path:
    out = args.out or os.environ.get("VENNPRED_OUTDIR") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_manifest(outdir: Path, command: str, config: dict) -> None:
    payload = {"package": "vennpred", "version": __version__,
               "command": command, "config": config}
    (outdir / "manifest.json").write_text(json.dumps(payload, indent=2) + "\n")


def _resolve_theta(args):
    if args.theta is None:
        return "auto" if args.predictor == "vp" else 0.5
    if args.theta == "auto":
        return "auto"
    try:
        return float(args.theta)
    except ValueError:
        raise UsageError(f"--theta must be a float or 'auto', got {args.theta!r}") from None


def _build_estimator(args):
    theta = _resolve_theta(args)
    if args.predictor == "vp":
        return VennPredictor(n_bins=args.n_bins if args.n_bins else 6,
                             rebalance=args.mode, hidden_units=args.hidden,
                             theta=theta, seed_material=args.seed)
    if args.n_bins is not None:
        raise UsageError("--lambda applies only to --predictor vp")
    return MLPBinaryClassifier(hidden_units=args.hidden, rebalance=args.mode,
                               theta=theta, seed_material=args.seed)


def _load_data(args) -> Dataset:
    if args.data:
        return load_csv(args.data, has_labels=True)
    spec = SyntheticSpec(dim=args.dim, noise_scale=args.noise_scale,
                         target_prevalence=args.prevalence, seed=args.seed)
    data, _ = generate_synthetic(spec, args.synthetic)
    return data


def _data_config(args) -> dict:
    if args.data:
        return {"data": str(Path(args.data).resolve()), "synthetic": None}
    return {"data": None, "synthetic": args.synthetic, "dim": args.dim,
            "prevalence": args.prevalence, "noise_scale": args.noise_scale}


def _cmd_gen(args) -> int:
    outdir = _outdir(args)
    spec = SyntheticSpec(dim=args.dim, noise_scale=args.noise_scale,
                         target_prevalence=args.prevalence, seed=args.seed)
    data, probs = generate_synthetic(spec, args.n)
    write_csv(outdir / "data.csv", data)
    with open(outdir / "true_probs.csv", "w", encoding="utf-8") as fh:
        fh.write("true_p\n")
        for p in probs:
            fh.write(repr(float(p)) + "\n")
    _write_manifest(outdir, "gen", {"n": args.n, "dim": args.dim,
                                    "prevalence": args.prevalence,
                                    "noise_scale": args.noise_scale, "seed": args.seed})
    print(f"wrote {data.n_examples} examples ({data.n_pos} positive) to {outdir / 'data.csv'}")
    return 0


def _cmd_featsel(args) -> int:
    outdir = _outdir(args)
    data = load_csv(args.data, has_labels=True)
    scores = score_features(data.X, data.y, criterion=args.criterion, epsilon=args.epsilon)
    (outdir / "scores.csv").write_text(scores_to_csv(scores))
    _write_manifest(outdir, "featsel", {"data": str(Path(args.data).resolve()),
                                        "criterion": args.criterion, "epsilon": args.epsilon})
    kept = sum(s.retained for s in scores)
    print(f"scored {len(scores)} features, retained {kept}; wrote {outdir / 'scores.csv'}")
    return 0


def _predictor_config(args) -> dict:
    return {"predictor": args.predictor, "mode": args.mode, "n_bins": args.n_bins,
            "theta": args.theta, "hidden": args.hidden}


def _cmd_batch(args) -> int:
    outdir = _outdir(args)
    data = _load_data(args)
    estimator = _build_estimator(args)
    plan = BatchPlan(folds=args.folds, repeats=args.repeats, seed=args.seed,
                     workers=args.workers, reliability_bins=args.bins)
    result = run_batch(data, estimator, plan)

    (outdir / "report_pooled.csv").write_text(
        MetricReport.csv_header() + "\n" + result.pooled.to_csv_row() + "\n")
    runs = [MetricReport.csv_header()] + [r.to_csv_row() for r in result.per_run]
    (outdir / "report_runs.csv").write_text("\n".join(runs) + "\n")
    config = {**_data_config(args), **_predictor_config(args),
              "folds": args.folds, "repeats": args.repeats, "bins": args.bins,
              "seed": args.seed, "workers": args.workers}
    _write_manifest(outdir, "batch", config)
    print("pooled: " + result.pooled.to_key_values())
    return 0


def _cmd_online(args) -> int:
    outdir = _outdir(args)
    data = _load_data(args)
    estimator = _build_estimator(args)
    trace = run_online(data, estimator, initial_size=args.initial)

    (outdir / "trace.csv").write_text(trace.to_csv())
    curves = [("E_n", trace.cumulative_errors, False),
              ("LEP_n", trace.cumulative_lower, True),
              ("UEP_n", trace.cumulative_upper, True)]
    if trace.ep is not None:
        curves = [("E_n", trace.cumulative_errors, False),
                  ("EP_n", trace.cumulative_ep, True)]
    (outdir / "curves.svg").write_text(
        render_curves_svg(curves, title=f"online {args.predictor} ({args.mode})"))
    config = {**_data_config(args), **_predictor_config(args),
              "initial": args.initial, "seed": args.seed}
    _write_manifest(outdir, "online", config)

    n = trace.n_steps
    E = int(trace.cumulative_errors[-1])
    if trace.ep is None:
        print(f"steps={n} errors={E} LEP_n={trace.cumulative_lower[-1]:.2f} "
              f"UEP_n={trace.cumulative_upper[-1]:.2f}")
    else:
        pval = miscalibration_pvalue(trace.ep, trace.err)
        print(f"steps={n} errors={E} EP_n={trace.cumulative_ep[-1]:.2f} "
              f"two-sided p-value={pval:.6g}")
    return 0


def _cmd_rerun(args) -> int:
    path = Path(args.manifest)
    payload = json.loads(path.read_text())
    command = payload.get("command")
    config = dict(payload.get("config", {}))
    if command not in ("gen", "featsel", "batch", "online"):
        raise UsageError(f"manifest has unknown command {command!r}")
    ns = argparse.Namespace(out=args.out, **_rerun_namespace(command, config))
    return {"gen": _cmd_gen, "featsel": _cmd_featsel,
            "batch": _cmd_batch, "online": _cmd_online}[command](ns)


def _rerun_namespace(command: str, config: dict) -> dict:
    if command == "gen":
        return {"n": config["n"], "dim": config["dim"], "prevalence": config["prevalence"],
                "noise_scale": config["noise_scale"], "seed": config["seed"]}
    if command == "featsel":
        return {"data": config["data"], "criterion": config["criterion"],
                "epsilon": config["epsilon"]}
    common = {"data": config.get("data"), "synthetic": config.get("synthetic"),
              "dim": config.get("dim", 34), "prevalence": config.get("prevalence", 0.1852),
              "noise_scale": config.get("noise_scale", 0.0),
              "predictor": config["predictor"], "mode": config["mode"],
              "n_bins": config["n_bins"], "theta": config["theta"],
              "hidden": config["hidden"], "seed": config["seed"]}
    if command == "batch":
        common.update(folds=config["folds"], repeats=config["repeats"],
                      bins=config["bins"], workers=config["workers"])
    else:
        common.update(initial=config["initial"])
    return common


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        handler = {"gen": _cmd_gen, "featsel": _cmd_featsel, "batch": _cmd_batch,
                   "online": _cmd_online, "rerun": _cmd_rerun}[args.command]
        return handler(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help / --version
        return int(exc.code or 0)
    except (CsvFormatError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except ValueError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
