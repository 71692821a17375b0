"""Command-line front end.

Subcommands: generate, detect, tune, bench, plot-data. Exit status 0 on
success, 1 on analysis errors (e.g. degenerate labels), 2 on usage,
schema or I/O errors. The IMDET_SEED environment variable overrides any
--seed flag.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import bench as bench_mod
from . import dataio
from .detector import DetectorParams, detect_matrix
from .linkmodel import DatasetSpec, synth_dataset
from .tuner import (
    DEFAULT_EPS_LINEAR_GRID,
    DEFAULT_EPS_SLOPE_GRID,
    DegenerateLabelsError,
    confusion,
    roc_grid,
)

PROG = "imdet"


def _effective_seed(args) -> int:
    env = os.environ.get("IMDET_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise dataio.SchemaError(f"IMDET_SEED must be an integer, got '{env}'")
    return args.seed


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text}")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text}")


def cmd_generate(args) -> int:
    seed = _effective_seed(args)
    if args.config is not None:
        spec = dataio.load_generator_config(args.config)
    else:
        spec = DatasetSpec()
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    matrix = synth_dataset(spec, seed)
    paths = dataio.write_dataset(out_dir, matrix, spec, seed)
    n_pos = sum(1 for r in matrix.records if r.label_im_present)
    print(
        f"wrote {len(matrix.records)} records "
        f"({n_pos} positive, {len(matrix.records) - n_pos} negative) to {out_dir}"
    )
    for name, p in paths.items():
        print(f"  {name}: {p}")
    return 0


def _resolve_params(args) -> DetectorParams:
    has_flags = args.eps_linear is not None or args.eps_slope is not None
    if args.report is not None and has_flags:
        raise dataio.SchemaError("give either --report or --eps-linear/--eps-slope")
    if args.report is not None:
        params = dataio.read_best_params(args.report)
    elif args.eps_linear is not None and args.eps_slope is not None:
        params = DetectorParams(eps_linear=args.eps_linear, eps_slope=args.eps_slope)
    else:
        raise dataio.SchemaError(
            "thresholds required: --eps-linear and --eps-slope, or --report"
        )
    if args.prefilter_rtp is not None:
        params = DetectorParams(
            eps_linear=params.eps_linear,
            eps_slope=params.eps_slope,
            rtp_prefilter_dbm=args.prefilter_rtp,
        )
    return params


def cmd_detect(args) -> int:
    params = _resolve_params(args)
    matrix, diagnostics = dataio.load_matrix(args.data)
    for diag in diagnostics:
        print(f"warning: {diag}", file=sys.stderr)
    results = detect_matrix(matrix, params)

    out_csv = Path(args.out)
    out_jsonl = out_csv.with_suffix(".jsonl")
    dataio.write_results_csv(out_csv, matrix.records, results)
    dataio.write_results_jsonl(out_jsonl, matrix.records, results)

    n_det = sum(1 for r in results if r.detected)
    print(f"{n_det} detected / {len(results)}")
    if args.labels is not None:
        label_map = dataio.read_labels_csv(args.labels)
        labels = dataio.labels_for_records(matrix.records, label_map)
        cm = confusion(results, labels)
        print(f"confusion: tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}")
    print(f"results: {out_csv} and {out_jsonl}")
    return 0


def cmd_tune(args) -> int:
    matrix, diagnostics = dataio.load_matrix(args.data)
    for diag in diagnostics:
        print(f"warning: {diag}", file=sys.stderr)
    label_map = dataio.read_labels_csv(args.labels)
    labels = dataio.labels_for_records(matrix.records, label_map)
    report = roc_grid(
        matrix,
        labels,
        eps_linear_grid=tuple(args.grid_linear),
        eps_slope_grid=tuple(args.grid_slope),
    )
    out_json = Path(args.out)
    roc_csv = (
        Path(args.roc_out)
        if args.roc_out is not None
        else out_json.with_name(out_json.stem + "_roc.csv")
    )
    dataio.write_tuning_report(out_json, report)
    dataio.write_roc_csv(roc_csv, report)

    best = report.best_params
    best_auc = report.auc_per_eps_linear[best.eps_linear]
    cm = report.confusion_at_best
    print(
        f"best eps_linear={best.eps_linear:g} eps_slope={best.eps_slope:g} "
        f"AUC={best_auc:g}"
    )
    print(f"confusion at best: tp={cm.tp} fp={cm.fp} tn={cm.tn} fn={cm.fn}")
    print(f"report: {out_json}; roc points: {roc_csv}")
    return 0


def cmd_bench(args) -> int:
    result = bench_mod.run_bench(args.prbs, args.reps, seed=_effective_seed(args))
    out = Path(args.out)
    with open(out, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(dataio.BENCH_COLUMNS) + "\n")
        for n, mean, base, norm in zip(
            result.n_prb_values,
            result.mean_runtime_ns,
            result.baseline_ns,
            result.normalized_runtime,
        ):
            fh.write(f"{n},{mean:.1f},{base:.1f},{norm:.6f}\n")
    print("n_prb  mean_ns  baseline_ns  normalized")
    for n, mean, base, norm in zip(
        result.n_prb_values,
        result.mean_runtime_ns,
        result.baseline_ns,
        result.normalized_runtime,
    ):
        print(f"{n:5d}  {mean:8.1f}  {base:8.1f}  {norm:8.3f}")
    print(
        f"linear fit: {result.fit_slope_ns_per_prb:.2f} ns/PRB, "
        f"R^2={result.fit_r2:.4f}"
    )
    print(f"table: {out}")
    return 0


def _maybe_render(args, render, *render_args) -> None:
    if args.no_figure:
        return
    png = Path(args.out).with_suffix(".png")
    render(*render_args, png)
    print(f"figure: {png}")


def cmd_plotdata(args) -> int:
    from . import plots

    out = Path(args.out)
    if args.kind == "rip_prb":
        if args.data is None or args.labels is None:
            raise dataio.SchemaError("rip_prb needs --data and --labels")
        matrix, _ = dataio.load_matrix(args.data)
        label_map = dataio.read_labels_csv(args.labels)
        labels = dataio.labels_for_records(matrix.records, label_map)
        pos = next((r for r, l in zip(matrix.records, labels) if l), None)
        neg = next((r for r, l in zip(matrix.records, labels) if not l), None)
        if pos is None or neg is None:
            raise dataio.SchemaError("need one positive and one negative record")
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write("prb_index,rip_dbm_positive,rip_dbm_negative\n")
            for u, (p, n) in enumerate(zip(pos.rip_dbm, neg.rip_dbm)):
                fh.write(f"{u},{p:.6f},{n:.6f}\n")
        _maybe_render(
            args, plots.render_rip_prb, range(len(pos.rip_dbm)), pos.rip_dbm, neg.rip_dbm
        )
    elif args.kind == "roc":
        if args.report is None:
            raise dataio.SchemaError("roc needs --report")
        with open(args.report, encoding="utf-8") as fh:
            doc = json.load(fh)
        rows = []
        try:
            for curve in doc["curves"]:
                for p in curve["points"]:
                    rows.append(
                        {
                            "eps_linear": curve["eps_linear"],
                            "eps_slope": p["eps_slope"],
                            "fpr": p["fpr"],
                            "tpr": p["tpr"],
                        }
                    )
        except (KeyError, TypeError) as exc:
            raise dataio.SchemaError(f"report: missing curve data ({exc})")
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(",".join(dataio.ROC_COLUMNS) + "\n")
            for r in rows:
                es = "" if r["eps_slope"] is None else str(r["eps_slope"])
                fh.write(f"{r['eps_linear']:.6f},{es},{r['fpr']:.6f},{r['tpr']:.6f}\n")
        _maybe_render(args, plots.render_roc, rows)
    elif args.kind == "confusion":
        if args.report is None:
            raise dataio.SchemaError("confusion needs --report")
        with open(args.report, encoding="utf-8") as fh:
            doc = json.load(fh)
        try:
            cm = doc["confusion_at_best"]
            tp, fp, tn, fn = cm["tp"], cm["fp"], cm["tn"], cm["fn"]
        except (KeyError, TypeError) as exc:
            raise dataio.SchemaError(f"report: missing confusion_at_best ({exc})")
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write("actual,predicted,count\n")
            fh.write(f"positive,positive,{tp}\n")
            fh.write(f"positive,negative,{fn}\n")
            fh.write(f"negative,positive,{fp}\n")
            fh.write(f"negative,negative,{tn}\n")
        _maybe_render(args, plots.render_confusion, tp, fp, tn, fn)
    elif args.kind == "runtime":
        if args.bench is None:
            raise dataio.SchemaError("runtime needs --bench")
        with open(args.bench, encoding="utf-8") as fh:
            lines = fh.read()
        header = lines.splitlines()[0] if lines else ""
        if header != ",".join(dataio.BENCH_COLUMNS):
            raise dataio.SchemaError(
                f"bench header must be {','.join(dataio.BENCH_COLUMNS)}"
            )
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(lines)
        rows = [line.split(",") for line in lines.splitlines()[1:] if line]
        _maybe_render(
            args,
            plots.render_runtime,
            [int(r[0]) for r in rows],
            [float(r[3]) for r in rows],
        )
    print(f"series: {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description=(
            "Synthesize labeled per-PRB interference measurements, detect "
            "intermodulation interference by linear regression, tune the "
            "detection thresholds, and benchmark runtime scaling."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a labeled synthetic dataset")
    p.add_argument("--config", default=None, help="generator config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("detect", help="run the detector over a measurements CSV")
    p.add_argument("--data", required=True, help="measurements CSV")
    p.add_argument("--eps-linear", type=float, default=None)
    p.add_argument("--eps-slope", type=float, default=None)
    p.add_argument("--report", default=None, help="tuning report JSON with best params")
    p.add_argument("--labels", default=None, help="labels CSV (prints confusion)")
    p.add_argument("--prefilter-rtp", type=float, default=None, help="mean-RTP gate (dBm)")
    p.add_argument("--out", required=True, help="results CSV path (+ .jsonl twin)")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("tune", help="grid-search thresholds on a labeled dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--grid-linear", type=_float_list, default=list(DEFAULT_EPS_LINEAR_GRID))
    p.add_argument("--grid-slope", type=_float_list, default=list(DEFAULT_EPS_SLOPE_GRID))
    p.add_argument("--out", required=True, help="tuning report JSON")
    p.add_argument("--roc-out", default=None, help="ROC CSV (default: <out>_roc.csv)")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("bench", help="measure detector runtime vs PRB count")
    p.add_argument("--prbs", type=_int_list, default=[25, 50, 100, 200, 400])
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="bench table CSV")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("plot-data", help="export plot series (CSV + PNG)")
    p.add_argument("--kind", required=True, choices=["rip_prb", "roc", "confusion", "runtime"])
    p.add_argument("--data", default=None, help="measurements CSV (rip_prb)")
    p.add_argument("--labels", default=None, help="labels CSV (rip_prb)")
    p.add_argument("--report", default=None, help="tuning report JSON (roc, confusion)")
    p.add_argument("--bench", default=None, help="bench CSV (runtime)")
    p.add_argument("--out", required=True, help="series CSV path")
    p.add_argument("--no-figure", action="store_true", help="skip PNG rendering")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateLabelsError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    except (dataio.SchemaError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 2


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()
