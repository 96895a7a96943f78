"""Command-line surface: prepare datasets, train, evaluate, compare, emit plot data.

Exit codes: 0 success, 2 configuration error, 3 input/data error, 4 numerical
divergence, 1 anything else. Every command is deterministic given identical
inputs, so reruns produce byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import data as data_mod
from .data import DatasetSchema, SubsetSpec, load_delimited, make_subset, numeric_label_schema
from .errors import ConfigError, DivergenceError, InputError, UnsupportedDimensionError
from .hsdm import HsdmConfig, benchmark_config, solve_rhc
from .model import ClassifierParams, TrainingDataset, evaluate, label_pairs
from .ncr import NcrConfig, solve_ncr
from .report import SolverReport

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_NUMERICAL = 4


def _load_run_config(path: str | None) -> dict:
    if path is None:
        return {}
    payload = json.loads(Path(path).read_text())
    if payload.get("schema_version") != 1:
        raise ConfigError(f"{path}: unsupported run-config schema version "
                          f"{payload.get('schema_version')!r}")
    return payload


def _load_dataset(args, cfg: dict) -> TrainingDataset:
    data_path = args.data or cfg.get("dataset", {}).get("path")
    spec_path = getattr(args, "spec", None) or cfg.get("dataset", {}).get("subset_spec")
    if data_path in (None, "builtin:iris"):
        ds = data_mod.load_builtin_iris()
    else:
        schema_cfg = cfg.get("dataset", {}).get("schema")
        if schema_cfg:
            schema = DatasetSchema(
                feature_columns=tuple(schema_cfg["feature_columns"]),
                label_column=schema_cfg["label_column"],
                label_map=schema_cfg.get("label_map"),
                delimiter=schema_cfg.get("delimiter"),
                has_header=schema_cfg.get("has_header", True),
            )
        else:
            schema = _sniff_schema(data_path)
        ds = load_delimited(data_path, schema)
    if spec_path:
        if spec_path in ("builtin:sep", "builtin:nsep"):
            spec = data_mod.builtin_subset_spec(spec_path.split(":")[1])
        else:
            spec = SubsetSpec.from_json(spec_path)
        ds = make_subset(ds, spec, validate=not getattr(args, "skip_validation", False))
    return ds


def _sniff_schema(path: str) -> DatasetSchema:
    """Default schema: all-but-last columns are features, last column is the label.

    String labels are only supported through an explicit schema in --config;
    the iris table is recognized by its header.
    """
    header = Path(path).read_text().splitlines()[0] if Path(path).exists() else ""
    if header.startswith("sepal_length"):
        return data_mod.IRIS_SCHEMA
    cols = header.split(",") if "," in header else header.split()
    return numeric_label_schema(len(cols) - 1)


def _write_model(params: ClassifierParams, path: Path, extra: dict | None = None) -> None:
    payload = {
        "schema_version": 1,
        "w": [[float(v) for v in row] for row in params.w],
        "b": [float(v) for v in params.b],
    }
    if extra:
        payload.update(extra)
    path.write_text(json.dumps(payload, indent=2) + "\n")


def _read_model(path: str | Path) -> ClassifierParams:
    p = Path(path)
    if not p.exists():
        raise InputError(f"model file {p} does not exist")
    payload = json.loads(p.read_text())
    if payload.get("schema_version") != 1:
        raise InputError(f"{p}: unsupported model schema version {payload.get('schema_version')!r}")
    return ClassifierParams(w=np.array(payload["w"], dtype=float),
                            b=np.array(payload["b"], dtype=float))


def _hsdm_config(args, cfg: dict) -> HsdmConfig:
    block = dict(cfg.get("rhc", {}))
    if getattr(args, "rho1", None) is not None:
        block["rho1"] = args.rho1
    if getattr(args, "max_iters", None) is not None:
        block["max_iterations"] = args.max_iters
    if getattr(args, "tol", None) is not None:
        block["tolerance"] = args.tol
    # operator surface defaults to the adaptive schedule; a config block can
    # still select the harmonic family explicitly
    return benchmark_config(**block)


def _ncr_config(args, cfg: dict) -> NcrConfig:
    block = dict(cfg.get("ncr", {}))
    if getattr(args, "c_value", None) is not None:
        block["c_value"] = args.c_value
    if getattr(args, "max_iters", None) is not None:
        block["max_iterations"] = args.max_iters
    if getattr(args, "tol", None) is not None:
        block["tolerance"] = args.tol
    return NcrConfig(**block)


def cmd_prepare_data(args) -> int:
    cfg = _load_run_config(args.config)
    ds = _load_dataset(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    target = out / f"{args.name}.csv"
    data_mod.write_dataset_csv(ds, target)
    hist = ds.label_histogram()
    print(f"wrote {target} ({ds.n_samples} rows, {ds.n_features} features)")
    print("label histogram: " + ", ".join(f"{k}: {v}" for k, v in hist.items()))
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = _load_run_config(args.config)
    ds = _load_dataset(args, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.solver == "rhc":
        params, report = solve_rhc(ds, _hsdm_config(args, cfg))
    elif args.solver == "ncr":
        params, report = solve_ncr(ds, _ncr_config(args, cfg))
    else:
        raise ConfigError(f"unknown solver {args.solver!r}; choose rhc or ncr")
    _write_model(params, out / "model.json", extra={"solver": args.solver})
    (out / "report.json").write_text(report.to_json() + "\n")
    report.write_history_csv(out / "history.csv")
    ev = report.evaluation
    print(f"{args.solver}: hinge={ev.hinge_loss:.6g} risk={ev.risk_count} "
          f"smallest_margin={ev.smallest_pairwise_margin:.6g} "
          f"(pair {ev.smallest_margin_pair}) iters={report.iterations} "
          f"residual={report.final_residual:.3g}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    cfg = _load_run_config(args.config)
    ds = _load_dataset(args, cfg)
    params = _read_model(args.model)
    report = evaluate(params, ds)
    text = report.to_json()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "evaluation.json").write_text(text + "\n")
        print(f"wrote {out / 'evaluation.json'}")
    else:
        print(text)
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load_run_config(args.config)
    ds = _load_dataset(args, cfg)
    rows = []
    for name, model_path in (("a", args.model_a), ("b", args.model_b)):
        params = _read_model(model_path)
        rep = evaluate(params, ds)
        rows.append({
            "model": name,
            "path": str(model_path),
            "hinge_loss": rep.hinge_loss,
            "risk_count": rep.risk_count,
            "margins": {f"{r},{s}": m for (r, s), m in rep.pairwise_margins.items()},
            "smallest_pairwise_margin": rep.smallest_pairwise_margin,
            "smallest_margin_pair": list(rep.smallest_margin_pair),
            "worst_pair_objective": rep.worst_pair_objective,
        })
    table = {"schema_version": 1, "models": rows}
    header = f"{'':14s}{'hinge':>12s}{'risk':>6s}{'min margin':>12s}{'pair':>8s}{'Psi':>10s}"
    print(header)
    for row in rows:
        pair = ",".join(str(v) for v in row["smallest_margin_pair"])
        print(f"{row['model']:14s}{row['hinge_loss']:12.4g}{row['risk_count']:6d}"
              f"{row['smallest_pairwise_margin']:12.4g}{pair:>8s}"
              f"{row['worst_pair_objective']:10.4g}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.json").write_text(json.dumps(table, indent=2) + "\n")
        print(f"wrote {out / 'comparison.json'}")
    return EXIT_OK


def cmd_emit_boundaries(args) -> int:
    cfg = _load_run_config(args.config)
    ds = _load_dataset(args, cfg)
    params = _read_model(args.model)
    if ds.n_features != 2 or params.n_features != 2:
        raise UnsupportedDimensionError(
            f"boundary emission is 2-D only, got {ds.n_features} features")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    lines = ["r,s,level,omega_1,omega_2,beta"]
    for (r, s) in label_pairs(ds.n_classes):
        omega, beta = params.pair_difference(r, s)
        for level in (-1, 0, 1):
            lines.append(f"{r},{s},{level},{omega[0]!r},{omega[1]!r},{beta!r}")
    (out / "boundaries.csv").write_text("\n".join(lines) + "\n")
    sample_lines = ["x1,x2,label"]
    for i in range(ds.n_samples):
        sample_lines.append(f"{ds.x[i, 0]!r},{ds.x[i, 1]!r},{int(ds.y[i])}")
    (out / "samples.csv").write_text("\n".join(sample_lines) + "\n")
    print(f"wrote {out / 'boundaries.csv'} and {out / 'samples.csv'}")
    return EXIT_OK


def cmd_reproduce_paper(args) -> int:
    """Full benchmark pipeline on the committed iris subsets."""
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    iris = data_mod.load_builtin_iris()
    summary: dict = {"schema_version": 1, "datasets": {}}
    sweeps = [2**8, 2**9, 2**10]
    for subset_name in ("sep", "nsep"):
        spec = data_mod.builtin_subset_spec(subset_name)
        ds = make_subset(iris, spec, validate=not args.skip_validation)
        sub_out = out / subset_name
        sub_out.mkdir(exist_ok=True)
        data_mod.write_dataset_csv(ds, sub_out / "dataset.csv")

        rhc_cfg = HsdmConfig(**({"max_iterations": args.max_iters}
                                if args.max_iters else {}))
        rhc_params, rhc_report = solve_rhc(ds, rhc_cfg)
        _write_model(rhc_params, sub_out / "model_rhc.json", extra={"solver": "rhc"})
        (sub_out / "report_rhc.json").write_text(rhc_report.to_json() + "\n")
        rhc_report.write_history_csv(sub_out / "history_rhc.csv")

        ncr_runs = {}
        for c in (sweeps if subset_name == "sep" else [2**10]):
            ncr_cfg = NcrConfig(c_value=float(c), **({"max_iterations": args.max_iters}
                                                     if args.max_iters else {}))
            ncr_params, ncr_report = solve_ncr(ds, ncr_cfg)
            tag = f"ncr_c{c}"
            _write_model(ncr_params, sub_out / f"model_{tag}.json",
                         extra={"solver": "ncr", "c_value": c})
            (sub_out / f"report_{tag}.json").write_text(ncr_report.to_json() + "\n")
            ncr_runs[str(c)] = {
                "risk_count": ncr_report.risk_count,
                "hinge_loss": ncr_report.hinge_loss,
                "smallest_pairwise_margin": ncr_report.evaluation.smallest_pairwise_margin,
                "smallest_margin_pair": list(ncr_report.evaluation.smallest_margin_pair),
            }
            if c == 2**10:
                for kind, params in (("rhc", rhc_params), (tag, ncr_params)):
                    bd_args = argparse.Namespace(
                        config=None, data=str(sub_out / "dataset.csv"), spec=None,
                        model=str(sub_out / f"model_{kind}.json" if kind != "rhc"
                                  else sub_out / "model_rhc.json"),
                        out=str(sub_out / f"boundaries_{kind.split('_')[0]}"),
                        skip_validation=True)
                    cmd_emit_boundaries(bd_args)

        summary["datasets"][subset_name] = {
            "rhc": {
                "risk_count": rhc_report.risk_count,
                "hinge_loss": rhc_report.hinge_loss,
                "smallest_pairwise_margin": rhc_report.evaluation.smallest_pairwise_margin,
                "smallest_margin_pair": list(rhc_report.evaluation.smallest_margin_pair),
            },
            "ncr": ncr_runs,
        }
        rhc_m = rhc_report.evaluation.smallest_pairwise_margin
        print(f"[{subset_name}] rhc: risk={rhc_report.risk_count} "
              f"hinge={rhc_report.hinge_loss:.3g} margin={rhc_m:.4f}")
        for c, r in ncr_runs.items():
            print(f"[{subset_name}] ncr C={c}: risk={r['risk_count']} "
                  f"margin={r['smallest_pairwise_margin']:.4f}")
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"wrote {out / 'summary.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hiersvm",
        description="Train and inspect hierarchical max-margin multiclass linear SVMs.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_spec=True):
        p.add_argument("--config", help="run-config JSON (schema_version 1)")
        p.add_argument("--data", help="delimited dataset path or 'builtin:iris'")
        if with_spec:
            p.add_argument("--spec", help="subset spec JSON path, 'builtin:sep' or 'builtin:nsep'")
        p.add_argument("--skip-validation", action="store_true",
                       help="skip the subset separability certification")

    p = sub.add_parser("prepare-data", help="materialize a (subset) dataset as CSV")
    add_common(p)
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="dataset")
    p.set_defaults(func=cmd_prepare_data)

    p = sub.add_parser("train", help="train one solver and write model/report/history")
    add_common(p)
    p.add_argument("--solver", required=True, choices=["rhc", "ncr"])
    p.add_argument("--out", required=True)
    p.add_argument("--rho1", type=float, help="ball radius for the classifier block (rhc)")
    p.add_argument("--c-value", type=float, help="hinge weight C (ncr)")
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=float)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="evaluate a trained model on a dataset")
    add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="side-by-side metrics of two trained models")
    add_common(p)
    p.add_argument("--model-a", required=True)
    p.add_argument("--model-b", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("emit-boundaries", help="write decision/margin line data (2-D only)")
    add_common(p)
    p.add_argument("--model", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_emit_boundaries)

    p = sub.add_parser("reproduce-paper", help="run the full benchmark pipeline")
    p.add_argument("--out", required=True)
    p.add_argument("--max-iters", type=int, help="override both solvers' iteration budget")
    p.add_argument("--skip-validation", action="store_true")
    p.add_argument("--config", help=argparse.SUPPRESS)
    p.set_defaults(func=cmd_reproduce_paper)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, OSError, json.JSONDecodeError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except DivergenceError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    raise SystemExit(main())
