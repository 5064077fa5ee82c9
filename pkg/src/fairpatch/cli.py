"""Batch command-line interface.

Subcommands: simulate, train, evaluate, sweep. Every command writes its
artifacts atomically, records a run manifest next to the primary output,
and is byte-reproducible given identical inputs and seed. Exit codes:
0 success, 2 usage/validation problem, 1 runtime failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time

from . import __version__
from .boosting import TrainConfig, importance_to_dict, model_from_dict, model_to_dict, train
from .data import (
    IngestConfig,
    SimulationConfig,
    load_csv,
    simulate,
    write_dataset_csv,
    write_group_sidecar,
)
from .errors import ConfigError, DataError, FairpatchError, SchemaError
from .metrics import (
    alpha_sweep,
    default_workers,
    evaluate,
    summarize_sweep,
    sweep_long_format_csv,
    sweep_records_to_csv,
)
from .sampling import write_prob_trace
from .util import atomic_write_text, read_json, write_json

USAGE_EXIT = 2
RUNTIME_EXIT = 1


def _log(args, message: str) -> None:
    if not args.quiet:
        print(message, file=sys.stderr)


def _digest(doc: dict) -> str:
    canonical = json.dumps(doc, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _stem(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root


def _write_manifest(command: str, config_doc: dict, seed, outputs: list[str]) -> str:
    path = _stem(outputs[0]) + ".manifest.json"
    write_json(path, {
        "schema_version": 1,
        "kind": "fairpatch-manifest",
        "command": command,
        "config_digest": _digest(config_doc),
        "seed": seed,
        "output_paths": [os.path.abspath(p) for p in outputs],
        "timestamps": {"completed_unix_ns": time.time_ns()},
        "version": __version__,
    })
    return path


def _load_config_doc(path: str) -> dict:
    try:
        doc = read_json(path)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return doc


def _split_train_config(doc: dict, args) -> tuple[TrainConfig, IngestConfig, dict]:
    doc = dict(doc)
    ingest_doc = doc.pop("ingest", None)
    ingest = IngestConfig.from_dict(ingest_doc) if ingest_doc else IngestConfig()
    if getattr(args, "alpha", None) is not None:
        doc["alpha"] = args.alpha
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    config = TrainConfig.from_dict(doc)
    resolved = dict(config.to_dict(), ingest=ingest.to_dict())
    return config, ingest, resolved


def cmd_simulate(args) -> int:
    doc = _load_config_doc(args.config)
    if args.seed is not None:
        doc["seed"] = args.seed
    config = SimulationConfig.from_dict(doc)
    data = simulate(config)
    tmp = args.out + ".tmp~"
    write_dataset_csv(data, tmp)
    os.replace(tmp, args.out)
    groups_path = _stem(args.out) + ".groups.json"
    write_group_sidecar(config, groups_path)
    manifest = _write_manifest("simulate", config.to_dict(), config.seed,
                               [args.out, groups_path])
    _log(args, f"simulated {data.n_samples} x {data.n_features} -> {args.out}")
    _log(args, f"manifest: {manifest}")
    return 0


def _trace_csv(result) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["iteration", "oop", "cols", "rows"])
    for t, (patch, oop) in enumerate(zip(result.patch_trace, result.oop.oop_trace), start=1):
        writer.writerow([
            t,
            repr(float(oop)),
            ";".join(str(int(c)) for c in patch.cols),
            ";".join(str(int(r)) for r in patch.rows),
        ])
    return buf.getvalue()


def cmd_train(args) -> int:
    doc = _load_config_doc(args.config)
    config, ingest, resolved = _split_train_config(doc, args)
    data = load_csv(args.data, ingest)
    result = train(data, config, record_probability_trace=bool(args.prob_trace))

    model_doc = model_to_dict(result.ensemble, config, data.feature_names, extra={
        "ingest": ingest.to_dict(),
        "n_train": data.n_samples,
        "best_iteration": result.oop.best_iteration,
        "best_oop": result.oop.best_oop,
        "iterations_run": len(result.oop.oop_trace),
        "warnings": result.warnings,
    })
    write_json(args.out, model_doc)

    trace_path = args.trace or _stem(args.out) + ".trace.csv"
    atomic_write_text(trace_path, _trace_csv(result))

    importance_path = args.importance or _stem(args.out) + ".importance.json"
    write_json(importance_path, importance_to_dict(
        result.importance, data.feature_names, config.burn_in,
        len(result.oop.oop_trace)))

    outputs = [args.out, trace_path, importance_path]
    if args.prob_trace:
        tmp = args.prob_trace + ".tmp~"
        write_prob_trace(tmp, result.prob_trace)
        os.replace(tmp, args.prob_trace)
        outputs.append(args.prob_trace)
    manifest = _write_manifest("train", resolved, config.seed, outputs)
    for message in result.warnings:
        _log(args, f"warning: {message}")
    _log(args, f"trained {len(result.ensemble.trees)} trees "
               f"(best oop {result.oop.best_oop:.4f} at iteration {result.oop.best_iteration})")
    _log(args, f"manifest: {manifest}")
    return 0


def cmd_evaluate(args) -> int:
    model_doc = read_json(args.model)
    ensemble, config, feature_names = model_from_dict(model_doc)
    ingest = IngestConfig.from_dict(model_doc.get("ingest", {}))
    data = load_csv(args.data, ingest)
    if list(data.feature_names) != list(feature_names):
        for got, expected in zip(data.feature_names, feature_names):
            if got != expected:
                raise SchemaError(
                    f"feature mismatch: data has {got!r} where model expects {expected!r}")
        raise SchemaError(
            f"feature count mismatch: data has {data.n_features}, "
            f"model expects {len(feature_names)}")
    report = evaluate(ensemble, data)
    write_json(args.out, report.to_dict())
    _write_manifest("evaluate", {"model": os.path.abspath(args.model)}, config.seed, [args.out])
    _log(args, f"accuracy {report.accuracy:.4f}, fairness {report.fairness_score:.4f} -> {args.out}")
    return 0


def cmd_sweep(args) -> int:
    doc = _load_config_doc(args.config)
    config, ingest, resolved = _split_train_config(doc, args)
    try:
        grid = [float(v) for v in args.grid.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"bad --grid value: {exc}") from exc
    data = load_csv(args.data, ingest)
    records = alpha_sweep(data, grid, config, args.splits,
                          test_fraction=args.test_fraction, workers=default_workers())

    summary = summarize_sweep(records)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["alpha", "mean_accuracy", "sd_accuracy", "mean_fairness", "sd_fairness"])
    for row in summary:
        writer.writerow([row["alpha"], repr(row["mean_accuracy"]), repr(row["sd_accuracy"]),
                         repr(row["mean_fairness"]), repr(row["sd_fairness"])])
    atomic_write_text(args.out, buf.getvalue())

    cells_path = args.cells or _stem(args.out) + ".cells.csv"
    atomic_write_text(cells_path, sweep_records_to_csv(records))
    long_path = args.long or _stem(args.out) + ".long.csv"
    atomic_write_text(long_path, sweep_long_format_csv(records))

    resolved = dict(resolved, grid=grid, splits=args.splits, test_fraction=args.test_fraction)
    manifest = _write_manifest("sweep", resolved, config.seed, [args.out, cells_path, long_path])
    for row in summary:
        _log(args, f"alpha={row['alpha']}: accuracy {row['mean_accuracy']:.4f} "
                   f"(sd {row['sd_accuracy']:.4f}), fairness {row['mean_fairness']:.4f} "
                   f"(sd {row['sd_fairness']:.4f})")
    _log(args, f"manifest: {manifest}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fairpatch",
        description="Fairness-aware minipatch boosting: simulate, train, evaluate, sweep.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="generate a synthetic dataset CSV")
    sim.add_argument("--config", required=True, help="SimulationConfig JSON")
    sim.add_argument("--out", required=True, help="output dataset CSV path")
    sim.add_argument("--seed", type=int, default=None, help="override the config seed")
    sim.add_argument("--quiet", action="store_true")
    sim.set_defaults(func=cmd_simulate)

    tr = sub.add_parser("train", help="train a model on a dataset CSV")
    tr.add_argument("--data", required=True, help="input dataset CSV")
    tr.add_argument("--config", required=True, help="TrainConfig JSON (optionally with 'ingest')")
    tr.add_argument("--out", required=True, help="output model JSON path")
    tr.add_argument("--trace", default=None, help="per-iteration trace CSV (default: <out>.trace.csv)")
    tr.add_argument("--importance", default=None,
                    help="importance report JSON (default: <out>.importance.json)")
    tr.add_argument("--prob-trace", default=None,
                    help="optional long-format p/q trajectory CSV")
    tr.add_argument("--alpha", type=float, default=None, help="override the config alpha")
    tr.add_argument("--seed", type=int, default=None, help="override the config seed")
    tr.add_argument("--quiet", action="store_true")
    tr.set_defaults(func=cmd_train)

    ev = sub.add_parser("evaluate", help="evaluate a model JSON on a dataset CSV")
    ev.add_argument("--model", required=True)
    ev.add_argument("--data", required=True)
    ev.add_argument("--out", required=True, help="output report JSON path")
    ev.add_argument("--quiet", action="store_true")
    ev.set_defaults(func=cmd_evaluate)

    sw = sub.add_parser("sweep", help="alpha-grid accuracy/fairness frontier")
    sw.add_argument("--data", required=True)
    sw.add_argument("--config", required=True, help="base TrainConfig JSON")
    sw.add_argument("--grid", required=True, help="comma-separated alpha values")
    sw.add_argument("--splits", type=int, default=10)
    sw.add_argument("--test-fraction", type=float, default=0.2)
    sw.add_argument("--out", required=True, help="summary frontier CSV path")
    sw.add_argument("--cells", default=None, help="per-cell CSV (default: <out>.cells.csv)")
    sw.add_argument("--long", default=None, help="long-format CSV (default: <out>.long.csv)")
    sw.add_argument("--alpha", type=float, default=None, help=argparse.SUPPRESS)
    sw.add_argument("--seed", type=int, default=None, help="override the config seed")
    sw.add_argument("--quiet", action="store_true")
    sw.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, SchemaError, DataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename or exc}", file=sys.stderr)
        return USAGE_EXIT
    except (KeyError, json.JSONDecodeError) as exc:
        print(f"error: malformed input document ({exc})", file=sys.stderr)
        return USAGE_EXIT
    except FairpatchError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return RUNTIME_EXIT
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_EXIT


if __name__ == "__main__":
    sys.exit(main())
