"""Command-line front end: ``toposeries {params,filter,features,classify,export}``.

Exit status is 0 on success, 1 when some series failed (the manifest is
still written) and 2 on fatal errors such as bad configuration or an
unreadable input.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from typing import Sequence

from . import pipeline as pl
from .persistence.diagram import PersistenceDiagram
from .represent import curve_to_text

log = logging.getLogger("toposeries")

EXIT_OK, EXIT_PARTIAL, EXIT_FATAL = 0, 1, 2


class FatalError(Exception):
    pass


def _config(args) -> pl.PipelineConfig:
    cfg = pl.PipelineConfig.load(args.config) if args.config else pl.PipelineConfig()
    over = {"seed": args.seed}
    for key in ("window_len", "tau", "m", "max_scale", "entropy_threshold", "entropy_dims", "curve_resolution"):
        over[key] = getattr(args, key, None)
    return cfg.override(**over)


def _auto_int(text: str):
    return text if text == pl.AUTO else int(text)


def _scale(text: str):
    return text if text == "enclosing" else float(text)


def _emit(text: str, output: str | None) -> None:
    if output:
        parent = os.path.dirname(os.path.abspath(output))
        if not os.path.isdir(parent):
            raise FatalError(f"output directory {parent!r} does not exist")
        pl.write_text(output, text)
    else:
        sys.stdout.write(text)


def _load_all(paths: Sequence[str], workers: int):
    loaded = pl.run_batch(pl.load_one, paths, workers=workers)
    series, failures = [], []
    for path, (ok, res) in zip(paths, loaded):
        if ok:
            series.append(res)
        else:
            failures.append({"id": os.path.splitext(os.path.basename(path))[0], "error": res})
    return series, failures


def _inputs(args) -> list[str]:
    if not args.input:
        raise FatalError("--input is required")
    try:
        paths = pl.list_inputs(args.input)
    except FileNotFoundError as exc:
        raise FatalError(str(exc)) from None
    if not paths:
        raise FatalError(f"no series files under {args.input!r}")
    return paths


def cmd_params(args, cfg: pl.PipelineConfig) -> int:
    series, failures = _load_all(_inputs(args), args.workers)
    results = pl.run_batch(pl.series_params, series, cfg, workers=args.workers)
    rows = []
    for ts, (ok, res) in zip(series, results):
        if ok:
            rows.append(res)
        else:
            failures.append({"id": ts.id, "error": res})
    _emit(pl.canonical_json({"config": cfg.to_dict(), "series": rows, "failures": failures}), args.output)
    return EXIT_PARTIAL if failures else EXIT_OK


def _entropy_job(ts, cfg: pl.PipelineConfig) -> float:
    wd = pl.window_diagrams(pl.take_window(ts, cfg), cfg)
    return pl.window_entropy(wd, cfg.entropy_dims)


def cmd_filter(args, cfg: pl.PipelineConfig) -> int:
    series, failures = _load_all(_inputs(args), args.workers)
    results = pl.run_batch(_entropy_job, series, cfg, workers=args.workers)
    rows = [{"id": f["id"], "decision": "error", "error": f["error"]} for f in failures]
    for ts, (ok, res) in zip(series, results):
        if ok:
            rows.append({"id": ts.id, "entropy": res, "decision": pl.filter_decision(res, cfg.entropy_threshold)})
        else:
            rows.append({"id": ts.id, "decision": "error", "error": res})
    rows.sort(key=lambda r: r["id"])
    _emit(pl.canonical_json({"config": cfg.to_dict(), "series": rows}), args.output)
    return EXIT_PARTIAL if any(r["decision"] == "error" for r in rows) else EXIT_OK


def _features_job(item, cfg: pl.PipelineConfig):
    ts, label = item
    return pl.window_features(ts, cfg, label)


def cmd_features(args, cfg: pl.PipelineConfig) -> int:
    series, failures = _load_all(_inputs(args), args.workers)
    labels = {}
    if args.labels:
        try:
            labels = pl.read_labels(args.labels)
        except (OSError, ValueError) as exc:
            raise FatalError(f"cannot read labels: {exc}") from None
    if args.apply_filter:
        ent = pl.run_batch(_entropy_job, series, cfg, workers=args.workers)
        kept = []
        for ts, (ok, res) in zip(series, ent):
            if not ok:
                failures.append({"id": ts.id, "error": res})
            elif pl.filter_decision(res, cfg.entropy_threshold) == "kept":
                kept.append(ts)
        series = kept
    for ts in series:
        if args.labels and ts.id not in labels:
            log.warning("no label for %s", ts.id)
    items = [(ts, labels.get(ts.id, "")) for ts in series]
    results = pl.run_batch(_features_job, items, cfg, workers=args.workers)
    records = []
    for ts, (ok, res) in zip(series, results):
        if ok:
            records.append(res.to_dict())
        else:
            failures.append({"id": ts.id, "error": res})
    failures.sort(key=lambda f: f["id"])
    _emit(pl.canonical_json({"config": cfg.to_dict(), "records": records, "failures": failures}), args.output)
    return EXIT_PARTIAL if failures else EXIT_OK


def _read_dataset(path: str) -> list[pl.FeatureVector]:
    import json

    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        return [pl.FeatureVector.from_dict(r) for r in obj["records"]]
    except (OSError, ValueError, KeyError) as exc:
        raise FatalError(f"cannot read feature dataset {path!r}: {exc}") from None


def cmd_classify(args, cfg: pl.PipelineConfig) -> int:
    channels = tuple(c.strip() for c in args.channels.split(","))
    if not set(channels) <= {"raw", "beta0", "beta1"} or not channels:
        raise FatalError(f"unknown channels {args.channels!r}")
    if args.train and args.test:
        train, test = _read_dataset(args.train), _read_dataset(args.test)
        split = {"mode": "given"}
    elif args.input:
        records = _read_dataset(args.input)
        try:
            train, test = pl.split_records(records, cfg.test_fraction, cfg.seed)
        except ValueError as exc:
            raise FatalError(str(exc)) from None
        split = {"mode": "seeded", "seed": cfg.seed, "test_fraction": cfg.test_fraction}
    else:
        raise FatalError("give --input (seeded split) or both --train and --test")
    split["test_ids"] = sorted(r.id for r in test)
    try:
        rep = pl.classify_baseline(train, test, channels)
    except ValueError as exc:
        raise FatalError(str(exc)) from None
    out = {"config": cfg.to_dict(), "channels": list(channels), "split": split, "metrics": rep.to_dict()}
    _emit(pl.canonical_json(out), args.output)
    return EXIT_OK


def _diagram_job(ts, cfg: pl.PipelineConfig) -> pl.WindowDiagrams:
    return pl.window_diagrams(pl.take_window(ts, cfg), cfg)


def cmd_export(args, cfg: pl.PipelineConfig) -> int:
    if not args.output:
        raise FatalError("export needs --output DIR")
    try:
        os.makedirs(args.output, exist_ok=True)
    except OSError as exc:
        raise FatalError(f"cannot create {args.output!r}: {exc}") from None
    series, failures = _load_all(_inputs(args), args.workers)
    if args.kind == "diagrams":
        results = pl.run_batch(_diagram_job, series, cfg, workers=args.workers)
    else:
        results = pl.run_batch(_features_job, [(ts, "") for ts in series], cfg, workers=args.workers)
    written = []
    for ts, (ok, res) in zip(series, results):
        if not ok:
            failures.append({"id": ts.id, "error": res})
            continue
        if args.kind == "diagrams":
            body = {
                "config": cfg.to_dict(),
                "id": res.id,
                "tau": res.tau,
                "m": res.m,
                "max_scale": res.max_scale,
                "diagrams": [export_diagram(d) for d in res.diagrams],
            }
            name = f"{ts.id}.json"
            pl.write_text(os.path.join(args.output, name), pl.canonical_json(body))
            written.append(name)
        else:
            for ch in ("beta0", "beta1"):
                name = f"{ts.id}.{ch}.csv"
                pl.write_text(os.path.join(args.output, name), curve_to_text(getattr(res, ch)))
                written.append(name)
    failures.sort(key=lambda f: f["id"])
    manifest = {"config": cfg.to_dict(), "kind": args.kind, "files": written, "failures": failures}
    pl.write_text(os.path.join(args.output, "manifest.json"), pl.canonical_json(manifest))
    return EXIT_PARTIAL if failures else EXIT_OK


def export_diagram(d: PersistenceDiagram) -> dict:
    """Export form of one diagram; infinite deaths become ``null``."""
    return {"dim": d.dim, "pairs": d.pairs.tolist(), "n_zero": d.n_zero}


COMMANDS = {
    "params": cmd_params,
    "filter": cmd_filter,
    "features": cmd_features,
    "classify": cmd_classify,
    "export": cmd_export,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat JSON config file")
    common.add_argument("--input", help="series file or directory (feature dataset for classify)")
    common.add_argument("--output", help="output file (directory for export); stdout if omitted")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--workers", type=int, default=1, help="worker processes for batch jobs")
    common.add_argument("--window-len", dest="window_len", type=int)
    common.add_argument("--tau", type=_auto_int, help="delay, or 'auto'")
    common.add_argument("-m", "--dim", dest="m", type=_auto_int, help="embedding dimension M, or 'auto'")
    common.add_argument("--max-scale", dest="max_scale", type=_scale)
    common.add_argument("--entropy-threshold", dest="entropy_threshold", type=float)
    common.add_argument("--entropy-dims", dest="entropy_dims", choices=pl.ENTROPY_DIMS)
    common.add_argument("--curve-resolution", dest="curve_resolution", type=int)
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="toposeries", description="Topological features for time series")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("params", parents=[common], help="estimate delay and embedding dimension")
    sub.add_parser("filter", parents=[common], help="persistence-entropy filter manifest")
    p = sub.add_parser("features", parents=[common], help="Betti-curve feature dataset")
    p.add_argument("--labels", help="two-column id,class file")
    p.add_argument("--apply-filter", action="store_true", help="drop high-entropy series first")
    p = sub.add_parser("classify", parents=[common], help="1-nearest-neighbour baseline")
    p.add_argument("--train")
    p.add_argument("--test")
    p.add_argument("--channels", default="raw,beta0,beta1")
    p = sub.add_parser("export", parents=[common], help="write diagrams or curves per series")
    p.add_argument("--kind", choices=("diagrams", "curves"), default="diagrams")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        if args.workers < 1:
            raise FatalError("--workers must be positive")
        cfg = _config(args)
        return COMMANDS[args.command](args, cfg)
    except (FatalError, ValueError, OSError) as exc:
        print(f"toposeries: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
