"""Command-line front end: ``mixhist {index,query,eval,sweep,synth}``.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 data error.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from pathlib import Path

from .descriptor import COLOR_PRESETS, QuantizationScheme, extract
from .errors import ImageNotFound, MissingFile, MixHistError
from .evaluation import EvalConfig, pr_curve, pr_curve_csv, run_benchmark, sweep
from .imaging import load_image
from .index import build_index, load_db, read_manifest, save_db
from .query import METRIC_MODES, rank
from .synth import generate_corpus

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DATA = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _positive(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if val < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {val}")
    return val


def _seed(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= val < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return val


def _write_atomic(path, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _eval_config(args) -> EvalConfig:
    return EvalConfig(
        n_retrieved=args.n,
        queries_per_category=args.per_category,
        rng_seed=args.seed,
        metric_mode=args.metric,
    )


# --- subcommands -------------------------------------------------------------


def cmd_index(args, out) -> int:
    scheme = QuantizationScheme(args.nh, args.ns, args.nv, args.nq)
    entries = read_manifest(args.manifest)
    t0 = time.perf_counter()
    db = build_index(entries, scheme, workers=args.workers)
    save_db(db, args.out)
    print(f"indexed {len(db)} images in {time.perf_counter() - t0:.2f}s -> {args.out}", file=out)
    return EXIT_OK


def cmd_query(args, out) -> int:
    db = load_db(args.db)
    vec = extract(load_image(args.image), db.scheme)
    result = rank(db, vec, args.n, args.metric)
    w = csv.writer(out, lineterminator="\n")
    w.writerow(("rank", "image_id", "category", "distance"))
    for k, (iid, d) in enumerate(result, start=1):
        w.writerow((k, iid, db.category(iid), repr(d)))
    return EXIT_OK


def cmd_eval(args, out) -> int:
    config = _eval_config(args)
    db = load_db(args.db)
    entries = read_manifest(args.manifest)
    report = run_benchmark(db, config, entries)
    curve = pr_curve(db, config, entries, args.curve_n) if args.curve_out else None
    if args.out:
        _write_atomic(args.out, report.to_csv())
    if curve is not None:
        _write_atomic(args.curve_out, pr_curve_csv(curve))
    print(report.to_text(), file=out)
    return EXIT_OK


def cmd_sweep(args, out) -> int:
    unknown = [nc for nc in args.nc_presets if nc not in COLOR_PRESETS]
    if unknown:
        raise UsageError(f"unknown color presets {unknown}; known: {sorted(COLOR_PRESETS)}")
    config = _eval_config(args)
    entries = read_manifest(args.manifest)
    result = sweep(entries, args.nq_list, args.nc_presets, config)
    text = result.to_csv()
    if args.out:
        _write_atomic(args.out, text)
    print(f"metric={config.metric_mode} N={config.n_retrieved} seed={config.rng_seed}", file=out)
    out.write(text)
    n_q, nc = result.best_cell()
    print(f"best: n_q={n_q} Nc={nc}", file=out)
    return EXIT_OK


def cmd_synth(args, out) -> int:
    entries = generate_corpus(args.out, args.categories, args.per_category, args.seed, args.size)
    n_cats = len({e.category for e in entries})
    print(
        f"wrote {len(entries)} images in {n_cats} categories to {args.out} "
        f"(manifest: {Path(args.out) / 'manifest.csv'})",
        file=out,
    )
    return EXIT_OK


# --- parser ------------------------------------------------------------------


def _add_eval_flags(p):
    p.add_argument("--n", type=_positive, default=12, help="number of images retrieved (default 12)")
    p.add_argument("--per-category", type=_positive, default=20, help="queries drawn per category")
    p.add_argument("--seed", type=_seed, default=42)
    p.add_argument("--metric", choices=METRIC_MODES, default="canonical")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mixhist", description="Mix histogram image retrieval.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("index", help="extract features for a manifest and save a database")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="database file to write")
    p.add_argument("--nh", type=_positive, default=10)
    p.add_argument("--ns", type=_positive, default=4)
    p.add_argument("--nv", type=_positive, default=4)
    p.add_argument("--nq", type=_positive, default=4)
    p.add_argument("--workers", type=_positive, default=1)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="rank database images against a query image")
    p.add_argument("--db", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--n", type=_positive, default=12)
    p.add_argument("--metric", choices=METRIC_MODES, default="canonical")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("eval", help="precision/recall benchmark over sampled queries")
    p.add_argument("--db", required=True)
    p.add_argument("--manifest", required=True)
    _add_eval_flags(p)
    p.add_argument("--out", help="per-query report CSV")
    p.add_argument("--curve-out", help="also write precision-recall curve CSV here")
    p.add_argument("--curve-n", type=_int_list, default=list(range(1, 101)),
                   help="retrieval depths for --curve-out (default 1..100)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="benchmark a grid of quantization schemes")
    p.add_argument("--manifest", required=True)
    p.add_argument("--nq-list", type=_int_list, default=[3, 4, 5])
    p.add_argument("--nc-presets", type=_int_list, default=[72, 90, 160, 240])
    _add_eval_flags(p)
    p.add_argument("--out", help="grid CSV")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic striped-image corpus")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--categories", type=_positive, default=4)
    p.add_argument("--per-category", type=_positive, default=25)
    p.add_argument("--seed", type=_seed, default=42)
    p.add_argument("--size", type=int, default=64, help="image side in pixels")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = build_parser().parse_args(argv)
        if getattr(args, "size", 3) < 3:
            raise UsageError("--size must be at least 3")
        if getattr(args, "curve_n", None) and any(
            b <= a for a, b in zip(args.curve_n, args.curve_n[1:])
        ):
            raise UsageError("--curve-n must be strictly ascending")
        return args.func(args, out)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except (MissingFile, ImageNotFound) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_IO
    except MixHistError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_DATA
    except OSError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
