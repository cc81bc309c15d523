"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 runtime error.  The environment
variable ``RICB_THREADS`` caps the worker count for parallel stages
(0 or unset = one worker per CPU).
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Sequence

import numpy as np

from . import __version__
from .bank import build_bank, ingest_dataset, load_bank, save_bank
from .descriptor import DescriptorConfig
from .errors import ConfigInvalidError, RicbError
from .evalharness import (
    ExperimentConfig,
    LabeledQuery,
    emit_csv,
    estimate_rotated_fraction,
    rotation_experiment,
    timing_benchmark,
)
from .imaging import decode_image
from .orientation import EstimatorConfig, load_ground_truth, save_ground_truth
from .search import query_image
from .synthetic import generate_arrow_dataset

_METRIC_BY_FLAG = {"l1": "manhattan", "l2": "euclidean", "cosine": "cosine"}
_EST_DEFAULTS = EstimatorConfig(kind="null")


class _Parser(argparse.ArgumentParser):
    # Usage problems exit 1; argparse's default of 2 is reserved for
    # runtime failures here.
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _worker_count() -> int:
    raw = os.environ.get("RICB_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ConfigInvalidError(f"RICB_THREADS must be an integer, got {raw!r}")
    if n < 0:
        raise ConfigInvalidError("RICB_THREADS must be >= 0")
    return n if n > 0 else (os.cpu_count() or 1)


def _estimator(args: argparse.Namespace, kinds: Sequence[str]) -> EstimatorConfig:
    kind = args.oad
    if kind not in kinds:
        raise ConfigInvalidError(f"--oad must be one of {', '.join(kinds)}")
    return EstimatorConfig(
        kind="null" if kind == "none" else kind,
        noise_sigma_deg=getattr(args, "oad_sigma", _EST_DEFAULTS.noise_sigma_deg),
        gross_error_rate=getattr(args, "oad_gross", _EST_DEFAULTS.gross_error_rate),
        seed=getattr(args, "seed", 0),
    )


def _add_oad_flags(p: argparse.ArgumentParser, kinds: Sequence[str], default: str) -> None:
    p.add_argument("--oad", choices=list(kinds), default=default,
                   help="orientation estimator for the pipeline")
    if "oracle" in kinds:
        p.add_argument("--gt", help="ground-truth angle CSV (required for --oad oracle)")
        p.add_argument("--oad-sigma", type=float, default=_EST_DEFAULTS.noise_sigma_deg,
                       help="oracle noise sigma in degrees")
        p.add_argument("--oad-gross", type=float, default=_EST_DEFAULTS.gross_error_rate,
                       help="oracle gross-error rate in [0, 1]")


def _build_parser() -> _Parser:
    parser = _Parser(prog="ricb", description="Rotation-corrected content-based image retrieval.")
    parser.add_argument("--version", action="version", version=f"ricb {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, metavar="COMMAND")

    p = sub.add_parser("index", help="build and save a feature bank from a dataset tree")
    p.add_argument("--dataset", required=True, help="root with one subdirectory per category")
    p.add_argument("--out", required=True, help="bank file to write")
    _add_oad_flags(p, ("none", "moments", "oracle"), default="none")
    p.add_argument("--grid", type=int, default=16, help="descriptor grid cells per side")
    p.add_argument("--canvas", type=int, default=224, help="descriptor canvas size in pixels")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("query", help="run one query image against a saved bank")
    p.add_argument("--bank", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--metric", choices=sorted(_METRIC_BY_FLAG), default="l2")
    p.add_argument("--oad", choices=["none", "moments"], default="none")

    p = sub.add_parser("eval-rotation", help="rotation-corruption precision study")
    p.add_argument("--dataset", required=True)
    p.add_argument("--percents", default="0,5,10,20,50,100",
                   help="comma-separated rotation percentages")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--metric", choices=sorted(_METRIC_BY_FLAG), default="l2")
    _add_oad_flags(p, ("none", "moments", "oracle"), default="oracle")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--include-self", action="store_true",
                   help="count the query's own record as a hit candidate")
    p.add_argument("--real-angles", action="store_true",
                   help="draw real-valued corruption angles instead of integers")
    p.add_argument("--out", required=True, help="CSV file to write")

    p = sub.add_parser("bench", help="per-query latency benchmark on a saved bank")
    p.add_argument("--bank", required=True)
    p.add_argument("--sample", type=int, default=None,
                   help="scan a seeded sample of this size instead of the full bank")
    p.add_argument("--k", type=int, default=20)
    p.add_argument("--metric", choices=sorted(_METRIC_BY_FLAG), default="l2")
    p.add_argument("--oad", choices=["none", "moments"], default="moments")
    p.add_argument("--queries", type=int, default=20,
                   help="how many bank source images to replay as queries")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV file to write")

    p = sub.add_parser("estimate-rotated", help="sampled estimate of the rotated fraction")
    p.add_argument("--dataset", required=True)
    p.add_argument("--sample", type=int, required=True)
    p.add_argument("--threshold", type=float, default=5.0,
                   help="degrees of angular error beyond which an image counts as rotated")
    _add_oad_flags(p, ("moments", "oracle"), default="moments")
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("serve", help="serve a bank over HTTP")
    p.add_argument("--bank", required=True)
    p.add_argument("--listen", default="127.0.0.1:8000")
    p.add_argument("--static", default=None, help="directory of static UI assets")

    p = sub.add_parser("make-dataset", help="generate the synthetic arrow dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=10)
    p.add_argument("--per-class", type=int, default=40)
    p.add_argument("--size", type=int, default=96)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--rotated-fraction", type=float, default=0.0)
    p.add_argument("--gt", default=None, help="also write the true angles to this CSV")
    return parser


def _load_gt(args: argparse.Namespace):
    if args.oad == "oracle":
        if not args.gt:
            raise ConfigInvalidError("--oad oracle requires --gt")
        return load_ground_truth(args.gt)
    return None


def _cmd_index(args: argparse.Namespace) -> int:
    desc = DescriptorConfig(canvas=args.canvas, grid=args.grid)
    manifest = ingest_dataset(args.dataset)
    bank = build_bank(manifest, _estimator(args, ("none", "moments", "oracle")),
                      desc, gt=_load_gt(args), workers=_worker_count())
    save_bank(bank, args.out)
    print(f"{len(bank)} records, dim {bank.dim}")
    return 0


def _cmd_query(args: argparse.Namespace) -> int:
    bank = load_bank(args.bank)
    desc = DescriptorConfig.from_tag(bank.descriptor_id)
    est = EstimatorConfig(kind="null" if args.oad == "none" else "moments")
    img = decode_image(args.image)
    result = query_image(bank, img, args.k, _METRIC_BY_FLAG[args.metric], est, desc)
    for rank, hit in enumerate(result.hits, start=1):
        print(f"{rank}\t{hit.id}\t{hit.label}\t{hit.distance:.6f}")
    return 0


def _cmd_eval_rotation(args: argparse.Namespace) -> int:
    kind = "null" if args.oad == "none" else args.oad
    cfg = ExperimentConfig(
        estimator=EstimatorConfig(
            kind=kind,
            noise_sigma_deg=args.oad_sigma,
            gross_error_rate=args.oad_gross,
            seed=args.seed,
        ),
        dataset_root=args.dataset,
        percentages=tuple(float(x) for x in args.percents.split(",") if x.strip()),
        k=args.k,
        metric=_METRIC_BY_FLAG[args.metric],
        seed=args.seed,
        include_self=args.include_self,
        integer_angles=not args.real_angles,
        workers=_worker_count(),
    )
    report = rotation_experiment(cfg)
    emit_csv(report, args.out)
    print(f"{'n%':>6} {'without':>10} {'with':>10} {'improvement':>12}")
    for r in report.rows:
        print(f"{r.n_percent:>6.1f} {r.precision_without:>10.3f} "
              f"{r.precision_with:>10.3f} {r.improvement:>12.3f}")
    return 0


def _cmd_bench(args: argparse.Namespace) -> int:
    bank = load_bank(args.bank)
    desc = DescriptorConfig.from_tag(bank.descriptor_id)
    rng = np.random.default_rng(args.seed)
    count = min(args.queries, len(bank))
    if count < 1:
        raise ConfigInvalidError("bank has no records to replay as queries")
    picked = rng.choice(len(bank), size=count, replace=False)
    queries = []
    for i in picked:
        r = bank.records[int(i)]
        if not r.source_path:
            raise ConfigInvalidError(f"record {r.id} has no source path to decode")
        queries.append(LabeledQuery(r.id, r.label, decode_image(r.source_path)))
    est = EstimatorConfig(kind="null" if args.oad == "none" else "moments")
    metric = _METRIC_BY_FLAG[args.metric]
    reports = [
        timing_benchmark(bank, queries, args.k, metric, est, desc, arm,
                         sample_size=args.sample, seed=args.seed)
        for arm in ("with_oad", "without_oad")
    ]
    emit_csv(reports, args.out)
    for t in reports:
        scanned = t.sample_size if t.sample_size is not None else t.bank_size
        print(f"{t.arm}: mean {t.mean_ms:.3f} ms, median {t.median_ms:.3f} ms, "
              f"p95 {t.p95_ms:.3f} ms over {scanned} records")
    return 0


def _cmd_estimate_rotated(args: argparse.Namespace) -> int:
    manifest = ingest_dataset(args.dataset)
    est = _estimator(args, ("moments", "oracle"))
    frac = estimate_rotated_fraction(
        manifest, args.sample, est, DescriptorConfig(),
        threshold_deg=args.threshold, seed=args.seed, gt=_load_gt(args),
    )
    print(f"{frac:.4f}")
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    serve(args.bank, args.listen, static_dir=args.static)
    return 0


def _cmd_make_dataset(args: argparse.Namespace) -> int:
    gt = generate_arrow_dataset(
        args.out,
        classes=args.classes,
        per_class=args.per_class,
        size=args.size,
        seed=args.seed,
        rotated_fraction=args.rotated_fraction,
    )
    if args.gt:
        save_ground_truth(gt, args.gt)
    print(f"wrote {len(gt)} images under {args.out}")
    return 0


_COMMANDS = {
    "index": _cmd_index,
    "query": _cmd_query,
    "eval-rotation": _cmd_eval_rotation,
    "bench": _cmd_bench,
    "estimate-rotated": _cmd_estimate_rotated,
    "serve": _cmd_serve,
    "make-dataset": _cmd_make_dataset,
}


def run(argv: Sequence[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    if not args.command:
        parser.print_usage(sys.stderr)
        return 1
    try:
        return _COMMANDS[args.command](args)
    except (RicbError, OSError, ValueError, KeyError) as exc:
        print(f"ricb {args.command}: error: {exc}", file=sys.stderr)
        return 2


def main(argv: Sequence[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else list(argv))


if __name__ == "__main__":
    sys.exit(main())
