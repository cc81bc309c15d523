"""Evaluation harness: rotation-corruption precision study and latency benchmark.

The precision study corrupts a seeded fraction of a dataset with random
rotations, builds one bank with the configured orientation estimator and
one with the null estimator, queries every corrupted image through the
matching pipeline, and reports mean precision per arm in percent plus
their difference.  The timing benchmark measures wall-clock per-query
latency with a monotonic clock, optionally scanning a seeded sample of
the bank instead of the whole bank.
"""

from __future__ import annotations

import csv
import math
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .bank import (
    DatasetManifest,
    FeatureBank,
    build_bank_from_images,
    ingest_dataset,
    sample_bank,
)
from .descriptor import DescriptorConfig, extract
from .errors import (
    ConfigInvalidError,
    EmptyBankError,
    EmptyDatasetError,
    PercentOutOfRangeError,
    SampleTooLargeError,
)
from .imaging import RasterImage, correct_orientation, decode_image, rotate
from .orientation import EstimatorConfig, GroundTruthTable, angular_error, estimate
from .search import Metric, RetrievalResult, top_k


class LabeledQuery(NamedTuple):
    id: str
    label: str
    image: RasterImage


class PrecisionRow(NamedTuple):
    n_percent: float
    precision_without: float
    precision_with: float
    improvement: float


@dataclass(frozen=True)
class PrecisionReport:
    rows: tuple[PrecisionRow, ...]
    seed: int
    k: int
    metric: Metric
    dataset_size: int


@dataclass(frozen=True)
class TimingReport:
    arm: str
    bank_size: int
    dim: int
    k: int
    sample_size: int | None
    mean_ms: float
    median_ms: float
    p95_ms: float
    scan_mean_ms: float
    host: str

    def __post_init__(self) -> None:
        if min(self.mean_ms, self.median_ms, self.p95_ms, self.scan_mean_ms) < 0:
            raise ValueError("latencies must be non-negative")


@dataclass(frozen=True)
class ExperimentConfig:
    """Inputs for one precision study run.

    Exactly one of ``dataset_root`` and ``manifest`` must be given.  The
    estimator config drives the "with OAD" arm; the other arm always uses
    the null estimator.  ``integer_angles`` switches the corruption draw
    between uniform integers in [0, 359] and uniform reals in [0, 360).
    """

    estimator: EstimatorConfig
    descriptor: DescriptorConfig = field(default_factory=DescriptorConfig)
    dataset_root: str | None = None
    manifest: DatasetManifest | None = None
    percentages: tuple[float, ...] = (0.0, 20.0, 50.0, 80.0, 100.0)
    k: int = 20
    metric: Metric = "euclidean"
    seed: int = 0
    include_self: bool = False
    integer_angles: bool = True
    workers: int | None = None

    def __post_init__(self) -> None:
        if (self.dataset_root is None) == (self.manifest is None):
            raise ConfigInvalidError("give exactly one of dataset_root and manifest")
        object.__setattr__(self, "percentages", tuple(float(n) for n in self.percentages))
        for n in self.percentages:
            if not 0.0 <= n <= 100.0:
                raise PercentOutOfRangeError(f"percentage {n} outside [0, 100]")
        if self.k < 1:
            raise ConfigInvalidError("k must be at least 1")


def precision_at_k(result: RetrievalResult, query_label: str, k: int) -> float:
    """Fraction of the k-slot scope occupied by same-label hits."""
    if k < 1:
        raise ValueError("k must be at least 1")
    return sum(1 for h in result.hits if h.label == query_label) / k


def mean_precision(
    bank: FeatureBank,
    queries: Sequence[LabeledQuery],
    k: int,
    m: Metric,
    est: EstimatorConfig,
    desc: DescriptorConfig,
    include_self: bool = False,
    gt: GroundTruthTable | None = None,
    workers: int | None = None,
) -> float:
    """Mean precision-at-k over the query set, self-matches excluded by default."""
    if not queries:
        raise EmptyDatasetError("query set is empty")

    def one(q: LabeledQuery) -> float:
        angle = estimate(q.image, q.id, est, gt)
        vec = extract(correct_orientation(q.image, angle), desc)
        exclude = None if include_self else q.id
        return precision_at_k(top_k(bank, vec, k, m, exclude_id=exclude), q.label, k)

    if workers and workers > 1 and len(queries) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vals = list(pool.map(one, queries))
    else:
        vals = [one(q) for q in queries]
    return math.fsum(vals) / len(vals)


def improvement(p_with: float, p_without: float) -> float:
    """Precision gain of the orientation-corrected arm, in percentage points."""
    for p in (p_with, p_without):
        if not 0.0 <= p <= 100.0:
            raise PercentOutOfRangeError(f"precision {p} outside [0, 100]")
    return p_with - p_without


_NULL_EST = EstimatorConfig(kind="null")


def _corrupt(
    base: list[tuple[str, str, str, RasterImage]],
    n: float,
    seed: int,
    integer_angles: bool,
) -> tuple[list[tuple[str, str, str, RasterImage]], GroundTruthTable]:
    """Rotate a seeded floor(n·N/100)-size subset by random angles."""
    rng = np.random.default_rng([seed, int(round(n * 1000))])
    total = len(base)
    count = math.floor(n * total / 100.0 + 1e-9)
    picked = rng.choice(total, size=count, replace=False) if count else np.empty(0, int)
    if integer_angles:
        angles = rng.integers(0, 360, size=count).astype(float)
    else:
        angles = rng.uniform(0.0, 360.0, size=count)
    angle_at = dict(zip(picked.tolist(), angles.tolist()))
    out = []
    gt: GroundTruthTable = {}
    for i, (rid, label, path, img) in enumerate(base):
        a = angle_at.get(i, 0.0)
        gt[rid] = a
        out.append((rid, label, path, rotate(img, a) if a else img))
    return out, gt


def rotation_experiment(cfg: ExperimentConfig) -> PrecisionReport:
    """Run the two-arm precision study over every configured rotation fraction."""
    manifest = cfg.manifest if cfg.manifest is not None else ingest_dataset(cfg.dataset_root)
    base = [(e.id, e.label, e.path, decode_image(e.path)) for e in manifest]
    rows = []
    for n in cfg.percentages:
        corrupted, gt = _corrupt(base, n, cfg.seed, cfg.integer_angles)
        queries = [LabeledQuery(rid, label, img) for rid, label, _, img in corrupted]
        arm_precisions = []
        for est in (cfg.estimator, _NULL_EST):
            bank = build_bank_from_images(
                corrupted, est, cfg.descriptor, gt=gt, workers=cfg.workers
            )
            p = mean_precision(
                bank,
                queries,
                cfg.k,
                cfg.metric,
                est,
                cfg.descriptor,
                include_self=cfg.include_self,
                gt=gt,
                workers=cfg.workers,
            )
            arm_precisions.append(100.0 * p)
        p_with, p_without = arm_precisions
        rows.append(PrecisionRow(n, p_without, p_with, improvement(p_with, p_without)))
    return PrecisionReport(
        rows=tuple(rows),
        seed=cfg.seed,
        k=cfg.k,
        metric=cfg.metric,
        dataset_size=len(base),
    )


def estimate_rotated_fraction(
    manifest: DatasetManifest,
    m: int,
    est: EstimatorConfig,
    desc: DescriptorConfig,
    threshold_deg: float,
    seed: int,
    gt: GroundTruthTable | None = None,
) -> float:
    """Sampled share of images whose estimated angle is more than threshold off 0."""
    total = len(manifest)
    if m < 1:
        raise ValueError("sample size must be at least 1")
    if m > total:
        raise SampleTooLargeError(f"sample size {m} exceeds dataset size {total}")
    rng = np.random.default_rng(seed)
    picked = rng.choice(total, size=m, replace=False)
    rotated = 0
    for i in picked:
        entry = manifest.entries[int(i)]
        angle = estimate(decode_image(entry.path), entry.id, est, gt)
        if angular_error(angle, 0.0) > threshold_deg:
            rotated += 1
    return rotated / m


def timing_benchmark(
    bank: FeatureBank,
    queries: Sequence[LabeledQuery],
    k: int,
    m: Metric,
    est: EstimatorConfig,
    desc: DescriptorConfig,
    arm: str,
    sample_size: int | None = None,
    seed: int = 0,
    gt: GroundTruthTable | None = None,
    host: str | None = None,
) -> TimingReport:
    """Measure per-query wall-clock latency over the full bank or a seeded sample."""
    if arm not in ("with_oad", "without_oad"):
        raise ConfigInvalidError(f"unknown arm {arm!r}")
    if len(bank) == 0:
        raise EmptyBankError("cannot benchmark an empty bank")
    if not queries:
        raise EmptyDatasetError("query set is empty")
    target = bank if sample_size is None else sample_bank(bank, sample_size, seed)

    def pipeline(q: LabeledQuery) -> tuple[float, float]:
        t0 = time.perf_counter()
        img = q.image
        if arm == "with_oad":
            img = correct_orientation(img, estimate(img, q.id, est, gt))
        vec = extract(img, desc)
        t1 = time.perf_counter()
        top_k(target, vec, k, m)
        t2 = time.perf_counter()
        return (t2 - t0) * 1000.0, (t2 - t1) * 1000.0

    pipeline(queries[0])  # untimed warm-up
    totals, scans = zip(*(pipeline(q) for q in queries))
    return TimingReport(
        arm=arm,
        bank_size=len(bank),
        dim=bank.dim,
        k=k,
        sample_size=sample_size,
        mean_ms=float(np.mean(totals)),
        median_ms=float(np.median(totals)),
        p95_ms=float(np.percentile(totals, 95)),
        scan_mean_ms=float(np.mean(scans)),
        host=host or f"{platform.platform()} / Python {platform.python_version()}",
    )


def emit_csv(
    report: PrecisionReport | TimingReport | Sequence[TimingReport],
    path: str | Path,
) -> None:
    """Write a report as CSV; a sequence of timing reports shares one file."""
    path = Path(path)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        if isinstance(report, PrecisionReport):
            w.writerow(["n_percent", "precision_without", "precision_with", "improvement"])
            for r in report.rows:
                w.writerow([f"{v:.6f}" for v in r])
            return
        reports = [report] if isinstance(report, TimingReport) else list(report)
        w.writerow(
            ["arm", "bank_size", "dim", "k", "sample_size", "mean_ms", "median_ms", "p95_ms"]
        )
        for t in reports:
            w.writerow(
                [
                    t.arm,
                    t.bank_size,
                    t.dim,
                    t.k,
                    "full" if t.sample_size is None else t.sample_size,
                    f"{t.mean_ms:.6f}",
                    f"{t.median_ms:.6f}",
                    f"{t.p95_ms:.6f}",
                ]
            )
