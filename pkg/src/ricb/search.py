"""Similarity metrics and the brute-force top-k scan.

Distances are accumulated in 64-bit floats over the bank's 32-bit
components.  Ties are broken by id ascending, so results equal a full
sort truncated to k, and repeated scans are bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, NamedTuple

import numpy as np

from .bank import FeatureBank
from .descriptor import DescriptorConfig, FeatureVector, extract
from .errors import (
    ConfigInvalidError,
    DimMismatchError,
    EmptyBankError,
    ZeroVectorError,
)
from .imaging import RasterImage, correct_orientation
from .orientation import EstimatorConfig, estimate

Metric = Literal["manhattan", "euclidean", "cosine"]
METRICS: tuple[Metric, ...] = ("manhattan", "euclidean", "cosine")

_NORM_FLOOR = 1e-12


class Hit(NamedTuple):
    id: str
    label: str
    distance: float


@dataclass(frozen=True)
class RetrievalResult:
    hits: tuple[Hit, ...]
    query_id: str | None = None


def _check_metric(m: str) -> None:
    if m not in METRICS:
        raise ConfigInvalidError(f"unknown metric {m!r}")


def distance(a: FeatureVector, b: FeatureVector, m: Metric) -> float:
    _check_metric(m)
    if a.shape != b.shape:
        raise DimMismatchError(f"vector dims differ: {a.shape} vs {b.shape}")
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if m == "manhattan":
        return float(np.abs(av - bv).sum())
    if m == "euclidean":
        return float(np.sqrt(np.square(av - bv).sum()))
    na = float(np.sqrt(np.square(av).sum()))
    nb = float(np.sqrt(np.square(bv).sum()))
    if na < _NORM_FLOOR or nb < _NORM_FLOOR:
        raise ZeroVectorError("cosine distance undefined for near-zero vectors")
    dot = float((av * bv).sum())
    return float(min(max(1.0 - dot / (na * nb), 0.0), 2.0))


def _scan_distances(matrix: np.ndarray, qv: np.ndarray, m: Metric) -> np.ndarray:
    # Row-wise sums use the same pairwise accumulation as the per-pair
    # distance() above, so both paths agree bitwise.
    if m == "manhattan":
        return np.abs(matrix - qv).sum(axis=1)
    if m == "euclidean":
        return np.sqrt(np.square(matrix - qv).sum(axis=1))
    norms = np.sqrt(np.square(matrix).sum(axis=1))
    qn = float(np.sqrt(np.square(qv).sum()))
    if qn < _NORM_FLOOR or bool((norms < _NORM_FLOOR).any()):
        raise ZeroVectorError("cosine distance undefined for near-zero vectors")
    dots = (matrix * qv).sum(axis=1)
    return np.clip(1.0 - dots / (norms * qn), 0.0, 2.0)


def top_k(
    bank: FeatureBank,
    q: FeatureVector,
    k: int,
    m: Metric,
    exclude_id: str | None = None,
) -> RetrievalResult:
    """Scan every record and return the k nearest, ties by id ascending."""
    _check_metric(m)
    if k < 1:
        raise ValueError("k must be at least 1")
    if len(bank) == 0:
        raise EmptyBankError("cannot query an empty bank")
    if q.shape != (bank.dim,):
        raise DimMismatchError(f"query dim {q.shape} does not match bank dim {bank.dim}")
    qv = np.asarray(q, dtype=np.float64)
    matrix = bank.matrix.astype(np.float64)
    if exclude_id is not None and exclude_id in bank:
        keep = np.delete(np.arange(len(bank)), bank.index_of(exclude_id))
        if keep.size == 0:
            return RetrievalResult(hits=())
        d = _scan_distances(matrix[keep], qv, m)
    else:
        keep = None
        d = _scan_distances(matrix, qv, m)
    # Stable sort over id-ordered rows gives the id-ascending tie rule.
    order = np.argsort(d, kind="stable")[:k]
    bank_pos = order if keep is None else keep[order]
    hits = tuple(
        Hit(bank.ids[j], bank.labels[j], float(d[i]))
        for i, j in zip(order, bank_pos)
    )
    return RetrievalResult(hits=hits)


def query_image(
    bank: FeatureBank,
    img: RasterImage,
    k: int,
    m: Metric,
    est: EstimatorConfig,
    desc: DescriptorConfig,
) -> RetrievalResult:
    """Full query pipeline: estimate angle, correct, extract, scan."""
    if est.kind == "oracle":
        raise ConfigInvalidError(
            "oracle estimator needs ground truth and cannot serve ad-hoc queries"
        )
    angle = estimate(img, "query", est)
    upright = correct_orientation(img, angle)
    return top_k(bank, extract(upright, desc), k, m)
