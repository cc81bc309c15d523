"""Feature bank: ingestion, pipeline execution, persistence, sampling.

A bank is an immutable, id-sorted collection of (id, label, source path,
predicted angle, vector) records plus a dense float32 matrix view used by
the scan.  On disk a bank is a little-endian binary vector file together
with a CSV sidecar ``<path>.manifest.csv`` describing one record per row.
"""

from __future__ import annotations

import csv
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .descriptor import DescriptorConfig, FeatureVector, extract
from .errors import (
    BadMagicError,
    DimMismatchError,
    EmptyDatasetError,
    ManifestDesyncError,
    SampleTooLargeError,
    UnreadableDirectoryError,
    VersionMismatchError,
)
from .imaging import RasterImage, correct_orientation, decode_image
from .orientation import AngleDeg, EstimatorConfig, GroundTruthTable, estimate

_MAGIC = b"RICB"
_VERSION = 1
_IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp"}


@dataclass(frozen=True)
class BankRecord:
    """One indexed image: identity, category, audit angle and its vector."""

    id: str
    label: str
    source_path: str
    predicted_angle: AngleDeg
    vector: FeatureVector

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("record id must be nonempty")
        if self.vector.ndim != 1:
            raise ValueError("record vector must be one-dimensional")


class FeatureBank:
    """Immutable id-sorted record collection with a dense matrix view."""

    def __init__(self, dim: int, descriptor_id: str, records: Sequence[BankRecord]):
        records = sorted(records, key=lambda r: r.id)
        ids = [r.id for r in records]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate record ids in bank")
        for r in records:
            if r.vector.shape != (dim,):
                raise DimMismatchError(
                    f"record {r.id!r} has dim {r.vector.shape[0]}, bank dim {dim}"
                )
        self._dim = int(dim)
        self._descriptor_id = descriptor_id
        self._records = tuple(records)
        self._ids = tuple(ids)
        self._labels = tuple(r.label for r in records)
        if records:
            matrix = np.stack([r.vector for r in records]).astype(np.float32)
        else:
            matrix = np.zeros((0, dim), dtype=np.float32)
        matrix.setflags(write=False)
        self._matrix = matrix
        self._index = {rid: i for i, rid in enumerate(ids)}

    @property
    def dim(self) -> int:
        return self._dim

    @property
    def descriptor_id(self) -> str:
        return self._descriptor_id

    @property
    def records(self) -> tuple[BankRecord, ...]:
        return self._records

    @property
    def ids(self) -> tuple[str, ...]:
        return self._ids

    @property
    def labels(self) -> tuple[str, ...]:
        return self._labels

    @property
    def matrix(self) -> np.ndarray:
        """Read-only float32 array of shape (len(bank), dim), row i = records[i]."""
        return self._matrix

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, record_id: str) -> bool:
        return record_id in self._index

    def index_of(self, record_id: str) -> int:
        return self._index[record_id]

    def lookup(self, record_id: str) -> BankRecord:
        return self._records[self._index[record_id]]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, FeatureBank):
            return NotImplemented
        return (
            self._dim == other._dim
            and self._descriptor_id == other._descriptor_id
            and self._ids == other._ids
            and self._labels == other._labels
            and tuple(r.source_path for r in self._records)
            == tuple(r.source_path for r in other._records)
            and tuple(r.predicted_angle for r in self._records)
            == tuple(r.predicted_angle for r in other._records)
            and np.array_equal(self._matrix, other._matrix)
        )


class ManifestEntry(NamedTuple):
    id: str
    label: str
    path: str


@dataclass(frozen=True)
class DatasetManifest:
    """Flat listing of a category-per-directory image tree."""

    entries: tuple[ManifestEntry, ...]

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def labels(self) -> list[str]:
        return sorted({e.label for e in self.entries})


def ingest_dataset(root: str | Path) -> DatasetManifest:
    """Walk one-directory-per-category ``root`` into a sorted manifest.

    The id of each entry is ``"<label>/<filename>"``.  Files without a
    supported image extension are skipped.
    """
    root = Path(root)
    if not root.is_dir():
        raise UnreadableDirectoryError(f"not a readable directory: {root}")
    entries = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        for f in sorted(p for p in sub.iterdir() if p.is_file()):
            if f.suffix.lower() not in _IMAGE_SUFFIXES:
                continue
            entries.append(ManifestEntry(f"{sub.name}/{f.name}", sub.name, str(f)))
    if not entries:
        raise EmptyDatasetError(f"no images under {root}")
    entries.sort(key=lambda e: e.id)
    return DatasetManifest(tuple(entries))


def _pipeline_record(
    img: RasterImage,
    record_id: str,
    label: str,
    source_path: str,
    est: EstimatorConfig,
    desc: DescriptorConfig,
    gt: GroundTruthTable | None,
) -> BankRecord:
    angle = estimate(img, record_id, est, gt)
    upright = correct_orientation(img, angle)
    return BankRecord(record_id, label, source_path, angle, extract(upright, desc))


def build_bank_from_images(
    images: Iterable[tuple[str, str, str, RasterImage]],
    est: EstimatorConfig,
    desc: DescriptorConfig,
    gt: GroundTruthTable | None = None,
    workers: int | None = None,
) -> FeatureBank:
    """Run estimate → correct → extract over in-memory (id, label, path, image)s."""
    items = list(images)

    def one(item: tuple[str, str, str, RasterImage]) -> BankRecord:
        record_id, label, path, img = item
        try:
            return _pipeline_record(img, record_id, label, path, est, desc, gt)
        except Exception as exc:
            exc.args = (f"{record_id}: {exc}",)
            raise

    if workers and workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, items))
    else:
        records = [one(item) for item in items]
    return FeatureBank(desc.dim, desc.tag, records)


def build_bank(
    manifest: DatasetManifest,
    est: EstimatorConfig,
    desc: DescriptorConfig,
    gt: GroundTruthTable | None = None,
    workers: int | None = None,
) -> FeatureBank:
    """Decode every manifest entry and run the indexing pipeline over it."""
    if not len(manifest):
        raise EmptyDatasetError("manifest has no entries")

    def load(entry: ManifestEntry) -> tuple[str, str, str, RasterImage]:
        try:
            return entry.id, entry.label, entry.path, decode_image(entry.path)
        except Exception as exc:
            exc.args = (f"{entry.id}: {exc}",)
            raise

    # Decoding happens lazily inside the same worker pool as the pipeline.
    def one(entry: ManifestEntry) -> BankRecord:
        record_id, label, path, img = load(entry)
        try:
            return _pipeline_record(img, record_id, label, path, est, desc, gt)
        except Exception as exc:
            exc.args = (f"{record_id}: {exc}",)
            raise

    if workers and workers > 1 and len(manifest) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(one, manifest.entries))
    else:
        records = [one(entry) for entry in manifest.entries]
    return FeatureBank(desc.dim, desc.tag, records)


def save_bank(bank: FeatureBank, path: str | Path) -> None:
    """Write the binary vector file at ``path`` and its CSV sidecar."""
    path = Path(path)
    tag = bank.descriptor_id.encode("utf-8")
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<HHIQ", _VERSION, 0, bank.dim, len(bank)))
        f.write(struct.pack("<H", len(tag)))
        f.write(tag)
        f.write(np.ascontiguousarray(bank.matrix, dtype="<f4").tobytes())
    with open(_sidecar_path(path), "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["id", "label", "path", "predicted_angle_deg"])
        for r in bank.records:
            w.writerow([r.id, r.label, r.source_path, repr(float(r.predicted_angle))])


def _sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".manifest.csv")


def _read_exact(f, n: int, what: str) -> bytes:
    data = f.read(n)
    if len(data) != n:
        raise DimMismatchError(f"truncated {what}")
    return data


def _read_vector_file(path: Path) -> tuple[int, str, np.ndarray]:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != _MAGIC:
            raise BadMagicError(f"bad magic in {path}")
        version, _flags, dim, count = struct.unpack(
            "<HHIQ", _read_exact(f, 16, "header")
        )
        if version != _VERSION:
            raise VersionMismatchError(f"unsupported bank version {version}")
        (tag_len,) = struct.unpack("<H", _read_exact(f, 2, "header"))
        tag = _read_exact(f, tag_len, "descriptor tag").decode("utf-8")
        block = f.read()
    expected = count * dim * 4
    if len(block) != expected:
        raise DimMismatchError(
            f"vector block holds {len(block)} bytes, header implies {expected}"
        )
    matrix = np.frombuffer(block, dtype="<f4").reshape(count, dim)
    return dim, tag, matrix


def _read_manifest_rows(path: Path) -> list[tuple[str, str, str, float]]:
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header != ["id", "label", "path", "predicted_angle_deg"]:
            raise ManifestDesyncError(f"unexpected sidecar header in {path}")
        rows = []
        for row in reader:
            if len(row) != 4:
                raise ManifestDesyncError(f"malformed sidecar row: {row!r}")
            rows.append((row[0], row[1], row[2], float(row[3])))
    return rows


def _bank_from_pair(
    vectors_path: Path, manifest_path: Path, force_zero_angle: bool
) -> FeatureBank:
    dim, tag, matrix = _read_vector_file(vectors_path)
    rows = _read_manifest_rows(manifest_path)
    if len(rows) != matrix.shape[0]:
        raise ManifestDesyncError(
            f"{len(rows)} sidecar rows for {matrix.shape[0]} vector rows"
        )
    records = []
    for i, (rid, label, src, angle) in enumerate(rows):
        vec = np.array(matrix[i], dtype=np.float32)
        records.append(
            BankRecord(rid, label, src, 0.0 if force_zero_angle else angle, vec)
        )
    return FeatureBank(dim, tag, records)


def load_bank(path: str | Path) -> FeatureBank:
    path = Path(path)
    return _bank_from_pair(path, _sidecar_path(path), force_zero_angle=False)


def import_embeddings(vectors_path: str | Path, manifest_path: str | Path) -> FeatureBank:
    """Build a bank from externally computed vectors; predicted angles become 0."""
    return _bank_from_pair(Path(vectors_path), Path(manifest_path), force_zero_angle=True)


def sample_bank(bank: FeatureBank, s: int, seed: int) -> FeatureBank:
    """Uniform sample of ``s`` records without replacement, deterministic in seed."""
    if s < 1:
        raise ValueError("sample size must be at least 1")
    if s > len(bank):
        raise SampleTooLargeError(f"sample size {s} exceeds bank size {len(bank)}")
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(bank), size=s, replace=False)
    return FeatureBank(
        bank.dim, bank.descriptor_id, [bank.records[i] for i in picked]
    )
