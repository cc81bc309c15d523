"""Ingestion, the indexing pipeline, bank persistence, and sampling."""

import numpy as np
import pytest

from conftest import random_bank
from ricb.bank import (
    BankRecord,
    DatasetManifest,
    FeatureBank,
    build_bank,
    build_bank_from_images,
    import_embeddings,
    ingest_dataset,
    load_bank,
    sample_bank,
    save_bank,
)
from ricb.descriptor import DescriptorConfig, extract
from ricb.errors import (
    BadMagicError,
    DimMismatchError,
    EmptyDatasetError,
    ManifestDesyncError,
    MissingGroundTruthError,
    SampleTooLargeError,
    UnreadableDirectoryError,
    VersionMismatchError,
)
from ricb.imaging import decode_image, rotate, save_png, synth_arrow
from ricb.orientation import EstimatorConfig

NULL = EstimatorConfig(kind="null")
PERFECT = EstimatorConfig(kind="oracle", noise_sigma_deg=0.0, gross_error_rate=0.0)
DESC = DescriptorConfig()


def vec(seed, dim=6):
    return np.random.default_rng(seed).random(dim, dtype=np.float32)


def record(rid, label="l", seed=0, dim=6):
    return BankRecord(rid, label, "", 0.0, vec(seed, dim))


def make_tree(root):
    """Two-label arrow tree on disk; returns the per-file angles."""
    angles = {"a/00.png": 10.0, "a/01.png": 200.0, "b/00.png": 95.0}
    for rid, angle in angles.items():
        path = root / rid
        path.parent.mkdir(exist_ok=True)
        save_png(synth_arrow(angle, 96), path)
    return angles


# ---------------------------------------------------------------- bank type

def test_bank_record_validation():
    with pytest.raises(ValueError):
        BankRecord("", "l", "", 0.0, vec(0))
    with pytest.raises(ValueError):
        BankRecord("x", "l", "", 0.0, np.zeros((2, 3), dtype=np.float32))


def test_bank_sorts_records_by_id():
    bank = FeatureBank(6, "t", [record("c", seed=1), record("a", seed=2), record("b", seed=3)])
    assert bank.ids == ("a", "b", "c")
    for i, r in enumerate(bank.records):
        assert np.array_equal(bank.matrix[i], r.vector)


def test_bank_rejects_duplicate_ids():
    with pytest.raises(ValueError):
        FeatureBank(6, "t", [record("x", seed=1), record("x", seed=2)])


def test_bank_rejects_dim_mismatch():
    with pytest.raises(DimMismatchError):
        FeatureBank(6, "t", [record("x", dim=5)])


def test_bank_matrix_is_read_only():
    bank = FeatureBank(6, "t", [record("x")])
    with pytest.raises(ValueError):
        bank.matrix[0, 0] = 1.0


def test_bank_lookup_and_membership():
    bank = FeatureBank(6, "t", [record("a"), record("b", label="m", seed=1)])
    assert "a" in bank and "z" not in bank
    assert bank.index_of("b") == 1
    assert bank.lookup("b").label == "m"
    assert len(bank) == 2
    assert bank.labels == ("l", "m")


def test_empty_bank():
    bank = FeatureBank(8, "t", [])
    assert len(bank) == 0
    assert bank.matrix.shape == (0, 8)


def test_bank_equality():
    a = FeatureBank(6, "t", [record("x"), record("y", seed=1)])
    b = FeatureBank(6, "t", [record("y", seed=1), record("x")])
    assert a == b
    c = FeatureBank(6, "t", [record("x"), record("y", label="other", seed=1)])
    assert a != c


# ---------------------------------------------------------------- ingestion

def test_ingest_builds_sorted_manifest(tmp_path):
    make_tree(tmp_path)
    manifest = ingest_dataset(tmp_path)
    assert [e.id for e in manifest] == ["a/00.png", "a/01.png", "b/00.png"]
    assert manifest.labels() == ["a", "b"]
    assert all(e.label == e.id.split("/")[0] for e in manifest)


def test_ingest_skips_non_image_files(tmp_path):
    make_tree(tmp_path)
    (tmp_path / "a" / "notes.txt").write_text("not an image")
    assert len(ingest_dataset(tmp_path)) == 3


def test_ingest_empty_root(tmp_path):
    with pytest.raises(EmptyDatasetError):
        ingest_dataset(tmp_path)


def test_ingest_missing_root(tmp_path):
    with pytest.raises(UnreadableDirectoryError):
        ingest_dataset(tmp_path / "nope")


def test_ingest_category_tree_shape(tmp_path):
    # Listing never decodes, so placeholder files are enough for the shape.
    for c in range(10):
        sub = tmp_path / f"cat{c:02d}"
        sub.mkdir()
        for j in range(200):
            (sub / f"{j:03d}.png").touch()
    manifest = ingest_dataset(tmp_path)
    assert len(manifest) == 2000
    assert len(manifest.labels()) == 10


# ---------------------------------------------------------------- pipeline

def test_build_bank_null_matches_direct_extraction(tmp_path):
    make_tree(tmp_path)
    bank = build_bank(ingest_dataset(tmp_path), NULL, DESC)
    assert bank.dim == DESC.dim
    assert bank.descriptor_id == DESC.tag
    for r in bank.records:
        assert r.predicted_angle == 0.0
        assert np.array_equal(r.vector, extract(decode_image(r.source_path), DESC))


def test_build_bank_parallel_matches_serial(tmp_path):
    make_tree(tmp_path)
    manifest = ingest_dataset(tmp_path)
    assert build_bank(manifest, NULL, DESC, workers=4) == build_bank(manifest, NULL, DESC)


def test_build_bank_annotates_failing_id(tmp_path):
    make_tree(tmp_path)
    oracle = EstimatorConfig(kind="oracle")
    with pytest.raises(MissingGroundTruthError, match="a/00.png"):
        build_bank(ingest_dataset(tmp_path), oracle, DESC, gt={})


def test_build_bank_rejects_empty_manifest():
    with pytest.raises(EmptyDatasetError):
        build_bank(DatasetManifest(()), NULL, DESC)


def test_prerotated_quarter_turns_index_exactly():
    img = synth_arrow(25.0, 96)
    upright = extract(img, DESC)
    for angle in (90.0, 180.0, 270.0):
        bank = build_bank_from_images(
            [("x", "l", "", rotate(img, angle, "expand"))], PERFECT, DESC,
            gt={"x": angle},
        )
        assert np.array_equal(bank.records[0].vector, upright)


def test_prerotated_general_angles_bounded_drift():
    # A corrected pre-rotated copy lives on an expanded canvas with black
    # margins, so its resized cell statistics shift relative to the upright
    # original. Quarter turns avoid resampling and match exactly (above);
    # everything else stays within a bounded drift.
    img = synth_arrow(25.0, 96)
    upright = extract(img, DESC).astype(np.float64)
    for angle in (17.0, 123.0, 301.0):
        bank = build_bank_from_images(
            [("x", "l", "", rotate(img, angle, "expand"))], PERFECT, DESC,
            gt={"x": angle},
        )
        got = bank.records[0].vector.astype(np.float64)
        rms = np.sqrt(np.mean((got - upright) ** 2))
        assert rms <= 0.45


# ---------------------------------------------------------------- persistence

def test_save_load_round_trip(tmp_path):
    tree = tmp_path / "data"
    tree.mkdir()
    make_tree(tree)
    bank = build_bank(ingest_dataset(tree), NULL, DESC)
    path = tmp_path / "bank.ricb"
    save_bank(bank, path)
    assert (tmp_path / "bank.ricb.manifest.csv").is_file()
    loaded = load_bank(path)
    assert loaded == bank
    assert np.array_equal(loaded.matrix, bank.matrix)


def test_save_load_preserves_angles(tmp_path):
    records = [
        BankRecord("a", "l", "src/a.png", 33.25, vec(0)),
        BankRecord("b", "l", "src/b.png", 359.999, vec(1)),
    ]
    path = tmp_path / "bank.ricb"
    save_bank(FeatureBank(6, "t", records), path)
    loaded = load_bank(path)
    assert [r.predicted_angle for r in loaded.records] == [33.25, 359.999]
    assert [r.source_path for r in loaded.records] == ["src/a.png", "src/b.png"]


def test_save_load_empty_bank(tmp_path):
    path = tmp_path / "empty.ricb"
    save_bank(FeatureBank(4, "t", []), path)
    loaded = load_bank(path)
    assert len(loaded) == 0 and loaded.dim == 4 and loaded.descriptor_id == "t"


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "bank.ricb"
    save_bank(FeatureBank(6, "t", [record("x")]), path)
    data = bytearray(path.read_bytes())
    data[0] ^= 0xFF
    path.write_bytes(bytes(data))
    with pytest.raises(BadMagicError):
        load_bank(path)


def test_load_rejects_future_version(tmp_path):
    path = tmp_path / "bank.ricb"
    save_bank(FeatureBank(6, "t", [record("x")]), path)
    data = bytearray(path.read_bytes())
    data[4] = 2  # little-endian version field directly after the magic
    path.write_bytes(bytes(data))
    with pytest.raises(VersionMismatchError):
        load_bank(path)


def test_load_rejects_truncated_vector_block(tmp_path):
    path = tmp_path / "bank.ricb"
    save_bank(FeatureBank(6, "t", [record("x"), record("y", seed=1)]), path)
    data = path.read_bytes()
    path.write_bytes(data[:-3])
    with pytest.raises(DimMismatchError):
        load_bank(path)


def test_load_rejects_truncated_header(tmp_path):
    path = tmp_path / "bank.ricb"
    path.write_bytes(b"RICB\x01\x00\x00")
    with pytest.raises(DimMismatchError):
        load_bank(path)


def test_load_rejects_sidecar_desync(tmp_path):
    path = tmp_path / "bank.ricb"
    save_bank(FeatureBank(6, "t", [record("x"), record("y", seed=1)]), path)
    sidecar = tmp_path / "bank.ricb.manifest.csv"
    lines = sidecar.read_text().strip().splitlines()

    sidecar.write_text("\n".join(lines[:-1]) + "\n")  # drop one row
    with pytest.raises(ManifestDesyncError):
        load_bank(path)

    sidecar.write_text("who,what,where,when\n" + "\n".join(lines[1:]) + "\n")
    with pytest.raises(ManifestDesyncError):
        load_bank(path)

    sidecar.write_text(lines[0] + "\nonly,three,cols\n" + lines[2] + "\n")
    with pytest.raises(ManifestDesyncError):
        load_bank(path)


def test_import_embeddings_forces_zero_angle(tmp_path):
    records = [BankRecord("a", "l", "", 45.0, vec(0)), BankRecord("b", "l", "", 90.0, vec(1))]
    path = tmp_path / "bank.ricb"
    save_bank(FeatureBank(6, "t", records), path)
    imported = import_embeddings(path, tmp_path / "bank.ricb.manifest.csv")
    assert len(imported) == 2
    assert all(r.predicted_angle == 0.0 for r in imported.records)
    assert np.array_equal(imported.matrix, load_bank(path).matrix)


def test_import_embeddings_small_pair(tmp_path):
    bank = FeatureBank(4, "t", [record(c, seed=i, dim=4) for i, c in enumerate("abc")])
    path = tmp_path / "ext.ricb"
    save_bank(bank, path)
    imported = import_embeddings(path, tmp_path / "ext.ricb.manifest.csv")
    assert len(imported) == 3 and imported.dim == 4


# ---------------------------------------------------------------- sampling

def test_sample_bank_full_size_is_identity():
    bank = random_bank(np.random.default_rng(0), 20, 8)
    assert sample_bank(bank, 20, seed=5) == bank


def test_sample_bank_deterministic_subset():
    bank = random_bank(np.random.default_rng(1), 50, 8)
    a = sample_bank(bank, 10, seed=3)
    b = sample_bank(bank, 10, seed=3)
    assert a == b
    assert len(a) == 10
    assert set(a.ids) <= set(bank.ids)


def test_sample_bank_seed_changes_selection():
    bank = random_bank(np.random.default_rng(2), 1000, 4)
    assert sample_bank(bank, 500, seed=0).ids != sample_bank(bank, 500, seed=1).ids


def test_sample_bank_validation():
    bank = random_bank(np.random.default_rng(3), 5, 4)
    with pytest.raises(ValueError):
        sample_bank(bank, 0, seed=0)
    with pytest.raises(SampleTooLargeError):
        sample_bank(bank, 6, seed=0)
