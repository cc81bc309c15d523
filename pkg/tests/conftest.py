"""Shared fixtures: the seeded synthetic arrow dataset and banks over it."""

import numpy as np
import pytest

from ricb.bank import FeatureBank, BankRecord, build_bank, ingest_dataset
from ricb.descriptor import DescriptorConfig
from ricb.orientation import EstimatorConfig
from ricb.synthetic import generate_arrow_dataset

ARROW_CLASSES = 10
ARROW_PER_CLASS = 40
ARROW_SIZE = 96
ARROW_SEED = 0


@pytest.fixture(scope="session")
def arrow_root(tmp_path_factory):
    root = tmp_path_factory.mktemp("arrows")
    generate_arrow_dataset(
        root,
        classes=ARROW_CLASSES,
        per_class=ARROW_PER_CLASS,
        size=ARROW_SIZE,
        seed=ARROW_SEED,
    )
    return root


@pytest.fixture(scope="session")
def arrow_manifest(arrow_root):
    return ingest_dataset(arrow_root)


@pytest.fixture(scope="session")
def arrow_bank(arrow_manifest):
    return build_bank(
        arrow_manifest, EstimatorConfig(kind="null"), DescriptorConfig(), workers=4
    )


def random_bank(rng: np.random.Generator, n: int, dim: int, labels: int = 3) -> FeatureBank:
    """Random float32 bank with ids b0000..; shared by the oracle suites."""
    records = [
        BankRecord(
            id=f"b{i:04d}",
            label=f"l{int(rng.integers(labels))}",
            source_path="",
            predicted_angle=0.0,
            vector=rng.random(dim, dtype=np.float32),
        )
        for i in range(n)
    ]
    return FeatureBank(dim, "test:random", records)
