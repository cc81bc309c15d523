"""Seeded synthetic imagery for experiments, demos and tests.

The arrow dataset's categories are evenly spaced pointing directions,
not colors: every image shares one base hue, and what distinguishes a
category is where its arrows point.  That choice is deliberate.  When an
image gets rotated its arrow swings toward another category's direction,
so category evidence really is destroyed by rotation corruption and
really is restored by orientation correction.  Color-based categories
would survive rotation untouched and mask the effect being studied.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imaging import ArrowStyle, RasterImage, save_png, synth_arrow
from .orientation import GroundTruthTable


_BASE_HUE = 0.08
_DIRECTION_JITTER_DEG = 6.0


def random_arrow_style(rng: np.random.Generator, hue: float = _BASE_HUE) -> ArrowStyle:
    """Per-image style jitter around a base hue."""
    return ArrowStyle(
        hue=(hue + rng.uniform(-0.015, 0.015)) % 1.0,
        thickness=float(rng.uniform(0.09, 0.16)),
        length=float(rng.uniform(0.50, 0.60)),
    )


def generate_arrow_dataset(
    root: str | Path,
    classes: int = 10,
    per_class: int = 40,
    size: int = 96,
    seed: int = 0,
    rotated_fraction: float = 0.0,
    angle_low: int = 30,
    angle_high: int = 330,
) -> GroundTruthTable:
    """Write a direction-class arrow dataset under ``root``; returns true angles.

    Category ``dirCC`` points at CC/classes of a full turn, give or take
    a few degrees of per-image jitter; hue, thickness and length vary a
    little but carry no category signal.  Images are rendered
    analytically at base direction plus their ground-truth rotation, so
    the returned table is exact.  With the default ``rotated_fraction``
    of 0 every image is upright (rotation 0).  Rotated images draw
    integer rotations from [angle_low, angle_high], keeping them clear
    of 0 for thresholding.
    """
    if classes < 1 or per_class < 1:
        raise ValueError("classes and per_class must be at least 1")
    if not 0.0 <= rotated_fraction <= 1.0:
        raise ValueError("rotated_fraction must be within [0, 1]")
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    total = classes * per_class
    rot_count = int(rotated_fraction * total)
    rotated = set(rng.choice(total, size=rot_count, replace=False).tolist())
    gt: GroundTruthTable = {}
    index = 0
    for c in range(classes):
        label = f"dir{c:02d}"
        (root / label).mkdir(exist_ok=True)
        direction = 360.0 * c / classes
        for j in range(per_class):
            style = random_arrow_style(rng)
            pointing = direction + rng.uniform(
                -_DIRECTION_JITTER_DEG, _DIRECTION_JITTER_DEG
            )
            rotation = (
                float(rng.integers(angle_low, angle_high + 1)) if index in rotated else 0.0
            )
            save_png(synth_arrow(pointing + rotation, size, style), root / label / f"{j:03d}.png")
            gt[f"{label}/{j:03d}.png"] = rotation
            index += 1
    return gt


def synth_smooth(size: int = 64, seed: int = 0, waves: int = 6) -> RasterImage:
    """Random band-limited color field, vignetted to black at the border.

    Smooth content keeps bilinear resampling error near zero, and the
    dark border means the black fill blended in at crop edges after a
    rotation round trip costs almost nothing.  Together that makes these
    fields usable fixtures for tight round-trip bounds at small sizes,
    where any border-bright image necessarily fails.
    """
    if size < 8:
        raise ValueError(f"size must be >= 8, got {size}")
    rng = np.random.default_rng(seed)
    ys, xs = np.mgrid[0:size, 0:size] / (size - 1)
    acc = np.zeros((size, size, 3), dtype=np.float64)
    for _ in range(waves):
        kx, ky = rng.uniform(-3.0, 3.0, size=2)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        weights = rng.uniform(-1.0, 1.0, size=3)
        acc += np.sin(2.0 * np.pi * (kx * xs + ky * ys) + phase)[..., None] * weights
    lo, hi = acc.min(), acc.max()
    span = hi - lo if hi > lo else 1.0
    window = (np.sin(np.pi * xs) * np.sin(np.pi * ys)) ** 0.75
    return RasterImage((0.95 * (acc - lo) / span) * window[..., None])


def synth_cartoon(size: int = 160, seed: int = 0) -> RasterImage:
    """Random flat-color scene: background plus rectangles and disks.

    Hard-edged flat regions make these scenes nearly fixed points of
    bilinear rotation round trips, unlike white noise where every pixel
    sits on an edge.
    """
    if size < 16:
        raise ValueError(f"size must be >= 16, got {size}")
    rng = np.random.default_rng(seed)
    px = np.empty((size, size, 3), dtype=np.float64)
    px[:] = rng.uniform(0.0, 1.0, size=3)
    yy, xx = np.mgrid[0:size, 0:size]
    for _ in range(12):
        x0, x1 = np.sort(rng.integers(0, size, size=2))
        y0, y1 = np.sort(rng.integers(0, size, size=2))
        px[y0 : y1 + 1, x0 : x1 + 1] = rng.uniform(0.0, 1.0, size=3)
    for _ in range(8):
        cx, cy = rng.uniform(0, size, size=2)
        r = rng.uniform(0.05 * size, 0.25 * size)
        mask = (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r
        px[mask] = rng.uniform(0.0, 1.0, size=3)
    return RasterImage(px)
