"""Grid-moments feature extraction.

Resize to a square canvas, split into a g x g cell grid, and emit per
cell, per RGB channel, the mean and population standard deviation of the
intensities. With the defaults (224 canvas, 16 cells) the vector is
16*16*3*2 = 1536-dimensional. The descriptor is deliberately
rotation-sensitive: rotating an image moves mass between cells.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigInvalidError
from .imaging import RasterImage, resize

FeatureVector = np.ndarray  # (dim,) float32

_TAG_PREFIX = "grid-moments"


@dataclass(frozen=True)
class DescriptorConfig:
    canvas: int = 224  # square resize target, must be divisible by grid
    grid: int = 16     # cells per side

    def __post_init__(self) -> None:
        if self.canvas < 1 or self.grid < 1:
            raise ConfigInvalidError("canvas and grid must be >= 1")
        if self.canvas % self.grid != 0:
            raise ConfigInvalidError(
                f"canvas {self.canvas} not divisible by grid {self.grid}"
            )

    @property
    def dim(self) -> int:
        return self.grid * self.grid * 3 * 2

    @property
    def tag(self) -> str:
        """Identifier stored in bank headers; parseable back into a config."""
        return f"{_TAG_PREFIX}:c{self.canvas}:g{self.grid}"

    @classmethod
    def from_tag(cls, tag: str) -> "DescriptorConfig":
        parts = tag.split(":")
        if len(parts) != 3 or parts[0] != _TAG_PREFIX:
            raise ConfigInvalidError(f"not a grid-moments descriptor tag: {tag!r}")
        try:
            canvas = int(parts[1].removeprefix("c"))
            grid = int(parts[2].removeprefix("g"))
        except ValueError as exc:
            raise ConfigInvalidError(f"malformed descriptor tag: {tag!r}") from exc
        return cls(canvas=canvas, grid=grid)


def extract(img: RasterImage, cfg: DescriptorConfig = DescriptorConfig()) -> FeatureVector:
    """Extract the grid-moments vector; component order is
    (cell_y, cell_x, channel, stat) with stat = (mean, stddev)."""
    square = resize(img, cfg.canvas, cfg.canvas).pixels
    cell = cfg.canvas // cfg.grid
    # (gy, cell_y, gx, cell_x, ch) -> stats over the two in-cell axes
    cells = square.reshape(cfg.grid, cell, cfg.grid, cell, 3)
    mean = cells.mean(axis=(1, 3))
    var = np.square(cells - mean[:, None, :, None, :]).mean(axis=(1, 3))
    # Clamp accumulation noise so constant cells report exactly zero spread.
    var[var < 1e-12] = 0.0
    std = np.sqrt(var)
    out = np.stack([mean, std], axis=-1)  # (gy, gx, ch, 2)
    return out.reshape(-1).astype(np.float32)
