"""Image decoding, rotation, orientation correction, resizing, and synthesis.

Conventions
-----------
* Pixel data is a float64 array of shape (height, width, 3), RGB, every
  intensity in [0, 1].
* Angles are degrees, counterclockwise positive *as displayed* (row 0 at
  the top). ``theta = 0`` points east/right.
* Rotation happens about the geometric image center ((w-1)/2, (h-1)/2),
  with bilinear interpolation and black fill outside the source.
* Exact multiples of 90 degrees take a lossless permutation path
  (``numpy.rot90``), so those rotations are bit-exact and invertible.
"""
from __future__ import annotations

import colorsys
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import CorruptImageError, NonFiniteAngleError, UnsupportedFormatError

_ALLOWED_FORMATS = {"PNG", "JPEG", "BMP"}


@dataclass
class RasterImage:
    """Decoded RGB image; the unit flowing through the pipeline."""

    pixels: np.ndarray  # (height, width, 3) float64 in [0, 1]

    def __post_init__(self) -> None:
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"pixels must have shape (h, w, 3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("image must be at least 1x1")
        if not np.all(np.isfinite(px)):
            raise ValueError("pixel intensities must be finite")
        if px.min() < 0.0 or px.max() > 1.0:
            raise ValueError("pixel intensities must lie in [0, 1]")
        self.pixels = px

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def channels(self) -> int:
        return 3


def _decode_open(opener, what: str) -> RasterImage:
    try:
        with opener() as im:
            if im.format not in _ALLOWED_FORMATS:
                raise UnsupportedFormatError(
                    f"{what}: format {im.format!r} not supported (PNG/JPEG/BMP only)"
                )
            im.load()
            rgba = im.convert("RGBA")
    except UnsupportedFormatError:
        raise
    except UnidentifiedImageError as exc:
        raise UnsupportedFormatError(f"{what}: not a recognized image file") from exc
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptImageError(f"{what}: failed to decode ({exc})") from exc
    arr = np.asarray(rgba, dtype=np.float64) / 255.0
    rgb = arr[:, :, :3] * arr[:, :, 3:4]  # composite over black
    return RasterImage(rgb)


def decode_image(path: str | Path) -> RasterImage:
    """Decode a PNG/JPEG/BMP file to an RGB image scaled to [0, 1].

    Grayscale sources are replicated across channels; alpha is composited
    over black. EXIF orientation is deliberately ignored.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image file: {path}")
    return _decode_open(lambda: Image.open(path), str(path))


def decode_image_bytes(data: bytes) -> RasterImage:
    """Decode an in-memory PNG/JPEG/BMP payload (for uploads)."""
    return _decode_open(lambda: Image.open(io.BytesIO(data)), "<bytes>")


def save_png(img: RasterImage, path: str | Path) -> None:
    """Debug/export dump of an image to an 8-bit PNG."""
    data = np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(Path(path), format="PNG")


def png_bytes(img: RasterImage) -> bytes:
    """Encode an image as an in-memory 8-bit PNG."""
    data = np.clip(np.rint(img.pixels * 255.0), 0, 255).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(data, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def _wrap(theta: float) -> float:
    theta = float(theta)
    if not math.isfinite(theta):
        raise NonFiniteAngleError(f"angle must be finite, got {theta}")
    return theta % 360.0


def _place_centered(src: np.ndarray, height: int, width: int) -> np.ndarray:
    """Crop or zero-pad ``src`` onto a height x width canvas, centers aligned."""
    out = np.zeros((height, width, 3), dtype=src.dtype)
    hs, ws = src.shape[:2]
    dy = (height - hs) // 2
    dx = (width - ws) // 2
    ys, xs = max(0, -dy), max(0, -dx)
    yo, xo = max(0, dy), max(0, dx)
    h = min(hs - ys, height - yo)
    w = min(ws - xs, width - xo)
    out[yo:yo + h, xo:xo + w] = src[ys:ys + h, xs:xs + w]
    return out


def _bilinear_gather(px: np.ndarray, src_x: np.ndarray, src_y: np.ndarray,
                     fill_black: bool) -> np.ndarray:
    """Sample ``px`` at fractional positions; outside either fades to black
    (``fill_black``) or clamps to the edge (resize semantics)."""
    h, w = px.shape[:2]
    if fill_black:
        x0 = np.floor(src_x).astype(np.int64)
        y0 = np.floor(src_y).astype(np.int64)
        fx = (src_x - x0)[..., None]
        fy = (src_y - y0)[..., None]
        padded = np.zeros((h + 2, w + 2, 3), dtype=px.dtype)
        padded[1:-1, 1:-1] = px
        x0c = np.clip(x0, -1, w) + 1
        x1c = np.clip(x0 + 1, -1, w) + 1
        y0c = np.clip(y0, -1, h) + 1
        y1c = np.clip(y0 + 1, -1, h) + 1
        top = (1.0 - fx) * padded[y0c, x0c] + fx * padded[y0c, x1c]
        bot = (1.0 - fx) * padded[y1c, x0c] + fx * padded[y1c, x1c]
        out = (1.0 - fy) * top + fy * bot
        # Positions more than one pixel outside must not pull edge values in
        # through index clipping.
        valid = ((src_x > -1.0) & (src_x < w) & (src_y > -1.0) & (src_y < h))
        out[~valid] = 0.0
        return out
    x0 = np.floor(src_x).astype(np.int64)
    y0 = np.floor(src_y).astype(np.int64)
    fx = (src_x - x0)[..., None]
    fy = (src_y - y0)[..., None]
    x0c = np.clip(x0, 0, w - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    top = (1.0 - fx) * px[y0c, x0c] + fx * px[y0c, x1c]
    bot = (1.0 - fx) * px[y1c, x0c] + fx * px[y1c, x1c]
    return (1.0 - fy) * top + fy * bot


def rotate(img: RasterImage, theta: float, canvas: str = "expand") -> RasterImage:
    """Rotate counterclockwise by ``theta`` degrees about the image center.

    ``canvas="expand"`` sizes the output to the bounding box of the rotated
    rectangle; ``canvas="keep"`` retains the source dimensions and clips.
    Multiples of 90 degrees are exact pixel permutations.
    """
    if canvas not in ("expand", "keep"):
        raise ValueError(f"canvas must be 'expand' or 'keep', got {canvas!r}")
    theta = _wrap(theta)
    px = img.pixels
    h, w = px.shape[:2]

    if theta % 90.0 == 0.0:
        k = int(theta // 90.0) % 4
        turned = np.rot90(px, k=k) if k else px.copy()
        if canvas == "keep" and turned.shape[:2] != (h, w):
            turned = _place_centered(turned, h, w)
        return RasterImage(np.ascontiguousarray(turned))

    rad = math.radians(theta)
    c, s = math.cos(rad), math.sin(rad)
    if canvas == "expand":
        out_w = math.ceil(w * abs(c) + h * abs(s) - 1e-9)
        out_h = math.ceil(w * abs(s) + h * abs(c) - 1e-9)
    else:
        out_w, out_h = w, h
    cx_in, cy_in = (w - 1) / 2.0, (h - 1) / 2.0
    cx_out, cy_out = (out_w - 1) / 2.0, (out_h - 1) / 2.0

    xs = np.arange(out_w, dtype=np.float64) - cx_out
    ys = np.arange(out_h, dtype=np.float64) - cy_out
    u, v = np.meshgrid(xs, ys)
    # Inverse map of the display-CCW rotation (y axis points down).
    src_x = cx_in + c * u - s * v
    src_y = cy_in + s * u + c * v
    out = _bilinear_gather(px, src_x, src_y, fill_black=True)
    return RasterImage(np.clip(out, 0.0, 1.0))


def correct_orientation(img: RasterImage, predicted: float) -> RasterImage:
    """Undo a predicted counterclockwise rotation (rotate clockwise by it)."""
    return rotate(img, _wrap(-_wrap(predicted)), canvas="expand")


def resize(img: RasterImage, w: int, h: int) -> RasterImage:
    """Bilinear resample to w x h (half-pixel-center sampling, edge clamp)."""
    if w < 1 or h < 1:
        raise ValueError(f"target size must be >= 1, got {w}x{h}")
    px = img.pixels
    if (h, w) == px.shape[:2]:
        return RasterImage(px.copy())
    src_h, src_w = px.shape[:2]
    xs = (np.arange(w, dtype=np.float64) + 0.5) * (src_w / w) - 0.5
    ys = (np.arange(h, dtype=np.float64) + 0.5) * (src_h / h) - 0.5
    gx, gy = np.meshgrid(xs, ys)
    out = _bilinear_gather(px, gx, gy, fill_black=False)
    return RasterImage(np.clip(out, 0.0, 1.0))


def center_crop(img: RasterImage, w: int, h: int) -> RasterImage:
    """Crop (or zero-pad) to w x h about the image center."""
    return RasterImage(_place_centered(img.pixels, h, w))


@dataclass(frozen=True)
class ArrowStyle:
    """Rendering knobs for :func:`synth_arrow`."""

    hue: float = 0.0          # [0, 1] color wheel position
    thickness: float = 0.12   # shaft width as a fraction of the canvas size
    length: float = 0.55      # tip-to-tail extent as a fraction of the canvas size


_DEFAULT_STYLE = ArrowStyle()


def synth_arrow(theta: float, size: int, style: ArrowStyle = _DEFAULT_STYLE) -> RasterImage:
    """Render an arrow pointing in direction ``theta`` on a black canvas.

    The shape (stub shaft plus a long tapering head) is 180-degree
    asymmetric with both its footprint centroid and its mass skew on the
    pointing side, so the full [0, 360) orientation is recoverable from
    second-plus-third moment statistics.  Rendering is analytic in
    rotated coordinates with ~1px soft edges, which makes it
    deterministic and exactly equivariant at multiples of 90 degrees.
    """
    if size < 32:
        raise ValueError(f"size must be >= 32, got {size}")
    theta = _wrap(theta)
    if theta % 90.0 == 0.0:
        # Exact trig at the cardinal angles keeps 90-degree equivariance
        # bit-exact against the rotate() fast path.
        quadrant = int(theta // 90.0) % 4
        c = (1.0, 0.0, -1.0, 0.0)[quadrant]
        s = (0.0, 1.0, 0.0, -1.0)[quadrant]
    else:
        rad = math.radians(theta)
        c, s = math.cos(rad), math.sin(rad)

    center = (size - 1) / 2.0
    xs = np.arange(size, dtype=np.float64) - center
    ys_down = np.arange(size, dtype=np.float64) - center
    u, vdown = np.meshgrid(xs, ys_down)
    v = -vdown  # y-up frame so angles read counterclockwise on screen
    t = u * c + v * s          # along the pointing direction
    p = -u * s + v * c         # perpendicular offset

    # Tail sits closer to the canvas center than the tip and the head
    # spans most of the extent: that combination keeps the third moment
    # along the axis positive toward the tip, which the orientation
    # estimator relies on to tell head from tail.
    extent = style.length * size
    tip = 0.75 * extent
    tail = -0.25 * extent
    head_len = 0.80 * extent
    base = tip - head_len
    shaft_hw = max(1.0, style.thickness * size / 2.0)
    head_hw = 2.4 * shaft_hw

    def ramp(d: np.ndarray) -> np.ndarray:
        # d is a signed distance in pixels; 1px-wide linear edge.
        return np.clip(d + 0.5, 0.0, 1.0)

    shaft = ramp(t - tail) * ramp(base - t) * ramp(shaft_hw - np.abs(p))
    slant = head_len / math.hypot(head_len, head_hw)
    head_hw_at_t = head_hw * (tip - t) / head_len
    head = ramp(t - base) * ramp((head_hw_at_t - np.abs(p)) * slant)
    coverage = np.maximum(shaft, head)

    rgb = np.array(colorsys.hsv_to_rgb(style.hue % 1.0, 1.0, 1.0), dtype=np.float64)
    return RasterImage(np.clip(coverage[..., None] * rgb, 0.0, 1.0))
