"""Dense-pixel rug images.

A rug has one column per frame and one row per mover; row ``k`` of column
``t`` shows the mover ranked ``k`` by the frame's linear order.  Pixels are
stored as an ``(height, width, 3)`` uint8 array, so ``pixels[k, t]`` is the
pixel at column ``t``, row ``k``.
"""
from __future__ import annotations

import io
import warnings
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .colormap2d import BLUE, RED, WHITE, Rgb8, round_half_up, sample_grid
from .errors import ShapeMismatch, SpatialRugsError, UnknownFeature
from .linearization import LinearOrder
from .movement_data import Dataset


class DegenerateRangeWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class RugImage:
    pixels: np.ndarray

    def __post_init__(self):
        px = np.ascontiguousarray(self.pixels)
        if px.ndim != 3 or px.shape[2] != 3:
            raise ValueError(f"pixels must have shape (height, width, 3), got {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise ValueError("rug must be at least 1x1")
        if px.dtype != np.uint8:
            if np.any(px < 0) or np.any(px > 255) or not np.all(np.equal(np.mod(px, 1), 0)):
                raise ValueError("pixel values must be integers in [0, 255]")
            px = px.astype(np.uint8)
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def pixel(self, t: int, k: int) -> Rgb8:
        return tuple(int(c) for c in self.pixels[k, t])

    def columns(self, start: int, stop: int) -> "RugImage":
        return RugImage(self.pixels[:, start:stop])

    def __eq__(self, other):
        if not isinstance(other, RugImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None


@dataclass(frozen=True)
class Colormap1D:
    """Piecewise-linear ramp through ``(position, color)`` stops from 0 to 1."""

    stops: tuple[tuple[float, Rgb8], ...]

    def __post_init__(self):
        stops = tuple((float(p), tuple(int(c) for c in rgb)) for p, rgb in self.stops)
        if len(stops) < 2:
            raise ValueError("a 1D colormap needs at least two stops")
        pos = [p for p, _ in stops]
        if pos[0] != 0.0 or pos[-1] != 1.0 or any(b <= a for a, b in zip(pos, pos[1:])):
            raise ValueError("stop positions must increase strictly from 0 to 1")
        object.__setattr__(self, "stops", stops)

    def lookup(self, s) -> np.ndarray:
        s = np.clip(np.asarray(s, dtype=np.float64), 0.0, 1.0)
        pos = np.array([p for p, _ in self.stops])
        cols = np.array([c for _, c in self.stops], dtype=np.float64)
        out = np.stack([np.interp(s, pos, cols[:, ch]) for ch in range(3)], axis=-1)
        return round_half_up(out)


BLUE_WHITE_RED = Colormap1D(((0.0, BLUE), (0.5, WHITE), (1.0, RED)))


def render_spatial_rug(d: Dataset, lo: LinearOrder, pc) -> RugImage:
    """Color each mover by its position through a fitted 2D colormap."""
    if lo.ranks.shape != (d.frame_count, d.mover_count):
        raise ShapeMismatch(f"order shape {lo.ranks.shape} != dataset {(d.frame_count, d.mover_count)}")
    if pc.extent != d.extent:
        raise ShapeMismatch("colorizer extent differs from dataset extent")
    frames = np.arange(d.frame_count)[:, None]
    ordered = d.positions[frames, lo.ranks]  # (frames, rows, 2)
    colors = pc.colorize(ordered[..., 0], ordered[..., 1])
    return RugImage(np.ascontiguousarray(colors.transpose(1, 0, 2)))


def render_motion_rug(
    d: Dataset,
    lo: LinearOrder,
    feature: str,
    cm1: Colormap1D = BLUE_WHITE_RED,
    value_range: tuple[float, float] | None = None,
    *,
    invert: bool = False,
) -> RugImage:
    """Color each mover by a scalar feature.

    ``value_range=None`` uses the dataset's global min and max.  With
    ``invert=True`` high values take the ramp's first stop.
    """
    if feature not in d.features:
        raise UnknownFeature(f"feature {feature!r} not in dataset (have: {sorted(d.features)})")
    if lo.ranks.shape != (d.frame_count, d.mover_count):
        raise ShapeMismatch(f"order shape {lo.ranks.shape} != dataset {(d.frame_count, d.mover_count)}")
    values = d.features[feature]
    if value_range is None:
        lo_val, hi_val = float(values.min()), float(values.max())
        if hi_val == lo_val:
            warnings.warn(
                f"feature {feature!r} is constant ({lo_val}); rendering the midpoint color",
                DegenerateRangeWarning,
                stacklevel=2,
            )
            s = np.full(values.shape, 0.5)
        else:
            s = (values - lo_val) / (hi_val - lo_val)
    else:
        lo_val, hi_val = map(float, value_range)
        if not hi_val > lo_val:
            raise SpatialRugsError(f"invalid feature range ({lo_val}, {hi_val})")
        s = (values - lo_val) / (hi_val - lo_val)
    s = np.clip(s, 0.0, 1.0)
    if invert:
        s = 1.0 - s
    frames = np.arange(d.frame_count)[:, None]
    colors = cm1.lookup(s[frames, lo.ranks])
    return RugImage(np.ascontiguousarray(colors.transpose(1, 0, 2)))


def render_swatch(cm, size: int = 256) -> RugImage:
    """Legend image of a 2D colormap, top-left = ``lookup(0, 0)``."""
    return RugImage(sample_grid(cm, size))


def encode_png(img: RugImage, scale: int = 1) -> bytes:
    """8-bit RGB PNG, each pixel blown up to a ``scale x scale`` block."""
    if scale < 1:
        raise ValueError("scale must be >= 1")
    px = img.pixels
    if scale > 1:
        px = np.repeat(np.repeat(px, scale, axis=0), scale, axis=1)
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(px), mode="RGB").save(buf, format="PNG", optimize=False)
    return buf.getvalue()


def decode_png(data: bytes) -> RugImage:
    with Image.open(io.BytesIO(data)) as im:
        return RugImage(np.asarray(im.convert("RGB")))


def mask_to_image(mask: np.ndarray) -> RugImage:
    """Binary mask as a black/white rug (changed pixels white)."""
    px = np.where(np.asarray(mask, dtype=bool)[..., None], 255, 0).astype(np.uint8)
    return RugImage(np.broadcast_to(px, px.shape[:2] + (3,)).copy())
