"""Time-aware color smoothing (TACS) and the Gaussian-blur baseline.

TACS replaces every pixel by the median color of a pooling window that spans
the current column and ``time_ahead`` future columns.  The window is
``neighborhood_size`` rows tall at the current column and loses
``2 * step_size`` rows per future column (never fewer than one).  Pool colors
are sorted by their distance from RGB black (equal distances by RGB value)
and the lower median is picked, so the output only ever contains colors from
the pool.

Both filters read exclusively from the input image.
"""
from __future__ import annotations

from collections.abc import Callable, Sequence
from typing import Any
from dataclasses import dataclass

import numpy as np

from .colormap2d import Rgb8, round_half_up
from .errors import ShapeMismatch
from .rug_render import RugImage


@dataclass(frozen=True)
class PoolingMatrix:
    neighborhood_size: int = 5
    time_ahead: int = 3
    step_size: int = 1

    def __post_init__(self):
        if self.neighborhood_size < 1 or self.neighborhood_size % 2 == 0:
            raise ValueError("neighborhood_size must be a positive odd integer")
        if self.time_ahead < 0 or self.step_size < 0:
            raise ValueError("time_ahead and step_size must be non-negative")

    def width_at(self, d: int) -> int:
        return max(1, self.neighborhood_size - 2 * self.step_size * d)

    def offsets(self) -> list[tuple[int, int]]:
        """``(column offset, row offset)`` pairs in collection order."""
        out = []
        for d in range(self.time_ahead + 1):
            half = self.width_at(d) // 2
            out.extend((d, r) for r in range(-half, half + 1))
        return out

    @property
    def max_pool_size(self) -> int:
        return len(self.offsets())


@dataclass(frozen=True)
class GaussianParams:
    sigma: float = 1.0
    window: int = 5

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.window < 3 or self.window % 2 == 0:
            raise ValueError("window must be an odd integer >= 3")


def rgb_norm_key(color) -> tuple[float, int, int, int]:
    """Distance from black, then the RGB triple to order equal-norm colors.

    The tie-break makes the order total on distinct colors, so equal colors
    always sit together and a color filling more than half a pool is its
    median.  Ordering ties by collection order instead lets pure green and
    pure blue (both at norm 255) interleave, and the median then lands on
    whichever happens to be in the middle.
    """
    r, g, b = (int(c) for c in color)
    return ((r * r + g * g + b * b) ** 0.5, r, g, b)


def collect_pool(img: RugImage, t: int, k: int, m: PoolingMatrix) -> list[Rgb8]:
    """Colors under the pooling window anchored at column ``t``, row ``k``.

    Rows and columns outside the image are skipped.
    """
    if not (0 <= t < img.width and 0 <= k < img.height):
        raise IndexError(f"pixel ({t}, {k}) outside {img.width}x{img.height} image")
    pool = []
    for dt, dk in m.offsets():
        tt, kk = t + dt, k + dk
        if tt < img.width and 0 <= kk < img.height:
            pool.append(img.pixel(tt, kk))
    return pool


def pool_median(colors: Sequence[Rgb8], key: Callable[[Rgb8], Any] = rgb_norm_key) -> Rgb8:
    """Lower median of ``colors`` after a stable sort by ``key``."""
    if not colors:
        raise ValueError("pool is empty")
    ordered = sorted(colors, key=key)
    return tuple(ordered[(len(ordered) - 1) // 2])


def tacs_smooth_reference(img: RugImage, m: PoolingMatrix) -> RugImage:
    """Pixel-by-pixel TACS; slow, kept as the readable definition."""
    out = np.empty_like(img.pixels)
    for k in range(img.height):
        for t in range(img.width):
            out[k, t] = pool_median(collect_pool(img, t, k, m))
    return RugImage(out)


def _pool_stack(img: RugImage, m: PoolingMatrix) -> tuple[np.ndarray, np.ndarray]:
    """All pools at once: colors ``(P, H, W, 3)`` and validity ``(P, H, W)``."""
    h, w = img.height, img.width
    offsets = m.offsets()
    half = max(abs(dk) for _, dk in offsets)
    padded = np.zeros((h + 2 * half, w + m.time_ahead, 3), dtype=np.uint8)
    padded[half : half + h, :w] = img.pixels
    valid_pad = np.zeros(padded.shape[:2], dtype=bool)
    valid_pad[half : half + h, :w] = True
    colors = np.empty((len(offsets), h, w, 3), dtype=np.uint8)
    valid = np.empty((len(offsets), h, w), dtype=bool)
    for i, (dt, dk) in enumerate(offsets):
        colors[i] = padded[half + dk : half + dk + h, dt : dt + w]
        valid[i] = valid_pad[half + dk : half + dk + h, dt : dt + w]
    return colors, valid


def tacs_smooth(img: RugImage, m: PoolingMatrix) -> RugImage:
    """Vectorized TACS, bit-identical to :func:`tacs_smooth_reference`.

    The key packs the squared norm above the 24 RGB bits, which orders colors
    exactly like :func:`rgb_norm_key`.  Clipped cells get the largest key so
    they sort after every real color.
    """
    colors, valid = _pool_stack(img, m)
    c = colors.astype(np.int64)
    key = ((c * c).sum(axis=-1) << 24) | (c[..., 0] << 16) | (c[..., 1] << 8) | c[..., 2]
    key = np.where(valid, key, np.iinfo(np.int64).max)
    order = np.argsort(key, axis=0, kind="stable")
    median_rank = (valid.sum(axis=0) - 1) // 2
    pick = np.take_along_axis(order, median_rank[None], axis=0)[0]
    out = np.take_along_axis(colors, pick[None, ..., None], axis=0)[0]
    return RugImage(out)


def pool_membership(img: RugImage, smoothed: RugImage, m: PoolingMatrix) -> np.ndarray:
    """Boolean map: is each output pixel's color present in its input pool?"""
    if img.pixels.shape != smoothed.pixels.shape:
        raise ShapeMismatch("images differ in size")
    colors, valid = _pool_stack(img, m)
    same = np.all(colors == smoothed.pixels[None], axis=-1) & valid
    return same.any(axis=0)


def gaussian_kernel(p: GaussianParams) -> np.ndarray:
    half = p.window // 2
    x = np.arange(-half, half + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * p.sigma**2))
    return k / k.sum()


def _filter_axis(a: np.ndarray, kernel: np.ndarray, axis: int) -> np.ndarray:
    """Correlate along ``axis`` with edge replication."""
    half = len(kernel) // 2
    pad = [(0, 0)] * a.ndim
    pad[axis] = (half, half)
    padded = np.pad(a, pad, mode="edge")
    n = a.shape[axis]
    out = np.zeros(a.shape, dtype=np.float64)
    for i, wgt in enumerate(kernel):
        out += wgt * np.take(padded, np.arange(i, i + n), axis=axis)
    return out


def gaussian_filter_float(a: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable 2D filter over the first two axes of ``a`` (replicate borders)."""
    return _filter_axis(_filter_axis(np.asarray(a, dtype=np.float64), kernel, 0), kernel, 1)


def gaussian_blur(img: RugImage, p: GaussianParams) -> RugImage:
    blurred = gaussian_filter_float(img.pixels, gaussian_kernel(p))
    return RugImage(round_half_up(blurred))


@dataclass(frozen=True)
class DifferenceMask:
    mask: np.ndarray
    changed_fraction: float


def difference_mask(a: RugImage, b: RugImage, threshold: int = 0) -> DifferenceMask:
    """Pixels whose largest channel difference exceeds ``threshold``."""
    if a.pixels.shape != b.pixels.shape:
        raise ShapeMismatch(f"image sizes differ: {a.pixels.shape} vs {b.pixels.shape}")
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    diff = np.abs(a.pixels.astype(np.int16) - b.pixels.astype(np.int16)).max(axis=-1)
    mask = diff > threshold
    return DifferenceMask(mask, float(mask.mean()))


def transition_map(img: RugImage, threshold: int = 30) -> np.ndarray:
    """Pixels with a 4-neighbour whose largest channel difference exceeds ``threshold``."""
    px = img.pixels.astype(np.int16)
    out = np.zeros(px.shape[:2], dtype=bool)
    dv = np.abs(np.diff(px, axis=0)).max(axis=-1) > threshold
    dh = np.abs(np.diff(px, axis=1)).max(axis=-1) > threshold
    out[1:] |= dv
    out[:-1] |= dv
    out[:, 1:] |= dh
    out[:, :-1] |= dh
    return out
