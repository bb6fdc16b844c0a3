"""Per-frame 1D orderings of 2D mover positions.

Keys are computed on positions normalized to the unit square by the dataset
extent, with ``u`` running left to right and ``v`` top to bottom.  All sorts
are stable, so movers with equal keys keep their canonical order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import PositionOutsideExtent, ShapeMismatch
from .movement_data import BoundingBox, Dataset

DEFAULT_CURVE_ORDER = 9
DEFAULT_LEAF_CAPACITY = 8
EXTENT_TOLERANCE = 1e-9


@dataclass(frozen=True)
class HilbertCurve:
    order: int = DEFAULT_CURVE_ORDER

    def __post_init__(self):
        _check_order(self.order)


@dataclass(frozen=True)
class ZOrder:
    order: int = DEFAULT_CURVE_ORDER

    def __post_init__(self):
        _check_order(self.order)


@dataclass(frozen=True)
class SpatialIndexTraversal:
    leaf_capacity: int = DEFAULT_LEAF_CAPACITY

    def __post_init__(self):
        if self.leaf_capacity < 1:
            raise ValueError("leaf_capacity must be positive")


@dataclass(frozen=True)
class XSort:
    pass


LinearizationStrategy = Union[HilbertCurve, ZOrder, SpatialIndexTraversal, XSort]


def _check_order(order: int) -> None:
    if not 1 <= order <= 16:
        raise ValueError(f"curve order must be in [1, 16], got {order}")


def strategy_from_string(text: str) -> LinearizationStrategy:
    """Parse ``hilbert[:order]``, ``zorder[:order]``, ``str[:capacity]`` or ``xsort``."""
    name, _, arg = text.strip().lower().partition(":")
    if name == "hilbert":
        return HilbertCurve(int(arg) if arg else DEFAULT_CURVE_ORDER)
    if name in ("zorder", "z", "morton"):
        return ZOrder(int(arg) if arg else DEFAULT_CURVE_ORDER)
    if name in ("str", "rtree", "index"):
        return SpatialIndexTraversal(int(arg) if arg else DEFAULT_LEAF_CAPACITY)
    if name == "xsort":
        return XSort()
    raise ValueError(f"unknown linearization strategy {text!r}")


def strategy_to_string(s: LinearizationStrategy) -> str:
    if isinstance(s, HilbertCurve):
        return f"hilbert:{s.order}"
    if isinstance(s, ZOrder):
        return f"zorder:{s.order}"
    if isinstance(s, SpatialIndexTraversal):
        return f"str:{s.leaf_capacity}"
    return "xsort"


# --------------------------------------------------------------------------
# Space-filling curve keys


def _cells(u, v, order: int) -> tuple[np.ndarray, np.ndarray]:
    side = 1 << order
    u = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)
    v = np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0)
    col = np.minimum(np.floor(u * side), side - 1).astype(np.int64)
    row = np.minimum(np.floor(v * side), side - 1).astype(np.int64)
    return col, row


def hilbert_cell_index(col, row, order: int):
    """Visit index of integer cell ``(col, row)`` on the order-``order`` Hilbert curve.

    The curve starts in the top-left cell, runs down first, and ends in the
    top-right cell.
    """
    x = np.array(col, dtype=np.int64, copy=True)
    y = np.array(row, dtype=np.int64, copy=True)
    d = np.zeros(np.broadcast(x, y).shape, dtype=np.int64)
    s = 1 << (order - 1)
    while s > 0:
        rx = (x & s) > 0
        ry = (y & s) > 0
        d += s * s * ((3 * rx) ^ ry)
        # rotate the quadrant so the sub-curve has the canonical orientation
        flip = ~ry & rx
        x = np.where(flip, s - 1 - x, x)
        y = np.where(flip, s - 1 - y, y)
        swap = ~ry
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        x &= s - 1
        y &= s - 1
        s >>= 1
    return d


def hilbert_index(u, v, order: int = DEFAULT_CURVE_ORDER):
    """Hilbert key in ``[0, 4**order)`` of the cell containing ``(u, v)``.

    Inputs are clamped to ``[0, 1]``; ``u == 1`` or ``v == 1`` fall in the
    last cell.  Scalars in, int out; arrays in, int64 array out.
    """
    _check_order(order)
    col, row = _cells(u, v, order)
    d = hilbert_cell_index(col, row, order)
    return int(d) if d.ndim == 0 else d


def z_cell_index(col, row, order: int):
    col = np.asarray(col, dtype=np.int64)
    row = np.asarray(row, dtype=np.int64)
    z = np.zeros(np.broadcast(col, row).shape, dtype=np.int64)
    for bit in range(order):
        z |= ((col >> bit) & 1) << (2 * bit)
        z |= ((row >> bit) & 1) << (2 * bit + 1)
    return z


def z_index(u, v, order: int = DEFAULT_CURVE_ORDER):
    """Morton key: column bits on even positions, row bits on odd positions."""
    _check_order(order)
    col, row = _cells(u, v, order)
    z = z_cell_index(col, row, order)
    return int(z) if z.ndim == 0 else z


# --------------------------------------------------------------------------
# Frame ordering


def normalize_positions(positions, extent: BoundingBox) -> np.ndarray:
    """Map world positions into the unit square; tiny overshoots are clamped."""
    pts = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
    uv = np.empty_like(pts)
    uv[:, 0] = (pts[:, 0] - extent.min_x) / extent.width
    uv[:, 1] = (pts[:, 1] - extent.min_y) / extent.height
    outside = (uv < -EXTENT_TOLERANCE) | (uv > 1 + EXTENT_TOLERANCE)
    if outside.any():
        i = int(np.argwhere(outside.any(axis=1))[0, 0])
        raise PositionOutsideExtent(
            f"position {tuple(pts[i])} lies outside extent {extent.as_tuple()}"
        )
    return np.clip(uv, 0.0, 1.0)


def _str_leaves(uv: np.ndarray, capacity: int) -> list[np.ndarray]:
    """Sort-tile-recursive packing of point indices into leaves, left to right."""
    n = len(uv)
    idx = np.arange(n)
    n_leaves = math.ceil(n / capacity)
    n_slices = math.ceil(math.sqrt(n_leaves))
    per_slice = n_slices * capacity
    by_x = idx[np.lexsort((idx, uv[:, 1], uv[:, 0]))]
    leaves = []
    for start in range(0, n, per_slice):
        slab = by_x[start : start + per_slice]
        slab = slab[np.lexsort((slab, uv[slab, 0], uv[slab, 1]))]
        leaves.extend(slab[i : i + capacity] for i in range(0, len(slab), capacity))
    return leaves


def linearize_frame(
    positions, extent: BoundingBox, strategy: LinearizationStrategy = HilbertCurve()
) -> np.ndarray:
    """Permutation ``perm`` with ``perm[k]`` = index of the mover placed in row ``k``."""
    uv = normalize_positions(positions, extent)
    n = len(uv)
    if n == 0:
        raise ValueError("linearize_frame needs at least one position")
    idx = np.arange(n)
    if isinstance(strategy, HilbertCurve):
        key = hilbert_index(uv[:, 0], uv[:, 1], strategy.order)
        return np.argsort(key, kind="stable")
    if isinstance(strategy, ZOrder):
        key = z_index(uv[:, 0], uv[:, 1], strategy.order)
        return np.argsort(key, kind="stable")
    if isinstance(strategy, XSort):
        return np.lexsort((idx, uv[:, 1], uv[:, 0]))
    if isinstance(strategy, SpatialIndexTraversal):
        key = hilbert_index(uv[:, 0], uv[:, 1], DEFAULT_CURVE_ORDER)
        parts = []
        for leaf in _str_leaves(uv, strategy.leaf_capacity):
            parts.append(leaf[np.lexsort((leaf, key[leaf]))])
        return np.concatenate(parts)
    raise TypeError(f"unsupported strategy {strategy!r}")


@dataclass(frozen=True, eq=False)
class LinearOrder:
    """``ranks[t, k]`` is the canonical index of the mover in row ``k`` at frame ``t``."""

    ranks: np.ndarray

    def __post_init__(self):
        ranks = np.asarray(self.ranks, dtype=np.int64)
        if ranks.ndim != 2:
            raise ValueError("ranks must be 2D (frames, movers)")
        expected = np.arange(ranks.shape[1])
        if not np.array_equal(np.sort(ranks, axis=1), np.broadcast_to(expected, ranks.shape)):
            raise ValueError("every frame of ranks must be a permutation")
        ranks.setflags(write=False)
        object.__setattr__(self, "ranks", ranks)

    @property
    def frame_count(self) -> int:
        return self.ranks.shape[0]

    @property
    def mover_count(self) -> int:
        return self.ranks.shape[1]

    def row_of(self) -> np.ndarray:
        """Inverse permutation: ``row_of()[t, m]`` is the row of mover ``m``."""
        inv = np.empty_like(self.ranks)
        rows = np.arange(self.mover_count)
        for t in range(self.frame_count):
            inv[t, self.ranks[t]] = rows
        return inv


def linearize_dataset(d: Dataset, strategy: LinearizationStrategy = HilbertCurve()) -> LinearOrder:
    """Order every frame against the dataset-wide extent."""
    ranks = np.empty((d.frame_count, d.mover_count), dtype=np.int64)
    for t in range(d.frame_count):
        ranks[t] = linearize_frame(d.positions[t], d.extent, strategy)
    return LinearOrder(ranks)


def locality_score(d: Dataset, lo: LinearOrder) -> float:
    """Mean row distance between each mover and its spatial nearest neighbour.

    Ties in distance go to the lower mover index.  Lower is better; a dataset
    with one mover scores 0.
    """
    if lo.ranks.shape != (d.frame_count, d.mover_count):
        raise ShapeMismatch(f"order shape {lo.ranks.shape} != dataset {(d.frame_count, d.mover_count)}")
    if d.mover_count < 2:
        return 0.0
    rows = lo.row_of()
    total = 0.0
    for t in range(d.frame_count):
        pts = d.positions[t]
        dist = ((pts[None, :, :] - pts[:, None, :]) ** 2).sum(axis=2)
        np.fill_diagonal(dist, np.inf)
        nn = dist.argmin(axis=1)
        total += np.abs(rows[t] - rows[t, nn]).mean()
    return float(total / d.frame_count)
