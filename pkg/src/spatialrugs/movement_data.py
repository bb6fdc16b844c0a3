"""Collective-movement datasets: CSV ingestion, synthetic flocks, derived features.

A :class:`Dataset` is a dense panel: every frame holds the same movers, stored
as a ``(frames, movers, 2)`` position array in canonical mover order.  The y
axis grows downward (video-tracking convention); pass ``flip_y=True`` when
ingesting math-convention data.
"""
from __future__ import annotations

import csv
import io
import math
import os
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from typing import BinaryIO, Union

import numpy as np

from .errors import (
    EmptyInput,
    FrameGap,
    MissingColumn,
    NonFiniteCoordinate,
    RaggedPanel,
    SingleFrame,
    SpatialRugsError,
)

DEFAULT_FRAME_RATE_HZ = 30.0
EXTENT_INFLATION = 0.5
CSV_PRECISION = 9

Source = Union[bytes, str, os.PathLike, BinaryIO]


@dataclass(frozen=True)
class BoundingBox:
    min_x: float
    min_y: float
    max_x: float
    max_y: float

    def __post_init__(self):
        vals = (self.min_x, self.min_y, self.max_x, self.max_y)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError(f"non-finite bounding box {vals}")
        if not (self.max_x > self.min_x and self.max_y > self.min_y):
            raise ValueError(f"degenerate bounding box {vals}")

    @property
    def width(self) -> float:
        return self.max_x - self.min_x

    @property
    def height(self) -> float:
        return self.max_y - self.min_y

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.min_x, self.min_y, self.max_x, self.max_y)

    def contains(self, x, y) -> bool:
        x = np.asarray(x)
        y = np.asarray(y)
        return bool(
            np.all((x >= self.min_x) & (x <= self.max_x) & (y >= self.min_y) & (y <= self.max_y))
        )


@dataclass(frozen=True, eq=False)
class Dataset:
    """Dense panel of mover positions.

    Attributes
    ----------
    positions : ndarray, shape (frames, movers, 2)
        World coordinates, float64.
    mover_ids : tuple of str
        Canonical mover order; column ``k`` of ``positions`` belongs to
        ``mover_ids[k]``.
    extent : BoundingBox
        Must contain every position.  Defaults to :func:`compute_extent`.
    frame_rate_hz : float
        Sampling rate, used by :func:`derive_speed`.
    features : dict of str -> ndarray, shape (frames, movers)
        Optional per-mover scalar features.
    """

    positions: np.ndarray
    mover_ids: tuple[str, ...]
    extent: BoundingBox | None = None
    frame_rate_hz: float = DEFAULT_FRAME_RATE_HZ
    features: Mapping[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        pos = np.ascontiguousarray(self.positions, dtype=np.float64)
        if pos.ndim != 3 or pos.shape[2] != 2:
            raise ValueError(f"positions must have shape (frames, movers, 2), got {pos.shape}")
        if pos.shape[0] == 0 or pos.shape[1] == 0:
            raise EmptyInput("dataset has no frames or no movers")
        if not np.all(np.isfinite(pos)):
            raise NonFiniteCoordinate("positions contain NaN or Inf")
        ids = tuple(str(m) for m in self.mover_ids)
        if len(ids) != pos.shape[1] or len(set(ids)) != len(ids):
            raise ValueError("mover_ids must be unique and match the mover axis")
        if not (self.frame_rate_hz > 0 and math.isfinite(self.frame_rate_hz)):
            raise ValueError("frame_rate_hz must be positive")
        feats = {}
        for name, arr in self.features.items():
            arr = np.ascontiguousarray(arr, dtype=np.float64)
            if arr.shape != pos.shape[:2]:
                raise ValueError(f"feature {name!r} has shape {arr.shape}, expected {pos.shape[:2]}")
            arr.setflags(write=False)
            feats[name] = arr
        pos.setflags(write=False)
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "mover_ids", ids)
        object.__setattr__(self, "features", feats)
        if self.extent is None:
            object.__setattr__(self, "extent", _extent_of(pos))
        elif not self.extent.contains(pos[..., 0], pos[..., 1]):
            raise ValueError("extent does not contain every position")

    @property
    def frame_count(self) -> int:
        return self.positions.shape[0]

    @property
    def mover_count(self) -> int:
        return self.positions.shape[1]

    def frame(self, t: int) -> dict[str, tuple[float, float, dict[str, float]]]:
        """Snapshot of frame ``t`` as ``mover_id -> (x, y, features)``."""
        out = {}
        for k, mid in enumerate(self.mover_ids):
            x, y = self.positions[t, k]
            feats = {name: float(arr[t, k]) for name, arr in self.features.items()}
            out[mid] = (float(x), float(y), feats)
        return out

    def slice_frames(self, start: int, stop: int) -> "Dataset":
        """Frames ``[start, stop)``, keeping this dataset's extent."""
        return Dataset(
            self.positions[start:stop],
            self.mover_ids,
            self.extent,
            self.frame_rate_hz,
            {k: v[start:stop] for k, v in self.features.items()},
        )

    def with_feature(self, name: str, values: np.ndarray) -> "Dataset":
        feats = dict(self.features)
        feats[name] = values
        return Dataset(self.positions, self.mover_ids, self.extent, self.frame_rate_hz, feats)

    def equals(self, other: "Dataset", rtol: float = 0.0, atol: float = 0.0) -> bool:
        if self.mover_ids != other.mover_ids or self.positions.shape != other.positions.shape:
            return False
        if set(self.features) != set(other.features):
            return False
        pairs = [(self.positions, other.positions)]
        pairs += [(self.features[k], other.features[k]) for k in self.features]
        return all(np.allclose(a, b, rtol=rtol, atol=atol) for a, b in pairs)


def _extent_of(positions: np.ndarray) -> BoundingBox:
    lo = positions.reshape(-1, 2).min(axis=0)
    hi = positions.reshape(-1, 2).max(axis=0)
    lo = lo.astype(float)
    hi = hi.astype(float)
    for axis in range(2):
        if hi[axis] == lo[axis]:
            lo[axis] -= EXTENT_INFLATION
            hi[axis] += EXTENT_INFLATION
    return BoundingBox(float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))


def compute_extent(d: Dataset) -> BoundingBox:
    """Tight bounding box over all frames; degenerate axes grow by 0.5 per side."""
    return _extent_of(d.positions)


# --------------------------------------------------------------------------
# CSV


@dataclass(frozen=True)
class CsvSchema:
    """Column names for :func:`parse_csv`.

    ``features=None`` takes every column not otherwise claimed as a feature.
    """

    frame: str = "frame"
    id: str = "id"
    x: str = "x"
    y: str = "y"
    features: Sequence[str] | None = None


def _open_text(source: Source) -> tuple[io.TextIOBase, str]:
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8"), newline=None), "<bytes>"
    if isinstance(source, (str, os.PathLike)):
        return open(source, encoding="utf-8", newline=""), os.fspath(source)
    name = getattr(source, "name", "<stream>")
    return io.TextIOWrapper(source, encoding="utf-8", newline=""), str(name)


def _parse_float(text: str, column: str, where: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise SpatialRugsError(f"{where}: column {column!r} is not a number: {text!r}") from None


def parse_csv(
    source: Source,
    schema: CsvSchema = CsvSchema(),
    *,
    frame_rate_hz: float = DEFAULT_FRAME_RATE_HZ,
    flip_y: bool = False,
    fill: str | None = None,
) -> Dataset:
    """Read a ``frame,id,x,y[,feature...]`` table into a :class:`Dataset`.

    Rows may come in any order.  Frame numbers are re-based to start at 0 and
    must then be consecutive.  Mover ids are ordered lexicographically.

    Parameters
    ----------
    fill : {None, "linear"}
        ``None`` rejects movers missing from a frame with :class:`RaggedPanel`.
        ``"linear"`` interpolates each mover's gaps linearly in time and holds
        the nearest known value before its first / after its last record.
    """
    if fill not in (None, "linear"):
        raise ValueError(f"unknown fill mode {fill!r}")
    stream, name = _open_text(source)
    try:
        reader = csv.reader(stream)
        header = next(reader, None)
        if header is None:
            raise EmptyInput(f"{name}: empty input")
        header = [h.strip() for h in header]
        col = {h: i for i, h in enumerate(header)}
        for required in (schema.frame, schema.id, schema.x, schema.y):
            if required not in col:
                raise MissingColumn(f"{name}:1: missing column {required!r} (header: {','.join(header)})")
        if schema.features is None:
            claimed = {schema.frame, schema.id, schema.x, schema.y}
            feature_names = [h for h in header if h not in claimed]
        else:
            feature_names = list(schema.features)
            for fname in feature_names:
                if fname not in col:
                    raise MissingColumn(f"{name}:1: missing feature column {fname!r}")
        fi, ii, xi, yi = col[schema.frame], col[schema.id], col[schema.x], col[schema.y]
        feat_idx = [col[f] for f in feature_names]
        width = len(header)

        records: dict[tuple[int, str], list[float]] = {}
        for lineno, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            where = f"{name}:{lineno}"
            if len(row) != width:
                raise SpatialRugsError(f"{where}: expected {width} fields, got {len(row)}")
            try:
                frame = int(row[fi])
            except ValueError:
                raise SpatialRugsError(f"{where}: frame is not an integer: {row[fi]!r}") from None
            mid = row[ii].strip()
            x = _parse_float(row[xi], schema.x, where)
            y = _parse_float(row[yi], schema.y, where)
            if not (math.isfinite(x) and math.isfinite(y)):
                raise NonFiniteCoordinate(f"{where}: non-finite coordinate ({row[xi]}, {row[yi]})")
            vals = [x, -y if flip_y else y]
            vals += [_parse_float(row[j], header[j], where) for j in feat_idx]
            key = (frame, mid)
            if key in records:
                raise SpatialRugsError(f"{where}: duplicate record for frame {frame}, id {mid!r}")
            records[key] = vals
    finally:
        if not isinstance(source, (bytes, str, os.PathLike)):
            stream.detach()
        else:
            stream.close()

    if not records:
        raise EmptyInput(f"{name}: no data rows")

    frames = sorted({f for f, _ in records})
    base = frames[0]
    if frames[-1] - base + 1 != len(frames):
        present = set(frames)
        missing = next(f for f in range(base, frames[-1] + 1) if f not in present)
        raise FrameGap(f"{name}: frame {missing} absent (frames must be consecutive)")
    mover_ids = sorted({m for _, m in records})
    n_frames, n_movers = len(frames), len(mover_ids)
    mover_pos = {m: k for k, m in enumerate(mover_ids)}

    table = np.full((n_frames, n_movers, 2 + len(feature_names)), np.nan)
    seen = np.zeros((n_frames, n_movers), dtype=bool)
    for (f, m), vals in records.items():
        t, k = f - base, mover_pos[m]
        table[t, k] = vals
        seen[t, k] = True

    if not seen.all():
        if fill is None:
            t, k = np.argwhere(~seen)[0]
            raise RaggedPanel(int(t) + base, mover_ids[k], source=name)
        table = _fill_linear(table, seen)

    features = {fname: table[:, :, 2 + j] for j, fname in enumerate(feature_names)}
    return Dataset(table[:, :, :2], tuple(mover_ids), None, frame_rate_hz, features)


def _fill_linear(table: np.ndarray, seen: np.ndarray) -> np.ndarray:
    out = table.copy()
    frames = np.arange(table.shape[0])
    for k in range(table.shape[1]):
        known = seen[:, k]
        if known.all():
            continue
        # np.interp holds the end values outside the known range
        for c in range(table.shape[2]):
            out[:, k, c] = np.interp(frames, frames[known], table[known, k, c])
    return out


def serialize_csv(d: Dataset, precision: int = CSV_PRECISION) -> bytes:
    """Inverse of :func:`parse_csv`: frames in order, movers in canonical order."""
    feature_names = list(d.features)
    buf = io.StringIO()
    buf.write(",".join(["frame", "id", "x", "y", *feature_names]) + "\n")
    fmt = f"{{:.{precision}g}}"
    columns = [d.positions[..., 0], d.positions[..., 1], *(d.features[f] for f in feature_names)]
    for t in range(d.frame_count):
        for k, mid in enumerate(d.mover_ids):
            vals = ",".join(fmt.format(c[t, k]) for c in columns)
            buf.write(f"{t},{mid},{vals}\n")
    return buf.getvalue().encode("utf-8")


# --------------------------------------------------------------------------
# Synthetic flocks


@dataclass(frozen=True)
class BoidsParams:
    """Parameters for the three-rule flocking generator.

    Weights scale the per-frame velocity corrections; distances and speeds are
    in world units and world units per frame.
    """

    mover_count: int = 151
    frame_count: int = 2700
    world_width: float = 100.0
    world_height: float = 60.0
    cohesion_weight: float = 0.2
    separation_weight: float = 0.001
    alignment_weight: float = 0.05
    perception_radius: float = 12.0
    max_speed: float = 0.3
    rng_seed: int = 42
    separation_radius: float = 0.1
    jitter: float = 0.002
    min_speed: float = 0.0
    frame_rate_hz: float = DEFAULT_FRAME_RATE_HZ

    def __post_init__(self):
        if self.mover_count < 1 or self.frame_count < 1:
            raise ValueError("mover_count and frame_count must be positive")
        if not (self.world_width > 0 and self.world_height > 0):
            raise ValueError("world dimensions must be positive")
        weights = (self.cohesion_weight, self.separation_weight, self.alignment_weight, self.jitter)
        if not all(math.isfinite(w) for w in weights):
            raise ValueError("weights must be finite")
        if not self.perception_radius > 0:
            raise ValueError("perception_radius must be positive")
        if not self.max_speed > 0:
            raise ValueError("max_speed must be positive")
        if not 0 <= self.min_speed <= self.max_speed:
            raise ValueError("min_speed must lie in [0, max_speed]")
        if not 0 <= self.rng_seed < 2**64:
            raise ValueError("rng_seed must be a 64-bit unsigned integer")


def generate_boids(p: BoidsParams) -> Dataset:
    """Seeded cohesion / separation / alignment flock with reflective walls.

    Frame 0 holds the initial uniform scatter.  Each later frame adds the
    three steering terms plus Gaussian jitter to the velocity, clamps speed to
    ``[min_speed, max_speed]``, moves, and reflects off the world walls.
    """
    rng = np.random.default_rng(p.rng_seed)
    n = p.mover_count
    world = np.array([p.world_width, p.world_height])
    pos = rng.uniform(0.0, 1.0, size=(n, 2)) * world
    angle = rng.uniform(0.0, 2 * np.pi, size=n)
    vel = 0.5 * p.max_speed * np.column_stack([np.cos(angle), np.sin(angle)])

    out = np.empty((p.frame_count, n, 2))
    out[0] = pos
    eye = np.eye(n, dtype=bool)
    for t in range(1, p.frame_count):
        offset = pos[None, :, :] - pos[:, None, :]  # offset[i, j] = pos_j - pos_i
        dist = np.sqrt((offset**2).sum(axis=2))
        near = (dist < p.perception_radius) & ~eye
        count = near.sum(axis=1, keepdims=True)
        has = count > 0
        safe = np.maximum(count, 1)
        cohesion = np.where(has, (near[..., None] * offset).sum(axis=1) / safe, 0.0)
        alignment = np.where(has, (near @ vel) / safe - vel, 0.0)
        crowd = (dist < p.separation_radius) & ~eye
        inv = np.where(crowd, 1.0 / np.maximum(dist, 1e-9) ** 2, 0.0)
        separation = -(inv[..., None] * offset).sum(axis=1)

        vel = (
            vel
            + p.cohesion_weight * cohesion
            + p.alignment_weight * alignment
            + p.separation_weight * separation
            + rng.normal(0.0, p.jitter, size=(n, 2))
        )
        speed = np.sqrt((vel**2).sum(axis=1, keepdims=True))
        target = np.clip(speed, p.min_speed, p.max_speed)
        vel = np.where(speed > 0, vel * (target / np.maximum(speed, 1e-300)), vel)

        pos = pos + vel
        low = pos < 0.0
        high = pos > world
        pos = np.where(low, -pos, pos)
        pos = np.where(high, 2 * world - pos, pos)
        vel = np.where(low | high, -vel, vel)
        pos = np.clip(pos, 0.0, world)
        out[t] = pos

    width = max(3, len(str(n - 1)))
    ids = tuple(f"m{k:0{width}d}" for k in range(n))
    return Dataset(out, ids, None, p.frame_rate_hz)


def derive_speed(d: Dataset) -> Dataset:
    """Add a ``speed`` feature in world units per second.

    Frame 0 has no predecessor and copies frame 1's value.
    """
    if d.frame_count < 2:
        raise SingleFrame("speed needs at least two frames")
    step = np.diff(d.positions, axis=0)
    speed = np.sqrt((step**2).sum(axis=2)) * d.frame_rate_hz
    speed = np.concatenate([speed[:1], speed], axis=0)
    return d.with_feature("speed", speed)


def mean_nearest_neighbor_distance(positions: np.ndarray) -> float:
    """Mean Euclidean distance from each point to its nearest other point."""
    pts = np.asarray(positions, dtype=float)
    if len(pts) < 2:
        return 0.0
    dist = np.sqrt(((pts[None, :, :] - pts[:, None, :]) ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    return float(dist.min(axis=1).mean())
