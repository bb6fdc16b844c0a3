"""Bivariate colormaps over the unit square and their quality measures.

Coordinates follow image conventions: ``u`` runs left to right, ``v`` top to
bottom, both in ``[0, 1]``.  Every lookup rounds half-up to 8-bit channels so
renders are bit-exact.

The three builders approximate colormaps known from the 2D-colormap
literature (four corners R-B-G-Y, a radial map around a white center, and a
planar B-C-Y-R cube cut).  They reproduce the named anchors exactly; the
interpolation in between is bilinear or HSV-based rather than a copy of any
published construction.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from skimage.color import hsv2rgb, rgb2lab

from .errors import PositionOutsideExtent
from .movement_data import BoundingBox

Rgb8 = tuple[int, int, int]

YELLOW: Rgb8 = (255, 255, 0)
GREEN: Rgb8 = (0, 255, 0)
BLUE: Rgb8 = (0, 0, 255)
RED: Rgb8 = (255, 0, 0)
CYAN: Rgb8 = (0, 255, 255)
WHITE: Rgb8 = (255, 255, 255)
BLACK: Rgb8 = (0, 0, 0)

JND_THRESHOLD = 2.3
EXTENT_TOLERANCE = 1e-9


def round_half_up(values) -> np.ndarray:
    """Round float channels half-up into uint8.

    The 1e-9 nudge keeps intended .5 values computed with float error
    rounding upward.
    """
    return np.clip(np.floor(np.asarray(values, dtype=np.float64) + 0.5 + 1e-9), 0, 255).astype(
        np.uint8
    )


def _check_rgb(c) -> Rgb8:
    c = tuple(int(v) for v in c)
    if len(c) != 3 or not all(0 <= v <= 255 for v in c):
        raise ValueError(f"invalid 8-bit RGB color {c}")
    return c


def _as_scalar_result(rgb: np.ndarray, scalar: bool):
    if scalar:
        return tuple(int(v) for v in rgb.reshape(3))
    return rgb


@dataclass(frozen=True)
class FourCorner:
    """Bilinear blend of four corner colors (top-left, top-right, bottom-right, bottom-left)."""

    c_tl: Rgb8 = YELLOW
    c_tr: Rgb8 = GREEN
    c_br: Rgb8 = BLUE
    c_bl: Rgb8 = RED

    def __post_init__(self):
        for name in ("c_tl", "c_tr", "c_br", "c_bl"):
            object.__setattr__(self, name, _check_rgb(getattr(self, name)))

    @property
    def anchors(self) -> dict[tuple[float, float], Rgb8]:
        return {(0.0, 0.0): self.c_tl, (1.0, 0.0): self.c_tr, (1.0, 1.0): self.c_br, (0.0, 1.0): self.c_bl}

    def lookup_float(self, u, v) -> np.ndarray:
        u = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0)[..., None]
        v = np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0)[..., None]
        tl, tr, br, bl = (np.array(c, dtype=np.float64) for c in (self.c_tl, self.c_tr, self.c_br, self.c_bl))
        return (1 - u) * (1 - v) * tl + u * (1 - v) * tr + u * v * br + (1 - u) * v * bl

    def lookup(self, u, v):
        scalar = np.ndim(u) == 0 and np.ndim(v) == 0
        return _as_scalar_result(round_half_up(self.lookup_float(u, v)), scalar)


@dataclass(frozen=True)
class CubeDiagonalCut(FourCorner):
    """Planar stand-in for the B-C-Y-R cube diagonal cut: the cycle placed clockwise from top-left."""

    c_tl: Rgb8 = BLUE
    c_tr: Rgb8 = CYAN
    c_br: Rgb8 = YELLOW
    c_bl: Rgb8 = RED


@dataclass(frozen=True)
class RadialWhiteCenter:
    """Hue from the angle around the center, saturation from the radius.

    Hue 0 points right and increases counter-clockwise on screen (``v`` is
    flipped).  Saturation reaches 1 at distance 0.5 from the center; the
    corners saturate fully.
    """

    saturation_exponent: float = 1.0

    def __post_init__(self):
        if not self.saturation_exponent > 0:
            raise ValueError("saturation_exponent must be positive")

    @property
    def anchors(self) -> dict[tuple[float, float], Rgb8]:
        return {(0.5, 0.5): WHITE, (1.0, 0.5): RED}

    def lookup_float(self, u, v) -> np.ndarray:
        du = np.clip(np.asarray(u, dtype=np.float64), 0.0, 1.0) - 0.5
        dv = np.clip(np.asarray(v, dtype=np.float64), 0.0, 1.0) - 0.5
        du, dv = np.broadcast_arrays(du, dv)
        hue = np.mod(np.degrees(np.arctan2(-dv, du)), 360.0) / 360.0
        radius = np.hypot(du, dv) / 0.5
        sat = np.minimum(1.0, radius**self.saturation_exponent)
        hsv = np.stack([hue, sat, np.ones_like(hue)], axis=-1)
        return hsv2rgb(hsv.reshape(-1, 1, 3)).reshape(hsv.shape) * 255.0

    def lookup(self, u, v):
        scalar = np.ndim(u) == 0 and np.ndim(v) == 0
        return _as_scalar_result(round_half_up(self.lookup_float(u, v)), scalar)


Colormap2D = Union[FourCorner, CubeDiagonalCut, RadialWhiteCenter]


def build_four_corner(c_tl=YELLOW, c_tr=GREEN, c_br=BLUE, c_bl=RED) -> FourCorner:
    return FourCorner(c_tl, c_tr, c_br, c_bl)


def build_radial_white_center(saturation_exponent: float = 1.0) -> RadialWhiteCenter:
    return RadialWhiteCenter(saturation_exponent)


def build_cube_diagonal_cut(c0=BLUE, c1=CYAN, c2=YELLOW, c3=RED) -> CubeDiagonalCut:
    """Anchors ``c0..c3`` go to top-left, top-right, bottom-right, bottom-left."""
    return CubeDiagonalCut(c0, c1, c2, c3)


def parse_hex(text: str) -> Rgb8:
    text = text.strip().lstrip("#")
    if len(text) != 6:
        raise ValueError(f"expected RRGGBB, got {text!r}")
    return (int(text[0:2], 16), int(text[2:4], 16), int(text[4:6], 16))


def colormap_from_string(text: str) -> Colormap2D:
    """Parse ``four-corner[:TL,TR,BR,BL]``, ``cube-diagonal[:C0,C1,C2,C3]`` or ``radial[:exponent]``.

    Colors are hex ``RRGGBB``.
    """
    name, _, arg = text.strip().lower().partition(":")
    if name in ("four-corner", "fourcorner"):
        return build_four_corner(*map(parse_hex, arg.split(","))) if arg else build_four_corner()
    if name in ("cube-diagonal", "cubediagonal"):
        return build_cube_diagonal_cut(*map(parse_hex, arg.split(","))) if arg else build_cube_diagonal_cut()
    if name in ("radial", "radial-white"):
        return build_radial_white_center(float(arg) if arg else 1.0)
    raise ValueError(f"unknown colormap {text!r}")


def colormap_to_string(cm: Colormap2D) -> str:
    if isinstance(cm, RadialWhiteCenter):
        return f"radial:{cm.saturation_exponent!r}"
    corners = ",".join("%02x%02x%02x" % c for c in (cm.c_tl, cm.c_tr, cm.c_br, cm.c_bl))
    name = "cube-diagonal" if isinstance(cm, CubeDiagonalCut) else "four-corner"
    return f"{name}:{corners}"


# --------------------------------------------------------------------------
# Fitting to a dataset


@dataclass(frozen=True)
class PositionColorizer:
    """A colormap stretched (independently per axis) over a world extent."""

    colormap: Colormap2D
    extent: BoundingBox

    def normalize(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        e = self.extent
        u = (np.asarray(x, dtype=np.float64) - e.min_x) / e.width
        v = (np.asarray(y, dtype=np.float64) - e.min_y) / e.height
        bad = (u < -EXTENT_TOLERANCE) | (u > 1 + EXTENT_TOLERANCE) | (v < -EXTENT_TOLERANCE) | (v > 1 + EXTENT_TOLERANCE)
        if np.any(bad):
            raise PositionOutsideExtent(f"position outside extent {e.as_tuple()}")
        return np.clip(u, 0.0, 1.0), np.clip(v, 0.0, 1.0)

    def colorize(self, x, y):
        u, v = self.normalize(x, y)
        return self.colormap.lookup(u if u.ndim else float(u), v if v.ndim else float(v))


def fit_to_extent(cm: Colormap2D, extent: BoundingBox) -> PositionColorizer:
    return PositionColorizer(cm, extent)


# --------------------------------------------------------------------------
# Quality measures


def sample_grid(cm: Colormap2D, resolution: int) -> np.ndarray:
    """``(resolution, resolution, 3)`` uint8 samples; row ``i`` is ``v = i/(res-1)``."""
    if resolution < 2:
        raise ValueError("grid resolution must be at least 2")
    ticks = np.linspace(0.0, 1.0, resolution)
    v, u = np.meshgrid(ticks, ticks, indexing="ij")
    return cm.lookup(u, v)


def to_lab(rgb8: np.ndarray) -> np.ndarray:
    """CIELAB (D65, sRGB transfer) of uint8 colors, any leading shape."""
    rgb = np.asarray(rgb8, dtype=np.float64).reshape(-1, 1, 3) / 255.0
    return rgb2lab(rgb).reshape(np.shape(rgb8)[:-1] + (3,))


def jnd_estimate(cm: Colormap2D, grid_resolution: int = 32, delta_e_threshold: float = JND_THRESHOLD) -> int:
    """Greedy count of mutually distinguishable colors on a sample grid.

    Samples are visited row-major; one is kept when its CIE76 distance to every
    already-kept color is at least ``delta_e_threshold``.  A rough proxy for
    how much of the color space a map exploits.
    """
    if not delta_e_threshold > 0:
        raise ValueError("threshold must be positive")
    lab = to_lab(sample_grid(cm, grid_resolution)).reshape(-1, 3)
    kept = np.empty_like(lab)
    n_kept = 0
    for color in lab:
        if n_kept and np.sqrt(((kept[:n_kept] - color) ** 2).sum(axis=1)).min() < delta_e_threshold:
            continue
        kept[n_kept] = color
        n_kept += 1
    return n_kept


def black_white_distance(cm: Colormap2D, grid_resolution: int = 32) -> tuple[float, float]:
    """Smallest CIE76 distance from any grid sample to black and to white."""
    lab = to_lab(sample_grid(cm, grid_resolution)).reshape(-1, 3)
    poles = to_lab(np.array([BLACK, WHITE], dtype=np.uint8))
    d_black = np.sqrt(((lab - poles[0]) ** 2).sum(axis=1)).min()
    d_white = np.sqrt(((lab - poles[1]) ** 2).sum(axis=1)).min()
    return float(d_black), float(d_white)


def adjacent_delta_e(cm: Colormap2D, grid_resolution: int = 64) -> np.ndarray:
    """CIE76 distances between all horizontally and vertically adjacent samples."""
    lab = to_lab(sample_grid(cm, grid_resolution))
    horiz = np.sqrt(((lab[:, 1:] - lab[:, :-1]) ** 2).sum(axis=-1)).ravel()
    vert = np.sqrt(((lab[1:, :] - lab[:-1, :]) ** 2).sum(axis=-1)).ravel()
    return np.concatenate([horiz, vert])


def evenness(cm: Colormap2D, grid_resolution: int = 64) -> float:
    """Coefficient of variation of adjacent-sample ΔE; 0 means perfectly even steps."""
    d = adjacent_delta_e(cm, grid_resolution)
    return float(d.std() / d.mean())
