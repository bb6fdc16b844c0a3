"""Full-reference image distances: MSE, RMSE and SSIM on 8-bit RGB rugs."""
from __future__ import annotations

import hashlib
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ShapeMismatch
from .rug_render import RugImage
from .tacs import GaussianParams, gaussian_filter_float, gaussian_kernel


def _pair(a: RugImage, b: RugImage) -> tuple[np.ndarray, np.ndarray]:
    if a.pixels.shape != b.pixels.shape:
        raise ShapeMismatch(f"image sizes differ: {a.pixels.shape} vs {b.pixels.shape}")
    return a.pixels.astype(np.float64), b.pixels.astype(np.float64)


def mse(a: RugImage, b: RugImage) -> float:
    """Mean squared difference over every pixel and channel."""
    x, y = _pair(a, b)
    return float(np.mean((x - y) ** 2))


def rmse(a: RugImage, b: RugImage) -> float:
    return math.sqrt(mse(a, b))


@dataclass(frozen=True)
class SsimParams:
    window: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0

    def __post_init__(self):
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError("SSIM window must be a positive odd integer")


@dataclass(frozen=True)
class SsimResult:
    value: float
    global_window: bool


def _ssim_map(x, y, c1, c2, kernel):
    blur = lambda a: gaussian_filter_float(a, kernel)
    mu_x, mu_y = blur(x), blur(y)
    var_x = blur(x * x) - mu_x * mu_x
    var_y = blur(y * y) - mu_y * mu_y
    cov = blur(x * y) - mu_x * mu_y
    num = (2 * mu_x * mu_y + c1) * (2 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return num / den


def ssim_detail(a: RugImage, b: RugImage, params: SsimParams = SsimParams()) -> SsimResult:
    """SSIM with Gaussian-weighted windows centered on every pixel.

    Windows near the border see replicated edge pixels.  Each channel's map is
    averaged, then the three channel scores are averaged.  An image smaller
    than the window in either dimension falls back to a single global,
    unweighted window.
    """
    x, y = _pair(a, b)
    c1 = (params.k1 * params.dynamic_range) ** 2
    c2 = (params.k2 * params.dynamic_range) ** 2
    if params.window > min(x.shape[0], x.shape[1]):
        scores = []
        for ch in range(3):
            xs, ys = x[..., ch], y[..., ch]
            mx, my = xs.mean(), ys.mean()
            vx, vy = ((xs - mx) ** 2).mean(), ((ys - my) ** 2).mean()
            cov = ((xs - mx) * (ys - my)).mean()
            scores.append((2 * mx * my + c1) * (2 * cov + c2) / ((mx * mx + my * my + c1) * (vx + vy + c2)))
        return SsimResult(float(np.mean(scores)), True)
    kernel = gaussian_kernel(GaussianParams(params.sigma, params.window)) if params.window >= 3 else np.ones(1)
    smap = _ssim_map(x, y, c1, c2, kernel)
    return SsimResult(float(smap.mean(axis=(0, 1)).mean()), False)


def ssim(
    a: RugImage,
    b: RugImage,
    window: int = 11,
    k1: float = 0.01,
    k2: float = 0.03,
    dynamic_range: float = 255.0,
    sigma: float = 1.5,
) -> float:
    return ssim_detail(a, b, SsimParams(window, sigma, k1, k2, dynamic_range)).value


def image_hash(img: RugImage) -> str:
    h = hashlib.sha256()
    h.update(f"{img.width}x{img.height}:".encode())
    h.update(img.pixels.tobytes())
    return h.hexdigest()


@dataclass
class QualityReport:
    mse: float
    rmse: float
    ssim: float
    params: dict = field(default_factory=dict)
    input_hashes: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return asdict(self)


def quality_report(reference: RugImage, candidate: RugImage, params: SsimParams = SsimParams()) -> QualityReport:
    """All three measures of ``candidate`` against ``reference``."""
    m = mse(reference, candidate)
    s = ssim_detail(reference, candidate, params)
    return QualityReport(
        mse=m,
        rmse=math.sqrt(m),
        ssim=s.value,
        params={"ssim": asdict(params), "ssim_global_window": s.global_window, "channels": "rgb-mean"},
        input_hashes=[image_hash(reference), image_hash(candidate)],
    )
