"""End-to-end orchestration: data -> order -> rugs -> smoothing -> metrics -> files."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .colormap2d import Colormap2D, build_four_corner, colormap_from_string, colormap_to_string, fit_to_extent
from .errors import ConfigError
from .linearization import HilbertCurve, LinearizationStrategy, linearize_dataset, strategy_from_string, strategy_to_string
from .metrics import QualityReport, SsimParams, image_hash, quality_report
from .movement_data import BoidsParams, CsvSchema, Dataset, derive_speed, generate_boids, parse_csv
from .rug_render import BLUE_WHITE_RED, RugImage, encode_png, mask_to_image, render_motion_rug, render_spatial_rug, render_swatch
from .tacs import GaussianParams, PoolingMatrix, difference_mask, gaussian_blur, tacs_smooth

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "SPATIALRUGS_OUTPUT_DIR"
SWATCH_SIZE = 256


def default_output_dir() -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, "spatialrugs_out"))


def matched_gauss_window(m: PoolingMatrix) -> int:
    """Gaussian window covering the same reference area as a pooling matrix."""
    return max(3, m.neighborhood_size, 2 * m.time_ahead + 1)


@dataclass
class PipelineConfig:
    input: Path | None = None
    boids: BoidsParams = field(default_factory=BoidsParams)
    strategy: LinearizationStrategy = field(default_factory=HilbertCurve)
    colormap: Colormap2D = field(default_factory=build_four_corner)
    spatial: bool = True
    feature: str | None = None
    tacs: PoolingMatrix | None = None
    gauss_sigma: float | None = None
    gauss_window: int | None = None
    diff_threshold: int = 0
    output_dir: Path = field(default_factory=default_output_dir)
    scale: int = 1
    fill: str | None = None
    flip_y: bool = False
    frame_rate_hz: float = 30.0

    def validate(self) -> None:
        if not self.spatial and self.feature is None:
            raise ConfigError("nothing requested: enable the spatial rug or name a feature")
        if self.scale < 1:
            raise ConfigError("scale must be >= 1")
        if self.diff_threshold < 0:
            raise ConfigError("diff_threshold must be >= 0")
        if (self.tacs is not None or self.gauss_sigma is not None) and not self.spatial:
            raise ConfigError("smoothing needs the spatial rug")
        if self.gauss_window is not None and self.gauss_sigma is None:
            raise ConfigError("gauss window given without sigma")
        if self.input is not None and not Path(self.input).exists():
            raise ConfigError(f"input file not found: {self.input}")

    @property
    def gauss(self) -> GaussianParams | None:
        if self.gauss_sigma is None:
            return None
        window = self.gauss_window
        if window is None:
            window = matched_gauss_window(self.tacs) if self.tacs is not None else 5
        return GaussianParams(self.gauss_sigma, window)

    def describe(self) -> dict:
        """JSON-ready parameters, sufficient to reproduce the run."""
        out = {
            "input": str(self.input) if self.input is not None else None,
            "boids": asdict(self.boids) if self.input is None else None,
            "strategy": strategy_to_string(self.strategy),
            "colormap": colormap_to_string(self.colormap),
            "spatial": self.spatial,
            "feature": self.feature,
            "tacs": asdict(self.tacs) if self.tacs else None,
            "tacs_border": "clip",
            "gauss": asdict(self.gauss) if self.gauss else None,
            "gauss_border": "replicate",
            "diff_threshold": self.diff_threshold,
            "scale": self.scale,
            "fill": self.fill,
            "flip_y": self.flip_y,
            "frame_rate_hz": self.frame_rate_hz,
        }
        return out


# --------------------------------------------------------------------------
# Config files: flat ``key = value`` lines, ``#`` comments


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"not a boolean: {text!r}")


def parse_triple(text: str) -> PoolingMatrix:
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if len(parts) != 3:
        raise ConfigError(f"--tacs expects n,f,s, got {text!r}")
    try:
        return PoolingMatrix(*(int(p) for p in parts))
    except ValueError as exc:
        raise ConfigError(f"bad pooling matrix {text!r}: {exc}") from None


def parse_gauss(text: str) -> tuple[float, int | None]:
    parts = [p for p in str(text).replace(" ", "").split(",") if p]
    if not 1 <= len(parts) <= 2:
        raise ConfigError(f"--gauss expects sigma[,window], got {text!r}")
    try:
        sigma = float(parts[0])
        window = int(parts[1]) if len(parts) == 2 else None
        GaussianParams(sigma, window if window is not None else 3)
    except ValueError as exc:
        raise ConfigError(f"bad gaussian parameters {text!r}: {exc}") from None
    return sigma, window


def read_config_file(path) -> dict[str, str]:
    values = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = line.split("=", 1)
        values[key.strip().replace("-", "_")] = value.strip()
    return values


_BOIDS_KEYS = {
    "movers": ("mover_count", int),
    "frames": ("frame_count", int),
    "seed": ("rng_seed", int),
    "world_width": ("world_width", float),
    "world_height": ("world_height", float),
    "cohesion": ("cohesion_weight", float),
    "separation": ("separation_weight", float),
    "alignment": ("alignment_weight", float),
    "perception_radius": ("perception_radius", float),
    "max_speed": ("max_speed", float),
}


def config_from_mapping(values: dict) -> PipelineConfig:
    """Build a config from string (or already-typed) values keyed like the CLI flags."""
    values = {k: v for k, v in values.items() if v is not None}
    known = set(_BOIDS_KEYS) | {
        "input", "strategy", "colormap", "spatial", "feature", "tacs", "gauss",
        "diff_threshold", "output_dir", "scale", "fill", "flip_y", "frame_rate",
    }
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        cfg = PipelineConfig()
        boids = {}
        for key, (name, conv) in _BOIDS_KEYS.items():
            if key in values:
                boids[name] = conv(values[key])
        if "frame_rate" in values:
            cfg.frame_rate_hz = float(values["frame_rate"])
            boids["frame_rate_hz"] = cfg.frame_rate_hz
        cfg.boids = BoidsParams(**boids)
        if "input" in values:
            cfg.input = Path(values["input"])
        if "strategy" in values:
            cfg.strategy = strategy_from_string(str(values["strategy"]))
        if "colormap" in values:
            cfg.colormap = colormap_from_string(str(values["colormap"]))
        if "spatial" in values:
            cfg.spatial = values["spatial"] if isinstance(values["spatial"], bool) else _parse_bool(values["spatial"])
        if "feature" in values and str(values["feature"]).strip():
            cfg.feature = str(values["feature"]).strip()
        if "tacs" in values:
            cfg.tacs = parse_triple(values["tacs"])
        if "gauss" in values:
            cfg.gauss_sigma, cfg.gauss_window = parse_gauss(values["gauss"])
        if "diff_threshold" in values:
            cfg.diff_threshold = int(values["diff_threshold"])
        if "output_dir" in values:
            cfg.output_dir = Path(values["output_dir"])
        if "scale" in values:
            cfg.scale = int(values["scale"])
        if "fill" in values:
            cfg.fill = None if str(values["fill"]) in ("", "none") else str(values["fill"])
        if "flip_y" in values:
            cfg.flip_y = values["flip_y"] if isinstance(values["flip_y"], bool) else _parse_bool(values["flip_y"])
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None
    return cfg


# --------------------------------------------------------------------------
# Stages


def dataset_hash(d: Dataset) -> str:
    h = hashlib.sha256()
    h.update("\n".join(d.mover_ids).encode())
    h.update(np.ascontiguousarray(d.positions).tobytes())
    for name in sorted(d.features):
        h.update(name.encode())
        h.update(np.ascontiguousarray(d.features[name]).tobytes())
    return h.hexdigest()


def load_dataset(cfg: PipelineConfig) -> Dataset:
    if cfg.input is None:
        log.info("generating boids dataset (seed %d)", cfg.boids.rng_seed)
        return generate_boids(cfg.boids)
    return parse_csv(
        Path(cfg.input), CsvSchema(), frame_rate_hz=cfg.frame_rate_hz, flip_y=cfg.flip_y, fill=cfg.fill
    )


def feature_dataset(d: Dataset, feature: str) -> Dataset:
    if feature == "speed" and "speed" not in d.features:
        return derive_speed(d)
    return d


def comparison_rows(original: RugImage, smoothed: dict[str, RugImage], ssim_params: SsimParams = SsimParams()):
    """One :class:`QualityReport` per method, ordered by method name."""
    return {name: quality_report(original, smoothed[name], ssim_params) for name in sorted(smoothed)}


def comparison_csv(rows: dict[str, QualityReport]) -> bytes:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["method", "rmse", "mse", "ssim"])
    for name, r in rows.items():
        w.writerow([name, repr(r.rmse), repr(r.mse), repr(r.ssim)])
    return buf.getvalue().encode()


def dumps(obj) -> bytes:
    return (json.dumps(obj, indent=2, sort_keys=True) + "\n").encode()


class ArtifactWriter:
    """Writes files into a directory and deletes them all if the run fails."""

    def __init__(self, directory: Path):
        self.directory = Path(directory)
        self.written: list[Path] = []

    def __enter__(self):
        self.directory.mkdir(parents=True, exist_ok=True)
        return self

    def write(self, name: str, data: bytes) -> Path:
        path = self.directory / name
        path.write_bytes(data)
        self.written.append(path)
        return path

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            for path in self.written:
                path.unlink(missing_ok=True)
        return False


@dataclass
class RunResult:
    artifacts: dict[str, Path]
    report: dict


def run(cfg: PipelineConfig) -> RunResult:
    """Full pipeline; every output lands in ``cfg.output_dir``."""
    cfg.validate()
    d = load_dataset(cfg)
    order = linearize_dataset(d, cfg.strategy)
    report = {
        "tool": f"spatialrugs {__version__}",
        "config": cfg.describe(),
        "dataset": {
            "hash": dataset_hash(d),
            "frames": d.frame_count,
            "movers": d.mover_count,
            "extent": list(d.extent.as_tuple()),
        },
        "artifacts": {},
    }
    arts: dict[str, Path] = {}
    with ArtifactWriter(cfg.output_dir) as out:
        if cfg.spatial:
            colorizer = fit_to_extent(cfg.colormap, d.extent)
            rug = render_spatial_rug(d, order, colorizer)
            arts["spatial_rug"] = out.write("spatial_rug.png", encode_png(rug, cfg.scale))
            arts["swatch"] = out.write("swatch.png", encode_png(render_swatch(cfg.colormap, SWATCH_SIZE)))
            report["artifacts"]["spatial_rug"] = image_hash(rug)
            smoothed = {}
            if cfg.tacs is not None:
                smoothed["tacs"] = tacs_smooth(rug, cfg.tacs)
                arts["spatial_rug_tacs"] = out.write("spatial_rug_tacs.png", encode_png(smoothed["tacs"], cfg.scale))
                diff = difference_mask(rug, smoothed["tacs"], cfg.diff_threshold)
                arts["diff_mask"] = out.write("diff_mask.png", encode_png(mask_to_image(diff.mask), cfg.scale))
                report["diff_mask"] = {"threshold": cfg.diff_threshold, "changed_fraction": diff.changed_fraction}
            if cfg.gauss is not None:
                smoothed["gauss"] = gaussian_blur(rug, cfg.gauss)
                arts["spatial_rug_gauss"] = out.write("spatial_rug_gauss.png", encode_png(smoothed["gauss"], cfg.scale))
            if smoothed:
                rows = comparison_rows(rug, smoothed)
                report["metrics"] = {name: r.to_dict() for name, r in rows.items()}
        if cfg.feature is not None:
            fd = feature_dataset(d, cfg.feature)
            invert = cfg.feature == "speed"
            motion = render_motion_rug(fd, order, cfg.feature, BLUE_WHITE_RED, invert=invert)
            arts["motion_rug"] = out.write("motion_rug.png", encode_png(motion, cfg.scale))
            report["artifacts"]["motion_rug"] = image_hash(motion)
            report["motion_rug"] = {"feature": cfg.feature, "colormap": "blue-white-red", "inverted": invert}
        arts["report"] = out.write("report.json", dumps(report))
    return RunResult(arts, report)


def compare(
    original: RugImage,
    tacs: PoolingMatrix,
    gauss_sigma: float,
    gauss_window: int | None = None,
    ssim_params: SsimParams = SsimParams(),
) -> dict[str, QualityReport]:
    """TACS and Gaussian smoothing of the same rug, each measured against it.

    Without an explicit window the Gaussian covers the pooling matrix's
    reference area (see :func:`matched_gauss_window`).
    """
    window = gauss_window if gauss_window is not None else matched_gauss_window(tacs)
    gp = GaussianParams(gauss_sigma, window)
    rows = comparison_rows(original, {"tacs": tacs_smooth(original, tacs), "gauss": gaussian_blur(original, gp)}, ssim_params)
    rows["tacs"].params.update({"method": "tacs", **asdict(tacs)})
    rows["gauss"].params.update({"method": "gauss", **asdict(gp)})
    return rows


def comparison_payload(rows: dict[str, QualityReport]) -> dict:
    return {name: r.to_dict() for name, r in rows.items()}
