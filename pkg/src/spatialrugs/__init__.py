"""SpatialRugs: dense-pixel rugs of collective movement with 2D position colormaps."""

__version__ = "0.1.0"

from .colormap2d import (
    build_cube_diagonal_cut,
    build_four_corner,
    build_radial_white_center,
    fit_to_extent,
)
from .linearization import HilbertCurve, SpatialIndexTraversal, XSort, ZOrder, linearize_dataset
from .metrics import mse, rmse, ssim
from .movement_data import BoidsParams, BoundingBox, Dataset, derive_speed, generate_boids, parse_csv, serialize_csv
from .rug_render import RugImage, encode_png, render_motion_rug, render_spatial_rug
from .tacs import GaussianParams, PoolingMatrix, gaussian_blur, tacs_smooth

__all__ = [
    "BoidsParams",
    "BoundingBox",
    "Dataset",
    "GaussianParams",
    "HilbertCurve",
    "PoolingMatrix",
    "RugImage",
    "SpatialIndexTraversal",
    "XSort",
    "ZOrder",
    "build_cube_diagonal_cut",
    "build_four_corner",
    "build_radial_white_center",
    "derive_speed",
    "encode_png",
    "fit_to_extent",
    "gaussian_blur",
    "generate_boids",
    "linearize_dataset",
    "mse",
    "parse_csv",
    "render_motion_rug",
    "render_spatial_rug",
    "rmse",
    "serialize_csv",
    "ssim",
    "tacs_smooth",
]
