import numpy as np
import pytest

from spatialrugs.colormap2d import build_four_corner, fit_to_extent
from spatialrugs.linearization import HilbertCurve, linearize_dataset
from spatialrugs.movement_data import BoidsParams, Dataset, generate_boids
from spatialrugs.rug_render import render_spatial_rug

ACCEPTANCE_RESULTS: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE_RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
        ok, detail = ACCEPTANCE_RESULTS[name]
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}  {detail}")


def make_dataset(positions, **kw) -> Dataset:
    positions = np.asarray(positions, dtype=float)
    ids = tuple(f"m{k:03d}" for k in range(positions.shape[1]))
    return Dataset(positions, ids, **kw)


@pytest.fixture(scope="session")
def small_boids() -> Dataset:
    return generate_boids(BoidsParams(mover_count=40, frame_count=120, rng_seed=7))


@pytest.fixture(scope="session")
def boids_1000() -> Dataset:
    return generate_boids(BoidsParams(mover_count=151, frame_count=1000, rng_seed=42))


@pytest.fixture(scope="session")
def boids_rug(boids_1000):
    order = linearize_dataset(boids_1000, HilbertCurve())
    return render_spatial_rug(boids_1000, order, fit_to_extent(build_four_corner(), boids_1000.extent))
