import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spatialrugs.errors import PositionOutsideExtent, ShapeMismatch
from spatialrugs.linearization import (
    HilbertCurve,
    LinearOrder,
    SpatialIndexTraversal,
    XSort,
    ZOrder,
    hilbert_cell_index,
    hilbert_index,
    linearize_dataset,
    linearize_frame,
    locality_score,
    strategy_from_string,
    strategy_to_string,
    z_index,
)
from spatialrugs.movement_data import BoundingBox

from .conftest import make_dataset


def hilbert_walk(order):
    """Cells of the Hilbert curve in visit order, from an L-system turtle.

    Rules A -> +BF-AFA-FB+ and B -> -AF+BFB+FA-; the turtle starts at cell
    (0, 0) heading along +column, and "+" turns toward +row.
    """
    rules = {"A": "+BF-AFA-FB+", "B": "-AF+BFB+FA-"}
    program = "A"
    for _ in range(order):
        program = "".join(rules.get(ch, ch) for ch in program)
    col, row, dc, dr = 0, 0, 1, 0
    cells = [(0, 0)]
    for ch in program:
        if ch == "+":
            dc, dr = -dr, dc
        elif ch == "-":
            dc, dr = dr, -dc
        elif ch == "F":
            col, row = col + dc, row + dr
            cells.append((col, row))
    return cells


def interleave(col, row, order):
    bits = "".join(f"{(row >> b) & 1}{(col >> b) & 1}" for b in reversed(range(order)))
    return int(bits, 2)


def test_oracle_shape():
    assert hilbert_walk(1) == [(0, 0), (0, 1), (1, 1), (1, 0)]


def test_hilbert_order1_examples():
    assert hilbert_index(0.25, 0.25, 1) == 0
    cells = [(0, 0), (0, 1), (1, 1), (1, 0)]
    assert [hilbert_index((c + 0.5) / 2, (r + 0.5) / 2, 1) for c, r in cells] == [0, 1, 2, 3]


@pytest.mark.parametrize("order", range(1, 7))
def test_hilbert_matches_recursive_oracle(order):
    walk = hilbert_walk(order)
    cols = np.array([c for c, _ in walk])
    rows = np.array([r for _, r in walk])
    assert hilbert_cell_index(cols, rows, order).tolist() == list(range(4**order))


@pytest.mark.parametrize("order", range(1, 7))
def test_hilbert_bijection_and_adjacency(order):
    side = 1 << order
    cols, rows = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    d = hilbert_cell_index(cols.ravel(), rows.ravel(), order)
    assert sorted(d.tolist()) == list(range(side * side))
    cells = np.empty((side * side, 2), dtype=int)
    cells[d] = np.column_stack([cols.ravel(), rows.ravel()])
    assert np.all(np.abs(np.diff(cells, axis=0)).sum(axis=1) == 1)
    assert tuple(cells[0]) == (0, 0) and tuple(cells[-1]) == (side - 1, 0)


def test_hilbert_clamps_edges():
    assert hilbert_index(1.0, 0.0, 3) == hilbert_index(0.99, 0.0, 3)
    assert hilbert_index(-0.5, 2.0, 3) == hilbert_index(0.0, 1.0, 3)
    assert hilbert_index(0.3, 0.3, 16) < 4**16


def test_z_examples():
    assert z_index(0.1, 0.1, 1) == 0
    cells = [(0, 0), (1, 0), (0, 1), (1, 1)]
    assert [z_index((c + 0.5) / 2, (r + 0.5) / 2, 1) for c, r in cells] == [0, 1, 2, 3]
    assert z_index(0.99, 0.99, 2) == 15


@pytest.mark.parametrize("order", [1, 3, 5])
def test_z_matches_manual_interleave(order):
    side = 1 << order
    for col in range(side):
        for row in range(side):
            assert z_index((col + 0.5) / side, (row + 0.5) / side, order) == interleave(col, row, order)


def test_order_bounds():
    with pytest.raises(ValueError):
        HilbertCurve(0)
    with pytest.raises(ValueError):
        ZOrder(17)


UNIT = BoundingBox(0.0, 0.0, 1.0, 1.0)
ALL_STRATEGIES = [HilbertCurve(), HilbertCurve(4), ZOrder(), SpatialIndexTraversal(), SpatialIndexTraversal(2), XSort()]


@pytest.mark.parametrize("strategy", ALL_STRATEGIES)
def test_singleton_and_duplicates(strategy):
    assert linearize_frame([(0.3, 0.3)], UNIT, strategy).tolist() == [0]
    assert linearize_frame([(0.4, 0.4), (0.4, 0.4)], UNIT, strategy).tolist() == [0, 1]


def test_quadrant_centers_follow_order1_visit():
    # indices: 0 top-right, 1 bottom-left, 2 top-left, 3 bottom-right
    pts = [(0.75, 0.25), (0.25, 0.75), (0.25, 0.25), (0.75, 0.75)]
    assert linearize_frame(pts, UNIT, HilbertCurve(4)).tolist() == [2, 1, 3, 0]


def test_xsort_ties():
    pts = [(0.5, 0.9), (0.1, 0.2), (0.5, 0.1), (0.5, 0.1)]
    assert linearize_frame(pts, UNIT, XSort()).tolist() == [1, 2, 3, 0]


def test_outside_extent():
    with pytest.raises(PositionOutsideExtent):
        linearize_frame([(1.5, 0.5)], UNIT)
    # within tolerance is clamped
    assert linearize_frame([(1.0 + 1e-12, 0.5)], UNIT).tolist() == [0]


def test_spatial_index_traversal_groups_leaves():
    rng = np.random.default_rng(0)
    pts = rng.uniform(size=(64, 2))
    perm = linearize_frame(pts, UNIT, SpatialIndexTraversal(8))
    # 8 leaves in 3 vertical slices (ceil(sqrt(8)) = 3, 24 points per slice)
    xs = pts[perm, 0]
    assert xs[:24].max() <= xs[24:48].min() and xs[24:48].max() <= xs[48:].min()


@settings(max_examples=40, deadline=None)
@given(
    st.lists(st.tuples(st.floats(0, 1), st.floats(0, 1)), min_size=1, max_size=60),
    st.sampled_from(ALL_STRATEGIES),
)
def test_always_permutation(points, strategy):
    perm = linearize_frame(points, UNIT, strategy)
    assert sorted(perm.tolist()) == list(range(len(points)))


def test_dataset_stationary_and_single_frame():
    pts = [[0.1, 0.2], [0.8, 0.3], [0.5, 0.9]]
    d = make_dataset([pts] * 5)
    lo = linearize_dataset(d)
    assert all(np.array_equal(lo.ranks[0], r) for r in lo.ranks)
    assert linearize_dataset(make_dataset([pts])).frame_count == 1


def test_dataset_uses_global_extent():
    # one frame alone would normalize differently; with the global extent the
    # left point in frame 1 still sits in the left half
    d = make_dataset([[[0.0, 0.0], [10.0, 10.0]], [[4.0, 1.0], [6.0, 1.0]]])
    assert linearize_dataset(d, XSort()).ranks.tolist() == [[0, 1], [0, 1]]


def test_boids_orders_are_permutations(boids_1000):
    lo = linearize_dataset(boids_1000, HilbertCurve())
    expected = np.arange(boids_1000.mover_count)
    assert all(np.array_equal(np.sort(r), expected) for r in lo.ranks)


def test_linear_order_validation():
    with pytest.raises(ValueError):
        LinearOrder(np.array([[0, 0]]))


def test_locality_examples():
    d = make_dataset([[[0.0, 0.0], [5.0, 3.0]], [[1.0, 1.0], [0.0, 2.0]]])
    assert locality_score(d, linearize_dataset(d)) == 1.0
    line = make_dataset([[[float(i), 0.0] for i in range(10)]])
    assert locality_score(line, linearize_dataset(line, XSort())) == 1.0
    with pytest.raises(ShapeMismatch):
        locality_score(line, LinearOrder(np.array([[0, 1]])))


def brute_locality(points, perm):
    n = len(points)
    row = {m: k for k, m in enumerate(perm)}
    total = 0
    for m in range(n):
        best, best_d = None, None
        for j in range(n):
            if j == m:
                continue
            dd = (points[m][0] - points[j][0]) ** 2 + (points[m][1] - points[j][1]) ** 2
            if best_d is None or dd < best_d:
                best, best_d = j, dd
        total += abs(row[m] - row[best])
    return total / n


def test_locality_matches_brute_force():
    rng = np.random.default_rng(5)
    pts = rng.uniform(0, 1, size=(50, 2))
    d = make_dataset([pts])
    lo = linearize_dataset(d)
    assert locality_score(d, lo) == pytest.approx(brute_locality(pts.tolist(), lo.ranks[0].tolist()), abs=1e-12)


def blobs(seed, n=200):
    rng = np.random.default_rng(seed)
    centers = np.array([[0.2, 0.2], [0.8, 0.25], [0.25, 0.8], [0.75, 0.75]])
    labels = rng.integers(0, 4, size=n)
    return np.clip(centers[labels] + rng.normal(0, 0.06, size=(n, 2)), 0, 1)


def test_hilbert_beats_xsort_on_blobs():
    d = make_dataset([blobs(11)])
    h = locality_score(d, linearize_dataset(d, HilbertCurve()))
    x = locality_score(d, linearize_dataset(d, XSort()))
    assert h < x


@pytest.mark.xfail(strict=True, reason="on uniform points XSort's mean rank gap is smaller; see ledger")
def test_hilbert_beats_xsort_on_uniform():
    h, x = [], []
    for seed in range(20):
        d = make_dataset([np.random.default_rng(seed).uniform(size=(256, 2))])
        h.append(locality_score(d, linearize_dataset(d, HilbertCurve())))
        x.append(locality_score(d, linearize_dataset(d, XSort())))
    assert np.mean(h) < np.mean(x)


def test_strategy_strings_round_trip():
    for s in ALL_STRATEGIES:
        assert strategy_from_string(strategy_to_string(s)) == s
    with pytest.raises(ValueError):
        strategy_from_string("peano")
