import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from spatialrugs.errors import ShapeMismatch
from spatialrugs.rug_render import RugImage
from spatialrugs.tacs import (
    GaussianParams,
    PoolingMatrix,
    collect_pool,
    difference_mask,
    gaussian_blur,
    gaussian_kernel,
    pool_median,
    pool_membership,
    rgb_norm_key,
    tacs_smooth,
    tacs_smooth_reference,
    transition_map,
)

GREEN = (0, 255, 0)
BLUE = (0, 0, 255)

images = arrays(np.uint8, st.tuples(st.integers(1, 9), st.integers(1, 12), st.just(3)), elements=st.sampled_from([0, 7, 128, 200, 255]))
matrices = st.builds(
    PoolingMatrix,
    st.sampled_from([1, 3, 5, 7]),
    st.integers(0, 4),
    st.integers(0, 2),
)


def filled(h, w, color):
    return np.broadcast_to(np.array(color, dtype=np.uint8), (h, w, 3)).copy()


def test_matrix_widths():
    m = PoolingMatrix(7, 3, 1)
    assert [m.width_at(d) for d in range(4)] == [7, 5, 3, 1]
    assert PoolingMatrix(3, 4, 2).width_at(4) == 1
    with pytest.raises(ValueError):
        PoolingMatrix(4, 1, 1)
    with pytest.raises(ValueError):
        PoolingMatrix(3, -1, 0)


def test_pool_counts():
    img = RugImage(np.zeros((9, 9, 3), dtype=np.uint8))
    assert len(collect_pool(img, 4, 4, PoolingMatrix(3, 1, 1))) == 4
    assert len(collect_pool(img, 4, 4, PoolingMatrix(1, 0, 0))) == 1
    assert len(collect_pool(img, 0, 0, PoolingMatrix(5, 0, 0))) == 3
    # the last column has no future
    assert len(collect_pool(img, 8, 4, PoolingMatrix(3, 3, 0))) == 3


def test_pool_collection_order():
    px = np.arange(5 * 4 * 3, dtype=np.uint8).reshape(5, 4, 3)
    img = RugImage(px)
    pool = collect_pool(img, 1, 2, PoolingMatrix(3, 1, 1))
    assert pool == [img.pixel(1, 1), img.pixel(1, 2), img.pixel(1, 3), img.pixel(2, 2)]


def test_pool_median_examples():
    assert pool_median([(4, 5, 6)] * 3) == (4, 5, 6)
    assert pool_median([(0, 0, 0), (255, 255, 255), (0, 0, 0)]) == (0, 0, 0)
    assert pool_median([(10, 0, 0), (0, 20, 0), (0, 0, 200), (5, 5, 5)]) == (10, 0, 0)
    # equal norms fall back to the RGB value, so blue sorts before green
    assert pool_median([GREEN, BLUE, GREEN]) == GREEN
    assert pool_median([GREEN, BLUE]) == BLUE
    assert rgb_norm_key(BLUE) < rgb_norm_key(GREEN)
    with pytest.raises(ValueError):
        pool_median([])


def test_single_outlier_pure_blue():
    px = filled(5, 5, GREEN)
    px[2, 2] = BLUE
    out = tacs_smooth(RugImage(px), PoolingMatrix(3, 1, 0))
    # every pool holds at most one blue among several greens
    assert np.all(out.pixels == np.array(GREEN, dtype=np.uint8))


def test_single_outlier_distinct_key():
    px = filled(5, 5, GREEN)
    px[2, 2] = (0, 0, 128)
    out = tacs_smooth(RugImage(px), PoolingMatrix(3, 1, 0))
    assert np.all(out.pixels == np.array(GREEN, dtype=np.uint8))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)), min_size=1, max_size=9), st.data())
def test_majority_color_wins(minority, data):
    majority = data.draw(st.tuples(st.integers(0, 255), st.integers(0, 255), st.integers(0, 255)))
    pool = [majority] * (len(minority) + 1) + minority
    pool = data.draw(st.permutations(pool))
    assert pool_median(pool) == majority


def test_identity_cases():
    rng = np.random.default_rng(0)
    img = RugImage(rng.integers(0, 256, size=(6, 9, 3), dtype=np.uint8))
    assert tacs_smooth(img, PoolingMatrix(1, 0, 0)) == img
    uniform = RugImage(filled(4, 7, (9, 8, 7)))
    assert tacs_smooth(uniform, PoolingMatrix(5, 3, 1)) == uniform


@settings(max_examples=60, deadline=None)
@given(images, matrices)
def test_vectorized_matches_reference(pixels, m):
    img = RugImage(pixels)
    assert tacs_smooth(img, m) == tacs_smooth_reference(img, m)


@settings(max_examples=40, deadline=None)
@given(images, matrices)
def test_output_is_pool_member(pixels, m):
    img = RugImage(pixels)
    out = tacs_smooth(img, m)
    assert pool_membership(img, out, m).all()
    for k in range(img.height):
        for t in range(img.width):
            pool = collect_pool(img, t, k, m)
            assert len(pool) <= m.neighborhood_size * (m.time_ahead + 1)
            assert out.pixel(t, k) in pool


def test_interior_pool_size_closed_form():
    m = PoolingMatrix(7, 3, 1)
    img = RugImage(np.zeros((20, 20, 3), dtype=np.uint8))
    assert len(collect_pool(img, 5, 10, m)) == 7 + 5 + 3 + 1 == m.max_pool_size


def test_reads_from_original_not_in_place():
    # a top-down in-place scan would turn row 1 dark and then carry the
    # dark color into row 2
    dark = (0, 0, 10)
    px = filled(5, 1, GREEN)
    px[0, 0] = px[2, 0] = dark
    out = tacs_smooth(RugImage(px), PoolingMatrix(3, 0, 0))
    assert out.pixel(0, 1) == dark
    assert out.pixel(0, 2) == GREEN


def brute_gauss(px, sigma, window):
    half = window // 2
    w = np.array([np.exp(-(i * i) / (2 * sigma * sigma)) for i in range(-half, half + 1)])
    w = w / w.sum()
    h, wd, _ = px.shape
    out = np.zeros(px.shape)
    for k in range(h):
        for t in range(wd):
            acc = np.zeros(3)
            for i in range(window):
                for j in range(window):
                    kk = min(max(k + i - half, 0), h - 1)
                    tt = min(max(t + j - half, 0), wd - 1)
                    acc += w[i] * w[j] * px[kk, tt]
            out[k, t] = acc
    return np.floor(out + 0.5 + 1e-9).astype(np.uint8)


@pytest.mark.parametrize("sigma,window", [(0.8, 3), (1.0, 5), (2.0, 9)])
def test_gauss_matches_brute_force(sigma, window):
    rng = np.random.default_rng(int(sigma * 10) + window)
    px = rng.integers(0, 256, size=(7, 11, 3), dtype=np.uint8)
    assert np.array_equal(gaussian_blur(RugImage(px), GaussianParams(sigma, window)).pixels, brute_gauss(px, sigma, window))


def test_gauss_examples():
    uniform = RugImage(filled(5, 5, (10, 20, 30)))
    assert gaussian_blur(uniform, GaussianParams(2.0, 9)) == uniform
    px = np.zeros((1, 3, 3), dtype=np.uint8)
    px[0, 1] = 255
    out = gaussian_blur(RugImage(px), GaussianParams(1e6, 3))
    assert out.pixel(1, 0) == (85, 85, 85)
    impulse = np.zeros((9, 9, 3), dtype=np.uint8)
    impulse[4, 4] = 255
    blurred = gaussian_blur(RugImage(impulse), GaussianParams(1.0, 5)).pixels[..., 0].astype(int)
    assert np.array_equal(blurred, blurred.T) and np.array_equal(blurred, blurred[::-1, ::-1])
    k = gaussian_kernel(GaussianParams(1.0, 5))
    assert blurred[4, 4] == int(np.floor(255 * k[2] * k[2] + 0.5))


def test_gauss_invents_colors():
    px = filled(6, 6, GREEN)
    px[:3] = BLUE
    img = RugImage(px)
    out = gaussian_blur(img, GaussianParams(1.0, 5))
    assert not pool_membership(img, out, PoolingMatrix(5, 2, 0)).all()


def test_gauss_param_validation():
    with pytest.raises(ValueError):
        GaussianParams(0, 5)
    with pytest.raises(ValueError):
        GaussianParams(1, 4)


def test_difference_mask_examples():
    a = RugImage(filled(3, 4, GREEN))
    d = difference_mask(a, a)
    assert not d.mask.any() and d.changed_fraction == 0
    px = a.pixels.copy()
    px[1, 2] = (0, 250, 0)
    d = difference_mask(a, RugImage(px))
    assert d.mask.sum() == 1 and d.changed_fraction == pytest.approx(1 / 12)
    assert not difference_mask(a, RugImage(px), threshold=5).mask.any()
    with pytest.raises(ShapeMismatch):
        difference_mask(a, RugImage(filled(2, 4, GREEN)))


def test_transition_map():
    px = filled(4, 4, GREEN)
    px[:, 2:] = BLUE
    tm = transition_map(RugImage(px))
    assert tm[:, 1:3].all() and not tm[:, [0, 3]].any()
