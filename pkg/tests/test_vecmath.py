import numpy as np
import pytest
from hypothesis import given, strategies as st

from byzbatch.vecmath import (RngStream, ZeroNormError, coordinate_median,
                              gaussian_draw, l2_norm, normalize)

finite_vectors = st.lists(
    st.floats(min_value=-1e6, max_value=1e6, allow_nan=False), min_size=1, max_size=8
)


def test_l2_norm_examples():
    assert l2_norm([0, 0, 0]) == 0
    assert l2_norm([3, 4]) == 5
    assert l2_norm([1, 1, 1, 1]) == 2


def test_l2_norm_rejects_non_finite():
    with pytest.raises(ValueError):
        l2_norm([1.0, np.nan])
    with pytest.raises(ValueError):
        l2_norm([np.inf, 0.0])


def test_normalize_examples():
    assert np.allclose(normalize([3, 4]), [0.6, 0.8])
    assert np.allclose(normalize([0, -2]), [0, -1])
    with pytest.raises(ZeroNormError):
        normalize([0, 0])


@given(finite_vectors, st.floats(min_value=1e-3, max_value=1e3))
def test_normalize_scale_invariant(v, c):
    v = np.asarray(v)
    if np.linalg.norm(v) < 1e-6:
        return
    assert np.allclose(normalize(c * v), normalize(v), atol=1e-9)
    assert np.allclose(normalize(-v), -normalize(v), atol=1e-12)


def test_coordinate_median_examples():
    assert np.array_equal(coordinate_median([[1, 5], [2, 4], [9, 0]]), [2, 4])
    assert np.array_equal(coordinate_median([[0], [10]]), [5])
    assert np.array_equal(coordinate_median([[1, 1]] * 3), [1, 1])
    with pytest.raises(ValueError):
        coordinate_median([])


@given(st.lists(st.lists(st.floats(min_value=-100, max_value=100), min_size=3, max_size=3),
                min_size=1, max_size=7),
       st.lists(st.floats(min_value=-10, max_value=10), min_size=3, max_size=3))
def test_coordinate_median_permutation_and_translation(vs, t):
    vs = [np.asarray(v) for v in vs]
    t = np.asarray(t)
    base = coordinate_median(vs)
    assert np.array_equal(coordinate_median(vs[::-1]), base)
    assert np.allclose(coordinate_median([v + t for v in vs]), base + t, atol=1e-9)


class TestRngStream:
    def test_same_lane_is_deterministic(self):
        a = gaussian_draw(RngStream(7, worker=1, iteration=2), 3)
        b = gaussian_draw(RngStream(7, worker=1, iteration=2), 3)
        assert np.array_equal(a, b)

    def test_distinct_lanes_differ(self):
        a = gaussian_draw(RngStream(7, worker=1, iteration=2), 3)
        b = gaussian_draw(RngStream(7, worker=2, iteration=2), 3)
        c = gaussian_draw(RngStream(8, worker=1, iteration=2), 3)
        assert not np.array_equal(a, b)
        assert not np.array_equal(a, c)

    def test_draw_counter_advances(self):
        s = RngStream(7)
        assert not np.array_equal(s.gaussian(3), s.gaussian(3))

    def test_lane_fork_leaves_parent_untouched(self):
        s = RngStream(7)
        s.gaussian(2)
        draw_before = s.draw
        s.lane(worker=5).gaussian(2)
        assert s.draw == draw_before

    def test_empirical_mean_clt_bound(self):
        # 1e5 standard normal draws: each coordinate mean within 4 sigma/sqrt(n)
        draws = RngStream(7).gaussian_matrix(100_000, 3)
        assert np.all(np.abs(draws.mean(axis=0)) < 4 / np.sqrt(100_000))

    def test_dimension_validation(self):
        with pytest.raises(ValueError):
            RngStream(0).gaussian(0)
