import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmtcap.errors import ParameterError
from rmtcap.scenario import Region, distance_matrix, in_region, sample_nodes


@pytest.fixture
def circle():
    return Region("circle", 2000.0)


@pytest.fixture
def square():
    return Region("square", 2000.0)


class TestRegion:
    def test_bad_parameters(self):
        with pytest.raises(ParameterError):
            Region("hexagon", 10.0)
        with pytest.raises(ParameterError):
            Region("circle", 0.0)

    def test_center_inside(self, circle, square):
        assert in_region((0.0, 0.0), circle)
        assert in_region((0.0, 0.0), square)

    def test_just_outside_circle(self, circle):
        assert not in_region((1001.0, 0.0), circle)

    def test_square_corner_is_inside(self, square):
        assert in_region((1000.0, 1000.0), square)
        assert not in_region((1000.0, 1000.5), square)

    def test_vectorised(self, circle):
        pts = np.array([[0, 0], [1000, 0], [800, 800]])
        assert in_region(pts, circle).tolist() == [True, True, False]


class TestSampleNodes:
    def test_single_bs(self, circle):
        ns = sample_nodes(circle, 1, 0, "uniform", seed=7)
        assert ns.J == 1 and ns.K == 0
        assert np.hypot(*ns.bs_positions[0]) <= 1000.0

    def test_deterministic(self, square):
        a = sample_nodes(square, 100, 200, "uniform", seed=1)
        b = sample_nodes(square, 100, 200, "uniform", seed=1)
        assert np.array_equal(a.bs_positions, b.bs_positions)
        assert np.array_equal(a.user_positions, b.user_positions)

    def test_seed_changes_layout(self, square):
        a = sample_nodes(square, 50, 0, seed=1)
        b = sample_nodes(square, 50, 0, seed=2)
        assert not np.array_equal(a.bs_positions, b.bs_positions)

    @pytest.mark.parametrize("dist", ["uniform", "truncated_normal"])
    @pytest.mark.parametrize("shape", ["circle", "square"])
    def test_all_inside(self, shape, dist):
        region = Region(shape, 2000.0, center=(50.0, -20.0))
        ns = sample_nodes(region, 300, 500, dist, seed=3, sigma=900.0)
        assert in_region(ns.bs_positions, region).all()
        assert in_region(ns.user_positions, region).all()

    def test_uniform_disk_mean_radius(self, circle):
        # uniform disk of radius R: E[r] = 2R/3
        ns = sample_nodes(circle, 10_000, 0, "uniform", seed=11)
        r = np.hypot(*ns.bs_positions.T)
        assert r.mean() == pytest.approx(2000.0 / 3.0, rel=0.02)

    def test_uniform_square_coordinate_means(self, square):
        n = 20_000
        ns = sample_nodes(square, n, 0, "uniform", seed=5)
        se = 2000.0 / math.sqrt(12.0) / math.sqrt(n)
        assert np.all(np.abs(ns.bs_positions.mean(axis=0)) < 3 * se)

    def test_truncated_normal_is_center_heavy(self, square):
        ns = sample_nodes(square, 5000, 0, "truncated_normal", seed=2)
        uni = sample_nodes(square, 5000, 0, "uniform", seed=2)
        assert np.hypot(*ns.bs_positions.T).mean() < 0.8 * np.hypot(*uni.bs_positions.T).mean()

    def test_bad_counts(self, circle):
        with pytest.raises(ParameterError):
            sample_nodes(circle, 0, 5)
        with pytest.raises(ParameterError):
            sample_nodes(circle, 3, -1)
        with pytest.raises(ParameterError):
            sample_nodes(circle, 3, 1, "poisson")


class TestDistanceMatrix:
    def test_three_four_five(self):
        assert distance_matrix([(0, 0)], [(3, 4)]).tolist() == [[5.0]]

    def test_coincident(self):
        assert distance_matrix([(0, 0)], [(0, 0)]).tolist() == [[0.0]]

    def test_brute_force(self):
        rng = np.random.default_rng(0)
        bs, us = rng.uniform(-5, 5, (3, 2)), rng.uniform(-5, 5, (4, 2))
        d = distance_matrix(bs, us)
        for j in range(3):
            for k in range(4):
                ref = math.sqrt((bs[j, 0] - us[k, 0]) ** 2 + (bs[j, 1] - us[k, 1]) ** 2)
                assert d[j, k] == pytest.approx(ref, rel=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(st.integers(1, 6), st.integers(0, 6), st.integers(0, 2**32 - 1))
    def test_swap_roles_transposes(self, p, q, seed):
        rng = np.random.default_rng(seed)
        a, b = rng.normal(size=(p, 2)), rng.normal(size=(q, 2))
        d = distance_matrix(a, b)
        assert d.shape == (p, q) and np.all(d >= 0)
        if q:
            assert np.array_equal(d, distance_matrix(b, a).T)

    def test_requires_bs(self):
        with pytest.raises(ParameterError):
            distance_matrix(np.empty((0, 2)), [(1, 1)])
