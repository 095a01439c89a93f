import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rmtcap.channel import (
    FadingParams,
    fading_matrix,
    gain_realization,
    interference_diagonal,
    large_scale_fading,
    profile_from_positions,
    profile_matrix,
)
from rmtcap.errors import ParameterError
from rmtcap.numkernel import rng_stream, sample_complex_gaussian

P = FadingParams()


def scalar_gain(d, d0=10.0, d1=50.0):
    if d > d1:
        return d ** -1.75
    if d > d0:
        return d1 ** -0.75 / d
    return d1 ** -0.75 / d0


class TestLargeScaleFading:
    def test_far(self):
        assert large_scale_fading(100.0) == pytest.approx(3.1623e-4, rel=1e-4)

    def test_knee_continuity(self):
        lo, hi = large_scale_fading(50.0), large_scale_fading(np.nextafter(50.0, 100.0))
        assert lo == pytest.approx(50.0 ** -1.75, rel=1e-12)
        assert hi == pytest.approx(lo, rel=1e-12)

    def test_plateau(self):
        assert large_scale_fading(5.0) == pytest.approx(5.3183e-3, rel=1e-4)
        assert large_scale_fading(0.0) == P.plateau

    def test_near_continuity(self):
        assert large_scale_fading(np.nextafter(10.0, 20.0)) == pytest.approx(P.plateau, rel=1e-12)

    def test_monotone_on_grid(self):
        g = large_scale_fading(np.linspace(0.0, 3000.0, 10_000))
        assert np.all(np.diff(g) <= 0)
        assert np.all(g > 0) and g.max() <= P.plateau

    def test_bad_params(self):
        with pytest.raises(ParameterError):
            FadingParams(d0=60.0, d1=50.0)
        with pytest.raises(ParameterError):
            FadingParams(N0=0.0)


class TestFadingMatrix:
    def test_single(self):
        assert fading_matrix([[100.0]])[0, 0] == pytest.approx(100.0 ** -1.75)

    def test_all_near(self):
        L = fading_matrix(np.full((2, 3), 4.0))
        assert np.all(L == P.plateau)

    def test_scalar_loop(self):
        d = np.random.default_rng(0).uniform(0, 200, (3, 5))
        L = fading_matrix(d)
        for j in range(3):
            for k in range(5):
                assert L[j, k] == pytest.approx(scalar_gain(d[j, k]), rel=1e-13)


class TestInterference:
    def test_no_external_users(self):
        xi = interference_diagonal(np.full((4, 3), 30.0), np.ones(3, bool))
        assert np.all(xi == P.N0)

    def test_single_external(self):
        xi = interference_diagonal([[100.0]], [False])
        assert xi[0] == pytest.approx(1e-12 + 1.0e-7, rel=1e-10)

    def test_double_loop(self):
        rng = np.random.default_rng(1)
        d = rng.uniform(1, 500, (4, 9))
        mask = rng.random(9) < 0.4
        params = FadingParams(P=0.5)
        xi = interference_diagonal(d, mask, params)
        for j in range(4):
            acc = params.N0
            for k in range(9):
                if not mask[k]:
                    acc += params.P * scalar_gain(d[j, k]) ** 2
            assert xi[j] == pytest.approx(acc, rel=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_user_order_invariant(self, seed):
        rng = np.random.default_rng(seed)
        d = np.exp(rng.uniform(0, 8, (3, 40)))
        mask = rng.random(40) < 0.3
        perm = rng.permutation(40)
        a = interference_diagonal(d, mask)
        b = interference_diagonal(d[:, perm], mask[perm])
        np.testing.assert_allclose(a, b, rtol=1e-12)
        assert np.all(a >= P.N0)

    def test_mask_shape(self):
        with pytest.raises(ParameterError):
            interference_diagonal(np.ones((2, 3)), [True, False])


class TestProfile:
    def test_noise_only(self):
        L = np.random.default_rng(2).uniform(1e-6, 1e-3, (3, 4))
        Q = profile_matrix(L, np.full(3, P.N0))
        np.testing.assert_allclose(Q, L / math.sqrt(P.N0), rtol=1e-14)

    def test_scalar(self):
        Q = profile_matrix([[0.3]], [2.0], FadingParams(P=8.0))
        assert Q[0, 0] == pytest.approx(math.sqrt(8.0 / 2.0) * 0.3)

    def test_rowwise(self):
        rng = np.random.default_rng(3)
        L, xi = rng.random((5, 6)), rng.uniform(1, 2, 5)
        Q = profile_matrix(L, xi)
        for j in range(5):
            np.testing.assert_allclose(Q[j], L[j] * math.sqrt(1.0 / xi[j]), rtol=1e-14)

    def test_nonpositive_xi(self):
        with pytest.raises(AssertionError):
            profile_matrix(np.ones((2, 2)), [1.0, 0.0])

    def test_power_noise_scaling(self):
        rng = np.random.default_rng(4)
        bs, users = rng.uniform(0, 100, (4, 2)), rng.uniform(0, 100, (6, 2))
        members = np.ones(6, bool)
        a = profile_from_positions(bs, users, members, FadingParams(P=1.0, N0=1e-12))
        b = profile_from_positions(bs, users, members, FadingParams(P=7.0, N0=7e-12))
        np.testing.assert_allclose(a.Q, b.Q, rtol=1e-13)

    def test_profile_fields(self):
        rng = np.random.default_rng(5)
        bs, users = rng.uniform(0, 300, (3, 2)), rng.uniform(0, 300, (10, 2))
        members = np.arange(10) < 6
        prof = profile_from_positions(bs, users, members)
        assert (prof.J_m, prof.K_m) == (3, 6) and prof.beta == 2.0
        assert np.all(prof.xi > P.N0)


class TestGainRealization:
    def test_identity(self):
        Q = np.random.default_rng(6).random((3, 4))
        np.testing.assert_array_equal(gain_realization(Q, np.ones((3, 4))), Q)

    def test_zero(self):
        G = sample_complex_gaussian(rng_stream(1), 2, 2)
        assert np.all(gain_realization(np.zeros((2, 2)), G) == 0)

    def test_shape_mismatch(self):
        with pytest.raises(ParameterError):
            gain_realization(np.ones((2, 3)), np.ones((3, 2)))

    def test_second_moment(self):
        Q = np.array([[0.5, 2.0], [1.0, 3.0]])
        rng = rng_stream(9)
        acc = np.zeros_like(Q)
        n = 10_000
        for _ in range(n):
            acc += np.abs(gain_realization(Q, sample_complex_gaussian(rng, 2, 2))) ** 2
        np.testing.assert_allclose(acc / n, Q**2, rtol=0.05)
