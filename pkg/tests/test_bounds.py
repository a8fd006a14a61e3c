import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from cvmemory.bounds import (
    FisherMatrix,
    eb_bound,
    equivalent_sigma,
    fisher_gaussian,
    fisher_smoothflat,
    smooth_indicator,
)

from oracles import gaussian_fisher_oracle, piecewise_indicator, smoothflat_fisher_oracle

widths = st.floats(min_value=0.0, max_value=1e6, allow_nan=False)
PI = np.pi


def flat_params():
    return st.floats(min_value=0.05, max_value=20).flatmap(
        lambda l: st.tuples(st.just(l), st.floats(min_value=l * 1e-3, max_value=l))
    )


class TestEBBound:
    def test_zero(self):
        assert eb_bound(0, 0) == 0

    def test_two_two(self):
        assert eb_bound(2, 2) == pytest.approx(1.6)

    def test_wide_limit(self):
        assert eb_bound(1e6, 1e6) == pytest.approx(2.0, abs=1e-11)
        assert eb_bound(np.inf, np.inf) == 2.0

    def test_negative(self):
        with pytest.raises(ValueError):
            eb_bound(-1, 1)

    @given(a=widths, b=widths)
    def test_symmetric_and_bounded(self, a, b):
        assert eb_bound(a, b) == eb_bound(b, a)
        assert 0 <= eb_bound(a, b) <= 2

    @given(a=st.floats(0, 100), b=st.floats(0, 100), d=st.floats(1e-3, 10))
    def test_strictly_increasing(self, a, b, d):
        assert eb_bound(a + d, b) > eb_bound(a, b)


class TestFisherGaussian:
    def test_unit(self):
        assert np.allclose(fisher_gaussian(1.0).matrix, 2 * np.eye(2))

    def test_sqrt2(self):
        assert np.allclose(fisher_gaussian(np.sqrt(2)).matrix, np.eye(2))

    @pytest.mark.parametrize("sigma", [0.3, 1.0, 2.5, 7.0])
    def test_quadrature(self, sigma):
        f = gaussian_fisher_oracle(sigma)
        assert fisher_gaussian(sigma).diagonal[0] == pytest.approx(f, rel=1e-6)

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_invalid(self, sigma):
        with pytest.raises(ValueError):
            fisher_gaussian(sigma)

    def test_fisher_matrix_validation(self):
        with pytest.raises(ValueError):
            FisherMatrix(np.diag([1.0, -1.0]))


class TestSmoothIndicator:
    @given(p=flat_params())
    def test_interior_and_edge(self, p):
        l, d = p
        assert smooth_indicator(0.0, l, d) == pytest.approx(1.0)
        assert smooth_indicator(l / 2, l, d) == pytest.approx(0.5)
        assert smooth_indicator(-l / 2, l, d) == pytest.approx(0.5)

    @given(p=flat_params(), x=st.floats(-30, 30))
    def test_matches_literal_branches(self, p, x):
        l, d = p
        assert smooth_indicator(x, l, d) == pytest.approx(piecewise_indicator(x, l, d), abs=1e-15)

    @given(p=flat_params())
    def test_range_and_support(self, p):
        l, d = p
        x = np.linspace(-l, l, 4001)
        v = smooth_indicator(x, l, d)
        assert np.all((v >= 0) & (v <= 1))
        outside = np.abs(x) > l / 2 + d / 2
        assert np.all(v[outside] == 0)
        inside = np.abs(x) < l / 2 - d / 2
        assert np.all(v[inside] == 1)

    @pytest.mark.parametrize("l, d", [(1.0, 0.2), (PI, PI), (5.0, 0.01), (3.0, 1.5)])
    def test_continuity_at_branch_points(self, l, d):
        for b in (-l / 2 - d / 2, -l / 2 + d / 2, l / 2 - d / 2, l / 2 + d / 2):
            left = smooth_indicator(np.nextafter(b, -np.inf), l, d)
            right = smooth_indicator(np.nextafter(b, np.inf), l, d)
            assert abs(left - right) < 1e-12

    @pytest.mark.parametrize("l, d", [(1.0, 0.2), (PI, PI), (5.0, 0.01), (3.0, 1.5)])
    def test_integral_is_length(self, l, d):
        a = l / 2 + d / 2
        val, _ = integrate.quad(smooth_indicator, -a, a, args=(l, d), points=[-l / 2 + d / 2, l / 2 - d / 2], limit=200)
        assert val == pytest.approx(l, rel=1e-9)

    @pytest.mark.parametrize("l, d", [(1.0, 0.0), (1.0, 1.5), (0.0, 0.0), (1.0, -0.1)])
    def test_invalid(self, l, d):
        with pytest.raises(ValueError):
            smooth_indicator(0.0, l, d)


class TestFisherSmoothFlat:
    def test_pi_pi(self):
        assert np.allclose(fisher_smoothflat(PI, PI).matrix, np.eye(2))

    def test_pi_half(self):
        assert np.allclose(fisher_smoothflat(PI, PI / 2).matrix, 2 * np.eye(2))

    @pytest.mark.parametrize("l, d", [(PI, PI), (2.0, 0.5), (10.0, 1.0), (1.0, 0.01)])
    def test_quadrature(self, l, d):
        assert fisher_smoothflat(l, d).diagonal[0] == pytest.approx(smoothflat_fisher_oracle(l, d), rel=1e-6)

    def test_diverges(self):
        assert fisher_smoothflat(1.0, 1e-9).diagonal[0] > 1e9

    def test_invalid(self):
        with pytest.raises(ValueError):
            fisher_smoothflat(1.0, 2.0)


class TestEquivalentSigma:
    def test_delta_equals_l(self):
        for l in (0.5, 1.0, PI, 7.0):
            assert equivalent_sigma(l, l) == pytest.approx(np.sqrt(2) * l / PI)

    def test_pi(self):
        assert equivalent_sigma(PI, PI) == pytest.approx(np.sqrt(2))

    @given(p=flat_params())
    def test_round_trip(self, p):
        l, d = p
        fg = fisher_gaussian(equivalent_sigma(l, d)).matrix
        fs = fisher_smoothflat(l, d).matrix
        assert np.allclose(fg, fs, rtol=1e-12, atol=0)

    def test_bound_at_equivalent_width(self):
        s = equivalent_sigma(PI, PI)
        assert eb_bound(s, s) == pytest.approx(4 / 3)
        # same as the bound written in terms of the FIM entry f = 2 / sigma^2
        f = fisher_smoothflat(PI, PI).diagonal[0]
        assert eb_bound(s, s) == pytest.approx(2 * (2 / f) / (1 + 2 / f))
