"""Tests for radial weights and their profiles."""

import math

import numpy as np
import pytest

from kacrice_torus.covariance.radial_weight import (
    GaussianProfile,
    TabulatedProfile,
    WeightKind,
    WeightSpec,
    direct_moments,
    load_weight_table,
    make_profile,
    moments,
    sphere_moment,
)
from kacrice_torus.exceptions import WeightSpecError


class TestWeightSpec:
    """Test construction and evaluation of weights."""

    def test_gaussian_defaults(self):
        """The default weight is exp(-t^2) in dimension one."""
        w = WeightSpec.gaussian()
        assert w.kind is WeightKind.GAUSSIAN
        assert w.dimension == 1
        assert w.evaluate(0.0) == pytest.approx(1.0)
        assert w.evaluate(2.0) == pytest.approx(math.exp(-4.0))

    def test_gaussian_is_even(self):
        """w(-t) = w(t)."""
        w = WeightSpec.gaussian(scale=0.7)
        t = np.linspace(0.0, 3.0, 7)
        np.testing.assert_allclose(w.evaluate(-t), w.evaluate(t))

    def test_invalid_scale(self):
        """Nonpositive scales are rejected."""
        with pytest.raises(WeightSpecError, match="scale must be positive"):
            WeightSpec.gaussian(scale=0.0)

    def test_invalid_dimension(self):
        """Dimensions below one are rejected."""
        with pytest.raises(WeightSpecError):
            WeightSpec.gaussian(dimension=0)

    def test_tabulated_interpolates_samples(self):
        """A tabulated weight reproduces its samples."""
        t = np.linspace(0.0, 8.0, 401)
        w = WeightSpec.tabulated(t, np.exp(-(t**2)))
        np.testing.assert_allclose(w.evaluate(t[:50]), np.exp(-(t[:50] ** 2)), atol=1e-12)

    def test_tabulated_accepts_both_signs(self):
        """Samples at -t and t must agree, and are merged."""
        t = np.linspace(-6.0, 6.0, 241)
        w = WeightSpec.tabulated(t, np.exp(-(t**2)))
        assert w.evaluate(1.0) == pytest.approx(math.exp(-1.0), rel=1e-6)

    def test_tabulated_not_even(self):
        """Different values at -t and t are rejected."""
        t = np.array([-1.0, 0.0, 1.0, 2.0, 8.0])
        w = np.array([0.5, 1.0, 0.3, 0.01, 0.0])
        with pytest.raises(WeightSpecError, match="not even"):
            WeightSpec.tabulated(t, w)

    def test_tabulated_negative(self):
        """Negative weights are rejected."""
        t = np.linspace(0.0, 8.0, 9)
        w = np.exp(-(t**2))
        w[3] = -0.1
        with pytest.raises(WeightSpecError, match="negative"):
            WeightSpec.tabulated(t, w)

    def test_tabulated_must_start_at_zero(self):
        """The table must include t = 0."""
        t = np.linspace(0.5, 8.0, 16)
        with pytest.raises(WeightSpecError, match="t = 0"):
            WeightSpec.tabulated(t, np.exp(-(t**2)))

    def test_tabulated_must_decay(self):
        """A table that stays large at its end is rejected."""
        t = np.linspace(0.0, 1.0, 11)
        with pytest.raises(WeightSpecError, match="decay"):
            WeightSpec.tabulated(t, np.exp(-(t**2)))

    def test_to_dict(self):
        """Gaussian weights report their scale."""
        data = WeightSpec.gaussian(scale=2.0, dimension=2).to_dict()
        assert data == {"kind": "gaussian", "dimension": 2, "scale": 2.0}


class TestLoadWeightTable:
    """Test reading weight tables from CSV files."""

    def test_load_with_header(self, weight_table):
        """A header row is skipped."""
        w = load_weight_table(weight_table)
        assert w.kind is WeightKind.TABULATED
        assert len(w.samples) == 801

    def test_wrong_column_count(self, temp_dir):
        """Rows must have two columns."""
        path = temp_dir / "bad.csv"
        path.write_text("0,1,2\n1,0.5,3\n", encoding="utf-8")
        with pytest.raises(WeightSpecError, match="expected two columns"):
            load_weight_table(path)

    def test_missing_file(self, temp_dir):
        """Unreadable files raise WeightSpecError."""
        with pytest.raises(WeightSpecError, match="Cannot read"):
            load_weight_table(temp_dir / "missing.csv")

    def test_non_numeric_row(self, temp_dir):
        """Non-numeric values after the header are reported with their line."""
        path = temp_dir / "bad.csv"
        path.write_text("t,w\n0,1\nx,0.5\n", encoding="utf-8")
        with pytest.raises(WeightSpecError, match=":3:"):
            load_weight_table(path)


class TestSphereMoment:
    """Test integrals of monomials over the unit sphere."""

    @pytest.mark.parametrize(
        "m, alpha, expected",
        [
            (1, (), 2.0),
            (2, (), 2 * math.pi),
            (3, (), 4 * math.pi),
            (2, (2,), math.pi),
            (3, (2,), 4 * math.pi / 3),
            (2, (1,), 0.0),
        ],
    )
    def test_known_values(self, m, alpha, expected):
        """Surface areas and second moments."""
        assert sphere_moment(m, alpha) == pytest.approx(expected)

    def test_too_many_exponents(self):
        """Multi-indices longer than m are rejected."""
        with pytest.raises(WeightSpecError):
            sphere_moment(1, (2, 2))


class TestGaussianProfile:
    """Test the closed-form Gaussian profile."""

    def test_make_profile_type(self, gaussian_weight):
        """Gaussian weights produce a GaussianProfile."""
        assert isinstance(make_profile(gaussian_weight), GaussianProfile)

    def test_moments_m1(self, gaussian_profile):
        """(s, d, h) = (sqrt(pi), sqrt(pi)/2, sqrt(pi)/4) for exp(-t^2) in m = 1."""
        s, d, h = gaussian_profile(1).moments()
        root_pi = math.sqrt(math.pi)
        assert s == pytest.approx(root_pi)
        assert d == pytest.approx(root_pi / 2)
        assert h == pytest.approx(root_pi / 4)

    @pytest.mark.parametrize("m", [1, 2, 3])
    def test_moments_match_direct_quadrature(self, gaussian_profile, m):
        """Profile derivatives at 0 equal the polynomial moments of w."""
        p = gaussian_profile(m)
        np.testing.assert_allclose(p.moments(), direct_moments(p.weight, m), rtol=1e-9)

    def test_derivatives_are_consistent(self, gaussian_profile):
        """deriv(k+1) is the derivative of deriv(k)."""
        p = gaussian_profile(2)
        s, step = 0.8, 1e-5
        for k in range(4):
            numeric = (p.deriv(k, s + step) - p.deriv(k, s - step)) / (2 * step)
            assert float(p.deriv(k + 1, s)) == pytest.approx(float(numeric), rel=1e-7)

    def test_increment_without_cancellation(self, gaussian_profile):
        """deriv_increment is accurate where the plain difference cancels."""
        p = gaussian_profile(1)
        s = 1e-12
        expected = float(p.deriv(2, 0.0)) * s
        assert float(p.deriv_increment(1, s)) == pytest.approx(expected, rel=1e-6)

    def test_invalid_order(self, gaussian_profile):
        """Derivative orders above four are rejected."""
        with pytest.raises(ValueError, match="derivative order"):
            gaussian_profile(1).deriv(5, 0.0)

    def test_decay_radius(self, gaussian_profile):
        """Tighter tolerances give larger radii, and the profile is small beyond them."""
        p = gaussian_profile(1)
        loose, tight = p.decay_radius(1e-6), p.decay_radius(1e-12)
        assert loose < tight
        assert abs(float(p.eval(tight**2 / 2))) < 1e-12 * p.s_m


class TestTabulatedProfile:
    """Test profiles of tabulated weights."""

    def test_matches_gaussian(self, weight_table):
        """A tabulated Gaussian reproduces the closed-form moments."""
        tabulated = make_profile(load_weight_table(weight_table))
        assert isinstance(tabulated, TabulatedProfile)
        exact = make_profile(WeightSpec.gaussian())
        np.testing.assert_allclose(moments(tabulated), exact.moments(), rtol=1e-5)

    def test_profile_values(self, weight_table):
        """f(s) away from the origin agrees with the closed form."""
        tabulated = make_profile(load_weight_table(weight_table))
        exact = make_profile(WeightSpec.gaussian())
        for s in (0.5, 2.0):
            assert float(tabulated.eval(s)) == pytest.approx(float(exact.eval(s)), rel=1e-5)
