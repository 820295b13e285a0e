"""Tests for ensemble sampling and Monte Carlo |det| expectations."""

import math

import numpy as np
import pytest

from kacrice_torus.ensembles.sampling import (
    bivariate_abs_moment,
    covariance_sqrt,
    expect_abs_det,
    holder_probe,
    sample_axial,
    sample_iso,
    sample_pair,
)
from kacrice_torus.ensembles.sym_ensembles import (
    AxialSpec,
    IsoSpec,
    PairGaussianSpec,
    axial_covariance,
    iso_covariance,
    to_normalized,
)
from kacrice_torus.exceptions import InvalidEnsembleError, NotPositiveSemidefiniteError


class TestCovarianceSqrt:
    """Test the PSD square root."""

    def test_square(self):
        """The root squares back to the covariance."""
        cov = iso_covariance(IsoSpec(3, 0.5, 1.0))
        root = covariance_sqrt(cov)
        np.testing.assert_allclose(root @ root, cov, atol=1e-12)

    def test_singular_allowed(self):
        """PSD covariances with a zero eigenvalue are accepted."""
        root = covariance_sqrt(np.array([[1.0, 1.0], [1.0, 1.0]]))
        np.testing.assert_allclose(root @ root, np.ones((2, 2)), atol=1e-12)

    def test_indefinite_rejected(self):
        """A clearly negative eigenvalue raises."""
        with pytest.raises(NotPositiveSemidefiniteError) as exc_info:
            covariance_sqrt(np.array([[1.0, 2.0], [2.0, 1.0]]))
        assert exc_info.value.eigenvalue == pytest.approx(-1.0)


class TestSampling:
    """Test the samplers."""

    def test_single_draw_shape(self, rng):
        """size=None returns one symmetric matrix."""
        a = sample_iso(IsoSpec(3, 1.0, 1.0), rng)
        assert a.shape == (3, 3)
        np.testing.assert_allclose(a, a.T)

    @pytest.mark.parametrize("u", [0.5, -0.5])
    def test_iso_covariance(self, rng, u):
        """Sample covariance of the normalized entries matches Gamma_{u,v}."""
        spec = IsoSpec(2, u, 1.0)
        samples = sample_iso(spec, rng, size=50_000)
        empirical = np.cov(to_normalized(samples), rowvar=False)
        np.testing.assert_allclose(empirical, iso_covariance(spec), atol=0.08)

    def test_axial_covariance(self, rng):
        """Axial draws have covariance Q_c."""
        spec = AxialSpec(2, (2.0, 1.5, 0.3, 0.2, 0.9))
        samples = sample_axial(spec, rng, size=50_000)
        empirical = np.cov(to_normalized(samples), rowvar=False)
        np.testing.assert_allclose(empirical, axial_covariance(spec), atol=0.08)

    def test_iso_type_checked(self, rng):
        """sample_iso needs an IsoSpec."""
        with pytest.raises(InvalidEnsembleError, match="IsoSpec"):
            sample_iso(AxialSpec(2, (1.0, 1.0, 0.0, 0.0, 1.0)), rng)

    def test_pair_shape(self, rng):
        """Pair draws have shape (size, blocks, m, m)."""
        single = PairGaussianSpec.from_iso(IsoSpec(2, 1.0, 1.0))
        pair = PairGaussianSpec.product(single, single)
        assert sample_pair(pair, rng, size=4).shape == (4, 2, 2, 2)
        assert sample_pair(pair, rng).shape == (2, 2, 2)

    def test_pair_with_normals(self):
        """Fixed normals give identical draws."""
        spec = PairGaussianSpec.from_iso(IsoSpec(2, 1.0, 1.0))
        normals = np.ones((3, 3))
        np.testing.assert_array_equal(
            sample_pair(spec, normals=normals), sample_pair(spec, normals=normals)
        )


class TestExpectAbsDet:
    """Test Monte Carlo |det| expectations."""

    def test_gamma11_m1(self, rng):
        """E|a| = sqrt(6/pi) for a ~ N(0, 3)."""
        estimate = expect_abs_det(IsoSpec(1, 1.0, 1.0), 20_000, rng)
        assert abs(estimate.estimate - math.sqrt(6 / math.pi)) < 4 * estimate.std_error
        assert estimate.n == 20_000

    def test_independent_pair(self, rng):
        """An independent pair multiplies the single expectations."""
        single = PairGaussianSpec.from_iso(IsoSpec(1, 1.0, 1.0))
        estimate = expect_abs_det(PairGaussianSpec.product(single, single), 40_000, rng)
        assert abs(estimate.estimate - 6 / math.pi) < 4 * estimate.std_error

    def test_integer_seed_reproducible(self):
        """Integer seeds give the same estimate and are recorded."""
        a = expect_abs_det(IsoSpec(2, 1.0, 1.0), 500, 11)
        b = expect_abs_det(IsoSpec(2, 1.0, 1.0), 500, 11)
        assert a == b
        assert a.seed == 11

    def test_common_random_numbers(self, rng):
        """Shared normals make a scaled ensemble scale exactly."""
        normals = rng.standard_normal((1000, 3))
        base = expect_abs_det(IsoSpec(2, 1.0, 1.0), 1000, normals=normals)
        scaled = expect_abs_det(IsoSpec(2, 4.0, 4.0), 1000, normals=normals)
        assert scaled.estimate == pytest.approx(4.0 * base.estimate)

    def test_normals_shape_checked(self):
        """normals must be (n, dim)."""
        with pytest.raises(ValueError, match="normals must have shape"):
            expect_abs_det(IsoSpec(2, 1.0, 1.0), 10, normals=np.zeros((10, 2)))

    def test_needs_two_draws(self):
        """A standard error needs n >= 2."""
        with pytest.raises(ValueError, match="at least 2"):
            expect_abs_det(IsoSpec(1, 1.0, 1.0), 1)

    def test_holder_probe_identical(self, rng):
        """Identical specs are at distance 0."""
        spec = PairGaussianSpec.from_iso(IsoSpec(2, 1.0, 1.0))
        assert holder_probe(spec, spec, 100, rng) == 0.0

    def test_holder_probe_finite(self, rng):
        """Nearby specs give a finite ratio."""
        a = PairGaussianSpec.from_iso(IsoSpec(2, 1.0, 1.0))
        b = PairGaussianSpec.from_iso(IsoSpec(2, 1.0, 1.01))
        ratio = holder_probe(a, b, 2000, rng)
        assert 0.0 < ratio < 10.0


class TestBivariateAbsMoment:
    """Test E|XY| for a Gaussian pair."""

    def test_independent(self):
        """rho = 0 gives E|X| E|Y| = 2 sx sy / pi."""
        assert bivariate_abs_moment(4.0, 9.0, 0.0) == pytest.approx(12.0 / math.pi)

    def test_identical(self):
        """X = Y gives E X^2."""
        assert bivariate_abs_moment(2.0, 2.0, 2.0) == pytest.approx(2.0)

    def test_degenerate(self):
        """A zero variance gives 0."""
        assert bivariate_abs_moment(0.0, 1.0, 0.0) == 0.0

    def test_negative_variance(self):
        """Negative variances are not covariances."""
        with pytest.raises(NotPositiveSemidefiniteError):
            bivariate_abs_moment(-1.0, 1.0, 0.0)

    def test_against_monte_carlo(self, rng):
        """The closed form agrees with sampling."""
        cov = np.array([[1.0, 0.6], [0.6, 2.0]])
        xy = rng.multivariate_normal([0.0, 0.0], cov, size=200_000)
        values = np.abs(xy[:, 0] * xy[:, 1])
        error = values.std() / math.sqrt(len(values))
        assert abs(values.mean() - bivariate_abs_moment(1.0, 2.0, 0.6)) < 4 * error
