"""Tests for the invariant symmetric matrix ensembles."""

import numpy as np
import pytest
from scipy import stats

from kacrice_torus.ensembles.sym_ensembles import (
    AxialSpec,
    IsoSpec,
    PairGaussianSpec,
    axial_covariance,
    det_qc,
    from_normalized,
    iso_covariance,
    iso_density,
    normalized_dim,
    pair_indices,
    to_normalized,
    validate_axial,
)
from kacrice_torus.exceptions import InvalidEnsembleError


class TestNormalizedEntries:
    """Test the normalized coordinates of symmetric matrices."""

    def test_dimension(self):
        """An m x m symmetric matrix has m(m+1)/2 free entries."""
        assert [normalized_dim(m) for m in (1, 2, 3, 4)] == [1, 3, 6, 10]
        assert pair_indices(2) == [(0, 0), (0, 1), (1, 1)]

    def test_trace_norm(self, rng):
        """tr A^2 equals the squared norm of the normalized entries."""
        g = rng.standard_normal((3, 3))
        a = g + g.T
        assert np.sum(to_normalized(a) ** 2) == pytest.approx(np.trace(a @ a))

    def test_inverse(self, rng):
        """from_normalized undoes to_normalized on a batch."""
        g = rng.standard_normal((5, 3, 3))
        a = g + np.swapaxes(g, -1, -2)
        np.testing.assert_allclose(from_normalized(to_normalized(a), 3), a)

    def test_wrong_length(self):
        """The entry count must match m."""
        with pytest.raises(ValueError, match="normalized entries"):
            from_normalized(np.zeros(4), 2)


class TestIsoSpec:
    """Test Gamma_{u,v}."""

    def test_covariance(self):
        """Var(a_ii) = u + 2v, Cov(a_ii, a_jj) = u, Var(sqrt 2 a_ij) = 2v."""
        cov = iso_covariance(IsoSpec(2, 1.0, 1.0))
        np.testing.assert_allclose(cov, [[3.0, 0.0, 1.0], [0.0, 2.0, 0.0], [1.0, 0.0, 3.0]])

    @pytest.mark.parametrize(
        "args",
        [(2, 1.0, 0.0), (2, -2.0, 1.0), (0, 1.0, 1.0), (True, 1.0, 1.0), (2, float("nan"), 1.0)],
    )
    def test_invalid(self, args):
        """Parameters outside the admissible cone are rejected."""
        with pytest.raises(InvalidEnsembleError):
            IsoSpec(*args)

    def test_negative_u_allowed(self):
        """u may be negative as long as m u + 2v > 0."""
        spec = IsoSpec(2, -0.5, 1.0)
        assert np.linalg.eigvalsh(iso_covariance(spec)).min() > 0

    def test_density_matches_scipy(self, rng):
        """The closed-form density is the Gaussian density of the normalized entries."""
        spec = IsoSpec(3, 0.4, 0.7)
        g = rng.standard_normal((3, 3))
        a = (g + g.T) / 2
        expected = stats.multivariate_normal(
            mean=np.zeros(6), cov=iso_covariance(spec)
        ).pdf(to_normalized(a))
        assert iso_density(spec, a) == pytest.approx(expected, rel=1e-10)

    def test_density_needs_symmetric(self):
        """Non-symmetric input is rejected."""
        with pytest.raises(ValueError, match="symmetric"):
            iso_density(IsoSpec(2, 1.0, 1.0), np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestAxialSpec:
    """Test the O_eta(m)-invariant forms Q_c."""

    C_VALUES = [
        (1.0, 1.0, 0.0, 0.0, 1.0),
        (1.0, 1.0, 0.5, 0.2, 1.0),
        (1.0, -1.0, 0.0, 0.0, 1.0),
        (1.0, 1.0, 2.0, 0.0, 1.0),
        (1.0, 1.0, 0.0, 1.0, -0.5),
        (1.0, 1.0, 0.0, -0.4, 1.0),
        (-1.0, 1.0, 0.0, 0.0, 1.0),
        (2.0, 1.5, 0.3, 0.2, 0.9),
    ]

    @pytest.mark.parametrize("m", [2, 3, 4])
    @pytest.mark.parametrize("c", C_VALUES)
    def test_classification_matches_spectrum(self, m, c):
        """validate_axial agrees with the smallest eigenvalue of Q_c."""
        spec = AxialSpec(m, c)
        smallest = np.linalg.eigvalsh(axial_covariance(spec)).min()
        assert bool(validate_axial(spec)) == (smallest > 0)

    def test_reasons(self):
        """Failures name the violated condition."""
        assert validate_axial(AxialSpec(2, (1.0, -1.0, 0.0, 0.0, 1.0))).reason == "c2 <= 0"
        assert validate_axial(AxialSpec(3, (1.0, 1.0, 0.0, 1.0, -0.5))).reason == "c5 <= 0"
        assert validate_axial(AxialSpec(1, (-1.0, 1.0, 0.0, 0.0, 1.0))).reason == "c1 <= 0"

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_det_qc(self, m):
        """det_qc matches the determinant of the form."""
        spec = AxialSpec(m, (2.0, 1.5, 0.3, 0.2, 0.9))
        assert det_qc(spec) == pytest.approx(np.linalg.det(axial_covariance(spec)), rel=1e-10)

    def test_rotated_axis_keeps_spectrum(self):
        """Rotating the axis conjugates the form."""
        c = (2.0, 1.5, 0.3, 0.2, 0.9)
        plain = axial_covariance(AxialSpec(2, c))
        rotated = axial_covariance(AxialSpec(2, c, axis=np.array([0.6, 0.8])))
        np.testing.assert_allclose(np.linalg.eigvalsh(rotated), np.linalg.eigvalsh(plain))
        assert not np.allclose(rotated, plain)

    def test_axis_must_be_unit(self):
        """The axis is a unit vector."""
        with pytest.raises(InvalidEnsembleError, match="unit vector"):
            AxialSpec(2, (1.0, 1.0, 0.0, 0.0, 1.0), axis=np.array([1.0, 1.0]))

    def test_five_coefficients(self):
        """Q_c has exactly five coefficients."""
        with pytest.raises(InvalidEnsembleError, match="5 entries"):
            AxialSpec(2, (1.0, 1.0, 0.0, 0.0))


class TestPairGaussianSpec:
    """Test the pair ensembles used for |det B^-| |det B^+|."""

    def test_shape_checked(self):
        """The covariance must have blocks * N rows."""
        with pytest.raises(InvalidEnsembleError, match="6 x 6"):
            PairGaussianSpec(2, np.eye(3), blocks=2)

    def test_symmetry_checked(self):
        """Asymmetric covariances are rejected."""
        cov = np.eye(2)
        cov[0, 1] = 1.0
        with pytest.raises(InvalidEnsembleError, match="not symmetric"):
            PairGaussianSpec(1, cov)

    def test_product(self):
        """product builds a block-diagonal pair."""
        single = PairGaussianSpec.from_iso(IsoSpec(2, 1.0, 1.0))
        pair = PairGaussianSpec.product(single, single)
        assert pair.dim == 6
        assert not np.any(pair.covariance[:3, 3:])
