"""Tests for C_m, K(eta), delta0, C'_m and the moment predictions."""

import csv
import logging
import math

import numpy as np
import pytest

from kacrice_torus import asymptotic_constants
from kacrice_torus.asymptotic_constants import (
    CmEstimate,
    c_m,
    c_m_exact,
    c_prime_m,
    compute_constants,
    delta0,
    delta0_curve,
    dump_delta0,
    expected_count,
    k_eta,
    k_infinity,
    panel_rule,
    planar_delta0_integral,
    predict_moments,
    two_point_correlation,
)
from kacrice_torus.covariance.radial_weight import WeightSpec, make_profile
from kacrice_torus.exceptions import SingularMatrixError
from kacrice_torus.utils.rng import spawn

C1_GAUSSIAN = math.sqrt(1.5) / math.pi
C_PRIME1_GAUSSIAN = 0.120548


class TestCm:
    """Test C_m(w)."""

    def test_closed_form_m1(self, gaussian_profile):
        """C_1 = sqrt(3/2) / pi for the Gaussian weight."""
        assert c_m_exact(gaussian_profile(1)) == pytest.approx(C1_GAUSSIAN, rel=1e-12)
        assert C1_GAUSSIAN == pytest.approx(0.389848, abs=1e-6)

    def test_no_closed_form_m2(self, gaussian_profile):
        """Only m = 1 has a closed form."""
        assert c_m_exact(gaussian_profile(2)) is None

    def test_monte_carlo_m1(self, gaussian_profile, rng):
        """Both Monte Carlo forms agree with the closed form."""
        estimate = c_m(gaussian_profile(1), 20_000, rng)
        assert abs(estimate.estimate - C1_GAUSSIAN) < 4 * estimate.std_error
        assert abs(estimate.normalized - C1_GAUSSIAN) < 4 * estimate.normalized_std_error
        assert estimate.value == estimate.exact

    def test_amplitude_invariance(self):
        """Multiplying w by a constant leaves C_1 unchanged."""
        t = np.linspace(0.0, 8.0, 801)
        doubled = WeightSpec.tabulated(t, 2.0 * np.exp(-(t**2)))
        assert c_m_exact(make_profile(doubled)) == pytest.approx(C1_GAUSSIAN, rel=1e-5)

    def test_report_fields(self, gaussian_profile):
        """to_dict carries both forms and the seed."""
        data = c_m(gaussian_profile(2), 1000, 5).to_dict()
        assert data["seed"] == 5
        assert data["exact"] is None
        assert {"estimate", "std_error", "normalized", "forms_agree"} <= set(data)


class TestK:
    """Test K(eta) and K(inf)."""

    def test_k_infinity(self, gaussian_profile):
        """K(inf) = (2 pi d_1)^-1 = pi^-3/2."""
        assert k_infinity(gaussian_profile(1)) == pytest.approx(math.pi**-1.5, rel=1e-12)

    def test_infinity_sentinel(self, gaussian_profile):
        """An infinite eta selects K(inf)."""
        p = gaussian_profile(2)
        assert k_eta(p, [math.inf, math.inf]) == k_infinity(p)

    def test_unit_separation(self, gaussian_profile):
        """K(1) = (2 pi)^-1 det H^-1/2 with det H = 0.666299."""
        expected = 1 / (2 * math.pi * math.sqrt(0.666299))
        assert k_eta(gaussian_profile(1), [1.0]) == pytest.approx(expected, rel=1e-4)

    def test_diagonal_divergence(self, gaussian_profile):
        """|eta| K(eta) tends to (2 pi)^-1 (3 d h)^-1/2 for m = 1."""
        p = gaussian_profile(1)
        t = 1e-2
        expected = 1 / (2 * math.pi * math.sqrt(3 * p.d_m * p.h_m))
        assert t * k_eta(p, [t]) == pytest.approx(expected, rel=1e-2)

    def test_diagonal_rejected(self, gaussian_profile):
        """K diverges at eta = 0."""
        with pytest.raises(SingularMatrixError, match="diverges"):
            k_eta(gaussian_profile(1), [0.0])


class TestDelta0:
    """Test delta0 and the two-point correlation."""

    def test_tail(self, gaussian_profile):
        """delta0 decays fast."""
        assert abs(delta0(gaussian_profile(1), [20.0]).value) < 1e-8

    def test_exact_matches_monte_carlo(self, gaussian_profile):
        """The closed form for m = 1 agrees with common-random-number sampling."""
        p = gaussian_profile(1)
        exact = delta0(p, [1.0])
        sampled = delta0(p, [1.0], 40_000, 17, exact=False)
        assert exact.n == 0
        assert abs(sampled.value - exact.value) < 4 * sampled.std_error + 1e-12

    def test_exact_only_in_m1(self, gaussian_profile):
        """The closed form is one-dimensional."""
        with pytest.raises(ValueError, match="m = 1"):
            delta0(gaussian_profile(2), [1.0, 0.0], exact=True)

    def test_diagonal_rejected(self, gaussian_profile):
        """delta0 is undefined at eta = 0."""
        with pytest.raises(SingularMatrixError):
            delta0(gaussian_profile(1), [0.0])

    def test_bounded_near_diagonal_m2(self, gaussian_profile):
        """For m = 2 delta0 stays bounded as eta -> 0."""
        p = gaussian_profile(2)
        values = [delta0(p, [t, 0.0], 2000, 3).value for t in (0.05, 0.1, 0.2)]
        assert all(math.isfinite(v) for v in values)
        assert max(abs(v) for v in values) < 10.0

    def test_correlation_far(self, gaussian_profile):
        """rho_2 / rho_1^2 -> 1 far from the diagonal."""
        assert two_point_correlation(gaussian_profile(1), [20.0]).ratio == pytest.approx(
            1.0, abs=1e-6
        )

    def test_correlation_slope_m1(self, gaussian_profile):
        """Near the diagonal the m = 1 correlation vanishes linearly in |eta|."""
        p = gaussian_profile(1)
        small = two_point_correlation(p, [0.02]).ratio
        large = two_point_correlation(p, [0.1]).ratio
        slope = math.log(large / small) / math.log(5.0)
        assert slope == pytest.approx(1.0, rel=0.1)

    def test_correlation_rotation_invariant(self, gaussian_profile):
        """With shared draws the ratio only depends on |eta|."""
        p = gaussian_profile(2)
        a = two_point_correlation(p, [1.0, 0.0], 2000, 9)
        b = two_point_correlation(p, [0.6, 0.8], 2000, 9)
        assert a.ratio == pytest.approx(b.ratio, rel=1e-5)

    def test_curve(self, gaussian_profile):
        """delta0_curve returns one estimate per radius."""
        curve = delta0_curve(gaussian_profile(1), [0.5, 1.0, 2.0])
        assert [d.eta_norm for d in curve] == [0.5, 1.0, 2.0]

    def test_dump(self, gaussian_profile, temp_dir):
        """dump_delta0 writes a CSV with a header row."""
        path = dump_delta0(gaussian_profile(1), temp_dir / "delta0.csv", points=5)
        with open(path, encoding="utf-8") as f:
            rows = list(csv.reader(f))
        assert rows[0] == ["t", "delta0", "std_error"]
        assert len(rows) == 6
        assert float(rows[-1][2]) == 0.0


class TestPanelRule:
    """Test the composite Gauss-Legendre rule."""

    def test_integrates_polynomials(self):
        """Panels integrate t^5 exactly."""
        t, w = panel_rule(3.0, 4)
        assert np.sum(w * t**5) == pytest.approx(3.0**6 / 6)
        assert np.all((t > 0) & (t < 3.0))


class TestCPrime:
    """Test C'_m(w)."""

    def test_m1(self, gaussian_profile):
        """For m = 1 C'_1 uses the closed-form integrand and exact C_1."""
        p = gaussian_profile(1)
        result = c_prime_m(p, 2000, 3)
        assert result.c_m == pytest.approx(C1_GAUSSIAN)
        assert result.samples_per_node == 0
        assert result.std_error == 0.0
        assert result.tail_value < 1e-6
        assert result.value > 0

    def test_deterministic(self, gaussian_profile):
        """The same seed gives the same value."""
        p = gaussian_profile(1)
        assert c_prime_m(p, 2000, 3).value == c_prime_m(p, 2000, 3).value

    def test_gaussian_value_m1(self, gaussian_profile):
        """C'_1 of the Gaussian weight is 0.120548."""
        result = c_prime_m(gaussian_profile(1), 2000, 3)
        assert result.value == pytest.approx(C_PRIME1_GAUSSIAN, rel=1e-4)
        assert result.quadrature_error < 1e-6

    def test_tail_shares_node_normals(self, gaussian_profile, mocker):
        """The tail check in m = 2 reuses the normals of the radial nodes."""
        p = gaussian_profile(2)
        known = CmEstimate(2, 1.0, 0.0, 1.0, 0.0, 2, exact=None)
        normals = mocker.spy(asymptotic_constants, "_crn_normals")
        result = c_prime_m(p, 200, 5, nodes=4, c_m_estimate=known, max_workers=1)
        assert normals.call_count == 1

        node_rng, _ = spawn(5, 2)
        (tail,) = delta0_curve(p, [result.radius], 200, node_rng)
        assert result.tail_value == pytest.approx(abs(tail.value), rel=1e-12, abs=1e-300)

    def test_quadrature_error_reported_m2(self, gaussian_profile):
        """The half-order comparison is part of the report."""
        p = gaussian_profile(2)
        known = CmEstimate(2, 1.0, 0.0, 1.0, 0.0, 2, exact=None)
        result = c_prime_m(p, 200, 5, nodes=4, c_m_estimate=known, max_workers=1)
        data = result.to_dict()
        assert math.isfinite(data["quadrature_error"])
        assert data["quadrature_error"] >= 0.0
        assert data["quadrature"]["node_count"] == result.node_count > 0

    @pytest.mark.slow
    def test_radial_matches_planar_m2(self, gaussian_profile):
        """The radial reduction agrees with a planar grid within 5%."""
        p = gaussian_profile(2)
        known = CmEstimate(2, 1.0, 0.0, 1.0, 0.0, 2, exact=None)
        result = c_prime_m(p, 20_000, 11, nodes=8, c_m_estimate=known)
        planar = planar_delta0_integral(p, 20_000, 12)
        integral_error = result.std_error * (2 * math.pi) ** 2
        assert abs(planar - result.integral) <= 0.05 * abs(result.integral) + 4 * integral_error


class TestPredictions:
    """Test predicted moments at finite epsilon."""

    def test_mean(self, gaussian_profile):
        """mean = C_1 / eps = 7.79697 at eps = 0.05."""
        p = gaussian_profile(1)
        prediction = predict_moments(p, 0.05, C1_GAUSSIAN, 1.0)
        assert prediction.mean == pytest.approx(7.79697, rel=1e-5)
        assert prediction.variance == pytest.approx(20.0)
        assert prediction.normalized_variance == pytest.approx(0.05 / C1_GAUSSIAN**2)

    def test_exact_count_m1(self, gaussian_profile):
        """N_eps agrees with C_1 / eps up to exponentially small terms."""
        p = gaussian_profile(1)
        prediction = predict_moments(p, 0.05, C1_GAUSSIAN, 1.0)
        assert prediction.mean_exact == pytest.approx(prediction.mean, rel=1e-6)
        assert prediction.variance_exact == pytest.approx(
            prediction.mean_exact + (1.0 - C1_GAUSSIAN) / 0.05
        )
        assert prediction.second_factorial_moment is not None

    def test_scaling(self, gaussian_profile):
        """Halving eps doubles mean and variance in m = 1."""
        p = gaussian_profile(1)
        coarse = predict_moments(p, 0.05, C1_GAUSSIAN, 1.0, include_exact=False)
        fine = predict_moments(p, 0.025, C1_GAUSSIAN, 1.0, include_exact=False)
        assert fine.mean == pytest.approx(2 * coarse.mean)
        assert fine.variance / fine.mean == pytest.approx(coarse.variance / coarse.mean)
        assert fine.mean_exact is None

    def test_nonpositive_epsilon(self, gaussian_profile):
        """epsilon must be positive."""
        with pytest.raises(ValueError, match="positive"):
            predict_moments(gaussian_profile(1), 0.0, C1_GAUSSIAN, 1.0)

    def test_policy_warning(self, gaussian_profile, caplog):
        """epsilon above the policy range only warns."""
        with caplog.at_level(logging.WARNING):
            predict_moments(gaussian_profile(1), 0.3, C1_GAUSSIAN, 1.0, include_exact=False)
        assert "policy range" in caplog.text

    def test_expected_count_m2(self, gaussian_weight):
        """N_eps for m = 2 is close to C_2 / eps^2."""
        weight = gaussian_weight.with_dimension(2)
        p = make_profile(weight)
        count = expected_count(weight, 2, 0.1, 20_000, 4)
        c2 = c_m(p, 20_000, 5)
        expected = c2.estimate / 0.01
        assert abs(count.value - expected) < 4 * math.hypot(count.std_error, c2.std_error / 0.01)


class TestComputeConstants:
    """Test the full constants report."""

    def test_report_m1(self, gaussian_profile):
        """The report satisfies the consistency identity and serializes."""
        report = compute_constants(gaussian_profile(1), 5000, 21, epsilon=0.05)
        assert abs(report.consistency_residual) <= 4 * report.consistency_error + 1e-12
        data = report.to_dict()
        assert data["m"] == 1
        assert data["prediction"]["mean"] == pytest.approx(C1_GAUSSIAN / 0.05)
        assert data["c_prime_m"]["quadrature"]["tail_value"] < 1e-6
