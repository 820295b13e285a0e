"""Tests for random Fourier series on the torus."""

import math

import numpy as np
import pytest

from kacrice_torus.exceptions import EpsilonPolicyError
from kacrice_torus.simulation.field import (
    FieldSample,
    eval_field,
    positive_modes,
    sample_field,
    truncation_order,
)

ROOT2 = math.sqrt(2.0)
TWO_PI = 2.0 * math.pi


class TestTruncation:
    """Test the truncation order and the mode set."""

    def test_gaussian_order(self, gaussian_weight):
        """exp(-(2 pi eps K)^2) < 1e-10 first holds at K = 16 for eps = 0.05."""
        assert truncation_order(gaussian_weight, 0.05) == 16

    @pytest.mark.parametrize("epsilon", [0.0, -0.1])
    def test_nonpositive_epsilon(self, gaussian_weight, epsilon):
        """epsilon must be positive."""
        with pytest.raises(EpsilonPolicyError, match="positive"):
            truncation_order(gaussian_weight, epsilon)

    def test_modes_m1(self):
        """In one dimension the positive modes are 1..K."""
        np.testing.assert_array_equal(positive_modes(1, 3), [[1.0], [2.0], [3.0]])

    def test_modes_m2(self):
        """Half of the nonzero lattice points in the disc of radius K."""
        modes = positive_modes(2, 2)
        assert len(modes) == 6
        assert all(np.sum(k**2) <= 4 for k in modes)
        keys = {tuple(k) for k in modes}
        assert all(tuple(-k) not in keys for k in modes)


class TestFieldSample:
    """Test construction and evaluation of fields."""

    def test_sine_mode(self):
        """X_1 = 1 gives u = sqrt(2) sin(2 pi theta)."""
        s = FieldSample.from_coefficients(1, 0.1, {1: 1.0})
        assert eval_field(s, [0.25]) == pytest.approx(ROOT2)
        assert eval_field(s, [0.0], 1)[0] == pytest.approx(ROOT2 * TWO_PI)
        assert eval_field(s, [0.25], 2)[0, 0] == pytest.approx(-ROOT2 * TWO_PI**2)

    def test_cosine_mode_and_constant(self):
        """Negative keys set cosine coefficients and 0 the constant."""
        s = FieldSample.from_coefficients(1, 0.1, {-2: 0.5, 0: 3.0})
        assert s.k_trunc == 2
        assert eval_field(s, [0.0]) == pytest.approx(3.0 + 0.5 * ROOT2)
        assert eval_field(s, [0.25]) == pytest.approx(3.0 - 0.5 * ROOT2)

    def test_two_dimensional(self):
        """Lattice vector keys in m = 2."""
        s = FieldSample.from_coefficients(2, 0.1, {(1, 0): 1.0, (0, -1): 0.5})
        assert eval_field(s, [0.25, 0.0]) == pytest.approx(ROOT2 * 1.5)
        gradient = eval_field(s, [0.0, 0.25], 1)
        np.testing.assert_allclose(gradient, [ROOT2 * TWO_PI, -0.5 * ROOT2 * TWO_PI])

    def test_stack_evaluation(self):
        """A stack of points gives one value per point."""
        s = FieldSample.from_coefficients(2, 0.1, {(1, 1): 1.0})
        points = np.array([[0.0, 0.0], [0.125, 0.0], [0.3, 0.7]])
        assert eval_field(s, points).shape == (3,)
        assert eval_field(s, points, 1).shape == (3, 2)
        hessians = eval_field(s, points, 2)
        assert hessians.shape == (3, 2, 2)
        np.testing.assert_allclose(hessians, np.swapaxes(hessians, 1, 2))

    def test_wrong_mode_length(self):
        """Keys must have m components."""
        with pytest.raises(ValueError, match="components"):
            FieldSample.from_coefficients(2, 0.1, {1: 1.0})

    def test_order_checked(self):
        """Only orders 0, 1 and 2 exist."""
        with pytest.raises(ValueError, match="order"):
            eval_field(FieldSample.zeros(1, 0.1), [0.0], 3)

    def test_theta_shape_checked(self):
        """theta must have m components."""
        with pytest.raises(ValueError, match="components"):
            eval_field(FieldSample.zeros(2, 0.1), [0.0])

    def test_unsupported_dimension(self):
        """Fields live on T^1 or T^2."""
        with pytest.raises(ValueError, match="supported"):
            FieldSample.zeros(3, 0.1)

    def test_scales(self):
        """Gradient and Hessian bounds of sqrt(2) sin(2 pi theta)."""
        s = FieldSample.from_coefficients(1, 0.1, {1: 1.0})
        assert s.gradient_scale() == pytest.approx(ROOT2 * TWO_PI)
        assert s.hessian_scale() == pytest.approx(ROOT2 * TWO_PI**2)
        assert FieldSample.zeros(1, 0.1).hessian_scale() == 0.0


class TestSampleField:
    """Test random draws."""

    def test_reproducible(self, gaussian_weight):
        """The same integer seed gives the same field."""
        a = sample_field(gaussian_weight, 1, 0.1, 42)
        b = sample_field(gaussian_weight, 1, 0.1, 42)
        np.testing.assert_array_equal(a.sin_coefficients, b.sin_coefficients)
        np.testing.assert_array_equal(a.cos_coefficients, b.cos_coefficients)
        assert a.seed == 42

    def test_truncation_recorded(self, gaussian_weight, rng):
        """The sample carries its truncation order and mode count."""
        s = sample_field(gaussian_weight, 2, 0.2, rng, field_index=3)
        assert s.k_trunc == truncation_order(gaussian_weight, 0.2)
        assert s.to_dict()["modes"] == len(positive_modes(2, s.k_trunc))
        assert s.field_index == 3

    def test_coefficient_variances(self, gaussian_weight):
        """Var X_k = w(2 pi eps k) over many draws."""
        draws = np.array(
            [sample_field(gaussian_weight, 1, 0.1, seed).sin_coefficients[:3] for seed in range(4000)]
        )
        expected = np.exp(-((TWO_PI * 0.1 * np.arange(1, 4)) ** 2))
        np.testing.assert_allclose(draws.var(axis=0), expected, rtol=0.1)

    def test_dimension_policy(self, gaussian_weight, rng):
        """Simulation supports m = 1 and m = 2 only."""
        with pytest.raises(ValueError, match="simulation supports"):
            sample_field(gaussian_weight, 3, 0.1, rng)

    @pytest.mark.parametrize("epsilon", [0.3, 0.0])
    def test_epsilon_policy(self, gaussian_weight, rng, epsilon):
        """epsilon must lie in (0, 0.2]."""
        with pytest.raises(EpsilonPolicyError):
            sample_field(gaussian_weight, 1, epsilon, rng)
