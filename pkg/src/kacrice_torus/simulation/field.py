"""Random Fourier series on the torus T^m = R^m / Z^m.

A field is

    u(theta) = X_0 + sqrt(2) sum_{k > 0} (X_k sin 2 pi <k, theta> + X_{-k} cos 2 pi <k, theta>)

where k > 0 means k is positive in lexicographic order, and the X are
independent centered Gaussians with Var X_{+-k} = w(2 pi eps |k|).
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..constants import EPSILON_POLICY_MAX, TRUNCATION_FLOOR
from ..covariance.radial_weight import WeightSpec
from ..exceptions import EpsilonPolicyError
from ..utils.rng import as_generator

logger = logging.getLogger(__name__)

SUPPORTED_DIMENSIONS = (1, 2)
MAX_TRUNCATION = 100_000
TWO_PI = 2.0 * math.pi


def truncation_order(w: WeightSpec, epsilon: float) -> int:
    """Smallest K with w(2 pi eps K) < TRUNCATION_FLOOR * w(0)."""
    if not epsilon > 0:
        raise EpsilonPolicyError(f"epsilon must be positive, got {epsilon}")
    peak = float(w.evaluate(0.0))
    for k in range(1, MAX_TRUNCATION + 1):
        if float(w.evaluate(TWO_PI * epsilon * k)) < TRUNCATION_FLOOR * peak:
            return k
    raise EpsilonPolicyError(
        f"weight does not decay below {TRUNCATION_FLOOR:g} within {MAX_TRUNCATION} modes "
        f"at epsilon={epsilon}"
    )


def positive_modes(m: int, k_trunc: int) -> np.ndarray:
    """Lattice vectors k > 0 (lexicographically) with |k| <= k_trunc, shape (n, m)."""
    axis = range(-k_trunc, k_trunc + 1)
    modes = [
        k
        for k in itertools.product(axis, repeat=m)
        if any(k) and next(c for c in k if c != 0) > 0 and sum(c * c for c in k) <= k_trunc**2
    ]
    return np.array(modes, dtype=float).reshape(len(modes), m)


def _is_positive(k: tuple[int, ...]) -> bool:
    return next(c for c in k if c != 0) > 0


@dataclass(frozen=True, eq=False)
class FieldSample:
    """One realisation of the truncated random Fourier series."""

    m: int
    epsilon: float
    k_trunc: int
    modes: np.ndarray  # (n, m) positive lattice vectors
    sin_coefficients: np.ndarray  # X_k
    cos_coefficients: np.ndarray  # X_{-k}
    constant: float = 0.0  # X_0
    seed: int | None = None
    field_index: int | None = None
    weight: WeightSpec | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.m not in SUPPORTED_DIMENSIONS:
            raise ValueError(f"fields are supported for m in {SUPPORTED_DIMENSIONS}, got {self.m}")
        n = len(self.modes)
        if self.sin_coefficients.shape != (n,) or self.cos_coefficients.shape != (n,):
            raise ValueError("coefficient arrays must match the number of modes")

    @classmethod
    def zeros(cls, m: int, epsilon: float, k_trunc: int = 1) -> "FieldSample":
        """The identically zero field."""
        modes = positive_modes(m, k_trunc)
        zero = np.zeros(len(modes))
        return cls(m, float(epsilon), k_trunc, modes, zero, zero.copy())

    @classmethod
    def from_coefficients(
        cls,
        m: int,
        epsilon: float,
        coefficients: dict[Any, float],
    ) -> "FieldSample":
        """Build a field from explicit coefficients.

        Keys are signed lattice vectors (plain integers allowed for m = 1):
        k > 0 sets X_k (sine mode), -k sets X_{-k} (cosine mode) and 0 the
        constant.
        """
        constant = 0.0
        sines: dict[tuple[int, ...], float] = {}
        cosines: dict[tuple[int, ...], float] = {}
        for key, value in coefficients.items():
            k = (int(key),) if isinstance(key, int | np.integer) else tuple(int(c) for c in key)
            if len(k) != m:
                raise ValueError(f"mode {key!r} does not have {m} components")
            if not any(k):
                constant = float(value)
            elif _is_positive(k):
                sines[k] = float(value)
            else:
                cosines[tuple(-c for c in k)] = float(value)
        used = set(sines) | set(cosines)
        k_trunc = max((math.ceil(math.sqrt(sum(c * c for c in k))) for k in used), default=1)
        modes = positive_modes(m, k_trunc)
        keys = [tuple(int(c) for c in row) for row in modes]
        sin_c = np.array([sines.get(k, 0.0) for k in keys])
        cos_c = np.array([cosines.get(k, 0.0) for k in keys])
        return cls(m, float(epsilon), k_trunc, modes, sin_c, cos_c, constant)

    @property
    def wave_vectors(self) -> np.ndarray:
        """2 pi k for every stored mode."""
        return TWO_PI * self.modes

    def gradient_scale(self) -> float:
        """Upper bound for |grad u| over the torus."""
        weights = np.abs(self.sin_coefficients) + np.abs(self.cos_coefficients)
        return math.sqrt(2.0) * float(np.sum(np.linalg.norm(self.wave_vectors, axis=1) * weights))

    def hessian_scale(self) -> float:
        """Upper bound for the operator norm of Hess u over the torus."""
        weights = np.abs(self.sin_coefficients) + np.abs(self.cos_coefficients)
        return math.sqrt(2.0) * float(
            np.sum(np.linalg.norm(self.wave_vectors, axis=1) ** 2 * weights)
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "epsilon": self.epsilon,
            "k_trunc": self.k_trunc,
            "modes": len(self.modes),
            "seed": self.seed,
            "field_index": self.field_index,
        }


def sample_field(
    w: WeightSpec,
    m: int,
    epsilon: float,
    rng: np.random.Generator | int | None = None,
    *,
    field_index: int | None = None,
    seed: int | None = None,
) -> FieldSample:
    """Draw a field with Var X_{+-k} = w(2 pi eps |k|), truncated at K_trunc."""
    if m not in SUPPORTED_DIMENSIONS:
        raise ValueError(f"simulation supports m in {SUPPORTED_DIMENSIONS}, got {m}")
    if not 0 < epsilon <= EPSILON_POLICY_MAX:
        raise EpsilonPolicyError(
            f"epsilon must be in (0, {EPSILON_POLICY_MAX}] for simulation, got {epsilon}"
        )
    gen = as_generator(rng)
    k_trunc = truncation_order(w, epsilon)
    modes = positive_modes(m, k_trunc)
    std = np.sqrt(w.evaluate(TWO_PI * epsilon * np.linalg.norm(modes, axis=1)))
    draws = gen.standard_normal(1 + 2 * len(modes))
    constant = math.sqrt(float(w.evaluate(0.0))) * float(draws[0])
    sin_c = std * draws[1 : 1 + len(modes)]
    cos_c = std * draws[1 + len(modes) :]
    return FieldSample(
        m,
        float(epsilon),
        k_trunc,
        modes,
        sin_c,
        cos_c,
        constant,
        seed=seed if seed is not None else (int(rng) if isinstance(rng, int) else None),
        field_index=field_index,
        weight=w,
    )


def eval_field(s: FieldSample, theta, order: int = 0) -> np.ndarray | float:
    """u, grad u or Hess u at theta (shape (m,) or a stack (n, m))."""
    if order not in (0, 1, 2):
        raise ValueError(f"order must be 0, 1 or 2, got {order}")
    points = np.asarray(theta, dtype=float)
    single = points.ndim == 1
    if single:
        points = points[None, :]
    if points.shape[-1] != s.m:
        raise ValueError(f"theta must have {s.m} components, got shape {points.shape}")

    phase = TWO_PI * points @ s.modes.T  # (n, modes)
    sin, cos = np.sin(phase), np.cos(phase)
    a, b = s.sin_coefficients, s.cos_coefficients
    root2 = math.sqrt(2.0)
    if order == 0:
        result = s.constant + root2 * (sin @ a + cos @ b)
    elif order == 1:
        result = root2 * (cos * a - sin * b) @ s.wave_vectors
    else:
        k = s.wave_vectors
        weights = -(sin * a + cos * b)
        result = root2 * np.einsum("nq,qi,qj->nij", weights, k, k)
    return (float(result[0]) if order == 0 else result[0]) if single else result
