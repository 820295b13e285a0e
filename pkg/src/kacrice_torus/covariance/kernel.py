"""Covariance kernel V, its periodization and the matrices H(V, eta).

Indices in J_m = {-m, ..., -1, 1, ..., m} address the 2m coordinates of the
pair (theta, phi): -i is the i-th coordinate of the first point and +i the
i-th coordinate of the second.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from ..constants import (
    LATTICE_TOLERANCE,
    MAX_DERIVATIVE_ORDER,
    QUAD_LIMIT,
    SINGULAR_RADIUS,
)
from ..exceptions import SingularMatrixError
from .frames import adapted_frame
from .radial_weight import RadialProfile

logger = logging.getLogger(__name__)

MAX_LATTICE_POINTS = 5_000_000  # refuse lattice boxes larger than this
LATTICE_CHUNK = 20_000  # shifted points evaluated per batch


def check_index(value: int, m: int) -> int:
    """Validate an element of J_m."""
    if isinstance(value, bool) or not isinstance(value, int | np.integer):
        raise TypeError(f"index must be an integer, got {value!r}")
    if value == 0 or abs(value) > m:
        raise ValueError(f"index must be in J_{m} = {{-{m},...,-1,1,...,{m}}}, got {value}")
    return int(value)


def j_position(value: int, m: int) -> int:
    """Row of the 2m x 2m block matrices that carries index ``value``."""
    value = check_index(value, m)
    return abs(value) - 1 if value < 0 else m + value - 1


def _as_points(eta, m: int) -> np.ndarray:
    points = np.asarray(eta, dtype=float)
    if points.shape[-1:] != (m,):
        raise ValueError(f"eta must have trailing dimension {m}, got shape {points.shape}")
    return points


def v_tensor(p: RadialProfile, eta, order: int) -> np.ndarray:
    """Symmetric derivative tensor of V of the given order at eta.

    ``eta`` may be a single point (shape (m,)) or a stack (shape (..., m));
    the result has shape (...,) + (m,) * order.
    """
    if not 0 <= order <= MAX_DERIVATIVE_ORDER:
        raise ValueError(
            f"derivative order must be between 0 and {MAX_DERIVATIVE_ORDER}, got {order}"
        )
    points = _as_points(eta, p.m)
    m = p.m
    r = 0.5 * np.sum(points**2, axis=-1)
    delta = np.eye(m)

    if order == 0:
        return p.eval(r)
    if order == 1:
        return points * p.deriv(1, r)[..., None]

    f1, f2 = p.deriv(1, r), p.deriv(2, r)
    e = points
    if order == 2:
        return (
            delta * f1[..., None, None]
            + np.einsum("...i,...j->...ij", e, e) * f2[..., None, None]
        )

    f3 = p.deriv(3, r)
    if order == 3:
        de = (
            np.einsum("ij,...k->...ijk", delta, e)
            + np.einsum("ik,...j->...ijk", delta, e)
            + np.einsum("jk,...i->...ijk", delta, e)
        )
        eee = np.einsum("...i,...j,...k->...ijk", e, e, e)
        return de * f2[..., None, None, None] + eee * f3[..., None, None, None]

    f4 = p.deriv(4, r)
    dd = (
        np.einsum("ij,kl->ijkl", delta, delta)
        + np.einsum("ik,jl->ijkl", delta, delta)
        + np.einsum("il,jk->ijkl", delta, delta)
    )
    ee = np.einsum("...i,...j->...ij", e, e)
    dee = (
        np.einsum("ij,...kl->...ijkl", delta, ee)
        + np.einsum("ik,...jl->...ijkl", delta, ee)
        + np.einsum("il,...jk->...ijkl", delta, ee)
        + np.einsum("jk,...il->...ijkl", delta, ee)
        + np.einsum("jl,...ik->...ijkl", delta, ee)
        + np.einsum("kl,...ij->...ijkl", delta, ee)
    )
    eeee = np.einsum("...ij,...kl->...ijkl", ee, ee)
    return (
        dd * f2[..., None, None, None, None]
        + dee * f3[..., None, None, None, None]
        + eeee * f4[..., None, None, None, None]
    )


def _multi_index_to_axes(alpha, m: int) -> tuple[int, ...]:
    counts = list(alpha)
    if len(counts) > m:
        raise ValueError(f"multi-index {tuple(alpha)} has more than {m} entries")
    if any(c < 0 for c in counts):
        raise ValueError(f"multi-index {tuple(alpha)} has negative entries")
    order = sum(counts)
    if order > MAX_DERIVATIVE_ORDER:
        raise ValueError(
            f"derivative order {order} exceeds the supported maximum {MAX_DERIVATIVE_ORDER}"
        )
    return tuple(axis for axis, c in enumerate(counts) for _ in range(c))


def v_eval(p: RadialProfile, eta, alpha) -> float:
    """V_alpha(eta) for a multi-index ``alpha`` of exponents (order <= 4)."""
    axes = _multi_index_to_axes(alpha, p.m)
    tensor = v_tensor(p, _as_points(eta, p.m), len(axes))
    return float(tensor[axes] if axes else tensor)


def lattice_shifts(eta, epsilon: float, radius: float) -> np.ndarray:
    """Lattice vectors nu with |eta + nu/epsilon| <= radius, plus the first shell."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    eta = np.asarray(eta, dtype=float)
    m = eta.size
    bound = max(int(math.ceil((radius + float(np.linalg.norm(eta))) * epsilon)), 1)
    if (2 * bound + 1) ** m > MAX_LATTICE_POINTS:
        raise ValueError(
            f"lattice sum over {(2 * bound + 1) ** m} points is too large "
            f"(epsilon={epsilon}, radius={radius:.3f}, m={m})"
        )
    axis = np.arange(-bound, bound + 1)
    nu = np.array(list(itertools.product(axis, repeat=m)), dtype=float)
    shifted = eta + nu / epsilon
    keep = (np.linalg.norm(shifted, axis=1) <= radius) | (np.max(np.abs(nu), axis=1) <= 1)
    return nu[keep]


def _lattice_sum(p: RadialProfile, points: np.ndarray, order: int) -> np.ndarray:
    # Farthest points first keeps the rounding of the small tail terms
    points = points[np.argsort(-np.linalg.norm(points, axis=1), kind="stable")]
    total = np.zeros((p.m,) * order)
    for start in range(0, len(points), LATTICE_CHUNK):
        total = total + v_tensor(p, points[start : start + LATTICE_CHUNK], order).sum(axis=0)
    return total


def periodized_tensor(p: RadialProfile, eta, epsilon: float, order: int) -> np.ndarray:
    """Derivative tensor of V^epsilon(eta) = sum_nu V(eta + nu/epsilon).

    ``epsilon = 0`` means V itself. Lattice vectors are kept while
    |eta + nu/epsilon| stays within the radius where all derivatives of V
    drop below LATTICE_TOLERANCE (relative to max(1, f(0))).
    """
    eta = _as_points(eta, p.m)
    if epsilon == 0:
        return v_tensor(p, eta, order)
    radius = p.decay_radius(LATTICE_TOLERANCE)
    nu = lattice_shifts(eta, epsilon, radius)
    logger.debug(f"Lattice sum over {len(nu)} shifts (epsilon={epsilon}, radius={radius})")
    return _lattice_sum(p, eta + nu / epsilon, order)


def periodize(p: RadialProfile, eta, epsilon: float, alpha) -> float:
    """V^epsilon_alpha(eta) for a multi-index ``alpha``."""
    if epsilon <= 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    axes = _multi_index_to_axes(alpha, p.m)
    tensor = periodized_tensor(p, eta, epsilon, len(axes))
    return float(tensor[axes] if axes else tensor)


def hessian_increment(p: RadialProfile, eta, epsilon: float = 0.0) -> np.ndarray:
    """Hess V^epsilon(eta) - Hess V^epsilon(0) without cancellation near eta = 0."""
    eta = _as_points(eta, p.m)
    r = float(eta @ eta) / 2
    near = float(p.deriv_increment(1, r)) * np.eye(p.m) + np.outer(eta, eta) * float(
        p.deriv(2, r)
    )
    if epsilon == 0:
        return near
    radius = p.decay_radius(LATTICE_TOLERANCE)
    nu = lattice_shifts(np.zeros(p.m), epsilon, radius + float(np.linalg.norm(eta)))
    nu = nu[np.any(nu != 0, axis=1)]
    far = _lattice_sum(p, eta + nu / epsilon, 2) - _lattice_sum(p, nu / epsilon, 2)
    return near + far


@dataclass(frozen=True, eq=False)
class ScriptH:
    """The 2m x 2m matrix [[A, B], [B, A]] with A = -Hess V^eps(0), B = -Hess V^eps(eta).

    ``gap_block`` holds A - B evaluated without cancellation. A is a
    multiple of the identity: the lattice sum is invariant under
    coordinate permutations and sign changes.
    """

    profile: RadialProfile = field(repr=False)
    eta: np.ndarray
    epsilon: float
    a_block: np.ndarray
    b_block: np.ndarray
    gap_block: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return self.profile.m

    @property
    def eta_norm(self) -> float:
        return float(np.linalg.norm(self.eta))

    @property
    def is_diagonal(self) -> bool:
        """True when eta lies on the diagonal (|eta| < SINGULAR_RADIUS)."""
        return self.eta_norm < SINGULAR_RADIUS

    @property
    def a_scalar(self) -> float:
        return float(np.trace(self.a_block)) / self.m

    @property
    def matrix(self) -> np.ndarray:
        return np.block([[self.a_block, self.b_block], [self.b_block, self.a_block]])


def script_h(p: RadialProfile, eta, epsilon: float = 0.0) -> ScriptH:
    """Assemble H(V^epsilon, eta); epsilon = 0 uses V itself."""
    if epsilon < 0:
        raise ValueError(f"epsilon must be nonnegative, got {epsilon}")
    eta = _as_points(eta, p.m).astype(float)
    if epsilon == 0:
        a_block = p.d_m * np.eye(p.m)
    else:
        a_block = -periodized_tensor(p, np.zeros(p.m), epsilon, 2)
    gap = hessian_increment(p, eta, epsilon)
    b_block = a_block - gap
    return ScriptH(p, eta.copy(), float(epsilon), a_block, 0.5 * (b_block + b_block.T), gap)


def script_h_infinity(p: RadialProfile, epsilon: float = 0.0) -> np.ndarray:
    """The decorrelated limit [[A, 0], [0, A]] of H(V^epsilon, eta) as |eta| grows."""
    if epsilon == 0:
        a_block = p.d_m * np.eye(p.m)
    else:
        a_block = -periodized_tensor(p, np.zeros(p.m), epsilon, 2)
    zero = np.zeros_like(a_block)
    return np.block([[a_block, zero], [zero, a_block]])


@dataclass(frozen=True)
class RadialDenominators:
    """Adapted-frame quantities of H(V, eta) for a radial kernel.

    ``axial`` is f'(r) + |eta|^2 f''(r) (the eta-direction eigenvalue of
    Hess V(eta)), ``transverse`` is f'(r). ``d1`` and ``d2`` are
    f'(0)^2 - axial^2 and f'(0)^2 - transverse^2.
    """

    axial: float
    transverse: float
    d1: float
    d2: float


def radial_denominators(p: RadialProfile, eta_norm: float) -> RadialDenominators:
    """Evaluate the adapted-frame entries without cancellation near eta = 0."""
    r = eta_norm**2 / 2
    d = p.d_m
    f2 = float(p.deriv(2, r))
    increment = float(p.deriv_increment(1, r))  # f'(r) - f'(0)
    transverse = float(p.deriv(1, r))
    axial = transverse + eta_norm**2 * f2

    # d + f'(r) is the increment, which is accurate where the sum cancels
    if axial <= 0:
        d1 = (increment + eta_norm**2 * f2) * (d - axial)
    else:
        d1 = (d - axial) * (d + axial)
    if transverse <= 0:
        d2 = increment * (d - transverse)
    else:
        d2 = (d - transverse) * (d + transverse)
    return RadialDenominators(axial, transverse, d1, d2)


def det_script_h(h: ScriptH) -> float:
    """det H(V^epsilon, eta).

    For epsilon = 0 the closed form
    (f'(0)^2 - (f'(r) + |eta|^2 f''(r))^2) (f'(0)^2 - f'(r)^2)^(m-1), r = |eta|^2/2,
    is used. For epsilon > 0 the kernel is no longer radial and the
    determinant is det(A - B) det(A + B).
    """
    if h.epsilon > 0:
        return float(np.linalg.det(h.gap_block) * np.linalg.det(h.a_block + h.b_block))
    den = radial_denominators(h.profile, h.eta_norm)
    return float(den.d1 * den.d2 ** (h.m - 1))


def inv_script_h(h: ScriptH) -> np.ndarray:
    """Inverse of H(V^epsilon, eta) for eta off the diagonal.

    With A = a I the inverse is [[A P, -B P], [-B P, A P]] where
    P = ((A - B)(A + B))^{-1}.
    """
    if h.is_diagonal:
        raise SingularMatrixError(
            f"H(V, eta) is singular on the diagonal (|eta| = {h.eta_norm:.3e}); "
            "use sigma_rescaled_limit"
        )
    m = h.m
    if h.epsilon > 0:
        product = h.gap_block @ (h.a_block + h.b_block)
        p_inv = np.linalg.inv(0.5 * (product + product.T))
        diag_block = h.a_scalar * p_inv
        cross_block = -h.b_block @ p_inv
        diag_block = 0.5 * (diag_block + diag_block.T)
        cross_block = 0.5 * (cross_block + cross_block.T)
        return np.block([[diag_block, cross_block], [cross_block, diag_block]])

    den = radial_denominators(h.profile, h.eta_norm)
    d = h.profile.d_m
    diagonal = np.full(m, d / den.d2)
    diagonal[0] = d / den.d1
    cross = np.full(m, den.transverse / den.d2)
    cross[0] = den.axial / den.d1
    q = adapted_frame(h.eta)
    diag_block = q @ np.diag(diagonal) @ q
    cross_block = q @ np.diag(cross) @ q
    return np.block([[diag_block, cross_block], [cross_block, diag_block]])


@dataclass(frozen=True, eq=False)
class SigmaTilde:
    """Entries sigma~_{i,j}, i, j in J_m, of the inverse of H(V^epsilon, eta)."""

    m: int
    eta: np.ndarray
    epsilon: float
    matrix: np.ndarray

    def entry(self, i: int, j: int) -> float:
        return float(self.matrix[j_position(i, self.m), j_position(j, self.m)])

    @property
    def diag_block(self) -> np.ndarray:
        """sigma~_{a,b} for a, b > 0 (equal to sigma~_{-a,-b})."""
        return self.matrix[self.m :, self.m :]

    @property
    def cross_block(self) -> np.ndarray:
        """sigma~_{a,-b} for a, b > 0."""
        return self.matrix[self.m :, : self.m]


def sigma_tilde(p: RadialProfile, eta, epsilon: float = 0.0) -> SigmaTilde:
    """sigma~ entries at eta (eta must be off the diagonal)."""
    h = script_h(p, eta, epsilon)
    return SigmaTilde(p.m, h.eta, h.epsilon, inv_script_h(h))


def sigma_rescaled_limit(p: RadialProfile, direction, epsilon: float = 0.0) -> np.ndarray:
    """K = lim t^2 sigma~_{i,j}(t dir) for i, j > 0 (the sigma~_{-i,j} limit is -K).

    K is the inverse of the matrix V^eps_{ijkl}(0) dir_k dir_l; for epsilon = 0
    this is (I - (2/3) dir dir^T) / f''(0), i.e. diag(1/3, 1, ..., 1)/f''(0)
    in the adapted frame.
    """
    direction = _as_points(direction, p.m)
    norm = float(np.linalg.norm(direction))
    if not math.isclose(norm, 1.0, rel_tol=1e-8):
        raise ValueError(f"direction must be a unit vector, got norm {norm}")
    direction = direction / norm
    if epsilon == 0:
        return (np.eye(p.m) - (2.0 / 3.0) * np.outer(direction, direction)) / p.h_m
    fourth = periodized_tensor(p, np.zeros(p.m), epsilon, 4)
    return np.linalg.inv(np.einsum("ijkl,k,l->ij", fourth, direction, direction))


def hessian_gap(p: RadialProfile, eta) -> np.ndarray:
    """Eigenvalues of Hess V(0)^2 - Hess V(eta)^2 (positive for eta != 0)."""
    eta = _as_points(eta, p.m)
    h0 = v_tensor(p, np.zeros(p.m), 2)
    h_eta = v_tensor(p, eta, 2)
    return np.linalg.eigvalsh(h0 @ h0 - h_eta @ h_eta)


def _alpha(x: float) -> float:
    """min(sin^2(x/2), cos^2(x/2))."""
    s = math.sin(x / 2) ** 2
    return min(s, 1.0 - s)


def tech_margin(p: RadialProfile, t: float) -> tuple[float, float]:
    """Margins of the two lower bounds on the spectral gap of H(V, t e_1).

    Returns (|f'(0)| - |f'(r) + t^2 f''(r)| - 2 int alpha(t x_1) x_1^2 w,
    |f'(0)| - |f'(r)| - 2 int alpha(t x_1) x_2^2 w), r = t^2/2. Both are
    nonnegative up to quadrature error. The x_2^2-weighted marginal equals
    the dimension m+2 marginal divided by 2 pi, which also covers m = 1.
    """
    if t < 0:
        raise ValueError(f"t must be nonnegative, got {t}")
    t = float(t)
    r = t * t / 2
    den = radial_denominators(p, t)
    increment = float(p.deriv_increment(1, r))
    f2 = float(p.deriv(2, r))
    d = p.d_m
    lhs_axial = increment + t * t * f2 if den.axial <= 0 else d - den.axial
    lhs_transverse = increment if den.transverse <= 0 else d - den.transverse

    if t == 0.0:
        return float(lhs_axial), float(lhs_transverse)

    radius = p.weight.support_radius
    # alpha(t x) has kinks where t x = pi/2 + k pi
    kinks = [
        (math.pi / 2 + k * math.pi) / t
        for k in range(int(t * radius / math.pi) + 1)
        if (math.pi / 2 + k * math.pi) / t < radius
    ]
    options = {
        "limit": max(QUAD_LIMIT, 4 * len(kinks)),
        "epsabs": 1e-15,
        "epsrel": 1e-13,
    }
    if kinks:
        options["points"] = kinks
    axial_int, _ = integrate.quad(
        lambda x: _alpha(t * x) * x * x * float(p.marginal(p.m, x)), 0.0, radius, **options
    )
    transverse_int, _ = integrate.quad(
        lambda x: _alpha(t * x) * float(p.marginal(p.m + 2, x)) / (2 * math.pi),
        0.0,
        radius,
        **options,
    )
    # Both integrands are even in x
    return (
        float(lhs_axial - 4.0 * axial_int),
        float(lhs_transverse - 4.0 * transverse_int),
    )
