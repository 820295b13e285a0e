"""Covariances of the Hessians at two points conditioned on vanishing gradients.

A :class:`CovTensor` stores Xi_{i,j|k,l} for i, j, k, l in J_m with
i * j > 0 and k * l > 0. Two dense m^4 arrays hold everything:
``same[i,j,k,l]`` = Xi_{i,j|k,l} = Xi_{-i,-j|-k,-l} (both pairs on the same
point) and ``cross[i,j,k,l]`` = Xi_{-i,-j|k,l} = Xi_{i,j|-k,-l}.
"""

import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np

from ..constants import EXTRAPOLATION_NODES, EXTRAPOLATION_TOLERANCE, PSD_TOLERANCE
from ..ensembles.sym_ensembles import PairGaussianSpec, entry_scales, pair_indices
from ..exceptions import ExtrapolationError, SingularMatrixError
from .frames import adapted_frame, rotate_tensor, unit_vector
from .kernel import check_index, inv_script_h, periodized_tensor, script_h
from .radial_weight import RadialProfile

logger = logging.getLogger(__name__)


class Provenance(Enum):
    """Which covariance a tensor represents."""

    XI_EPS = "xi_eps"  # Xi^eps(eta), epsilon > 0
    XI_ZERO = "xi_zero"  # Xi^0(eta) built from V itself
    XI_INFINITY = "xi_infinity"  # decorrelated product limit
    XI_RESCALED = "xi_rescaled"  # Xi^{eps,eta} after the B -> B^eta rescaling
    UPSILON = "upsilon"  # Hessian covariance at a single point


@dataclass(frozen=True, eq=False)
class CovTensor:
    """Covariance of a pair (B^-, B^+) of symmetric m x m matrices.

    ``cross`` is None for single-point tensors (``Provenance.UPSILON``).
    ``adapted`` marks tensors expressed in the frame whose first axis is
    eta / |eta| (or ``direction`` for origin limits).
    """

    m: int
    same: np.ndarray
    cross: np.ndarray | None
    provenance: Provenance
    eta: np.ndarray | None = None
    epsilon: float = 0.0
    adapted: bool = False
    direction: np.ndarray | None = field(default=None, repr=False)

    @property
    def is_pair(self) -> bool:
        return self.cross is not None

    @property
    def eta_norm(self) -> float | None:
        return None if self.eta is None else float(np.linalg.norm(self.eta))

    def entry(self, i: int, j: int, k: int, l: int) -> float:
        """Xi_{i,j|k,l} for J_m indices (mixed-sign pairs are rejected)."""
        i, j, k, l = (check_index(x, self.m) for x in (i, j, k, l))
        if i * j < 0 or k * l < 0:
            raise ValueError(f"entry ({i},{j}|{k},{l}) mixes signs within a pair")
        axes = (abs(i) - 1, abs(j) - 1, abs(k) - 1, abs(l) - 1)
        if (i > 0) == (k > 0):
            return float(self.same[axes])
        if self.cross is None:
            raise ValueError("single-point tensor has no cross-point entries")
        return float(self.cross[axes])

    def in_frame(self, q: np.ndarray) -> "CovTensor":
        """Components with respect to the orthonormal basis given by the columns of q."""
        q_t = np.asarray(q, dtype=float).T
        return replace(
            self,
            same=rotate_tensor(self.same, q_t),
            cross=None if self.cross is None else rotate_tensor(self.cross, q_t),
        )

    def to_adapted(self) -> "CovTensor":
        """The tensor in the frame with first axis eta / |eta|."""
        if self.adapted:
            return self
        if self.eta is None:
            raise ValueError(f"{self.provenance.value} tensor has no eta to adapt to")
        tensor = self.in_frame(adapted_frame(self.eta))
        return replace(tensor, adapted=True)

    def covariance_form(self) -> np.ndarray:
        """Covariance on normalized entries (B^- block first for pairs)."""
        indices = pair_indices(self.m)
        scales = entry_scales(self.m)
        rows = np.array([i for i, _ in indices])
        cols = np.array([j for _, j in indices])
        outer = np.outer(scales, scales)

        def block(tensor: np.ndarray) -> np.ndarray:
            return tensor[rows[:, None], cols[:, None], rows[None, :], cols[None, :]] * outer

        same = block(self.same)
        if self.cross is None:
            return same
        cross = block(self.cross)
        return np.block([[same, cross], [cross.T, same]])

    def to_pair_spec(self) -> PairGaussianSpec:
        return PairGaussianSpec(self.m, self.covariance_form(), blocks=2 if self.is_pair else 1)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.covariance_form()).min())

    def is_psd(self, tol: float = PSD_TOLERANCE) -> bool:
        eigenvalues = np.linalg.eigvalsh(self.covariance_form())
        scale = float(np.max(np.abs(eigenvalues), initial=0.0))
        return bool(eigenvalues.min() >= -tol * scale)

    def to_rows(self) -> list[tuple[int, int, int, int, float]]:
        """Representative entries (i, j, k, l, value) with |i| <= |j|, |k| <= |l|.

        Same-point rows use positive indices with (i, j) <= (k, l); cross rows
        use the (-i, -j | k, l) form.
        """
        rows: list[tuple[int, int, int, int, float]] = []
        pairs = [(i + 1, j + 1) for i, j in pair_indices(self.m)]
        for a, (i, j) in enumerate(pairs):
            for k, l in pairs[a:]:
                rows.append((i, j, k, l, self.entry(i, j, k, l)))
        if self.cross is not None:
            for i, j in pairs:
                for k, l in pairs:
                    rows.append((-i, -j, k, l, self.entry(-i, -j, k, l)))
        return rows

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "provenance": self.provenance.value,
            "eta": None if self.eta is None else self.eta.tolist(),
            "epsilon": self.epsilon,
            "adapted": self.adapted,
            "entries": [list(row) for row in self.to_rows()],
        }


def _check_m(p: RadialProfile, m: int | None) -> int:
    if m is not None and m != p.m:
        raise ValueError(f"profile has dimension {p.m}, got m={m}")
    return p.m


def upsilon(p: RadialProfile, m: int | None = None, epsilon: float = 0.0) -> CovTensor:
    """Upsilon^eps: the Hessian covariance V^eps_{ijkl}(0) at one point.

    Gradient and Hessian at the same point are uncorrelated, so no
    conditioning is involved. For epsilon = 0 this is
    h_m (d_ij d_kl + d_ik d_jl + d_il d_jk).
    """
    m = _check_m(p, m)
    fourth = periodized_tensor(p, np.zeros(m), epsilon, 4)
    return CovTensor(m, fourth, None, Provenance.UPSILON, epsilon=float(epsilon))


def xi_infinity(p: RadialProfile, m: int | None = None) -> CovTensor:
    """Product limit Upsilon^0 x Upsilon^0 of Xi^0(eta) as |eta| grows."""
    m = _check_m(p, m)
    fourth = periodized_tensor(p, np.zeros(m), 0.0, 4)
    return CovTensor(m, fourth, np.zeros_like(fourth), Provenance.XI_INFINITY)


def xi_bar(p: RadialProfile, eta, epsilon: float = 0.0) -> CovTensor:
    """Conditional covariance Xi^eps(eta) of the Hessians at theta and theta + eps eta.

    Xi_{i,j|k,l} = V_ijkl(0) - V_ija(eta) V_klb(eta) s~_{a,b}
    Xi_{-i,-j|k,l} = V_ijkl(eta) + V_ija(eta) V_klb(eta) s~_{a,-b}
    with V replaced by V^eps for epsilon > 0 and s~ the entries of
    H(V^eps, eta)^{-1}.
    """
    eta = np.asarray(eta, dtype=float)
    if eta.shape != (p.m,):
        raise ValueError(f"eta must have shape ({p.m},), got {eta.shape}")
    h = script_h(p, eta, epsilon)
    if h.is_diagonal:
        raise SingularMatrixError(
            f"xi_bar is undefined on the diagonal (|eta| = {h.eta_norm:.3e}); "
            "use xi_limit_origin"
        )
    m = p.m
    inverse = inv_script_h(h)
    same_sigma = inverse[m:, m:]
    cross_sigma = inverse[m:, :m]

    fourth_0 = periodized_tensor(p, np.zeros(m), epsilon, 4)
    fourth = periodized_tensor(p, eta, epsilon, 4)
    third = periodized_tensor(p, eta, epsilon, 3)

    same = fourth_0 - np.einsum("ija,klb,ab->ijkl", third, third, same_sigma)
    cross = fourth + np.einsum("ija,klb,ab->ijkl", third, third, cross_sigma)
    provenance = Provenance.XI_ZERO if epsilon == 0 else Provenance.XI_EPS
    return CovTensor(m, same, cross, provenance, eta=eta.copy(), epsilon=float(epsilon))


def _axial_counts(m: int) -> np.ndarray:
    """Number of axis-0 indices among (i, j, k, l)."""
    axis = (np.arange(m) == 0).astype(int)
    return (
        axis[:, None, None, None]
        + axis[None, :, None, None]
        + axis[None, None, :, None]
        + axis[None, None, None, :]
    )


def xi_rescale(t: CovTensor) -> CovTensor:
    """The covariance of B^eta = D B D, D = diag(|eta|^(-1/2), 1, ..., 1).

    Every index 1 (in the adapted frame) contributes a factor |eta|^(-1/2),
    so det B = |eta|^2 det B^eta for the pair.
    """
    if t.provenance not in (Provenance.XI_EPS, Provenance.XI_ZERO):
        raise ValueError(f"cannot rescale a {t.provenance.value} tensor")
    norm = t.eta_norm
    if not norm:
        raise SingularMatrixError("cannot rescale at eta = 0")
    adapted = t.to_adapted()
    factor = norm ** (-_axial_counts(t.m) / 2.0)
    return replace(
        adapted,
        same=adapted.same * factor,
        cross=adapted.cross * factor,
        provenance=Provenance.XI_RESCALED,
    )


def rescale_samples(samples: np.ndarray, eta_norm: float) -> np.ndarray:
    """Apply B -> D B D to adapted-frame matrices of shape (..., m, m)."""
    if eta_norm <= 0:
        raise ValueError(f"eta_norm must be positive, got {eta_norm}")
    samples = np.array(samples, dtype=float)
    scale = eta_norm**-0.5
    samples[..., 0, :] *= scale
    samples[..., :, 0] *= scale
    return samples


def _richardson(values: list[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Eliminate the t^2 and t^4 terms from samples at t, t/2, t/4."""
    coarse, middle, fine = values
    first_a = (4.0 * middle - coarse) / 3.0
    first_b = (4.0 * fine - middle) / 3.0
    second = (16.0 * first_b - first_a) / 15.0
    return second, np.abs(second - first_b)


def xi_limit_origin(p: RadialProfile, direction, epsilon: float = 0.0) -> CovTensor:
    """lim_{t -> 0} of the rescaled tensor Xi^{eps, t dir} in the adapted frame.

    Along a ray every entry is even in t. Entries with no axial index are
    extrapolated directly, entries with four are divided by t^2 first, and
    entries with one to three axial indices carry a positive power of t
    after rescaling and vanish in the limit.
    """
    direction, norm = unit_vector(np.asarray(direction, dtype=float))
    if not np.isclose(norm, 1.0, rtol=1e-8):
        raise ValueError(f"direction must be a unit vector, got norm {norm}")
    m = p.m
    counts = _axial_counts(m)
    scaled = counts > 0
    nodes = EXTRAPOLATION_NODES
    same_values = []
    cross_values = []
    for t in nodes:
        tensor = xi_bar(p, t * direction, epsilon).to_adapted()
        divisor = np.where(scaled, t * t, 1.0)
        same_values.append(tensor.same / divisor)
        cross_values.append(tensor.cross / divisor)

    limits = []
    for label, values in (("same", same_values), ("cross", cross_values)):
        limit, residual = _richardson(values)
        tolerance = EXTRAPOLATION_TOLERANCE * np.maximum(1.0, np.abs(limit))
        bad = residual > tolerance
        if np.any(bad):
            worst = np.unravel_index(int(np.argmax(np.where(bad, residual, -1.0))), bad.shape)
            sign = 1 if label == "same" else -1
            entry = (sign * (worst[0] + 1), sign * (worst[1] + 1), worst[2] + 1, worst[3] + 1)
            raise ExtrapolationError(entry, float(residual[worst]))
        logger.debug(f"Origin limit ({label}) max residual {float(residual.max()):.3e}")
        limits.append(np.where((counts == 0) | (counts == 4), limit, 0.0))

    return CovTensor(
        m,
        limits[0],
        limits[1],
        Provenance.XI_RESCALED,
        eta=None,
        epsilon=float(epsilon),
        adapted=True,
        direction=direction,
    )
