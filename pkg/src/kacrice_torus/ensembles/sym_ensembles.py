"""Invariant Gaussian ensembles of real symmetric matrices.

Covariances are expressed on the normalized entries of a symmetric matrix,
a_ii and sqrt(2) a_ij (i < j), taken in row-major order of the upper
triangle. In these coordinates tr A^2 is the squared Euclidean norm.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..exceptions import InvalidEnsembleError

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)


def normalized_dim(m: int) -> int:
    """Number of normalized entries of an m x m symmetric matrix."""
    return m * (m + 1) // 2


def pair_indices(m: int) -> list[tuple[int, int]]:
    """Upper-triangle positions (i, j), i <= j, in normalized-entry order."""
    return [(i, j) for i in range(m) for j in range(i, m)]


def entry_scales(m: int) -> np.ndarray:
    """1 for diagonal positions and sqrt(2) for off-diagonal ones."""
    return np.array([1.0 if i == j else SQRT2 for i, j in pair_indices(m)])


def to_normalized(matrices: np.ndarray) -> np.ndarray:
    """Map symmetric matrices (..., m, m) to normalized entries (..., N)."""
    matrices = np.asarray(matrices, dtype=float)
    m = matrices.shape[-1]
    rows, cols = np.triu_indices(m)
    return matrices[..., rows, cols] * entry_scales(m)


def from_normalized(vectors: np.ndarray, m: int) -> np.ndarray:
    """Inverse of :func:`to_normalized`."""
    vectors = np.asarray(vectors, dtype=float)
    if vectors.shape[-1] != normalized_dim(m):
        raise ValueError(
            f"expected {normalized_dim(m)} normalized entries for m={m}, got {vectors.shape[-1]}"
        )
    rows, cols = np.triu_indices(m)
    values = vectors / entry_scales(m)
    matrices = np.zeros(vectors.shape[:-1] + (m, m))
    matrices[..., rows, cols] = values
    matrices[..., cols, rows] = values
    return matrices


def conjugation_operator(q: np.ndarray) -> np.ndarray:
    """Matrix of A -> q A q^T acting on normalized entries."""
    q = np.asarray(q, dtype=float)
    m = q.shape[0]
    basis = from_normalized(np.eye(normalized_dim(m)), m)
    images = np.einsum("ai,nij,bj->nab", q, basis, q)
    return to_normalized(images).T


def _check_dimension(m: Any) -> int:
    if isinstance(m, bool) or not isinstance(m, int | np.integer) or m < 1:
        raise InvalidEnsembleError(f"m must be a positive integer, got {m!r}")
    return int(m)


@dataclass(frozen=True)
class IsoSpec:
    """The O(m)-invariant ensemble Gamma_{u,v}.

    E(a_ij a_kl) = u d_ij d_kl + v (d_ik d_jl + d_il d_jk).
    """

    m: int
    u: float
    v: float

    def __post_init__(self):
        _check_dimension(self.m)
        if not (math.isfinite(self.u) and math.isfinite(self.v)):
            raise InvalidEnsembleError(f"u and v must be finite, got ({self.u}, {self.v})")
        if self.v <= 0:
            raise InvalidEnsembleError(f"Gamma_(u,v) needs v > 0, got v={self.v}")
        if self.m * self.u + 2 * self.v <= 0:
            raise InvalidEnsembleError(
                f"Gamma_(u,v) needs m*u + 2v > 0, got {self.m * self.u + 2 * self.v}"
            )

    def scaled(self, factor: float) -> "IsoSpec":
        return IsoSpec(self.m, self.u * factor, self.v * factor)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": "iso", "m": self.m, "u": self.u, "v": self.v}


@dataclass(frozen=True)
class ValidationResult:
    """Outcome of :func:`validate_axial`."""

    valid: bool
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.valid


@dataclass(frozen=True)
class AxialSpec:
    """The O_eta(m)-invariant form Q_c = c1 q1 + ... + c5 q5 around ``axis``.

    With eta = e_1: q1 = a_11^2, q2 = sum_k>1 (sqrt 2 a_1k)^2,
    q3 = 2 a_11 tr B, q4 = (tr B)^2 and q5 = tr B^2, where B is the lower
    right (m-1) x (m-1) block. Construction does not require Q_c to be
    positive definite; see :func:`validate_axial`.
    """

    m: int
    c: tuple[float, float, float, float, float]
    axis: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        _check_dimension(self.m)
        if len(self.c) != 5:
            raise InvalidEnsembleError(f"c must have 5 entries, got {len(self.c)}")
        object.__setattr__(self, "c", tuple(float(x) for x in self.c))
        if self.axis is not None:
            axis = np.asarray(self.axis, dtype=float)
            if axis.shape != (self.m,):
                raise InvalidEnsembleError(f"axis must have shape ({self.m},), got {axis.shape}")
            norm = float(np.linalg.norm(axis))
            if not math.isclose(norm, 1.0, rel_tol=1e-8):
                raise InvalidEnsembleError(f"axis must be a unit vector, got norm {norm}")
            object.__setattr__(self, "axis", axis / norm)

    @property
    def sigma_hat(self) -> np.ndarray:
        """The 2 x 2 matrix [[c1, sqrt(m-1) c3], [sqrt(m-1) c3, c5 + (m-1) c4]]."""
        c1, _, c3, c4, c5 = self.c
        k = self.m - 1
        off = math.sqrt(k) * c3
        return np.array([[c1, off], [off, c5 + k * c4]])

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": "axial", "m": self.m, "c": list(self.c)}
        if self.axis is not None:
            data["axis"] = self.axis.tolist()
        return data


@dataclass(frozen=True, eq=False)
class PairGaussianSpec:
    """Centered Gaussian on ``blocks`` symmetric m x m matrices.

    ``covariance`` acts on the concatenated normalized entries; with two
    blocks the first is B^- and the second B^+.
    """

    m: int
    covariance: np.ndarray
    blocks: int = 2

    def __post_init__(self):
        _check_dimension(self.m)
        if self.blocks not in (1, 2):
            raise InvalidEnsembleError(f"blocks must be 1 or 2, got {self.blocks}")
        cov = np.asarray(self.covariance, dtype=float)
        size = self.blocks * normalized_dim(self.m)
        if cov.shape != (size, size):
            raise InvalidEnsembleError(
                f"covariance must be {size} x {size} for m={self.m}, got {cov.shape}"
            )
        if not np.all(np.isfinite(cov)):
            raise InvalidEnsembleError("covariance contains non-finite values")
        asym = float(np.max(np.abs(cov - cov.T), initial=0.0))
        if asym > 1e-9 * max(1.0, float(np.max(np.abs(cov), initial=0.0))):
            raise InvalidEnsembleError(f"covariance is not symmetric (max asymmetry {asym:.3e})")
        object.__setattr__(self, "covariance", 0.5 * (cov + cov.T))

    @property
    def dim(self) -> int:
        return self.covariance.shape[0]

    @classmethod
    def from_iso(cls, spec: IsoSpec) -> "PairGaussianSpec":
        return cls(spec.m, iso_covariance(spec), blocks=1)

    @classmethod
    def product(cls, first: "PairGaussianSpec", second: "PairGaussianSpec") -> "PairGaussianSpec":
        """Independent pair of two single-block specs."""
        if first.blocks != 1 or second.blocks != 1 or first.m != second.m:
            raise InvalidEnsembleError("product needs two single-block specs of equal m")
        n = first.dim
        cov = np.zeros((2 * n, 2 * n))
        cov[:n, :n] = first.covariance
        cov[n:, n:] = second.covariance
        return cls(first.m, cov, blocks=2)

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": "pair",
            "m": self.m,
            "blocks": self.blocks,
            "covariance": self.covariance.tolist(),
        }


def iso_covariance(spec: IsoSpec) -> np.ndarray:
    """Covariance of Gamma_{u,v} on normalized entries.

    Var(a_ii) = u + 2v, Cov(a_ii, a_jj) = u and Var(sqrt(2) a_ij) = 2v.
    """
    indices = pair_indices(spec.m)
    cov = np.zeros((len(indices), len(indices)))
    for a, (i, j) in enumerate(indices):
        if i == j:
            for b, (k, l) in enumerate(indices):
                if k == l:
                    cov[a, b] = spec.u
            cov[a, a] = spec.u + 2 * spec.v
        else:
            cov[a, a] = 2 * spec.v
    return cov


def iso_density(spec: IsoSpec, a: np.ndarray) -> float:
    """Density of Gamma_{u,v} at A with respect to the normalized Lebesgue measure.

    (2 pi)^(-m(m+1)/4) D^(-1/2) exp(-tr A^2 / (4v) - u' (tr A)^2 / 2) with
    D = (2v)^(m-1 + m(m-1)/2) (m u + 2v) and u' = -u / (2v (m u + 2v)).
    """
    a = np.asarray(a, dtype=float)
    m, u, v = spec.m, spec.u, spec.v
    if a.shape != (m, m):
        raise ValueError(f"A must be {m} x {m}, got {a.shape}")
    if not np.allclose(a, a.T):
        raise ValueError("A must be symmetric")
    log_d = (m - 1 + m * (m - 1) / 2) * math.log(2 * v) + math.log(m * u + 2 * v)
    u_prime = -u / (2 * v * (m * u + 2 * v))
    trace = float(np.trace(a))
    trace_sq = float(np.sum(a * a))
    log_density = (
        -normalized_dim(m) / 2 * math.log(2 * math.pi)
        - log_d / 2
        - trace_sq / (4 * v)
        - u_prime * trace**2 / 2
    )
    return math.exp(log_density)


def axial_covariance(spec: AxialSpec) -> np.ndarray:
    """The matrix of Q_c on normalized entries, rotated to ``spec.axis``."""
    m = spec.m
    c1, c2, c3, c4, c5 = spec.c
    indices = pair_indices(m)
    q = np.zeros((len(indices), len(indices)))
    for a, (i, j) in enumerate(indices):
        if (i, j) == (0, 0):
            q[a, a] = c1
        elif i == 0:
            q[a, a] = c2  # region b
        elif i == j:
            q[a, a] = c5 + c4  # region c
        else:
            q[a, a] = c5  # region d
    diagonal = [a for a, (i, j) in enumerate(indices) if i == j and i > 0]
    for a in diagonal:
        q[0, a] = q[a, 0] = c3
        for b in diagonal:
            if a != b:
                q[a, b] = c4

    if spec.axis is None:
        return q
    from ..covariance.frames import adapted_frame

    frame = adapted_frame(spec.axis)
    op = conjugation_operator(frame)
    return op @ q @ op.T


def validate_axial(spec: AxialSpec) -> ValidationResult:
    """Decide whether Q_c is positive definite.

    Q_c > 0 iff c2 > 0 (m >= 2), c5 > 0 (m >= 3) and the 2 x 2 matrix
    ``spec.sigma_hat`` is positive definite; for m = 1 only c1 > 0 matters.
    """
    m = spec.m
    c1, c2, _, _, c5 = spec.c
    if m == 1:
        return ValidationResult(True) if c1 > 0 else ValidationResult(False, "c1 <= 0")
    if c2 <= 0:
        return ValidationResult(False, "c2 <= 0")
    if m >= 3 and c5 <= 0:
        return ValidationResult(False, "c5 <= 0")
    sigma = spec.sigma_hat
    if sigma[0, 0] <= 0:
        return ValidationResult(False, "c1 <= 0")
    det = float(sigma[0, 0] * sigma[1, 1] - sigma[0, 1] ** 2)
    if det <= 0:
        return ValidationResult(False, f"det of the reduced 2x2 form is {det:.6g} <= 0")
    return ValidationResult(True)


def det_qc(spec: AxialSpec) -> float:
    """det Q_c = c2^(m-1) c5^((m-1)(m-2)/2 + m-2) det sigma_hat (c1 when m = 1)."""
    m = spec.m
    c1, c2, _, _, c5 = spec.c
    if m == 1:
        return c1
    sigma = spec.sigma_hat
    det_sigma = float(sigma[0, 0] * sigma[1, 1] - sigma[0, 1] ** 2)
    n_d = (m - 1) * (m - 2) // 2
    return c2 ** (m - 1) * c5 ** (n_d + m - 2) * det_sigma
