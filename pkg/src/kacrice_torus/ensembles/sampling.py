"""Sampling and Monte Carlo expectations for symmetric matrix ensembles."""

import logging
import math
from dataclasses import dataclass
from typing import Any

import numpy as np

from ..constants import PSD_TOLERANCE
from ..exceptions import InvalidEnsembleError, NotPositiveSemidefiniteError
from ..utils.rng import as_generator
from .sym_ensembles import (
    AxialSpec,
    IsoSpec,
    PairGaussianSpec,
    axial_covariance,
    from_normalized,
    iso_covariance,
    normalized_dim,
)

logger = logging.getLogger(__name__)

MC_CHUNK = 50_000  # draws processed per batch
CLAMP_WARNING_LEVEL = 1e-12  # relative size of clamped eigenvalues worth a warning

RngLike = np.random.Generator | int | None


@dataclass(frozen=True)
class MonteCarloEstimate:
    """A Monte Carlo mean with its sample standard error."""

    estimate: float
    std_error: float
    n: int
    seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "n": self.n,
            "seed": self.seed,
        }


def covariance_sqrt(cov: np.ndarray) -> np.ndarray:
    """Principal square root V sqrt(L) V^T of a PSD covariance.

    Eigenvalues down to -PSD_TOLERANCE * ||cov|| are clamped to 0; anything
    more negative raises NotPositiveSemidefiniteError.
    """
    cov = np.asarray(cov, dtype=float)
    cov = 0.5 * (cov + cov.T)
    eigenvalues, eigenvectors = np.linalg.eigh(cov)
    scale = float(np.max(np.abs(eigenvalues), initial=0.0))
    smallest = float(eigenvalues.min(initial=0.0))
    if smallest < -PSD_TOLERANCE * scale:
        raise NotPositiveSemidefiniteError(smallest)
    if smallest < -CLAMP_WARNING_LEVEL * scale:
        logger.warning(f"Clamping negative covariance eigenvalue {smallest:.3e} to 0")
    root = np.sqrt(np.clip(eigenvalues, 0.0, None))
    return (eigenvectors * root) @ eigenvectors.T


def _seed_of(rng: RngLike) -> int | None:
    if isinstance(rng, np.random.Generator) or rng is None:
        return None
    return int(rng)


def sample_iso(spec: IsoSpec, rng: RngLike = None, size: int | None = None) -> np.ndarray:
    """Draw from Gamma_{u,v}.

    For u >= 0 a draw is B + X I with B from the GOE with off-diagonal
    variance v (diagonal variance 2v) and independent X ~ N(0, u). For
    u < 0 the covariance form is factored instead.
    """
    if not isinstance(spec, IsoSpec):
        raise InvalidEnsembleError(f"expected an IsoSpec, got {type(spec).__name__}")
    gen = as_generator(rng)
    count = 1 if size is None else int(size)
    m = spec.m
    if spec.u >= 0:
        g = gen.standard_normal((count, m, m))
        goe = math.sqrt(spec.v / 2) * (g + np.swapaxes(g, -1, -2))
        x = math.sqrt(spec.u) * gen.standard_normal(count)
        samples = goe + x[:, None, None] * np.eye(m)
    else:
        root = covariance_sqrt(iso_covariance(spec))
        z = gen.standard_normal((count, normalized_dim(m)))
        samples = from_normalized(z @ root.T, m)
    return samples[0] if size is None else samples


def sample_axial(spec: AxialSpec, rng: RngLike = None, size: int | None = None) -> np.ndarray:
    """Draw from the O_eta(m)-invariant ensemble with covariance Q_c."""
    gen = as_generator(rng)
    count = 1 if size is None else int(size)
    root = covariance_sqrt(axial_covariance(spec))
    z = gen.standard_normal((count, normalized_dim(spec.m)))
    samples = from_normalized(z @ root.T, spec.m)
    return samples[0] if size is None else samples


def sample_pair(
    spec: PairGaussianSpec,
    rng: RngLike = None,
    size: int | None = None,
    *,
    normals: np.ndarray | None = None,
) -> np.ndarray:
    """Draw matrices of shape (size, blocks, m, m) from a pair spec.

    ``normals`` (shape (size, dim)) replaces the internal standard normal
    draws, which lets several specs share common random numbers.
    """
    root = covariance_sqrt(spec.covariance)
    single = size is None and normals is None
    if normals is None:
        gen = as_generator(rng)
        normals = gen.standard_normal((1 if size is None else int(size), spec.dim))
    normals = np.asarray(normals, dtype=float)
    if normals.ndim != 2 or normals.shape[1] != spec.dim:
        raise ValueError(f"normals must have shape (n, {spec.dim}), got {normals.shape}")
    entries = (normals @ root.T).reshape(len(normals), spec.blocks, normalized_dim(spec.m))
    samples = from_normalized(entries, spec.m)
    return samples[0] if single else samples


def abs_det_values(
    spec: PairGaussianSpec, normals: np.ndarray, root: np.ndarray | None = None
) -> np.ndarray:
    """Per-draw |det| (product over blocks) for the given standard normals."""
    if root is None:
        root = covariance_sqrt(spec.covariance)
    normals = np.asarray(normals, dtype=float)
    entries = (normals @ root.T).reshape(len(normals), spec.blocks, normalized_dim(spec.m))
    dets = np.abs(np.linalg.det(from_normalized(entries, spec.m)))
    return np.prod(dets, axis=1)


def expect_abs_det(
    spec: IsoSpec | PairGaussianSpec,
    n: int,
    rng: RngLike = None,
    *,
    normals: np.ndarray | None = None,
) -> MonteCarloEstimate:
    """Monte Carlo estimate of E|det| (product of block determinants for pairs).

    ``normals`` of shape (n, dim) fixes the underlying standard normal
    draws; reusing one block across specs gives common random numbers.
    """
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    if isinstance(spec, IsoSpec):
        spec = PairGaussianSpec.from_iso(spec)
    root = covariance_sqrt(spec.covariance)
    if normals is not None:
        normals = np.asarray(normals, dtype=float)
        if normals.shape != (n, spec.dim):
            raise ValueError(f"normals must have shape ({n}, {spec.dim}), got {normals.shape}")

    gen = as_generator(rng) if normals is None else None
    values = np.empty(n)
    for start in range(0, n, MC_CHUNK):
        stop = min(n, start + MC_CHUNK)
        block = (
            normals[start:stop]
            if normals is not None
            else gen.standard_normal((stop - start, spec.dim))
        )
        values[start:stop] = abs_det_values(spec, block, root)

    estimate = float(values.mean())
    std_error = float(values.std(ddof=1) / math.sqrt(n))
    logger.debug(f"E|det| = {estimate:.6g} +/- {std_error:.2g} (n={n})")
    return MonteCarloEstimate(estimate, std_error, n, _seed_of(rng))


def holder_probe(
    spec_a: PairGaussianSpec,
    spec_b: PairGaussianSpec,
    n: int,
    rng: RngLike = None,
) -> float:
    """|E_A|det| - E_B|det|| / ||A - B||^(1/2) with common random numbers.

    ||.|| is the spectral norm of the covariance difference. Identical specs
    give 0.
    """
    if spec_a.m != spec_b.m or spec_a.blocks != spec_b.blocks:
        raise InvalidEnsembleError("holder_probe needs specs of the same shape")
    distance = float(np.linalg.norm(spec_a.covariance - spec_b.covariance, ord=2))
    if distance == 0.0:
        return 0.0
    gen = as_generator(rng)
    normals = gen.standard_normal((n, spec_a.dim))
    a = expect_abs_det(spec_a, n, normals=normals).estimate
    b = expect_abs_det(spec_b, n, normals=normals).estimate
    return abs(a - b) / math.sqrt(distance)


def bivariate_abs_moment(var_x: float, var_y: float, cov: float) -> float:
    """E|XY| for a centered Gaussian pair.

    (2 sx sy / pi) (sqrt(1 - rho^2) + rho arcsin(rho)), rho = cov / (sx sy).
    """
    if var_x < 0 or var_y < 0:
        raise NotPositiveSemidefiniteError(min(var_x, var_y))
    scale = math.sqrt(var_x * var_y)
    if scale == 0.0:
        return 0.0
    rho = min(1.0, max(-1.0, cov / scale))
    return 2.0 * scale / math.pi * (math.sqrt(1.0 - rho * rho) + rho * math.asin(rho))
