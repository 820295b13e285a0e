"""Expected count and variance constants of critical points on the torus.

Quantities, for the profile f of a radial weight w on R^m:

    C_m(w)  = (2 pi d_m)^(-m/2) E_{Gamma_{h_m,h_m}} |det A|
    K(eta)  = (2 pi)^(-m) det H(V, eta)^(-1/2),  K(inf) = (2 pi d_m)^(-m)
    delta0  = det H(V, eta)^(-1/2) E_{Xi^0(eta)} |det B| - d_m^(-m) E_{Upsilon x Upsilon} |det B|
    C'_m(w) = C_m(w) + (2 pi)^(-m) int_{R^m} delta0(eta) d eta

delta0 only depends on |eta|, so the integral is computed radially. Every
Monte Carlo expectation of a pair determinant reuses one block of standard
normals (common random numbers), which keeps delta0 smooth in |eta|.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
from scipy import integrate

from .constants import (
    CONSISTENCY_SIGMAS,
    DEFAULT_MC_SAMPLES,
    DEFAULT_RADIAL_NODES,
    EPSILON_POLICY_MAX,
    QUAD_LIMIT,
    RADIAL_PANEL_WIDTH,
    RADIAL_TAIL_TOLERANCE,
)
from .covariance.conditional_hessian import (
    CovTensor,
    Provenance,
    xi_bar,
    xi_infinity,
    xi_rescale,
)
from .covariance.kernel import det_script_h, script_h
from .covariance.radial_weight import RadialProfile, WeightSpec, sphere_moment
from .ensembles.sampling import (
    MC_CHUNK,
    MonteCarloEstimate,
    abs_det_values,
    bivariate_abs_moment,
    covariance_sqrt,
    expect_abs_det,
)
from .ensembles.sym_ensembles import IsoSpec, normalized_dim
from .exceptions import QuadratureError, SingularMatrixError
from .formatters.report import write_csv
from .simulation.field import positive_modes, truncation_order
from .utils.parallel import WorkerPool
from .utils.rng import STREAM_CRN, as_generator, spawn

logger = logging.getLogger(__name__)

NODE_BATCH = 32  # radial nodes evaluated per pool batch
TAIL_SLACK = 100.0  # |delta0(T)| may exceed the tail tolerance by this factor

RngLike = np.random.Generator | int | None


def _seed_of(rng: RngLike) -> int | None:
    return None if rng is None or isinstance(rng, np.random.Generator) else int(rng)


def _as_eta(p: RadialProfile, eta) -> np.ndarray:
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if eta.shape != (p.m,):
        raise ValueError(f"eta must have shape ({p.m},), got {eta.shape}")
    return eta


def _abs_det_samples(spec, normals: np.ndarray) -> np.ndarray:
    root = covariance_sqrt(spec.covariance)
    out = np.empty(len(normals))
    for start in range(0, len(normals), MC_CHUNK):
        block = normals[start : start + MC_CHUNK]
        out[start : start + len(block)] = abs_det_values(spec, block, root)
    return out


@dataclass(frozen=True)
class CmEstimate:
    """Monte Carlo estimate of C_m(w) in its direct and normalized forms.

    ``exact`` is the closed form (2 pi d_1)^(-1/2) sqrt(6 h_1 / pi) for m = 1
    and None otherwise.
    """

    m: int
    estimate: float  # (2 pi d_m)^(-m/2) E_{Gamma_{h,h}} |det A|
    std_error: float
    normalized: float  # (h_m / (2 pi d_m))^(m/2) E_{Gamma_{1,1}} |det B|
    normalized_std_error: float
    n: int
    seed: int | None = None
    exact: float | None = None

    @property
    def forms_agree(self) -> bool:
        band = CONSISTENCY_SIGMAS * math.hypot(self.std_error, self.normalized_std_error)
        return abs(self.estimate - self.normalized) <= band

    @property
    def value(self) -> float:
        return self.exact if self.exact is not None else self.estimate

    def to_dict(self) -> dict[str, Any]:
        return {
            "estimate": self.estimate,
            "std_error": self.std_error,
            "normalized": self.normalized,
            "normalized_std_error": self.normalized_std_error,
            "forms_agree": self.forms_agree,
            "exact": self.exact,
            "n": self.n,
            "seed": self.seed,
        }


def c_m_exact(p: RadialProfile) -> float | None:
    """Closed form of C_1(w); None for m >= 2."""
    if p.m != 1:
        return None
    return math.sqrt(6.0 * p.h_m / math.pi) / math.sqrt(2.0 * math.pi * p.d_m)


def c_m(p: RadialProfile, n_mc: int = DEFAULT_MC_SAMPLES, rng: RngLike = None) -> CmEstimate:
    """C_m(w) = (2 pi d_m)^(-m/2) E_{Gamma_{h_m,h_m}} |det A|.

    The normalized form (h_m / (2 pi d_m))^(m/2) E_{Gamma_{1,1}} |det B| is
    estimated from an independent stream; a disagreement beyond the combined
    error is logged.
    """
    m, d, h = p.m, p.d_m, p.h_m
    direct_rng, normalized_rng = spawn(rng, 2)
    direct = expect_abs_det(IsoSpec(m, h, h), n_mc, direct_rng)
    unit = expect_abs_det(IsoSpec(m, 1.0, 1.0), n_mc, normalized_rng)

    prefactor = (2.0 * math.pi * d) ** (-m / 2.0)
    normalized_factor = (h / (2.0 * math.pi * d)) ** (m / 2.0)
    result = CmEstimate(
        m=m,
        estimate=prefactor * direct.estimate,
        std_error=prefactor * direct.std_error,
        normalized=normalized_factor * unit.estimate,
        normalized_std_error=normalized_factor * unit.std_error,
        n=n_mc,
        seed=_seed_of(rng),
        exact=c_m_exact(p),
    )
    if not result.forms_agree:
        logger.warning(
            f"C_{m} direct ({result.estimate:.6g}) and normalized ({result.normalized:.6g}) "
            "forms disagree beyond their Monte Carlo error"
        )
    logger.debug(f"C_{m} = {result.estimate:.6g} +/- {result.std_error:.2g}")
    return result


def k_infinity(p: RadialProfile) -> float:
    """K(inf) = (2 pi d_m)^(-m)."""
    return (2.0 * math.pi * p.d_m) ** (-p.m)


def k_eta(p: RadialProfile, eta) -> float:
    """K(eta) = (2 pi)^(-m) det H(V, eta)^(-1/2); ``math.inf`` selects K(inf)."""
    if np.all(np.isinf(np.atleast_1d(np.asarray(eta, dtype=float)))):
        return k_infinity(p)
    eta = _as_eta(p, eta)
    h = script_h(p, eta)
    if h.is_diagonal:
        raise SingularMatrixError(
            f"K(eta) diverges like |eta|^-m at the diagonal (|eta| = {h.eta_norm:.3e})"
        )
    det = det_script_h(h)
    if det <= 0:
        raise SingularMatrixError(f"det H(V, eta) = {det!r} is not positive at eta = {eta.tolist()}")
    return (2.0 * math.pi) ** (-p.m) / math.sqrt(det)


@dataclass(frozen=True)
class Delta0Estimate:
    """delta0 at one eta, with its two terms."""

    eta_norm: float
    value: float
    std_error: float
    near: float  # det H^(-1/2) E_Xi |det B|
    far: float  # d_m^(-m) E_{Upsilon x Upsilon} |det B|
    n: int  # 0 for closed-form evaluations

    def to_dict(self) -> dict[str, Any]:
        return {
            "eta_norm": self.eta_norm,
            "value": self.value,
            "std_error": self.std_error,
            "near": self.near,
            "far": self.far,
            "n": self.n,
        }


def _det_root(p: RadialProfile, eta: np.ndarray) -> float:
    """det H(V, eta)^(-1/2) * |eta|^2, finite as eta -> 0."""
    h = script_h(p, eta)
    if h.is_diagonal:
        raise SingularMatrixError(f"delta0 is undefined at the diagonal (|eta| = {h.eta_norm:.3e})")
    return h.eta_norm**2 / math.sqrt(det_script_h(h))


def _rescaled_pair(p: RadialProfile, eta: np.ndarray) -> CovTensor:
    return xi_rescale(xi_bar(p, eta))


class _Delta0Sampler:
    """Per-draw delta0 values at many eta from one block of standard normals."""

    def __init__(self, p: RadialProfile, normals: np.ndarray):
        self.p = p
        self.normals = normals
        self.far_factor = p.d_m ** (-p.m)
        self.far_values = self.far_factor * _abs_det_samples(xi_infinity(p).to_pair_spec(), normals)

    def near_values(self, eta: np.ndarray) -> np.ndarray:
        # E_Xi |det B| = |eta|^2 E_{Xi^eta} |det B^eta|
        spec = _rescaled_pair(self.p, eta).to_pair_spec()
        return _det_root(self.p, eta) * _abs_det_samples(spec, self.normals)

    def differences(self, eta: np.ndarray) -> np.ndarray:
        return self.near_values(eta) - self.far_values

    def estimate(self, eta: np.ndarray) -> Delta0Estimate:
        near = self.near_values(eta)
        diff = near - self.far_values
        n = len(self.normals)
        return Delta0Estimate(
            eta_norm=float(np.linalg.norm(eta)),
            value=float(diff.mean()),
            std_error=float(diff.std(ddof=1) / math.sqrt(n)),
            near=float(near.mean()),
            far=float(self.far_values.mean()),
            n=n,
        )


def _crn_normals(p: RadialProfile, n_mc: int, rng: RngLike) -> np.ndarray:
    if n_mc < 2:
        raise ValueError(f"n_mc must be at least 2, got {n_mc}")
    gen = as_generator(rng, STREAM_CRN)
    return gen.standard_normal((n_mc, 2 * normalized_dim(p.m)))


def _exact_terms_1d(p: RadialProfile, t: float) -> tuple[float, float]:
    """(near, far) for m = 1 from the bivariate absolute moment."""
    eta = np.array([t])
    tensor = _rescaled_pair(p, eta)
    same = float(tensor.same[0, 0, 0, 0])
    cross = float(tensor.cross[0, 0, 0, 0])
    near = _det_root(p, eta) * bivariate_abs_moment(same, same, cross)
    upsilon = 3.0 * p.h_m
    far = bivariate_abs_moment(upsilon, upsilon, 0.0) / p.d_m
    return near, far


def delta0(
    p: RadialProfile,
    eta,
    n_mc: int = DEFAULT_MC_SAMPLES,
    rng: RngLike = None,
    *,
    exact: bool | None = None,
) -> Delta0Estimate:
    """delta0(eta), the near-diagonal density difference.

    Both expectations share the same standard normal draws. For m = 1 the
    closed form is used unless ``exact`` is False.
    """
    eta = _as_eta(p, eta)
    if exact is None:
        exact = p.m == 1
    if exact:
        if p.m != 1:
            raise ValueError("the closed-form delta0 is only available for m = 1")
        near, far = _exact_terms_1d(p, float(np.linalg.norm(eta)))
        return Delta0Estimate(float(np.linalg.norm(eta)), near - far, 0.0, near, far, 0)

    return _Delta0Sampler(p, _crn_normals(p, n_mc, rng)).estimate(eta)


@dataclass(frozen=True)
class TwoPointCorrelation:
    """rho_2 / rho~_1 at separation eta (the |eta| prefactors cancel)."""

    eta_norm: float
    ratio: float
    std_error: float
    near: float
    far: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "eta_norm": self.eta_norm,
            "ratio": self.ratio,
            "std_error": self.std_error,
            "near": self.near,
            "far": self.far,
        }


def two_point_correlation(
    p: RadialProfile,
    eta,
    n_mc: int = DEFAULT_MC_SAMPLES,
    rng: RngLike = None,
    *,
    exact: bool | None = None,
) -> TwoPointCorrelation:
    """[det H^(-1/2) E_Xi |det B|] / [det H_inf^(-1/2) E_{Upsilon x Upsilon} |det B|].

    Tends to 1 as |eta| grows and vanishes like |eta|^(2-m) times |eta|^m
    at the diagonal. The standard error comes from the delta method on the
    common-random-number pair.
    """
    eta = _as_eta(p, eta)
    norm = float(np.linalg.norm(eta))
    if exact is None:
        exact = p.m == 1
    if exact:
        if p.m != 1:
            raise ValueError("the closed-form correlation is only available for m = 1")
        near, far = _exact_terms_1d(p, norm)
        return TwoPointCorrelation(norm, near / far, 0.0, near, far)

    sampler = _Delta0Sampler(p, _crn_normals(p, n_mc, rng))
    x = sampler.near_values(eta)
    y = sampler.far_values
    ratio = float(x.mean() / y.mean())
    std_error = float(np.std(x - ratio * y, ddof=1) / (abs(y.mean()) * math.sqrt(n_mc)))
    return TwoPointCorrelation(norm, ratio, std_error, float(x.mean()), float(y.mean()))


@dataclass(frozen=True)
class CPrimeEstimate:
    """C'_m(w) with its Monte Carlo and quadrature error split."""

    m: int
    value: float
    std_error: float  # Monte Carlo, including the error of C_m
    quadrature_error: float
    c_m: float
    integral: float  # int_{R^m} delta0
    radius: float  # radial integration range [0, radius]
    node_count: int
    tail_value: float  # |delta0| at the end of the range
    samples_per_node: int  # 0 when every node is evaluated in closed form
    seed: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "quadrature_error": self.quadrature_error,
            "c_m": self.c_m,
            "integral": self.integral,
            "quadrature": {
                "radius": self.radius,
                "node_count": self.node_count,
                "tail_value": self.tail_value,
            },
            "monte_carlo": {"samples_per_node": self.samples_per_node, "seed": self.seed},
        }


def panel_rule(radius: float, nodes: int, width: float = RADIAL_PANEL_WIDTH) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, radius]."""
    panels = max(1, math.ceil(radius / width))
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(0.0, radius, panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    points = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return points, weights


def _check_tail(value: float, std_error: float, radius: float, tail_tolerance: float) -> None:
    if abs(value) > TAIL_SLACK * tail_tolerance + 3.0 * std_error:
        raise QuadratureError(
            f"delta0 does not decay: |delta0({radius:.3g})| = {abs(value):.3e} "
            f"exceeds the tail bound {TAIL_SLACK * tail_tolerance:.1e}"
        )


def _radial_exact_1d(p: RadialProfile, radius: float) -> tuple[float, float, int]:
    def integrand(t: float) -> float:
        near, far = _exact_terms_1d(p, t)
        return near - far

    result = integrate.quad(integrand, 0.0, radius, limit=QUAD_LIMIT, full_output=1)
    value, error, info = result[0], result[1], result[2]
    if not math.isfinite(value):
        raise QuadratureError(f"radial quadrature returned {value} on [0, {radius:.3g}]")
    if len(result) > 3:
        logger.warning(f"Radial quadrature: {result[3]}")
    return value, error, int(info["neval"])


def _radial_monte_carlo(
    sampler: _Delta0Sampler,
    radius: float,
    nodes: int,
    max_workers: int | None,
) -> tuple[float, float, float, int]:
    """(integral, MC std error, quadrature error, node count) of int_0^R delta0 t^(m-1) dt."""
    p = sampler.p
    n_mc = len(sampler.normals)
    fine_t, fine_w = panel_rule(radius, nodes)
    coarse_t, coarse_w = panel_rule(radius, max(2, nodes // 2))
    points = np.concatenate([fine_t, coarse_t])
    weights_fine = np.concatenate([fine_w * fine_t ** (p.m - 1), np.zeros(len(coarse_t))])
    weights_coarse = np.concatenate([np.zeros(len(fine_t)), coarse_w * coarse_t ** (p.m - 1)])
    direction = np.eye(p.m)[0]

    pool = WorkerPool(max_workers)
    per_draw = np.zeros(n_mc)
    coarse_total = 0.0
    for start in range(0, len(points), NODE_BATCH):
        batch = points[start : start + NODE_BATCH]
        values = pool.map(lambda _, t: sampler.differences(t * direction), batch)
        for offset, diff in enumerate(values):
            j = start + offset
            if weights_fine[j]:
                per_draw += weights_fine[j] * diff
            else:
                coarse_total += weights_coarse[j] * float(diff.mean())
    integral = float(per_draw.mean())
    std_error = float(per_draw.std(ddof=1) / math.sqrt(n_mc))
    logger.debug(f"Radial integral over {len(points)} nodes: {integral:.6g} +/- {std_error:.2g}")
    return integral, std_error, abs(integral - coarse_total), len(points)


def c_prime_m(
    p: RadialProfile,
    n_mc: int = DEFAULT_MC_SAMPLES,
    rng: RngLike = None,
    *,
    tail_tolerance: float = RADIAL_TAIL_TOLERANCE,
    nodes: int = DEFAULT_RADIAL_NODES,
    max_workers: int | None = None,
    c_m_estimate: CmEstimate | None = None,
) -> CPrimeEstimate:
    """C'_m(w) = C_m(w) + (2 pi)^(-m) omega_{m-1} int_0^T delta0(t e_1) t^(m-1) dt.

    T is the decay radius of the profile at ``tail_tolerance``; delta0(T)
    must be below the tail bound or QuadratureError is raised. For m = 1
    the integrand is exact and adaptive quadrature is used; otherwise
    composite Gauss-Legendre panels with common random numbers at every
    node, and the quadrature error is the change against the half-order
    rule.
    """
    m = p.m
    radius = p.decay_radius(tail_tolerance)
    crn_rng, cm_rng = spawn(rng, 2)
    omega = sphere_moment(m, ())

    if m == 1:
        integral, quad_error, node_count = _radial_exact_1d(p, radius)
        mc_error = 0.0
        tail = delta0(p, [radius])
        samples = 0
    else:
        # the tail check reuses the normals of the quadrature nodes
        sampler = _Delta0Sampler(p, _crn_normals(p, n_mc, crn_rng))
        integral, mc_error, quad_error, node_count = _radial_monte_carlo(
            sampler, radius, nodes, max_workers
        )
        tail = sampler.estimate(radius * np.eye(m)[0])
        samples = n_mc
    _check_tail(tail.value, tail.std_error, radius, tail_tolerance)

    if c_m_estimate is None:
        c_m_estimate = c_m(p, n_mc, cm_rng)
    c_value = c_m_estimate.value
    c_error = 0.0 if c_m_estimate.exact is not None else c_m_estimate.std_error

    factor = omega / (2.0 * math.pi) ** m
    result = CPrimeEstimate(
        m=m,
        value=c_value + factor * integral,
        std_error=math.hypot(c_error, factor * mc_error),
        quadrature_error=factor * quad_error,
        c_m=c_value,
        integral=omega * integral,
        radius=radius,
        node_count=node_count,
        tail_value=abs(tail.value),
        samples_per_node=samples,
        seed=_seed_of(rng),
    )
    logger.info(f"C'_{m} = {result.value:.6g} (MC {result.std_error:.2g}, quad {result.quadrature_error:.2g})")
    return result


def planar_delta0_integral(
    p: RadialProfile,
    n_mc: int = DEFAULT_MC_SAMPLES,
    rng: RngLike = None,
    *,
    spacing: float = 0.25,
    tail_tolerance: float = RADIAL_TAIL_TOLERANCE,
) -> float:
    """int_{R^2} delta0 by a midpoint rule on a square grid (m = 2).

    An independent check of the radial reduction: the grid visits every
    direction, not only e_1.
    """
    if p.m != 2:
        raise ValueError(f"the planar integral needs m = 2, got m={p.m}")
    radius = p.decay_radius(tail_tolerance)
    sampler = _Delta0Sampler(p, _crn_normals(p, n_mc, rng))
    centers = (np.arange(math.ceil(radius / spacing)) + 0.5) * spacing
    total = 0.0
    for x in centers:
        for y in centers:
            if math.hypot(x, y) <= radius:
                total += float(sampler.differences(np.array([x, y])).mean())
    # quadrant symmetry of the radial integrand
    return 4.0 * spacing * spacing * total


@dataclass(frozen=True)
class ExpectedCount:
    """N_eps, the exact expected number of critical points at finite epsilon."""

    m: int
    epsilon: float
    value: float
    std_error: float
    k_trunc: int
    n: int  # 0 for the closed form

    def to_dict(self) -> dict[str, Any]:
        return {
            "value": self.value,
            "std_error": self.std_error,
            "k_trunc": self.k_trunc,
            "n": self.n,
        }


def expected_count(
    weight: WeightSpec,
    m: int,
    epsilon: float,
    n_mc: int = DEFAULT_MC_SAMPLES,
    rng: RngLike = None,
) -> ExpectedCount:
    """N_eps from the lattice sums of the covariance of u^eps.

    With G = Cov(grad u) and T = Cov(Hess u) at one point,
    N_eps = (2 pi)^(-m/2) det G^(-1/2) E_T |det H|. For m = 1 this is the
    closed form 2 sqrt(sum k^4 w / sum k^2 w).
    """
    k_trunc = truncation_order(weight, epsilon)
    modes = positive_modes(m, k_trunc)
    variances = weight.evaluate(2.0 * math.pi * epsilon * np.linalg.norm(modes, axis=1))
    # sum over k != 0 is twice the sum over k > 0
    wave = 2.0 * math.pi * modes
    gradient_cov = 2.0 * np.einsum("q,qi,qj->ij", variances, wave, wave)

    if m == 1:
        fourth = 2.0 * float(np.sum(variances * wave[:, 0] ** 4))
        value = math.sqrt(fourth / gradient_cov[0, 0]) / math.pi
        return ExpectedCount(m, float(epsilon), value, 0.0, k_trunc, 0)

    hessian_cov = 2.0 * np.einsum("q,qi,qj,qk,ql->ijkl", variances, wave, wave, wave, wave)
    spec = CovTensor(m, hessian_cov, None, Provenance.UPSILON, epsilon=float(epsilon)).to_pair_spec()
    abs_det = expect_abs_det(spec, n_mc, rng)
    prefactor = (2.0 * math.pi) ** (-m / 2.0) / math.sqrt(float(np.linalg.det(gradient_cov)))
    return ExpectedCount(
        m,
        float(epsilon),
        prefactor * abs_det.estimate,
        prefactor * abs_det.std_error,
        k_trunc,
        n_mc,
    )


@dataclass(frozen=True)
class MomentPrediction:
    """Predicted mean and variance of the number of critical points at epsilon.

    The leading-order forms carry a relative error O(eps) for the mean;
    ``mean_exact`` and ``variance_exact`` use N_eps and are accurate to
    O(eps^N) for every N.
    """

    m: int
    epsilon: float
    mean: float  # C_m eps^-m
    variance: float  # C'_m eps^-m
    normalized_variance: float  # (C'_m / C_m^2) eps^m
    mean_exact: float | None = None  # N_eps
    variance_exact: float | None = None  # N_eps + (C'_m - C_m) eps^-m
    std_error: dict[str, float] = field(default_factory=dict)

    @property
    def second_factorial_moment(self) -> float | None:
        """E[N(N - 1)] = var + N_eps^2 - N_eps."""
        if self.mean_exact is None or self.variance_exact is None:
            return None
        return self.variance_exact + self.mean_exact**2 - self.mean_exact

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "epsilon": self.epsilon,
            "mean": self.mean,
            "variance": self.variance,
            "normalized_variance": self.normalized_variance,
            "mean_exact": self.mean_exact,
            "variance_exact": self.variance_exact,
            "second_factorial_moment": self.second_factorial_moment,
            "std_error": self.std_error,
            "error_bands": {"mean_relative": self.epsilon, "exact_relative": "O(eps^N)"},
        }


def predict_moments(
    p: RadialProfile,
    epsilon: float,
    c_m_value: CmEstimate | float | None = None,
    c_prime_value: CPrimeEstimate | float | None = None,
    *,
    n_mc: int = DEFAULT_MC_SAMPLES,
    rng: RngLike = None,
    include_exact: bool = True,
    max_workers: int | None = None,
) -> MomentPrediction:
    """Mean C_m eps^-m and variance C'_m eps^-m of the count at ``epsilon``.

    Constants that are not supplied are computed. ``include_exact`` adds the
    finite-epsilon forms built on N_eps.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if epsilon > EPSILON_POLICY_MAX:
        logger.warning(
            f"epsilon={epsilon} is above the policy range (<= {EPSILON_POLICY_MAX}); "
            "the asymptotic predictions may be inaccurate"
        )
    cm_rng, cp_rng, count_rng = spawn(rng, 3)
    if c_m_value is None:
        c_m_value = c_m(p, n_mc, cm_rng)
    if c_prime_value is None:
        estimate = c_m_value if isinstance(c_m_value, CmEstimate) else None
        c_prime_value = c_prime_m(
            p, n_mc, cp_rng, max_workers=max_workers, c_m_estimate=estimate
        )

    errors: dict[str, float] = {}
    if isinstance(c_m_value, CmEstimate):
        errors["c_m"] = 0.0 if c_m_value.exact is not None else c_m_value.std_error
        c_value = c_m_value.value
    else:
        c_value = float(c_m_value)
    if isinstance(c_prime_value, CPrimeEstimate):
        errors["c_prime_m"] = c_prime_value.std_error
        c_prime = c_prime_value.value
    else:
        c_prime = float(c_prime_value)

    m = p.m
    scale = epsilon ** (-m)
    mean_exact = variance_exact = None
    if include_exact:
        count = expected_count(p.weight, m, epsilon, n_mc, count_rng)
        mean_exact = count.value
        variance_exact = count.value + (c_prime - c_value) * scale
        errors["mean_exact"] = count.std_error

    return MomentPrediction(
        m=m,
        epsilon=float(epsilon),
        mean=c_value * scale,
        variance=c_prime * scale,
        normalized_variance=c_prime / c_value**2 * epsilon**m,
        mean_exact=mean_exact,
        variance_exact=variance_exact,
        std_error=errors,
    )


@dataclass(frozen=True)
class ConstantsReport:
    """C_m, C'_m and the consistency identity C_m^2 = K(inf) E_{Gamma_inf} |det B|."""

    m: int
    weight: WeightSpec
    c_m: CmEstimate
    c_prime_m: CPrimeEstimate
    k_infinity: float
    gamma_infinity: MonteCarloEstimate  # E over Upsilon x Upsilon of |det B|
    prediction: MomentPrediction | None = None

    @property
    def consistency_residual(self) -> float:
        return self.c_m.estimate**2 - self.k_infinity * self.gamma_infinity.estimate

    @property
    def consistency_error(self) -> float:
        return math.hypot(
            2.0 * self.c_m.estimate * self.c_m.std_error,
            self.k_infinity * self.gamma_infinity.std_error,
        )

    @property
    def consistent(self) -> bool:
        return abs(self.consistency_residual) <= CONSISTENCY_SIGMAS * self.consistency_error + 1e-12

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "m": self.m,
            "weight": self.weight.to_dict(),
            "c_m": self.c_m.to_dict(),
            "c_prime_m": self.c_prime_m.to_dict(),
            "k_infinity": self.k_infinity,
            "consistency": {
                "residual": self.consistency_residual,
                "error": self.consistency_error,
                "consistent": self.consistent,
                "gamma_infinity": self.gamma_infinity.to_dict(),
            },
        }
        if self.prediction is not None:
            data["prediction"] = self.prediction.to_dict()
        return data


def compute_constants(
    p: RadialProfile,
    n_mc: int = DEFAULT_MC_SAMPLES,
    rng: RngLike = None,
    *,
    epsilon: float | None = None,
    tail_tolerance: float = RADIAL_TAIL_TOLERANCE,
    nodes: int = DEFAULT_RADIAL_NODES,
    max_workers: int | None = None,
) -> ConstantsReport:
    """Everything the ``constants`` command reports."""
    cm_rng, cp_rng, gamma_rng, prediction_rng = spawn(rng, 4)
    cm_estimate = c_m(p, n_mc, cm_rng)
    cp_estimate = c_prime_m(
        p,
        n_mc,
        cp_rng,
        tail_tolerance=tail_tolerance,
        nodes=nodes,
        max_workers=max_workers,
        c_m_estimate=cm_estimate,
    )
    gamma = expect_abs_det(xi_infinity(p).to_pair_spec(), n_mc, gamma_rng)
    prediction = None
    if epsilon is not None:
        prediction = predict_moments(
            p, epsilon, cm_estimate, cp_estimate, n_mc=n_mc, rng=prediction_rng
        )
    report = ConstantsReport(
        m=p.m,
        weight=p.weight,
        c_m=cm_estimate,
        c_prime_m=cp_estimate,
        k_infinity=k_infinity(p),
        gamma_infinity=gamma,
        prediction=prediction,
    )
    if not report.consistent:
        logger.warning(
            f"C_m^2 - K(inf) E|det B| = {report.consistency_residual:.3e} exceeds "
            f"{CONSISTENCY_SIGMAS:g} combined standard errors"
        )
    return report


def delta0_curve(
    p: RadialProfile,
    radii: Sequence[float],
    n_mc: int = DEFAULT_MC_SAMPLES,
    rng: RngLike = None,
) -> list[Delta0Estimate]:
    """delta0 along e_1 at the given radii, sharing one block of normals."""
    direction = np.eye(p.m)[0]
    if p.m == 1:
        return [delta0(p, t * direction) for t in radii]
    sampler = _Delta0Sampler(p, _crn_normals(p, n_mc, rng))
    return [sampler.estimate(t * direction) for t in radii]


def dump_delta0(
    p: RadialProfile,
    path: Path,
    n_mc: int = DEFAULT_MC_SAMPLES,
    rng: RngLike = None,
    *,
    points: int = 60,
    tail_tolerance: float = RADIAL_TAIL_TOLERANCE,
) -> Path:
    """Write (t, delta0, std_error) rows for t in (0, T] to a CSV file."""
    radius = p.decay_radius(tail_tolerance)
    radii = np.linspace(radius / points, radius, points)
    curve = delta0_curve(p, radii, n_mc, rng)
    rows = ((d.eta_norm, d.value, d.std_error) for d in curve)
    return write_csv(path, ("t", "delta0", "std_error"), rows)
