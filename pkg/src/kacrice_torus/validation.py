"""Fast self-checks of the numerical machinery against closed forms."""

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from typing import Any

import numpy as np

from .asymptotic_constants import (
    c_m,
    c_m_exact,
    delta0,
    k_infinity,
    two_point_correlation,
)
from .constants import CONSISTENCY_SIGMAS, RADIAL_TAIL_TOLERANCE
from .covariance.conditional_hessian import xi_bar, xi_infinity, xi_limit_origin
from .covariance.expansions import appendix_b_expansion
from .covariance.kernel import det_script_h, script_h, sigma_tilde
from .covariance.radial_weight import RadialProfile, WeightSpec, make_profile
from .ensembles.sampling import expect_abs_det
from .ensembles.sym_ensembles import IsoSpec
from .exceptions import KacRiceError
from .simulation.runner import simulate_counts
from .utils.rng import spawn

logger = logging.getLogger(__name__)

C1_GAUSSIAN = math.sqrt(1.5) / math.pi
GAMMA11_ABS_DET = math.sqrt(6.0 / math.pi)
DET_SCRIPT_H_UNIT = 0.666299
K_INFINITY_GAUSSIAN = math.pi**-1.5  # (2 pi d_1)^-1 with d_1 = sqrt(pi) / 2
PARITY_FIELDS = 20
EULER_FIELDS = 2


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check: ``value`` must lie within ``tolerance`` of ``expected``."""

    name: str
    passed: bool
    value: float
    expected: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "value": self.value,
            "expected": self.expected,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def _within(name: str, value: float, expected: float, tolerance: float, detail: str = "") -> CheckResult:
    passed = bool(abs(value - expected) <= tolerance)
    return CheckResult(name, passed, float(value), float(expected), float(tolerance), detail)


def _gaussian(m: int) -> RadialProfile:
    return make_profile(WeightSpec.gaussian(dimension=m))


def check_c1_closed_form() -> CheckResult:
    return _within("c1_closed_form", c_m_exact(_gaussian(1)), C1_GAUSSIAN, 1e-3)


def check_c1_monte_carlo(n_mc: int, rng: np.random.Generator) -> CheckResult:
    estimate = c_m(_gaussian(1), n_mc, rng)
    return _within(
        "c1_monte_carlo",
        estimate.estimate,
        C1_GAUSSIAN,
        CONSISTENCY_SIGMAS * estimate.std_error,
        f"n={n_mc}",
    )


def check_gamma_abs_det(n_mc: int, rng: np.random.Generator) -> CheckResult:
    estimate = expect_abs_det(IsoSpec(1, 1.0, 1.0), n_mc, rng)
    return _within(
        "gamma11_abs_det",
        estimate.estimate,
        GAMMA11_ABS_DET,
        CONSISTENCY_SIGMAS * estimate.std_error,
        f"n={n_mc}",
    )


def check_det_script_h() -> CheckResult:
    value = det_script_h(script_h(_gaussian(1), [1.0]))
    return _within("det_script_h", value, DET_SCRIPT_H_UNIT, 1e-5, "m=1, |eta|=1")


def check_k_infinity() -> CheckResult:
    return _within("k_infinity", k_infinity(_gaussian(1)), K_INFINITY_GAUSSIAN, 1e-12)


def check_sigma_expansion() -> CheckResult:
    """sigma~_{1,1}(t) t^2 approaches its catalogued leading coefficient."""
    p = _gaussian(1)
    t = 1e-2
    lead = appendix_b_expansion(p, 1, "sigma:1,1")
    value = sigma_tilde(p, [t]).entry(1, 1) * t * t
    return _within("sigma_leading_coefficient", value, lead, 1e-3 * abs(lead), f"t={t}")


def check_origin_limit() -> CheckResult:
    p = _gaussian(2)
    expected = appendix_b_expansion(p, 2, "c+c+:diag")
    value = xi_limit_origin(p, [1.0, 0.0]).entry(2, 2, 2, 2)
    return _within("origin_limit_diagonal", value, expected, 5e-3 * abs(expected), "m=2")


def check_xi_psd() -> CheckResult:
    p = _gaussian(2)
    points = ([0.1, 0.0], [1.0, 1.0], [3.0, 0.0])
    tensors = [xi_bar(p, eta) for eta in points]
    worst = min(t.min_eigenvalue() for t in tensors)
    failing = [eta for eta, t in zip(points, tensors, strict=True) if not t.is_psd()]
    return CheckResult(
        "xi_positive_semidefinite",
        not failing,
        worst,
        0.0,
        0.0,
        f"smallest eigenvalue over {len(points)} points" if not failing else f"fails at {failing}",
    )


def check_consistency(n_mc: int, rng: np.random.Generator) -> CheckResult:
    """C_1^2 = K(inf) E_{Gamma_inf} |det B|."""
    p = _gaussian(1)
    cm_rng, gamma_rng = spawn(rng, 2)
    estimate = c_m(p, n_mc, cm_rng)
    gamma = expect_abs_det(xi_infinity(p).to_pair_spec(), n_mc, gamma_rng)
    k = k_infinity(p)
    error = math.hypot(2.0 * estimate.estimate * estimate.std_error, k * gamma.std_error)
    return _within(
        "consistency_identity",
        estimate.estimate**2 - k * gamma.estimate,
        0.0,
        CONSISTENCY_SIGMAS * error + 1e-12,
        "C_1^2 - K(inf) E|det B|",
    )


def check_delta0_tail() -> CheckResult:
    p = _gaussian(1)
    radius = p.decay_radius(RADIAL_TAIL_TOLERANCE)
    value = delta0(p, [radius]).value
    return _within("delta0_tail", value, 0.0, 1e-8, f"|eta|={radius:.3g}")


def check_two_point_far() -> CheckResult:
    ratio = two_point_correlation(_gaussian(1), [20.0]).ratio
    return _within("two_point_far", ratio, 1.0, 1e-4, "|eta|=20")


def check_count_parity(seed: int, max_workers: int | None) -> CheckResult:
    """Periodic functions of one variable have an even number of critical points."""
    counts, _ = simulate_counts(
        WeightSpec.gaussian(dimension=1), 1, 0.1, PARITY_FIELDS, seed, max_workers=max_workers
    )
    odd = int(np.count_nonzero(counts % 2))
    return _within("count_parity_m1", odd, 0, 0, f"{PARITY_FIELDS} fields, eps=0.1")


def check_euler_characteristic(seed: int, max_workers: int | None) -> CheckResult:
    """Morse indices of a function on the 2-torus sum to its Euler characteristic 0."""
    _, signed = simulate_counts(
        WeightSpec.gaussian(dimension=2),
        2,
        0.2,
        EULER_FIELDS,
        seed,
        max_workers=max_workers,
        with_index=True,
    )
    worst = int(np.max(np.abs(signed)))
    return _within("euler_characteristic_m2", worst, 0, 0, f"{EULER_FIELDS} fields, eps=0.2")


def _guarded(name: str, check: Callable[[], CheckResult]) -> CheckResult:
    try:
        return check()
    except KacRiceError as e:
        logger.warning(f"Check {name} raised {type(e).__name__}: {e}")
        return CheckResult(name, False, math.nan, math.nan, math.nan, str(e))
    except Exception as e:
        logger.exception(f"Check {name} failed unexpectedly")
        return CheckResult(name, False, math.nan, math.nan, math.nan, f"{type(e).__name__}: {e}")


def run_checks(n_mc: int, seed: int, max_workers: int | None = None) -> list[CheckResult]:
    """Run every check; each randomized check draws from its own stream of ``seed``."""
    c1_rng, gamma_rng, consistency_rng = spawn(seed, 3)
    checks: list[tuple[str, Callable[[], CheckResult]]] = [
        ("c1_closed_form", check_c1_closed_form),
        ("c1_monte_carlo", lambda: check_c1_monte_carlo(n_mc, c1_rng)),
        ("gamma11_abs_det", lambda: check_gamma_abs_det(n_mc, gamma_rng)),
        ("det_script_h", check_det_script_h),
        ("k_infinity", check_k_infinity),
        ("sigma_leading_coefficient", check_sigma_expansion),
        ("origin_limit_diagonal", check_origin_limit),
        ("xi_positive_semidefinite", check_xi_psd),
        ("consistency_identity", lambda: check_consistency(n_mc, consistency_rng)),
        ("delta0_tail", check_delta0_tail),
        ("two_point_far", check_two_point_far),
        ("count_parity_m1", lambda: check_count_parity(seed, max_workers)),
        ("euler_characteristic_m2", lambda: check_euler_characteristic(seed, max_workers)),
    ]
    results = []
    for name, check in checks:
        result = _guarded(name, check)
        logger.debug(f"{name}: {'pass' if result.passed else 'FAIL'} ({result.value!r})")
        results.append(result)
    return results
