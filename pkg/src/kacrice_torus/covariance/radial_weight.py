"""Radial weights w and their Fourier-side profiles f.

For an even weight w the Fourier transform of x -> w(|x|) on R^m is radial and
is written V(xi) = f(|xi|^2 / 2). Profiles are evaluated in any dimension n
through the marginal of w(|x|) along the first axis; the derivatives of the
m-dimensional profile follow from the dimension shift

    f_m^{(k)}(s) = (-2 pi)^{-k} f_{m+2k}(s),

so no chain-rule inversion (and no cancellation near s = 0) is needed.
"""

import csv
import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from pathlib import Path
from typing import Any

import numpy as np
from scipy import integrate, special
from scipy.interpolate import CubicSpline

from ..constants import (
    DEFAULT_GAUSSIAN_SCALE,
    MARGINAL_GRID_POINTS,
    MAX_DERIVATIVE_ORDER,
    QUAD_LIMIT,
    RADIAL_MAX_RADIUS,
    TABLE_COVERAGE_FLOOR,
    TABULATED_NOISE_FLOOR,
    WEIGHT_DECAY_FLOOR,
)
from ..exceptions import WeightSpecError

logger = logging.getLogger(__name__)

ArrayLike = float | np.ndarray


class WeightKind(Enum):
    """Supported families of weights."""

    GAUSSIAN = "gaussian"  # w(t) = exp(-(t/scale)^2)
    TABULATED = "tabulated"  # cubic spline through (t, w(t)) samples


@dataclass(frozen=True)
class WeightSpec:
    """An even, nonnegative, rapidly decaying weight w."""

    kind: WeightKind = WeightKind.GAUSSIAN
    scale: float = DEFAULT_GAUSSIAN_SCALE
    samples: tuple[tuple[float, float], ...] = field(default=(), repr=False)
    dimension: int = 1

    def __post_init__(self):
        if isinstance(self.dimension, bool) or not isinstance(self.dimension, int):
            raise WeightSpecError(f"dimension must be an integer, got {self.dimension!r}")
        if self.dimension < 1:
            raise WeightSpecError(f"dimension must be at least 1, got {self.dimension}")
        if self.kind is WeightKind.GAUSSIAN:
            if not (math.isfinite(self.scale) and self.scale > 0):
                raise WeightSpecError(f"scale must be positive, got {self.scale}")
        else:
            # Forces validation of the table at construction time
            _ = self._table

    @classmethod
    def gaussian(
        cls, scale: float = DEFAULT_GAUSSIAN_SCALE, dimension: int = 1
    ) -> "WeightSpec":
        return cls(WeightKind.GAUSSIAN, scale=float(scale), dimension=dimension)

    @classmethod
    def tabulated(cls, t: Any, w: Any, dimension: int = 1) -> "WeightSpec":
        """Build a tabulated weight from sample arrays."""
        t_arr = np.asarray(t, dtype=float).ravel()
        w_arr = np.asarray(w, dtype=float).ravel()
        if t_arr.shape != w_arr.shape:
            raise WeightSpecError(
                f"t and w must have the same length, got {t_arr.size} and {w_arr.size}"
            )
        samples = tuple((float(a), float(b)) for a, b in zip(t_arr, w_arr, strict=True))
        return cls(WeightKind.TABULATED, samples=samples, dimension=dimension)

    def with_dimension(self, m: int) -> "WeightSpec":
        return WeightSpec(self.kind, self.scale, self.samples, m)

    @cached_property
    def _table(self) -> tuple[np.ndarray, np.ndarray]:
        """Sorted nonnegative-axis table after the evenness checks."""
        if len(self.samples) < 4:
            raise WeightSpecError("a tabulated weight needs at least 4 samples")
        data = np.asarray(self.samples, dtype=float)
        t, w = data[:, 0], data[:, 1]
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(w))):
            raise WeightSpecError("tabulated weight contains non-finite values")
        if np.any(w < 0):
            bad = float(t[np.argmin(w)])
            raise WeightSpecError(f"tabulated weight is negative at t={bad}")

        w_max = float(w.max())
        if w_max <= 0:
            raise WeightSpecError("tabulated weight is identically zero")

        half: dict[float, float] = {}
        for ti, wi in sorted(zip(np.abs(t), w, strict=True)):
            key = round(float(ti), 12)
            if key in half:
                if abs(half[key] - wi) > 1e-9 * w_max:
                    raise WeightSpecError(
                        f"tabulated weight is not even: w({-ti}) != w({ti})"
                    )
                continue
            half[key] = float(wi)

        t_half = np.array(sorted(half))
        w_half = np.array([half[k] for k in t_half])
        if t_half[0] != 0.0:
            raise WeightSpecError("tabulated weight must include t = 0")
        if w_half[-1] > TABLE_COVERAGE_FLOOR * w_max:
            raise WeightSpecError(
                f"tabulated weight must decay below {TABLE_COVERAGE_FLOOR:g} * max(w) "
                f"within the table; w({t_half[-1]}) = {w_half[-1]:g}"
            )
        return t_half, w_half

    @cached_property
    def _spline(self) -> CubicSpline:
        t_half, w_half = self._table
        # Zero slope at the origin keeps the even extension smooth
        return CubicSpline(t_half, w_half, bc_type=((1, 0.0), "not-a-knot"))

    @cached_property
    def support_radius(self) -> float:
        """Radius beyond which w is treated as 0."""
        if self.kind is WeightKind.GAUSSIAN:
            return self.scale * math.sqrt(-math.log(WEIGHT_DECAY_FLOOR))
        t_half, w_half = self._table
        alive = np.nonzero(w_half >= WEIGHT_DECAY_FLOOR * w_half.max())[0]
        last = min(int(alive[-1]) + 1, t_half.size - 1)
        return float(t_half[last])

    def evaluate(self, t: ArrayLike) -> np.ndarray:
        """w(t) for any real t (even extension)."""
        r = np.abs(np.asarray(t, dtype=float))
        if self.kind is WeightKind.GAUSSIAN:
            return np.exp(-((r / self.scale) ** 2))
        t_half, w_half = self._table
        values = np.clip(self._spline(np.minimum(r, t_half[-1])), 0.0, None)
        values = np.where(r > t_half[-1], 0.0, values)
        return np.where(values < WEIGHT_DECAY_FLOOR * w_half.max(), 0.0, values)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"kind": self.kind.value, "dimension": self.dimension}
        if self.kind is WeightKind.GAUSSIAN:
            data["scale"] = self.scale
        else:
            data["samples"] = len(self.samples)
        return data


def load_weight_table(path: Path, dimension: int = 1) -> WeightSpec:
    """Read a two-column CSV ``t, w(t)`` (header row optional)."""
    t_values: list[float] = []
    w_values: list[float] = []
    try:
        with open(path, encoding="utf-8", newline="") as f:
            for line_no, row in enumerate(csv.reader(f), start=1):
                cells = [c.strip() for c in row if c.strip()]
                if not cells or cells[0].startswith("#"):
                    continue
                if len(cells) != 2:
                    raise WeightSpecError(
                        f"{path}:{line_no}: expected two columns, got {len(cells)}"
                    )
                try:
                    t_val, w_val = float(cells[0]), float(cells[1])
                except ValueError as e:
                    if not t_values and line_no == 1:
                        continue  # header
                    raise WeightSpecError(f"{path}:{line_no}: {e}") from e
                t_values.append(t_val)
                w_values.append(w_val)
    except OSError as e:
        raise WeightSpecError(f"Cannot read weight table {path}: {e}") from e

    logger.debug(f"Loaded {len(t_values)} weight samples from {path}")
    return WeightSpec.tabulated(t_values, w_values, dimension=dimension)


def sphere_moment(m: int, alpha: tuple[int, ...] | list[int]) -> float:
    """Z_{m,alpha}: the integral of x^alpha over the unit sphere S^{m-1}.

    Zero when any exponent is odd, otherwise
    2 prod Gamma((alpha_i + 1)/2) / Gamma((m + |alpha|)/2).
    """
    if m < 1:
        raise WeightSpecError(f"m must be at least 1, got {m}")
    exponents = list(alpha)
    if len(exponents) > m:
        raise WeightSpecError(f"multi-index {tuple(alpha)} has more than {m} entries")
    if any(a < 0 for a in exponents):
        raise WeightSpecError(f"multi-index {tuple(alpha)} has negative entries")
    exponents += [0] * (m - len(exponents))
    if any(a % 2 for a in exponents):
        return 0.0
    order = sum(exponents)
    log_value = sum(special.gammaln((a + 1) / 2) for a in exponents) - special.gammaln(
        (m + order) / 2
    )
    return float(2.0 * math.exp(log_value))


def _radial_moment(weight: WeightSpec, power: int) -> float:
    """Integral of r^power w(r) over (0, infinity)."""
    value, _ = integrate.quad(
        lambda r: r**power * float(weight.evaluate(r)),
        0.0,
        weight.support_radius,
        limit=QUAD_LIMIT,
        epsabs=0.0,
        epsrel=1e-12,
    )
    return float(value)


def direct_moments(weight: WeightSpec, m: int) -> tuple[float, float, float]:
    """(s_m, d_m, h_m) from radial quadrature of polynomial moments of w(|x|).

    s_m = int w, d_m = int x_1^2 w and h_m = int x_1^4 w / 3 (which equals
    int x_1^2 x_2^2 w when m >= 2).
    """
    s_m = sphere_moment(m, ()) * _radial_moment(weight, m - 1)
    d_m = sphere_moment(m, (2,)) * _radial_moment(weight, m + 1)
    h_m = sphere_moment(m, (4,)) * _radial_moment(weight, m + 3) / 3.0
    return s_m, d_m, h_m


class RadialProfile(ABC):
    """The function f with V(xi) = f(|xi|^2 / 2), plus derivatives to order 4.

    Instances are immutable after construction and safe to share between
    threads; lazily built caches are deterministic.
    """

    _noise_floor = 0.0  # relative accuracy of the profile evaluation

    def __init__(self, weight: WeightSpec, m: int):
        if m < 1:
            raise WeightSpecError(f"m must be at least 1, got {m}")
        self.weight = weight.with_dimension(m)
        self.m = m

    @abstractmethod
    def shifted(self, n: int, s: ArrayLike) -> np.ndarray:
        """Profile of w(|x|) on R^n evaluated at s."""

    @abstractmethod
    def shifted_increment(self, n: int, s: ArrayLike) -> np.ndarray:
        """shifted(n, s) - shifted(n, 0) without cancellation."""

    @abstractmethod
    def marginal(self, n: int, x: ArrayLike) -> np.ndarray:
        """Marginal of w(|x|) on R^n along the first axis."""

    @staticmethod
    def _check_order(k: int) -> None:
        if not 0 <= k <= MAX_DERIVATIVE_ORDER:
            raise ValueError(
                f"derivative order must be between 0 and {MAX_DERIVATIVE_ORDER}, got {k}"
            )

    def eval(self, s: ArrayLike) -> np.ndarray:
        return self.deriv(0, s)

    def deriv(self, k: int, s: ArrayLike) -> np.ndarray:
        """f^{(k)}(s) for k = 0..4."""
        self._check_order(k)
        return (-2.0 * math.pi) ** (-k) * self.shifted(self.m + 2 * k, s)

    def deriv_increment(self, k: int, s: ArrayLike) -> np.ndarray:
        """f^{(k)}(s) - f^{(k)}(0), accurate for small s."""
        self._check_order(k)
        return (-2.0 * math.pi) ** (-k) * self.shifted_increment(self.m + 2 * k, s)

    @cached_property
    def derivatives_at_zero(self) -> tuple[float, ...]:
        """(f(0), f'(0), f''(0), f'''(0), f''''(0))."""
        return tuple(
            float(self.deriv(k, 0.0)) for k in range(MAX_DERIVATIVE_ORDER + 1)
        )

    @property
    def s_m(self) -> float:
        return self.derivatives_at_zero[0]

    @property
    def d_m(self) -> float:
        return -self.derivatives_at_zero[1]

    @property
    def h_m(self) -> float:
        return self.derivatives_at_zero[2]

    def decay_radius(self, tol: float) -> float:
        """Radius rho beyond which every |f^{(k)}(rho^2/2)| * max(1, rho)^4 < tol.

        The tolerance is relative to max(1, f(0)). Returns RADIAL_MAX_RADIUS
        (with a warning) when the profile never falls below it.
        """
        cache = self.__dict__.setdefault("_decay_cache", {})
        if tol not in cache:
            cache[tol] = self._decay_radius(float(tol))
        return cache[tol]

    def _decay_radius(self, tol: float) -> float:
        threshold = max(tol, self._noise_floor) * max(1.0, abs(self.s_m))
        rho = np.arange(0.0, RADIAL_MAX_RADIUS + 0.25, 0.25)
        s = rho**2 / 2
        bound = np.zeros_like(rho)
        for k in range(MAX_DERIVATIVE_ORDER + 1):
            bound = np.maximum(bound, np.abs(self.deriv(k, s)))
        bound *= np.maximum(1.0, rho) ** 4
        above = np.nonzero(bound >= threshold)[0]
        if above.size == 0:
            return float(rho[1])
        last = int(above[-1])
        if last >= rho.size - 1:
            logger.warning(
                f"Profile does not decay below {threshold:.3e} within radius "
                f"{RADIAL_MAX_RADIUS}; truncating there"
            )
            return float(RADIAL_MAX_RADIUS)
        return float(rho[last + 1])

    def moments(self) -> tuple[float, float, float]:
        return moments(self)

    def to_dict(self) -> dict[str, Any]:
        s_m, d_m, h_m = self.moments()
        return {"m": self.m, "weight": self.weight.to_dict(), "s_m": s_m, "d_m": d_m, "h_m": h_m}


class GaussianProfile(RadialProfile):
    """Closed-form profile of w(t) = exp(-(t/scale)^2)."""

    def _amplitude(self, n: int) -> float:
        return math.pi ** (n / 2) * self.weight.scale**n

    def _rate(self) -> float:
        return self.weight.scale**2 / 2

    def shifted(self, n: int, s: ArrayLike) -> np.ndarray:
        return self._amplitude(n) * np.exp(-self._rate() * np.asarray(s, dtype=float))

    def shifted_increment(self, n: int, s: ArrayLike) -> np.ndarray:
        return self._amplitude(n) * np.expm1(-self._rate() * np.asarray(s, dtype=float))

    def marginal(self, n: int, x: ArrayLike) -> np.ndarray:
        scale = self.weight.scale
        x = np.asarray(x, dtype=float)
        return math.pi ** ((n - 1) / 2) * scale ** (n - 1) * np.exp(-((x / scale) ** 2))


class TabulatedProfile(RadialProfile):
    """Profile of a tabulated weight via one-dimensional cosine transforms.

    f_n(t^2/2) = 2 int_0^X cos(t x) rho_n(x) dx, where rho_n is the marginal
    in dimension n, tabulated once per n on a uniform grid and splined.
    """

    _noise_floor = TABULATED_NOISE_FLOOR

    def __init__(self, weight: WeightSpec, m: int):
        super().__init__(weight, m)
        self._marginals: dict[int, CubicSpline] = {}
        self._at_zero: dict[int, float] = {}

    def _marginal_spline(self, n: int) -> CubicSpline:
        spline = self._marginals.get(n)
        if spline is None:
            radius = self.weight.support_radius
            x = np.linspace(0.0, radius, MARGINAL_GRID_POINTS)
            values = np.array([self._marginal_point(n, xi, radius) for xi in x])
            spline = CubicSpline(x, values, bc_type=((1, 0.0), "not-a-knot"))
            self._marginals[n] = spline
            logger.debug(
                f"Tabulated marginal for n={n} on {MARGINAL_GRID_POINTS} nodes up to {radius:.3f}"
            )
        return spline

    def _marginal_point(self, n: int, x: float, radius: float) -> float:
        w = self.weight.evaluate
        if n == 1:
            return float(w(x))
        if x >= radius:
            return 0.0
        power = (n - 3) / 2
        surface = sphere_moment(n - 1, ())
        # Substituting r^2 = x^2 + u^2 leaves an algebraic endpoint weight at r = x
        value, _ = integrate.quad(
            lambda r: float(w(r)) * (r + x) ** power * r,
            x,
            radius,
            weight="alg",
            wvar=(power, 0.0),
            limit=QUAD_LIMIT,
        )
        return surface * float(value)

    def marginal(self, n: int, x: ArrayLike) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        spline = self._marginal_spline(n)
        radius = self.weight.support_radius
        return np.where(x > radius, 0.0, spline(np.minimum(x, radius)))

    def _value_at_zero(self, n: int) -> float:
        if n not in self._at_zero:
            self._at_zero[n] = sphere_moment(n, ()) * _radial_moment(self.weight, n - 1)
        return self._at_zero[n]

    def _cosine_transform(self, n: int, t: float, increment: bool) -> float:
        spline = self._marginal_spline(n)
        radius = self.weight.support_radius
        if increment:
            # cos(tx) - 1 = -2 sin^2(tx/2)
            value, _ = integrate.quad(
                lambda x: math.sin(t * x / 2) ** 2 * float(spline(x)),
                0.0,
                radius,
                limit=QUAD_LIMIT,
                epsabs=1e-15,
            )
            return -4.0 * float(value)
        if t == 0.0:
            return self._value_at_zero(n)
        value, _ = integrate.quad(
            lambda x: float(spline(x)),
            0.0,
            radius,
            weight="cos",
            wvar=t,
            limit=QUAD_LIMIT,
            epsabs=1e-15,
        )
        return 2.0 * float(value)

    def _map(self, n: int, s: ArrayLike, increment: bool) -> np.ndarray:
        s_arr = np.asarray(s, dtype=float)
        t = np.sqrt(2.0 * np.maximum(s_arr, 0.0))
        flat = [self._cosine_transform(n, float(ti), increment) for ti in t.ravel()]
        return np.array(flat).reshape(s_arr.shape)

    def shifted(self, n: int, s: ArrayLike) -> np.ndarray:
        return self._map(n, s, increment=False)

    def shifted_increment(self, n: int, s: ArrayLike) -> np.ndarray:
        return self._map(n, s, increment=True)


def make_profile(w: WeightSpec, m: int | None = None) -> RadialProfile:
    """Build the radial profile of ``w`` in dimension ``m`` (default: w.dimension)."""
    dimension = w.dimension if m is None else m
    if isinstance(dimension, bool) or not isinstance(dimension, int) or dimension < 1:
        raise WeightSpecError(f"m must be a positive integer, got {dimension!r}")
    if w.kind is WeightKind.GAUSSIAN:
        return GaussianProfile(w, dimension)
    return TabulatedProfile(w, dimension)


def moments(p: RadialProfile) -> tuple[float, float, float]:
    """(s_m, d_m, h_m) = (f(0), -f'(0), f''(0)).

    Tabulated profiles are cross-checked against direct radial quadrature.
    """
    values = (p.s_m, p.d_m, p.h_m)
    if isinstance(p, TabulatedProfile):
        direct = direct_moments(p.weight, p.m)
        for name, a, b in zip(("s_m", "d_m", "h_m"), values, direct, strict=True):
            if not math.isclose(a, b, rel_tol=1e-6):
                logger.warning(f"{name} mismatch: profile {a!r} vs quadrature {b!r}")
    return values
