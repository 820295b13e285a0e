"""Batches of simulated fields and the empirical moments of their counts."""

import logging
import math
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from ..constants import BOOTSTRAP_RESAMPLES, MIN_FIELDS
from ..covariance.radial_weight import WeightSpec
from ..exceptions import CriticalPointError
from ..formatters.report import write_csv
from ..utils.parallel import WorkerPool, memory_usage_mb
from ..utils.rng import STREAM_BOOTSTRAP, STREAM_FIELDS, default_seed, substream
from .critical_points import count_critical_points
from .field import sample_field

logger = logging.getLogger(__name__)

BOOTSTRAP_CHUNK = 100  # resamples drawn per batch


@dataclass(frozen=True, eq=False)
class EmpiricalMoments:
    """Sample moments of the critical point count over a batch of fields."""

    m: int
    epsilon: float
    seed: int
    counts: np.ndarray  # one count per field, in field-index order
    mean: float
    variance: float  # unbiased
    mean_std_error: float  # bootstrap
    variance_std_error: float  # bootstrap
    signed_counts: np.ndarray | None = None

    @property
    def n_fields(self) -> int:
        return len(self.counts)

    @property
    def histogram(self) -> dict[int, int]:
        """Number of fields per observed count."""
        frequencies = np.bincount(self.counts)
        return {int(c): int(f) for c, f in enumerate(frequencies) if f}

    @property
    def normalized_variance(self) -> float:
        """Var(N) / E[N]^2."""
        return self.variance / self.mean**2 if self.mean else math.nan

    @property
    def scaled_mean(self) -> float:
        """eps^m E[N], which tends to C_m(w)."""
        return self.mean * self.epsilon**self.m

    @property
    def scaled_variance(self) -> float:
        """eps^m Var(N), which tends to C'_m(w)."""
        return self.variance * self.epsilon**self.m

    def to_dict(self) -> dict[str, Any]:
        return {
            "m": self.m,
            "epsilon": self.epsilon,
            "seed": self.seed,
            "n_fields": self.n_fields,
            "mean": self.mean,
            "mean_std_error": self.mean_std_error,
            "variance": self.variance,
            "variance_std_error": self.variance_std_error,
            "normalized_variance": self.normalized_variance,
            "scaled_mean": self.scaled_mean,
            "scaled_variance": self.scaled_variance,
            "histogram": {str(k): v for k, v in self.histogram.items()},
        }


def bootstrap_errors(
    counts: np.ndarray, resamples: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Bootstrap standard errors of the sample mean and unbiased variance."""
    n = len(counts)
    means = np.empty(resamples)
    variances = np.empty(resamples)
    for start in range(0, resamples, BOOTSTRAP_CHUNK):
        stop = min(resamples, start + BOOTSTRAP_CHUNK)
        draws = counts[rng.integers(0, n, size=(stop - start, n))]
        means[start:stop] = draws.mean(axis=1)
        variances[start:stop] = draws.var(axis=1, ddof=1)
    return float(means.std(ddof=1)), float(variances.std(ddof=1))


def simulate_counts(
    w: WeightSpec,
    m: int,
    epsilon: float,
    n_fields: int,
    seed: int,
    max_workers: int | None = None,
    with_index: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Critical point counts of fields 0..n_fields-1 drawn from (seed, field index).

    With ``with_index`` the signed counts sum (-1)^index are returned as well.
    """

    def count_one(index: int, _: Any) -> tuple[int, int]:
        s = sample_field(
            w, m, epsilon, substream(seed, STREAM_FIELDS, index), field_index=index, seed=seed
        )
        try:
            report = count_critical_points(s)
        except CriticalPointError as e:
            e.field_index, e.seed = index, seed
            raise
        return report.count, report.signed_count

    pool = WorkerPool(max_workers)
    start = time.perf_counter()
    results = pool.map(count_one, range(n_fields))
    logger.debug(
        f"Counted {n_fields} fields in {time.perf_counter() - start:.2f}s "
        f"({pool.max_workers} workers, {memory_usage_mb():.0f} MB)"
    )
    counts = np.array([r[0] for r in results], dtype=np.int64)
    signed = np.array([r[1] for r in results], dtype=np.int64) if with_index else None
    return counts, signed


def empirical_moments(
    w: WeightSpec,
    m: int,
    epsilon: float,
    n_fields: int,
    rng: int | None = None,
    *,
    max_workers: int | None = None,
    bootstrap_resamples: int = BOOTSTRAP_RESAMPLES,
) -> EmpiricalMoments:
    """Mean and variance of the count over ``n_fields`` independent fields.

    Field ``i`` is drawn from the substream (seed, fields, i), so the result
    does not depend on ``max_workers``. A counting failure aborts the batch
    and the raised error names the failing field and seed.
    """
    if n_fields < MIN_FIELDS:
        raise ValueError(f"n_fields must be at least {MIN_FIELDS}, got {n_fields}")
    seed = default_seed() if rng is None else int(rng)

    counts, signed = simulate_counts(
        w, m, epsilon, n_fields, seed, max_workers=max_workers, with_index=m == 2
    )
    mean_se, var_se = bootstrap_errors(
        counts.astype(float), bootstrap_resamples, substream(seed, STREAM_BOOTSTRAP)
    )
    result = EmpiricalMoments(
        m=m,
        epsilon=float(epsilon),
        seed=seed,
        counts=counts,
        mean=float(counts.mean()),
        variance=float(counts.var(ddof=1)),
        mean_std_error=mean_se,
        variance_std_error=var_se,
        signed_counts=signed,
    )
    logger.info(
        f"m={m} eps={epsilon}: mean {result.mean:.4f} +/- {mean_se:.2g}, "
        f"variance {result.variance:.4f} +/- {var_se:.2g} over {n_fields} fields"
    )
    return result


def write_counts_csv(moments: EmpiricalMoments, path: Path) -> Path:
    """One row (field_index, count) per field."""
    rows = ((index, int(count)) for index, count in enumerate(moments.counts))
    return write_csv(path, ("field_index", "count"), rows)
