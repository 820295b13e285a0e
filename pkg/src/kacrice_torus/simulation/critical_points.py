"""Counting critical points of a sampled field on T^1 and T^2."""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from ..constants import (
    DEDUP_FRACTION,
    GRADIENT_TOLERANCE,
    MORSE_TOLERANCE,
    NEWTON_MAX_ITERATIONS,
    NEWTON_SEEDS_PER_MODE,
    ROOT_TOLERANCE,
    SCAN_POINTS_PER_MODE,
)
from ..exceptions import CriticalPointError, NonMorseFieldError
from .field import FieldSample, eval_field

logger = logging.getLogger(__name__)

NEWTON_CHUNK = 8192  # seeds iterated together
MAX_HALVINGS = 8  # step halvings of the damped Newton update


@dataclass(frozen=True, eq=False)
class CriticalPointReport:
    """Critical points of one field with the diagnostics of the search."""

    count: int
    locations: np.ndarray  # (count, m), coordinates in [0, 1)
    indices: np.ndarray  # Morse index of each location
    grid_size: int  # scan points (m=1) or seeds per axis (m=2)
    refined_count: int  # count on the refined grid
    dedup_radius: float | None = None  # m=2 only
    newton_iterations: int = 0  # m=2 only
    field_index: int | None = None
    seed: int | None = field(default=None)

    @property
    def signed_count(self) -> int:
        """sum of (-1)^index, the Euler characteristic of the torus for Morse fields."""
        return int(np.sum((-1) ** self.indices))

    def to_dict(self) -> dict[str, Any]:
        return {
            "count": self.count,
            "locations": self.locations.tolist(),
            "indices": self.indices.tolist(),
            "signed_count": self.signed_count,
            "grid_size": self.grid_size,
            "refined_count": self.refined_count,
            "dedup_radius": self.dedup_radius,
            "newton_iterations": self.newton_iterations,
            "field_index": self.field_index,
            "seed": self.seed,
        }


def _fail(s: FieldSample, message: str, non_morse: bool = True) -> CriticalPointError:
    error = NonMorseFieldError if non_morse else CriticalPointError
    return error(message, field_index=s.field_index, seed=s.seed)


def _derivative_1d(s: FieldSample, x: float) -> float:
    return float(eval_field(s, np.array([x]), 1)[0])


def _scan_1d(s: FieldSample, n: int) -> np.ndarray:
    """Zeros of u' on [0, 1) from a sign scan on n uniform points."""
    nodes = np.arange(n) / n
    g = eval_field(s, nodes[:, None], 1)[:, 0]
    roots = list(nodes[g == 0.0])

    following = np.roll(g, -1)
    for j in np.flatnonzero(g * following < 0):
        a, b = nodes[j], (j + 1) / n
        roots.append(brentq(lambda x: _derivative_1d(s, x), a, b, xtol=ROOT_TOLERANCE))
    return np.sort(np.mod(roots, 1.0))


def _newton_chunk(s: FieldSample, x: np.ndarray, tol: float) -> tuple[np.ndarray, np.ndarray, int]:
    """Damped Newton on grad u from the seeds x; returns points, residuals, iterations."""
    x = x.copy()
    g = eval_field(s, x, 1)
    active = np.ones(len(x), dtype=bool)
    iterations = 0
    for iterations in range(1, NEWTON_MAX_ITERATIONS + 1):
        active &= np.linalg.norm(g, axis=1) > tol
        if not active.any():
            break
        idx = np.flatnonzero(active)
        h = eval_field(s, x[idx], 2)
        step = -np.einsum("nij,nj->ni", np.linalg.pinv(h), g[idx])

        size = np.ones(len(idx))
        current = np.linalg.norm(g[idx], axis=1)
        trial = x[idx] + step
        g_trial = eval_field(s, trial, 1)
        worse = np.linalg.norm(g_trial, axis=1) > current
        for _ in range(MAX_HALVINGS):
            if not worse.any():
                break
            size[worse] *= 0.5
            trial[worse] = x[idx[worse]] + size[worse, None] * step[worse]
            g_trial[worse] = eval_field(s, trial[worse], 1)
            worse &= np.linalg.norm(g_trial, axis=1) > current

        x[idx] = trial
        g[idx] = g_trial
        small_step = size * np.linalg.norm(step, axis=1) < ROOT_TOLERANCE
        active[idx[small_step]] = False
    return x, np.linalg.norm(g, axis=1), iterations


def _dedup(points: np.ndarray, residuals: np.ndarray, radius: float) -> np.ndarray:
    """One point per cluster of points closer than radius on the periodic box."""
    points = np.mod(points, 1.0)
    points[points >= 1.0] = 0.0
    if len(points) <= 1:
        return points.reshape(-1, 2)
    tree = cKDTree(points, boxsize=1.0)
    pairs = tree.query_pairs(radius, output_type="ndarray")
    n = len(points)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n))
    _, labels = connected_components(graph, directed=False)
    order = np.lexsort((residuals, labels))
    _, first = np.unique(labels[order], return_index=True)
    kept = points[order[first]]
    return kept[np.lexsort(kept.T[::-1])]


def _search_2d(s: FieldSample, per_axis: int, radius: float) -> tuple[np.ndarray, int]:
    axis = np.arange(per_axis) / per_axis
    seeds = np.stack(np.meshgrid(axis, axis, indexing="ij"), axis=-1).reshape(-1, 2)
    tol = GRADIENT_TOLERANCE * s.gradient_scale()

    found, residuals, iterations = [], [], 0
    for start in range(0, len(seeds), NEWTON_CHUNK):
        x, res, its = _newton_chunk(s, seeds[start : start + NEWTON_CHUNK], tol)
        converged = res <= tol
        found.append(x[converged])
        residuals.append(res[converged])
        iterations = max(iterations, its)
    points = np.concatenate(found) if found else np.empty((0, 2))
    return _dedup(points, np.concatenate(residuals), radius), iterations


def _morse_indices(s: FieldSample, locations: np.ndarray) -> np.ndarray:
    if len(locations) == 0:
        return np.zeros(0, dtype=int)
    hessians = eval_field(s, locations, 2)
    eigenvalues = np.linalg.eigvalsh(hessians)
    scale = s.hessian_scale()
    degenerate = np.abs(eigenvalues).min(axis=1) < MORSE_TOLERANCE * scale
    if degenerate.any():
        where = locations[np.argmax(degenerate)]
        raise _fail(s, f"degenerate critical point at {where.tolist()}")
    return np.sum(eigenvalues < 0, axis=1).astype(int)


def count_critical_points(s: FieldSample) -> CriticalPointReport:
    """Locate every critical point of ``s`` and validate the count on a refined grid.

    Degenerate critical points and counts that change under refinement raise
    NonMorseFieldError.
    """
    if s.hessian_scale() == 0.0:
        raise _fail(s, "field is constant; every point is critical")
    modes = max(s.k_trunc, 1)

    if s.m == 1:
        grid = SCAN_POINTS_PER_MODE * modes
        locations = _scan_1d(s, grid)
        refined = _scan_1d(s, 2 * grid)
        radius, iterations = None, 0
        locations = locations[:, None]
    else:
        grid = NEWTON_SEEDS_PER_MODE * modes
        radius = DEDUP_FRACTION * s.epsilon
        locations, iterations = _search_2d(s, grid, radius)
        refined, _ = _search_2d(s, 2 * grid, radius)

    if len(refined) != len(locations):
        raise _fail(
            s,
            f"critical point count changed under grid refinement "
            f"({len(locations)} -> {len(refined)})",
        )

    gradients = eval_field(s, locations, 1) if len(locations) else np.zeros((0, s.m))
    residual = float(np.max(np.linalg.norm(gradients, axis=1), initial=0.0))
    if residual > GRADIENT_TOLERANCE * s.gradient_scale():
        raise _fail(s, f"gradient residual {residual:.3e} above tolerance", non_morse=False)

    indices = _morse_indices(s, locations)
    logger.debug(
        f"field {s.field_index}: {len(locations)} critical points "
        f"(grid {grid}, refined {len(refined)})"
    )
    return CriticalPointReport(
        count=len(locations),
        locations=locations,
        indices=indices,
        grid_size=grid,
        refined_count=len(refined),
        dedup_radius=radius,
        newton_iterations=iterations,
        field_index=s.field_index,
        seed=s.seed,
    )


def pair_count(count: int) -> int:
    """Critical points of U(theta, phi) = u(theta) u(phi) off the diagonal, N^2 - N."""
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    return count * count - count


def expected_pair_count(mean: float, variance: float) -> float:
    """E[N^2 - N] from the mean and variance of N."""
    if not math.isfinite(mean) or not math.isfinite(variance):
        raise ValueError("mean and variance must be finite")
    return variance + mean * mean - mean
