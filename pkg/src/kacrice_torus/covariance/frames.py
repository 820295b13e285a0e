"""Adapted orthonormal frames and tensor rotation."""

import numpy as np


def unit_vector(eta: np.ndarray) -> tuple[np.ndarray, float]:
    """Split ``eta`` into its direction and its norm (direction e_1 for eta = 0)."""
    eta = np.asarray(eta, dtype=float)
    norm = float(np.linalg.norm(eta))
    if norm == 0.0:
        direction = np.zeros_like(eta)
        direction[0] = 1.0
        return direction, 0.0
    return eta / norm, norm


def adapted_frame(eta: np.ndarray) -> np.ndarray:
    """Householder reflection Q with Q e_1 = eta/|eta|.

    Q is symmetric and orthogonal, so it also maps eta/|eta| back to e_1.
    """
    direction, _ = unit_vector(eta)
    m = direction.size
    v = -direction.copy()
    v[0] += 1.0
    vv = float(v @ v)
    if vv < 1e-30:
        return np.eye(m)
    return np.eye(m) - 2.0 * np.outer(v, v) / vv


def rotate_tensor(tensor: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Apply ``q`` to every index: T'[a,b,...] = q[a,i] q[b,j] ... T[i,j,...]."""
    result = np.asarray(tensor, dtype=float)
    for axis in range(result.ndim):
        result = np.moveaxis(np.tensordot(q, result, axes=([1], [axis])), 0, axis)
    return result
