"""Reproducible random streams.

Every randomized computation draws from a counter-based Philox generator keyed
by ``(seed, stream ids...)``. Streams for different keys are independent, so
results do not depend on how work is split across threads.
"""

import os

import numpy as np

from ..constants import DEFAULT_SEED, SEED_ENV_VAR

# Stream ids reserved for the different consumers of a run seed.
STREAM_FIELDS = 0  # one substream per simulated field
STREAM_ENSEMBLE = 1  # Monte Carlo |det| expectations
STREAM_BOOTSTRAP = 2  # bootstrap resampling of counts
STREAM_CRN = 3  # common random numbers shared across radial nodes

MAX_SEED = 2**64 - 1


def substream(seed: int, *key: int) -> np.random.Generator:
    """Return the generator for ``seed`` and the stream path ``key``.

    >>> substream(7, 0, 12).standard_normal() == substream(7, 0, 12).standard_normal()
    True
    """
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
    sequence = np.random.SeedSequence(entropy=seed, spawn_key=tuple(key))
    return np.random.Generator(np.random.Philox(sequence))


def default_seed() -> int:
    """Seed taken from the ``KACRICE_SEED`` environment variable, if set."""
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or not raw.strip():
        return DEFAULT_SEED
    try:
        seed = int(raw.strip(), 0)
    except ValueError as e:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got '{raw}'") from e
    if not 0 <= seed <= MAX_SEED:
        raise ValueError(f"{SEED_ENV_VAR} must be a 64-bit unsigned integer")
    return seed


def as_generator(
    rng: np.random.Generator | int | None, stream: int = STREAM_ENSEMBLE
) -> np.random.Generator:
    """Accept a generator, an integer seed or None (environment default).

    Integer seeds and None map to the substream ``stream`` of that seed.
    """
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None:
        return substream(default_seed(), stream)
    return substream(int(rng), stream)


def spawn(rng: np.random.Generator | int | None, count: int) -> list[np.random.Generator]:
    """``count`` independent generators derived from ``rng``."""
    if isinstance(rng, np.random.Generator):
        return rng.spawn(count)
    seed = default_seed() if rng is None else int(rng)
    return [substream(seed, STREAM_ENSEMBLE, index) for index in range(count)]
