"""Utility modules for kacrice-torus."""

from .config import Config, ConfigValidationError
from .parallel import WorkerPool
from .rng import substream

__all__ = ["Config", "ConfigValidationError", "WorkerPool", "substream"]
