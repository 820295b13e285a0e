"""Pytest configuration and fixtures."""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from kacrice_torus.covariance.radial_weight import WeightSpec, make_profile
from kacrice_torus.utils.config import Config


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    temp_path = Path(tempfile.mkdtemp())
    yield temp_path
    shutil.rmtree(temp_path)


@pytest.fixture
def config():
    """Create a default config for testing."""
    return Config()


@pytest.fixture(autouse=True)
def _no_seed_override(monkeypatch):
    """Keep KACRICE_SEED from the environment out of the tests."""
    monkeypatch.delenv("KACRICE_SEED", raising=False)


@pytest.fixture
def gaussian_weight():
    """The default Gaussian weight in dimension one."""
    return WeightSpec.gaussian()


@pytest.fixture
def gaussian_profile():
    """Factory for the radial profile of the default Gaussian weight in dimension m."""

    def build(m: int = 1):
        return make_profile(WeightSpec.gaussian(dimension=m))

    return build


@pytest.fixture
def rng():
    """A fixed generator for Monte Carlo tests."""
    return np.random.default_rng(20240611)


@pytest.fixture
def weight_table(temp_dir):
    """A tabulated copy of the default Gaussian weight written as CSV."""
    t = np.linspace(0.0, 8.0, 801)
    w = WeightSpec.gaussian().evaluate(t)
    path = temp_dir / "weight.csv"
    with open(path, "w", encoding="utf-8") as f:
        f.write("t,w\n")
        for a, b in zip(t, w, strict=True):
            f.write(f"{float(a)!r},{float(b)!r}\n")
    return path
