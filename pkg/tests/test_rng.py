"""Tests for reproducible random streams."""

import numpy as np
import pytest

from kacrice_torus.constants import DEFAULT_SEED
from kacrice_torus.utils.rng import (
    MAX_SEED,
    STREAM_ENSEMBLE,
    STREAM_FIELDS,
    as_generator,
    default_seed,
    spawn,
    substream,
)


class TestSubstream:
    """Test counter-based substreams."""

    def test_same_key_same_stream(self):
        """A (seed, key) pair always gives the same draws."""
        a = substream(7, STREAM_FIELDS, 12).standard_normal(5)
        b = substream(7, STREAM_FIELDS, 12).standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_different_keys_differ(self):
        """Different field indices give different draws."""
        a = substream(7, STREAM_FIELDS, 0).standard_normal(5)
        b = substream(7, STREAM_FIELDS, 1).standard_normal(5)
        assert not np.array_equal(a, b)

    def test_full_seed_range(self):
        """Seeds cover the 64-bit unsigned range."""
        substream(0)
        substream(MAX_SEED)
        with pytest.raises(ValueError, match="64-bit"):
            substream(MAX_SEED + 1)


class TestDefaultSeed:
    """Test the environment default."""

    def test_fallback(self):
        """Without KACRICE_SEED the built-in seed is used."""
        assert default_seed() == DEFAULT_SEED

    def test_environment(self, monkeypatch):
        """KACRICE_SEED accepts decimal and hex."""
        monkeypatch.setenv("KACRICE_SEED", "123")
        assert default_seed() == 123
        monkeypatch.setenv("KACRICE_SEED", "0xff")
        assert default_seed() == 255

    @pytest.mark.parametrize("raw", ["abc", "-1"])
    def test_invalid_environment(self, monkeypatch, raw):
        """Malformed or negative seeds are rejected."""
        monkeypatch.setenv("KACRICE_SEED", raw)
        with pytest.raises(ValueError, match="KACRICE_SEED"):
            default_seed()


class TestGenerators:
    """Test generator helpers."""

    def test_generator_passthrough(self, rng):
        """A generator is used as is."""
        assert as_generator(rng) is rng

    def test_integer_seed(self):
        """An integer seed maps to its ensemble substream."""
        a = as_generator(5).standard_normal()
        b = substream(5, STREAM_ENSEMBLE).standard_normal()
        assert a == b

    def test_spawn_integer(self):
        """Spawned integer streams are reproducible and distinct."""
        first = [g.standard_normal() for g in spawn(3, 3)]
        second = [g.standard_normal() for g in spawn(3, 3)]
        assert first == second
        assert len(set(first)) == 3

    def test_spawn_generator(self, rng):
        """Generators spawn children."""
        assert len(spawn(rng, 4)) == 4
