"""Configuration management for kacrice-torus."""

import json
import re
from pathlib import Path
from typing import Any

import yaml

from ..constants import (
    BOOTSTRAP_RESAMPLES,
    DEFAULT_GAUSSIAN_SCALE,
    DEFAULT_MC_SAMPLES,
    RADIAL_TAIL_TOLERANCE,
)
from ..exceptions import KacRiceError
from .rng import MAX_SEED, default_seed

CONFIG_FILENAME = "kacrice.yaml"
YAML_SUFFIXES = (".yaml", ".yml")

_KEY_VALUE_LINE = re.compile(r"^\s*[A-Za-z_]\w*\s*=")


class ConfigValidationError(KacRiceError):
    """Exception raised for configuration validation errors."""

    exit_code = 7
    code = "config"


def _content_lines(text: str) -> list[str]:
    lines = (line.split("#", 1)[0].strip() for line in text.splitlines())
    return [line for line in lines if line]


def is_key_value(text: str) -> bool:
    """True when every non-comment line of ``text`` reads ``key=value``."""
    lines = _content_lines(text)
    return bool(lines) and all(_KEY_VALUE_LINE.match(line) for line in lines)


def parse_key_value(text: str) -> dict[str, Any]:
    """Parse flat ``key=value`` lines; values are read as YAML scalars.

    ``#`` starts a comment, the first ``=`` splits key from value and an
    empty value means unset. Later lines override earlier ones.
    """
    data: dict[str, Any] = {}
    for line in _content_lines(text):
        key, _, value = line.partition("=")
        value = value.strip()
        data[key.strip()] = yaml.safe_load(value) if value else None
    return data


class Config:
    """Run configuration shared by all commands."""

    # Configuration constraints
    CONSTRAINTS = {
        "m": {"min": 1, "max": 4},
        "weight_scale": {"min": 1e-3, "max": 1e3},
        "epsilon": {"min": 1e-4, "max": 10.0},
        "samples": {"min": 2, "max": 100_000_000},
        "fields": {"min": 100, "max": 10_000_000},
        "seed": {"min": 0, "max": MAX_SEED},
        "threads": {"min": 1, "max": 1024},
        "radial_tail_tolerance": {"min": 1e-16, "max": 1e-3},
        "bootstrap_resamples": {"min": 10, "max": 1_000_000},
    }

    VALID_WEIGHTS = ["gaussian", "tabulated"]
    VALID_OUTPUT_FORMATS = ["json", "table"]
    VALID_LOG_LEVELS = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
    BOOLEAN_KEYS = ["verbose"]
    PATH_KEYS = ["weight_table"]

    def __init__(self):
        # Problem definition
        self.m = 1  # torus dimension
        self.weight = "gaussian"  # gaussian, tabulated
        self.weight_scale = DEFAULT_GAUSSIAN_SCALE
        self.weight_table: Path | None = None  # two-column CSV for tabulated weights
        self.epsilon = 0.05

        # Monte Carlo and simulation sizes
        self.samples = DEFAULT_MC_SAMPLES
        self.fields = 2000
        self.bootstrap_resamples = BOOTSTRAP_RESAMPLES
        self.radial_tail_tolerance = RADIAL_TAIL_TOLERANCE

        # Reproducibility and performance
        self.seed = default_seed()
        self.threads: int | None = None  # None means all available CPUs

        # Output settings
        self.output_format = "json"  # json, table
        self.verbose = False
        self.log_level = "INFO"

    @classmethod
    def load(
        cls, config_path: Path | None = None, search_path: Path | None = None
    ) -> "Config":
        """Load configuration from file or create default.

        An explicit ``config_path`` must exist. Otherwise ``kacrice.yaml`` is
        looked up in ``search_path`` and then in its parent directories.
        """
        config = cls()

        if config_path is not None:
            if not config_path.exists():
                raise ConfigValidationError(f"Config file not found: {config_path}")
            config._load_from_file(config_path)
        elif search_path:
            directory = search_path
            while True:
                config_file = directory / CONFIG_FILENAME
                if config_file.exists():
                    config._load_from_file(config_file)
                    break
                if directory == directory.parent:
                    break
                directory = directory.parent

        return config

    def _load_from_file(self, config_path: Path) -> None:
        """Load configuration from a YAML mapping or a flat key=value file."""
        try:
            text = config_path.read_text(encoding="utf-8")
            data = parse_key_value(text) if is_key_value(text) else yaml.safe_load(text)
        except (OSError, yaml.YAMLError) as e:
            raise ConfigValidationError(f"Cannot read {config_path}: {e}") from e

        if data is None:
            return
        if not isinstance(data, dict):
            raise ConfigValidationError(
                f"{config_path} must contain a mapping, got {type(data).__name__}"
            )
        self.update(data)

    def update(self, values: dict[str, Any]) -> None:
        """Validate and apply ``values``; ``None`` entries are ignored."""
        values = {k: v for k, v in values.items() if v is not None}
        for key, value in values.items():
            # YAML 1.1 reads exponents without a dot (1e-10) as strings
            if key in self.CONSTRAINTS and isinstance(value, str):
                try:
                    values[key] = float(value)
                except ValueError:
                    pass
        unknown = sorted(k for k in values if k not in self.to_dict())
        if unknown:
            raise ConfigValidationError(f"Unknown configuration keys: {unknown}")

        self._validate_config(values)

        for key, value in values.items():
            if key in self.PATH_KEYS:
                value = Path(value)
            elif key == "log_level":
                value = value.upper()
            setattr(self, key, value)

    def _validate_config(self, config_dict: dict[str, Any]) -> None:
        """Validate configuration values.

        Args:
            config_dict: Configuration dictionary to validate

        Raises:
            ConfigValidationError: If validation fails
        """
        for key, value in config_dict.items():
            # Check numeric constraints
            if key in self.CONSTRAINTS:
                if isinstance(value, bool) or not isinstance(value, int | float):
                    raise ConfigValidationError(
                        f"{key} must be a number, got {type(value).__name__}"
                    )
                if key in ("m", "samples", "fields", "seed", "threads") and not (
                    isinstance(value, int)
                ):
                    raise ConfigValidationError(
                        f"{key} must be an integer, got {value!r}"
                    )
                constraints = self.CONSTRAINTS[key]
                if value < constraints["min"] or value > constraints["max"]:
                    raise ConfigValidationError(
                        f"{key} must be between {constraints['min']} and {constraints['max']}, got {value}"
                    )

            # Check string enums
            elif key == "weight" and value not in self.VALID_WEIGHTS:
                raise ConfigValidationError(
                    f"weight must be one of {self.VALID_WEIGHTS}, got '{value}'"
                )
            elif key == "output_format" and value not in self.VALID_OUTPUT_FORMATS:
                raise ConfigValidationError(
                    f"output_format must be one of {self.VALID_OUTPUT_FORMATS}, got '{value}'"
                )
            elif key == "log_level" and str(value).upper() not in self.VALID_LOG_LEVELS:
                raise ConfigValidationError(
                    f"log_level must be one of {self.VALID_LOG_LEVELS}, got '{value}'"
                )

            # Check boolean values
            elif key in self.BOOLEAN_KEYS:
                if not isinstance(value, bool):
                    raise ConfigValidationError(
                        f"{key} must be a boolean value, got {type(value).__name__}"
                    )

            # Check path values
            elif key in self.PATH_KEYS and not isinstance(value, str | Path):
                raise ConfigValidationError(
                    f"{key} must be a string or Path, got {type(value).__name__}"
                )

    def to_dict(self) -> dict[str, Any]:
        """Plain-data view used for YAML files and JSON reports."""
        return {
            "m": self.m,
            "weight": self.weight,
            "weight_scale": self.weight_scale,
            "weight_table": str(self.weight_table) if self.weight_table else None,
            "epsilon": self.epsilon,
            "samples": self.samples,
            "fields": self.fields,
            "bootstrap_resamples": self.bootstrap_resamples,
            "radial_tail_tolerance": self.radial_tail_tolerance,
            "seed": self.seed,
            "threads": self.threads,
            "output_format": self.output_format,
            "verbose": self.verbose,
            "log_level": self.log_level,
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Config):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def save(self, config_path: Path) -> None:
        """Save as YAML for .yaml/.yml paths, otherwise as key=value lines."""
        data = self.to_dict()
        try:
            with open(config_path, "w", encoding="utf-8") as f:
                if config_path.suffix.lower() in YAML_SUFFIXES:
                    yaml.safe_dump(data, f, default_flow_style=False, sort_keys=True)
                else:
                    for key in sorted(data):
                        f.write(f"{key}={json.dumps(data[key])}\n")
        except OSError as e:
            raise ConfigValidationError(f"Cannot write {config_path}: {e}") from e

    def create_default_config(self, config_path: Path) -> None:
        """Create a default configuration file with comments."""
        config_content = f"""# kacrice-torus configuration file
# Command-line flags override the values below.

# Torus dimension (constants: 1-4, simulate: 1-2)
m: 1

# Weight w: gaussian (w(t) = exp(-(t/scale)^2)) or tabulated (two-column CSV)
weight: gaussian
weight_scale: 1.0
weight_table: null  # path to the CSV table when weight is tabulated
# Tabulated weights are treated as 0 below 1e-16 * max(w)

# Scale parameter of the random field (simulation policy: epsilon <= 0.2)
epsilon: 0.05

# Monte Carlo draws for |det| expectations
samples: {DEFAULT_MC_SAMPLES}

# Number of simulated fields
fields: 2000
bootstrap_resamples: {BOOTSTRAP_RESAMPLES}

# |delta0| below this ends the radial integral of the variance constant
radial_tail_tolerance: {RADIAL_TAIL_TOLERANCE:.1e}

# 64-bit unsigned seed (the KACRICE_SEED environment variable sets the default)
seed: {self.seed}

# Worker threads (null means all available CPUs)
threads: null

# Output settings
output_format: json  # json, table
verbose: false
log_level: INFO
"""

        try:
            with open(config_path, "w", encoding="utf-8") as f:
                f.write(config_content)
        except OSError as e:
            raise ConfigValidationError(f"Cannot write {config_path}: {e}") from e
