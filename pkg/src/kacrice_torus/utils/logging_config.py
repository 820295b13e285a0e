"""Logging setup for the kacrice CLI and for tests that drive it."""

import logging
import sys
from datetime import datetime
from pathlib import Path

PACKAGE_LOGGER = "kacrice_torus"

DETAILED_FORMAT = (
    "%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s"
)
SIMPLE_FORMAT = "%(levelname)s: %(message)s"
QUIET_LOGGERS = ("matplotlib", "numba", "urllib3")


def resolve_level(log_level: str, verbose: bool = False) -> int:
    """Numeric level for a level name; ``verbose`` always means DEBUG."""
    if verbose:
        return logging.DEBUG
    level = logging.getLevelName(log_level.upper())
    return level if isinstance(level, int) else logging.INFO


def setup_logging(
    verbose: bool = False, log_file: Path | None = None, log_level: str = "INFO"
) -> None:
    """Route package logs to stderr and, optionally, to a debug log file.

    Reports are written to stdout, so every handler installed here writes
    elsewhere. Earlier root handlers are replaced.
    """
    level = resolve_level(log_level, verbose)
    detailed = logging.Formatter(DETAILED_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")

    root = logging.getLogger()
    for handler in list(root.handlers):
        root.removeHandler(handler)

    stderr_handler = logging.StreamHandler(sys.stderr)
    stderr_handler.setFormatter(detailed if verbose else logging.Formatter(SIMPLE_FORMAT))
    stderr_handler.setLevel(level)
    root.addHandler(stderr_handler)

    if log_file is not None:
        try:
            log_file.parent.mkdir(parents=True, exist_ok=True)
            file_handler = logging.FileHandler(log_file, mode="a", encoding="utf-8")
        except OSError as e:
            logging.getLogger(PACKAGE_LOGGER).warning(f"Cannot open log file {log_file}: {e}")
        else:
            file_handler.setFormatter(detailed)
            file_handler.setLevel(logging.DEBUG)
            root.addHandler(file_handler)

    root.setLevel(logging.DEBUG)
    logging.getLogger(PACKAGE_LOGGER).setLevel(level)

    # numpy RuntimeWarnings (overflow in far lattice shells) end up in the log
    logging.captureWarnings(True)
    for name in QUIET_LOGGERS:
        logging.getLogger(name).setLevel(logging.WARNING)


def timestamped_log_file(log_dir: Path, prefix: str = "kacrice") -> Path:
    """Return a fresh log file path like ``logs/kacrice_20240101_120000.log``."""
    return log_dir / f"{prefix}_{datetime.now():%Y%m%d_%H%M%S}.log"


class LogContext:
    """Apply :func:`setup_logging` for the duration of a ``with`` block.

    On exit the handlers installed inside the block are closed and the
    previous root handlers and levels come back.
    """

    def __init__(self, verbose: bool = False, log_file: Path | None = None, log_level: str = "INFO"):
        self.settings = {"verbose": verbose, "log_file": log_file, "log_level": log_level}
        self._saved: tuple[list[logging.Handler], int, int] | None = None

    def __enter__(self) -> "LogContext":
        root = logging.getLogger()
        package = logging.getLogger(PACKAGE_LOGGER)
        self._saved = (list(root.handlers), root.level, package.level)
        setup_logging(**self.settings)
        return self

    def __exit__(self, exc_type, exc_val, exc_tb) -> None:
        root = logging.getLogger()
        for handler in list(root.handlers):
            root.removeHandler(handler)
            handler.close()
        if self._saved is not None:
            handlers, root_level, package_level = self._saved
            for handler in handlers:
                root.addHandler(handler)
            root.setLevel(root_level)
            logging.getLogger(PACKAGE_LOGGER).setLevel(package_level)
        logging.captureWarnings(False)
