"""Exception hierarchy for kacrice-torus.

Each exception carries the exit code the CLI uses when it aborts a run.
"""

from typing import Any


class KacRiceError(Exception):
    """Base class for all errors raised by kacrice-torus."""

    exit_code = 1
    code = "error"

    def to_dict(self) -> dict[str, Any]:
        """Return a machine-readable description of the error."""
        return {
            "code": self.code,
            "exit_code": self.exit_code,
            "type": type(self).__name__,
            "message": str(self),
        }


class WeightSpecError(KacRiceError, ValueError):
    """Raised for invalid weights, tables or dimensions."""

    exit_code = 3
    code = "invalid_weight"


class EpsilonPolicyError(KacRiceError, ValueError):
    """Raised when epsilon is outside the truncation policy."""

    exit_code = 4
    code = "epsilon_policy"


class NumericalError(KacRiceError):
    """Base class for Monte Carlo, quadrature and linear algebra failures."""

    exit_code = 5
    code = "numerical"


class SingularMatrixError(NumericalError, ValueError):
    """Raised when a matrix is inverted on the diagonal eta = 0."""

    code = "singular_matrix"


class NotPositiveSemidefiniteError(NumericalError, ValueError):
    """Raised when a covariance has an eigenvalue below the PSD tolerance."""

    code = "not_psd"

    def __init__(self, eigenvalue: float, message: str | None = None):
        self.eigenvalue = eigenvalue
        super().__init__(
            message
            or f"Covariance is not positive semidefinite: eigenvalue {eigenvalue!r}"
        )

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["eigenvalue"] = self.eigenvalue
        return data


class InvalidEnsembleError(NumericalError, ValueError):
    """Raised for ensemble parameters outside the admissible cone."""

    code = "invalid_ensemble"


class ExtrapolationError(NumericalError):
    """Raised when the origin limit of a rescaled tensor does not stabilise."""

    code = "extrapolation"

    def __init__(self, entry: tuple[int, int, int, int], residual: float):
        self.entry = entry
        self.residual = residual
        super().__init__(
            f"Entry {entry} did not stabilise under extrapolation "
            f"(residual {residual:.3e})"
        )


class QuadratureError(NumericalError):
    """Raised when a radial integral fails to converge."""

    code = "quadrature"


class CriticalPointError(KacRiceError):
    """Raised when critical points of a field cannot be counted reliably."""

    exit_code = 6
    code = "counting"

    def __init__(
        self,
        message: str,
        field_index: int | None = None,
        seed: int | None = None,
    ):
        self.field_index = field_index
        self.seed = seed
        super().__init__(message)

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["field_index"] = self.field_index
        data["seed"] = self.seed
        return data


class NonMorseFieldError(CriticalPointError):
    """Raised for degenerate critical points or counts unstable under refinement."""

    code = "non_morse"


class UnknownExpansionEntryError(KacRiceError, KeyError):
    """Raised for an expansion entry id that is not in the catalogue."""

    code = "unknown_entry"

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


class ValidationFailedError(KacRiceError):
    """Raised by the validation suite when at least one check fails."""

    exit_code = 8
    code = "validation_failed"

    def __init__(self, failed: list[str], results: Any = None):
        self.failed = failed
        self.results = results  # per-check outcomes, reported alongside the error
        super().__init__(f"{len(failed)} validation check(s) failed: {', '.join(failed)}")

    def to_dict(self) -> dict[str, Any]:
        data = super().to_dict()
        data["failed"] = self.failed
        return data
