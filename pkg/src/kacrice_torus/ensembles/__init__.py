"""Gaussian ensembles of symmetric matrices."""

from .sampling import (
    MonteCarloEstimate,
    abs_det_values,
    bivariate_abs_moment,
    covariance_sqrt,
    expect_abs_det,
    holder_probe,
    sample_axial,
    sample_iso,
    sample_pair,
)
from .sym_ensembles import (
    AxialSpec,
    IsoSpec,
    PairGaussianSpec,
    ValidationResult,
    axial_covariance,
    det_qc,
    iso_covariance,
    iso_density,
    validate_axial,
)

__all__ = [
    "AxialSpec",
    "IsoSpec",
    "MonteCarloEstimate",
    "PairGaussianSpec",
    "ValidationResult",
    "abs_det_values",
    "axial_covariance",
    "bivariate_abs_moment",
    "covariance_sqrt",
    "det_qc",
    "expect_abs_det",
    "holder_probe",
    "iso_covariance",
    "iso_density",
    "sample_axial",
    "sample_iso",
    "sample_pair",
    "validate_axial",
]
