"""Covariance machinery: radial profiles, kernels and conditional Hessians."""

from .conditional_hessian import (
    CovTensor,
    Provenance,
    rescale_samples,
    upsilon,
    xi_bar,
    xi_infinity,
    xi_limit_origin,
    xi_rescale,
)
from .expansions import CATALOGUE, appendix_b_expansion
from .frames import adapted_frame
from .kernel import (
    ScriptH,
    SigmaTilde,
    det_script_h,
    hessian_gap,
    inv_script_h,
    periodize,
    script_h,
    script_h_infinity,
    sigma_rescaled_limit,
    sigma_tilde,
    tech_margin,
    v_eval,
    v_tensor,
)
from .radial_weight import (
    GaussianProfile,
    RadialProfile,
    TabulatedProfile,
    WeightKind,
    WeightSpec,
    direct_moments,
    load_weight_table,
    make_profile,
    moments,
    sphere_moment,
)

__all__ = [
    "CATALOGUE",
    "CovTensor",
    "GaussianProfile",
    "Provenance",
    "RadialProfile",
    "ScriptH",
    "SigmaTilde",
    "TabulatedProfile",
    "WeightKind",
    "WeightSpec",
    "adapted_frame",
    "appendix_b_expansion",
    "det_script_h",
    "direct_moments",
    "hessian_gap",
    "inv_script_h",
    "load_weight_table",
    "make_profile",
    "moments",
    "periodize",
    "rescale_samples",
    "script_h",
    "script_h_infinity",
    "sigma_rescaled_limit",
    "sigma_tilde",
    "sphere_moment",
    "tech_margin",
    "upsilon",
    "v_eval",
    "v_tensor",
    "xi_bar",
    "xi_infinity",
    "xi_limit_origin",
    "xi_rescale",
]
