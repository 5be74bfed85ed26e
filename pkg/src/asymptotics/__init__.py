"""Scaling-law fits, expansion constants, scaling verification and blow-up prediction."""
from .constants import (
    C0_REFERENCE,
    C2_REFERENCE,
    constants_from_values,
    expansion_basis,
    expansion_tolerance,
    extract_constants,
    require_expansion,
)
from .fitting import (
    REFERENCE_SCALINGS,
    concentration_scale,
    fit_scaling,
    reference_function,
    reference_scaling,
)
from .prediction import minimize_reduced_energy, optimal_rate, predict_blowup
from .sampling import map_samples
from .verification import (
    QUANTITIES,
    judge_band,
    sample_records,
    scan_config,
    scan_quantity,
    verify_error_scaling,
)

__all__ = [
    "C0_REFERENCE",
    "C2_REFERENCE",
    "QUANTITIES",
    "REFERENCE_SCALINGS",
    "concentration_scale",
    "constants_from_values",
    "expansion_basis",
    "expansion_tolerance",
    "extract_constants",
    "fit_scaling",
    "judge_band",
    "map_samples",
    "minimize_reduced_energy",
    "optimal_rate",
    "predict_blowup",
    "reference_function",
    "reference_scaling",
    "require_expansion",
    "sample_records",
    "scan_config",
    "scan_quantity",
    "verify_error_scaling",
]
