"""Energy functional, error dual norms and the Q decomposition."""
from .error_terms import (
    TERM_NAMES,
    dominant_term,
    e4_half_space_norm,
    error_dual_norms,
    predicted_scalings,
)
from .functional import (
    bubble_energy,
    bubble_energy_result,
    coupling_term,
    energy_full,
    energy_hints,
    energy_tolerance,
    psi_margin,
    reduced_energy,
    reduced_energy_sample,
    regime,
    single_energy,
)
from .q_terms import A_BAR_REFERENCE, q_bounds, q_decomposition

__all__ = [
    "A_BAR_REFERENCE",
    "TERM_NAMES",
    "bubble_energy",
    "bubble_energy_result",
    "coupling_term",
    "dominant_term",
    "e4_half_space_norm",
    "energy_full",
    "energy_hints",
    "energy_tolerance",
    "error_dual_norms",
    "predicted_scalings",
    "psi_margin",
    "q_bounds",
    "q_decomposition",
    "reduced_energy",
    "reduced_energy_sample",
    "regime",
    "single_energy",
]
