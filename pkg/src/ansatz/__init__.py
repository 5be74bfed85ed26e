"""Bubble, correction and ansatz fields, kernel elements and PDE residuals."""
from .fields import (
    ansatz_arrays,
    ansatz_pde_residual,
    ansatz_v,
    bubble,
    bubble_arrays,
    correction_arrays,
    correction_closed_arrays,
    correction_field,
    correction_field_closed_form,
    interaction_bound,
    interior_samples,
    pde_residual_arrays,
    split_ansatz_arrays,
)
from .kernel import gram_limits, kernel_arrays, kernel_element, kernel_gram

__all__ = [
    "ansatz_arrays",
    "ansatz_pde_residual",
    "ansatz_v",
    "bubble",
    "bubble_arrays",
    "correction_arrays",
    "correction_closed_arrays",
    "correction_field",
    "correction_field_closed_form",
    "gram_limits",
    "interaction_bound",
    "interior_samples",
    "pde_residual_arrays",
    "kernel_arrays",
    "kernel_element",
    "kernel_gram",
    "split_ansatz_arrays",
]
