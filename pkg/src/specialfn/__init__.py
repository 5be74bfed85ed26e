"""Modified Bessel functions and the radial correction profile."""
from .bessel import (
    EULER_GAMMA,
    R_MIN,
    R_UNDERFLOW,
    bessel_k0,
    bessel_k1,
    bessel_k1_derivs,
    correction_profile,
    correction_w,
    k0_k1_arrays,
)
from .oracle import oracle_k0, oracle_k1, oracle_k1_derivs, oracle_overlap_check, oracle_w
from .windows import WINDOWS, ExpansionWindow, all_window_constants, remainder_ratios, window_constant

__all__ = [
    "EULER_GAMMA",
    "R_MIN",
    "R_UNDERFLOW",
    "bessel_k0",
    "bessel_k1",
    "bessel_k1_derivs",
    "correction_profile",
    "correction_w",
    "k0_k1_arrays",
    "oracle_k0",
    "oracle_k1",
    "oracle_k1_derivs",
    "oracle_overlap_check",
    "oracle_w",
    "WINDOWS",
    "ExpansionWindow",
    "all_window_constants",
    "remainder_ratios",
    "window_constant",
]
