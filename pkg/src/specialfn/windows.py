"""Expansion windows of K1 and its derivatives near 0 and infinity.

Each window pairs a truncated expansion with the size of its remainder. The
remainder ratio |f - expansion| / scale is evaluated with the mpmath oracle
on a log grid and again on the 2x refined grid; a window holds when the
supremum is finite and changes by less than a factor 2 under refinement.
The constants are reported, never compared against fixed values.
"""
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Tuple

import mpmath
import numpy as np
from mpmath import mp

from src.specialfn.oracle import oracle_k1_derivs

logger = logging.getLogger(__name__)

WINDOW_DPS = 60


@dataclass(frozen=True)
class ExpansionWindow:
    """A truncated expansion valid in one regime."""
    name: str
    regime: Tuple[float, float]
    # f(K1, K1', K1'', r) -> mp value being expanded
    target: Callable
    expansion: Callable
    scale: Callable


def _sqrt_half_pi():
    return mpmath.sqrt(mp.pi / 2)


WINDOWS: List[ExpansionWindow] = [
    ExpansionWindow(
        name="k1_small",
        regime=(1e-6, 0.1),
        target=lambda k, kp, kpp, r: k,
        expansion=lambda r: 1 / r + (r / 2) * mpmath.log(r / 2) + (r / 2) * (mp.euler - mpmath.mpf(1) / 2),
        scale=lambda r: r ** 3 * abs(mpmath.log(r)),
    ),
    ExpansionWindow(
        name="k1_large",
        regime=(10.0, 100.0),
        target=lambda k, kp, kpp, r: k,
        expansion=lambda r: _sqrt_half_pi() * mpmath.exp(-r) * (r ** -0.5 + mpmath.mpf(3) / 8 * r ** -1.5),
        scale=lambda r: mpmath.exp(-r) * r ** -2.5,
    ),
    ExpansionWindow(
        name="k1_prime_small",
        regime=(1e-6, 0.1),
        target=lambda k, kp, kpp, r: kp,
        expansion=lambda r: -1 / r ** 2 + mpmath.log(r / 2) / 2 + (mp.euler + mpmath.mpf(1) / 2) / 2,
        scale=lambda r: r ** 2 * abs(mpmath.log(r)),
    ),
    ExpansionWindow(
        name="k1_prime_large",
        regime=(10.0, 100.0),
        target=lambda k, kp, kpp, r: kp,
        expansion=lambda r: -_sqrt_half_pi() * mpmath.exp(-r) * (r ** -0.5 + mpmath.mpf(7) / 8 * r ** -1.5),
        scale=lambda r: mpmath.exp(-r) * r ** -2.5,
    ),
    ExpansionWindow(
        name="k1_second_small",
        regime=(1e-6, 0.1),
        target=lambda k, kp, kpp, r: kpp,
        expansion=lambda r: 2 / r ** 3 + 1 / (2 * r),
        scale=lambda r: r * abs(mpmath.log(r)),
    ),
    ExpansionWindow(
        name="k1_second_large",
        regime=(10.0, 100.0),
        target=lambda k, kp, kpp, r: kpp,
        expansion=lambda r: _sqrt_half_pi() * mpmath.exp(-r) * (r ** -0.5 + mpmath.mpf(11) / 8 * r ** -1.5),
        scale=lambda r: mpmath.exp(-r) * r ** -2.5,
    ),
    ExpansionWindow(
        name="rk1_prime_minus_k1_small",
        regime=(1e-6, 0.1),
        target=lambda k, kp, kpp, r: r * kp - k,
        expansion=lambda r: -2 / r,
        scale=lambda r: r,
    ),
    ExpansionWindow(
        name="rk1_prime_minus_k1_large",
        regime=(10.0, 100.0),
        target=lambda k, kp, kpp, r: r * kp - k,
        expansion=lambda r: -_sqrt_half_pi() * mpmath.sqrt(r) * mpmath.exp(-r),
        scale=lambda r: mpmath.exp(-r) / mpmath.sqrt(r),
    ),
]


def remainder_ratios(window: ExpansionWindow, n_points: int) -> np.ndarray:
    """|f - expansion| / scale on a log grid over the window's regime."""
    lo, hi = window.regime
    grid = np.geomspace(lo, hi, n_points)
    ratios = np.empty(n_points)
    with mpmath.workdps(WINDOW_DPS):
        for idx, r_float in enumerate(grid):
            r = mpmath.mpf(r_float)
            k, kp, kpp = oracle_k1_derivs(r, dps=WINDOW_DPS)
            remainder = abs(window.target(k, kp, kpp, r) - window.expansion(r))
            ratios[idx] = float(remainder / window.scale(r))
    return ratios


def window_constant(window: ExpansionWindow, n_points: int = 40) -> Dict[str, float]:
    """Fitted window constant with its 2x-refinement stability factor.

    Returns:
        Dict with ``sup`` (coarse grid), ``sup_refined`` and ``variation``
        (max/min of the two suprema; 1 means perfectly stable).
    """
    coarse = float(np.max(remainder_ratios(window, n_points)))
    fine = float(np.max(remainder_ratios(window, 2 * n_points - 1)))
    low, high = sorted((coarse, fine))
    variation = high / low if low > 0.0 else float("inf")
    logger.debug("window %s: sup=%.6g refined=%.6g", window.name, coarse, fine)
    return {"sup": coarse, "sup_refined": fine, "variation": variation}


def all_window_constants(n_points: int = 40) -> Dict[str, Dict[str, float]]:
    """Window constants for every expansion in :data:`WINDOWS`."""
    return {w.name: window_constant(w, n_points) for w in WINDOWS}
