"""Modified Bessel functions K0, K1 and the radial correction profile W.

W(r) = 1/r^2 - K1(r)/r is the radial solution of -W'' - (3/r) W' + W = 1/r^2
in four dimensions. Below r = 1 the closed form cancels catastrophically, so W
and its derivatives are summed from the ascending series of K1 instead.
"""
import logging
import math
import warnings
from typing import Tuple, Union

import numpy as np
from scipy import special

from src.exceptions import SpecialFunctionDomainError, UnderflowWarning
from src.models.schemas import BesselEval, CorrectionEval

logger = logging.getLogger(__name__)

# Euler-Mascheroni constant to 20 digits
EULER_GAMMA = 0.57721566490153286061

R_MIN = 1e-8
R_UNDERFLOW = 700.0
# Switch between the series and the closed form of W
SERIES_CUTOFF = 1.0
_N_SERIES = 24

ArrayLike = Union[float, np.ndarray]


def _series_coefficients() -> Tuple[np.ndarray, np.ndarray]:
    """Coefficients in t = r^2/4 of A(t) = I1(r)/r and of the digamma sum B(t)."""
    k = np.arange(_N_SERIES, dtype=float)
    inv_fact = 1.0 / (special.factorial(k) * special.factorial(k + 1.0))
    a = 0.5 * inv_fact
    b = 0.25 * (special.digamma(k + 1.0) + special.digamma(k + 2.0)) * inv_fact
    return a, b


_A_COEF, _B_COEF = _series_coefficients()
_A_D1 = np.polynomial.polynomial.polyder(_A_COEF)
_A_D2 = np.polynomial.polynomial.polyder(_A_COEF, 2)
_B_D1 = np.polynomial.polynomial.polyder(_B_COEF)
_B_D2 = np.polynomial.polynomial.polyder(_B_COEF, 2)


def _check_radius(r: float) -> float:
    try:
        r = float(r)
    except (TypeError, ValueError) as exc:
        raise SpecialFunctionDomainError(f"radius must be a real number, got {r!r}") from exc
    if not math.isfinite(r) or r <= 0.0:
        raise SpecialFunctionDomainError(f"radius must be positive and finite, got {r}")
    if r < R_MIN:
        raise SpecialFunctionDomainError(f"radius {r} below supported minimum {R_MIN}")
    return r


def _underflows(r: float) -> bool:
    if r > R_UNDERFLOW:
        warnings.warn(
            f"K1({r}) underflows; returning flagged zero", UnderflowWarning, stacklevel=3
        )
        return True
    return False


def bessel_k0(r: float) -> float:
    """K0(r) on [1e-8, 700]; flagged zero beyond."""
    r = _check_radius(r)
    if _underflows(r):
        return 0.0
    return float(special.k0(r))


def bessel_k1(r: float) -> float:
    """K1(r) on [1e-8, 700]; flagged zero beyond.

    Args:
        r: Positive radius.

    Returns:
        K1(r) to double precision.

    Raises:
        SpecialFunctionDomainError: for r <= 0 or r < 1e-8.
    """
    r = _check_radius(r)
    if _underflows(r):
        return 0.0
    return float(special.k1(r))


def bessel_k1_derivs(r: float) -> BesselEval:
    """K1, K1' and K1'' from the recurrences.

    K1' = -K0 - K1/r, and K1'' follows from the modified Bessel equation
    r^2 K'' + r K' - (r^2 + 1) K = 0.
    """
    r = _check_radius(r)
    if _underflows(r):
        return BesselEval(r=r, k1=0.0, k1_prime=0.0, k1_second=0.0, underflow=True)
    k0 = float(special.k0(r))
    k1 = float(special.k1(r))
    k1p = -k0 - k1 / r
    k1pp = (1.0 + 1.0 / r ** 2) * k1 - k1p / r
    return BesselEval(r=r, k1=k1, k1_prime=k1p, k1_second=k1pp)


def k0_k1_arrays(r: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized K0, K1 for quadrature kernels; arguments beyond 700 give 0.

    Underflowed arguments are counted in a DEBUG record.
    """
    r = np.asarray(r, dtype=float)
    n_under = int(np.count_nonzero(r > R_UNDERFLOW))
    if n_under:
        logger.debug("K0/K1 underflow at %d of %d radii (r > %g)", n_under, r.size, R_UNDERFLOW)
    return special.k0(r), special.k1(r)


def _series_profile(r: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    polyval = np.polynomial.polynomial.polyval
    t = 0.25 * r * r
    dt = 0.5 * r
    log_half = np.log(0.5 * r)

    a = polyval(t, _A_COEF)
    a1 = polyval(t, _A_D1) * dt
    a2 = polyval(t, _A_D2) * dt * dt + 0.5 * polyval(t, _A_D1)
    b = polyval(t, _B_COEF)
    b1 = polyval(t, _B_D1) * dt
    b2 = polyval(t, _B_D2) * dt * dt + 0.5 * polyval(t, _B_D1)

    w = -log_half * a + b
    wp = -a / r - log_half * a1 + b1
    wpp = a / r ** 2 - 2.0 * a1 / r - log_half * a2 + b2
    return w, wp, wpp


def _closed_profile(r: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    k0, k1 = k0_k1_arrays(r)
    k1p = -k0 - k1 / r
    k1pp = (1.0 + 1.0 / r ** 2) * k1 - k1p / r
    w = 1.0 / r ** 2 - k1 / r
    wp = -2.0 / r ** 3 - k1p / r + k1 / r ** 2
    wpp = 6.0 / r ** 4 - k1pp / r + 2.0 * k1p / r ** 2 - 2.0 * k1 / r ** 3
    return w, wp, wpp


def correction_profile(r: ArrayLike) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized W, W', W'' for r > 0 (no range checks, used inside integrands)."""
    r = np.atleast_1d(np.asarray(r, dtype=float))
    w = np.empty_like(r)
    wp = np.empty_like(r)
    wpp = np.empty_like(r)
    small = r < SERIES_CUTOFF
    if np.any(small):
        w[small], wp[small], wpp[small] = _series_profile(r[small])
    if np.any(~small):
        w[~small], wp[~small], wpp[~small] = _closed_profile(r[~small])
    return w, wp, wpp


def correction_w(r: float) -> CorrectionEval:
    """W, W', W'' at a single radius.

    W' follows the closed form -2/r^3 - K1'/r + K1/r^2 for r >= 1 and the
    term-by-term derivative of the ascending series below.
    """
    r = _check_radius(r)
    if r > R_UNDERFLOW:
        _underflows(r)
        return CorrectionEval(r=r, w=1.0 / r ** 2, w_prime=-2.0 / r ** 3, w_second=6.0 / r ** 4, underflow=True)
    w, wp, wpp = correction_profile(r)
    return CorrectionEval(r=r, w=float(w[0]), w_prime=float(wp[0]), w_second=float(wpp[0]))
