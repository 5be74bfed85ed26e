"""Arbitrary-precision reference values for K0 and K1.

Ascending series below r = 20 (working precision grows with r to absorb the
cancellation of terms of size e^r), Hankel asymptotic sum from r = 20 on.
The two branches are compared on an overlap interval by
:func:`oracle_overlap_check`.
"""
import logging
from typing import List, Optional

import mpmath
from mpmath import mp

logger = logging.getLogger(__name__)

SERIES_LIMIT = 20.0


def _working_dps(r: float, dps: Optional[int]) -> int:
    if dps is not None:
        return dps
    return 30 + int(0.9 * min(r, SERIES_LIMIT * 2.0))


def _series_k(nu: int, r) -> mpmath.mpf:
    """Ascending series of K0 or K1 at mp precision."""
    t = (r / 2) ** 2
    log_half = mpmath.log(r / 2)
    gamma = mp.euler
    tol = mpmath.mpf(10) ** (-mp.dps)
    if nu == 0:
        # K0 = -(ln(r/2) + gamma) I0 + sum_k H_k t^k / (k!)^2
        i0 = mpmath.mpf(0)
        tail = mpmath.mpf(0)
        term = mpmath.mpf(1)
        harmonic = mpmath.mpf(0)
        k = 0
        while True:
            i0 += term
            tail += harmonic * term
            k += 1
            harmonic += mpmath.mpf(1) / k
            term = term * t / (k * k)
            if term * (1 + harmonic) < tol * abs(i0):
                break
        return -(log_half + gamma) * i0 + tail
    # K1 = 1/r + ln(r/2) I1 - (r/4) sum_k (psi(k+1) + psi(k+2)) t^k / (k!(k+1)!)
    i1_sum = mpmath.mpf(0)
    psi_sum = mpmath.mpf(0)
    term = mpmath.mpf(1)
    psi_k1 = -gamma
    psi_k2 = 1 - gamma
    k = 0
    while True:
        i1_sum += term
        psi_sum += (psi_k1 + psi_k2) * term
        k += 1
        psi_k1 += mpmath.mpf(1) / k
        psi_k2 += mpmath.mpf(1) / (k + 1)
        term = term * t / (k * (k + 1))
        if term * (1 + abs(psi_k1) + abs(psi_k2)) < tol * abs(i1_sum):
            break
    return 1 / r + log_half * (r / 2) * i1_sum - (r / 4) * psi_sum


def _asymptotic_k(nu: int, r) -> mpmath.mpf:
    """Hankel expansion truncated at its smallest term."""
    mu = 4 * nu * nu
    total = mpmath.mpf(1)
    term = mpmath.mpf(1)
    previous = mpmath.inf
    k = 1
    while True:
        term = term * (mu - (2 * k - 1) ** 2) / (k * 8 * r)
        if abs(term) >= previous or term == 0:
            break
        total += term
        previous = abs(term)
        k += 1
    return mpmath.sqrt(mp.pi / (2 * r)) * mpmath.exp(-r) * total


def _oracle(nu: int, r: float, dps: Optional[int], branch: Optional[str]) -> mpmath.mpf:
    if r <= 0:
        raise ValueError(f"oracle requires r > 0, got {r}")
    with mpmath.workdps(_working_dps(float(r), dps)):
        x = mpmath.mpf(r)
        use_series = branch == "series" or (branch is None and x < SERIES_LIMIT)
        value = _series_k(nu, x) if use_series else _asymptotic_k(nu, x)
        return +value


def oracle_k0(r: float, dps: Optional[int] = None, branch: Optional[str] = None) -> mpmath.mpf:
    """K0(r) at high precision."""
    return _oracle(0, r, dps, branch)


def oracle_k1(r: float, dps: Optional[int] = None, branch: Optional[str] = None) -> mpmath.mpf:
    """K1(r) at high precision.

    Args:
        r: Positive radius (float or mpf).
        dps: Working decimal digits; grows with r by default.
        branch: Force ``"series"`` or ``"asymptotic"``; automatic when None.
    """
    return _oracle(1, r, dps, branch)


def oracle_k1_derivs(r: float, dps: Optional[int] = None) -> List[mpmath.mpf]:
    """[K1, K1', K1''] at high precision via the recurrences."""
    with mpmath.workdps(_working_dps(float(r), dps) + 10):
        x = mpmath.mpf(r)
        k0 = oracle_k0(x, dps=mp.dps)
        k1 = oracle_k1(x, dps=mp.dps)
        k1p = -k0 - k1 / x
        k1pp = (1 + 1 / x ** 2) * k1 - k1p / x
        return [+k1, +k1p, +k1pp]


def oracle_w(r: float, dps: Optional[int] = None) -> mpmath.mpf:
    """W(r) = 1/r^2 - K1(r)/r without cancellation loss."""
    with mpmath.workdps(_working_dps(float(r), dps) + 20):
        x = mpmath.mpf(r)
        return +(1 / x ** 2 - oracle_k1(x, dps=mp.dps) / x)


def oracle_overlap_check(r_values: List[float], dps: int = 60) -> float:
    """Max relative disagreement between series and asymptotic K1 on r_values."""
    worst = 0.0
    for r in r_values:
        series = oracle_k1(r, dps=dps, branch="series")
        asymptotic = oracle_k1(r, dps=dps, branch="asymptotic")
        worst = max(worst, float(abs(series - asymptotic) / abs(asymptotic)))
    logger.debug("oracle overlap disagreement %.3e over %d points", worst, len(r_values))
    return worst
