"""Blow-up prediction from the fitted energy expansion.

For fixed concentration points the reduced energy behaves like

    2 c0 + (lambda ln lambda)^{-1} sum_i (-c1 H(xi_i) d_i + c2 d_i^2)

so each rate tends to the vertex d_i* = c1 H(xi_i) / (2 c2), and the points
are strict local maxima of H. The constants are fitted against the basis
lambda delta^2 |ln delta|, which equals the leading form only up to
ln ln lambda / ln lambda. The predicted rate is the exact vertex of the
fitted expansion and the bare formula is kept as ``d_leading``. The prediction is
cross-checked by minimizing the reduced energy directly over (d1, d2).
"""
import itertools
import logging
import math
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from src.asymptotics.constants import expansion_basis, expansion_tolerance
from src.asymptotics.fitting import concentration_scale
from src.config import config
from src.energy.functional import energy_hints, reduced_energy
from src.exceptions import ExpansionVerificationError, HypothesisError
from src.geometry.boundary import DomainLike, as_domain
from src.geometry.search import find_curvature_maxima
from src.models.schemas import (
    BlowupPrediction,
    ConcentrationConfig,
    CurvatureMaxima,
    ExpansionConstants,
    Tolerance,
)

logger = logging.getLogger(__name__)

Objective = Callable[[Tuple[float, float]], float]
MAX_BRACKET_STEPS = 12


def optimal_rate(c1: float, c2: float, h: float, lam: Optional[float] = None) -> float:
    """Rate minimizing the fitted expansion at one point.

    Without ``lam`` this is the vertex of d -> -c1 H d + c2 d^2. With ``lam``
    it minimizes -c1 H delta + c2 lambda delta^2 |ln delta| over delta, whose
    stationarity condition is delta (2 |ln delta| - 1) = c1 H / (c2 lambda),
    and converts back with d = delta lambda ln lambda. Both agree as
    lambda -> infinity.

    Raises:
        ExpansionVerificationError: the vertex leaves the small-delta branch.
    """
    leading = c1 * h / (2.0 * c2)
    if lam is None:
        return leading
    log_target = math.log(c1 * h / (c2 * lam))
    # s + ln(-2s - 1) increases on s < -3/2, with s = ln delta
    if log_target >= -1.5 + math.log(2.0):
        raise ExpansionVerificationError(
            f"no small-delta vertex at lambda={lam:.6g}: c1 H / (c2 lambda) = {math.exp(log_target):.3g}"
        )
    s = brentq(lambda t: t + math.log(-2.0 * t - 1.0) - log_target, -700.0, -1.5, xtol=1e-14)
    return math.exp(s) * lam * math.log(lam)


def _bracket(line: Callable[[float], float], d: float) -> Tuple[float, float, float]:
    """Walk geometrically downhill from (d/2, d, 2d) until the middle value is lowest."""
    a, b, c = 0.5 * d, d, 2.0 * d
    fa, fb, fc = line(a), line(b), line(c)
    for _ in range(MAX_BRACKET_STEPS):
        if fb < fa and fb < fc:
            return a, b, c
        if fa < fc:
            a, b, c = 0.5 * a, a, b
            fa, fb, fc = line(a), fa, fb
        else:
            a, b, c = b, c, 2.0 * c
            fa, fb, fc = fb, fc, line(c)
    raise ExpansionVerificationError(f"no minimum of the reduced energy found between {a:.3g} and {c:.3g}")


def minimize_reduced_energy(
    objective: Objective,
    d0: Sequence[float],
    xtol: Optional[float] = None,
    sweeps: Optional[int] = None,
) -> Tuple[Tuple[float, float], float]:
    """Coordinate descent over (d1, d2) with golden-section line searches.

    Each line search starts from the bracket (d/2, d, 2d); when the middle
    value is not the lowest the bracket walks geometrically downhill, which
    keeps every trial rate positive. Only value comparisons steer the
    search, so scaling the objective by a positive constant does not move
    the minimizer.

    Args:
        objective: Maps (d1, d2) to the reduced energy.
        d0: Starting rates.
        xtol: Relative tolerance of the line searches (config ``asymptotics.minimize_xtol``).
        sweeps: Maximum coordinate sweeps (config ``asymptotics.minimize_sweeps``).

    Returns:
        ((d1, d2), objective value at the minimizer).
    """
    xtol = xtol or config.get('asymptotics.minimize_xtol', 1e-4)
    sweeps = sweeps or config.get('asymptotics.minimize_sweeps', 3)
    cache: Dict[Tuple[float, float], float] = {}

    def evaluate(d: Tuple[float, float]) -> float:
        if d not in cache:
            cache[d] = float(objective(d))
        return cache[d]

    current = [float(d0[0]), float(d0[1])]
    for sweep in range(sweeps):
        previous = list(current)
        for k in range(2):
            def line(t: float, k=k) -> float:
                trial = list(current)
                trial[k] = float(t)
                return evaluate((trial[0], trial[1]))

            bracket = _bracket(line, current[k])
            result = minimize_scalar(line, bracket=bracket, method="golden", options={"xtol": xtol})
            current[k] = float(result.x)
        change = max(abs(c - p) / p for c, p in zip(current, previous))
        logger.info("Sweep %d: d=(%.6g, %.6g), relative change %.3g", sweep + 1, current[0], current[1], change)
        if change <= xtol:
            break
    best = (current[0], current[1])
    return best, evaluate(best)


def _require_hypothesis(maxima: CurvatureMaxima) -> None:
    if len(maxima.maxima) >= 2:
        return
    if maxima.constant_curvature:
        reason = f"mean curvature is constant (H={maxima.h_max:.6g}), no strict maxima"
    else:
        reason = f"found {len(maxima.maxima)} strict maxima with H > 0"
    raise HypothesisError(f"hypothesis unmet: need two strict local maxima of H with H > 0; {reason}")


def _expansion_value(constants: ExpansionConstants, lam: float, d: Sequence[float], h: Sequence[float]) -> float:
    total = 0.0
    for d_i, h_i in zip(d, h):
        b1, b2 = expansion_basis(lam, concentration_scale(lam, d_i), h_i)
        total += constants.c0 - constants.c1 * b1 + constants.c2 * b2
    return total


def predict_blowup(
    domain: DomainLike,
    lam: float,
    beta: float,
    constants: ExpansionConstants,
    maxima: Optional[CurvatureMaxima] = None,
    cross_validate: bool = True,
    eta: Optional[float] = None,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> BlowupPrediction:
    """Predict the blow-up points and rates at lambda.

    The two highest strict curvature maxima are the blow-up points; every
    pair of maxima is listed as a candidate. ``energy_at_min`` is the
    expansion value at d* (coupling neglected).

    Raises:
        HypothesisError: fewer than two strict maxima with H > 0.
        ExpansionVerificationError: c1 or c2 not positive.
    """
    dom = as_domain(domain)
    if constants.c1 <= 0.0 or constants.c2 <= 0.0:
        raise ExpansionVerificationError(
            f"prediction needs c1 > 0 and c2 > 0, got c1={constants.c1:.6g}, c2={constants.c2:.6g}"
        )
    maxima = maxima or find_curvature_maxima(dom)
    _require_hypothesis(maxima)
    k = len(maxima.maxima)
    top = maxima.maxima[:2]
    h_values = [m.h for m in top]
    d_leading = [optimal_rate(constants.c1, constants.c2, h) for h in h_values]
    d_star = [optimal_rate(constants.c1, constants.c2, h, lam) for h in h_values]
    delta_star = [concentration_scale(lam, d) for d in d_star]
    logger.info("Predicted d*=(%.6g, %.6g) at H=(%.6g, %.6g), leading vertex (%.6g, %.6g)",
                *d_star, *h_values, *d_leading)

    d_direct = agreement = consistent = None
    if cross_validate:
        points = (top[0].point, top[1].point)
        gap = float(np.linalg.norm(points[0].xi_array - points[1].xi_array))
        base_eta = float(eta if eta is not None else config.get('energy.eta', 0.5))
        tol = tol or expansion_tolerance()
        # one node set for every trial rate keeps the objective smooth in d
        hints = energy_hints([p.xi_array for p in points], delta_star)

        def objective(d: Tuple[float, float]) -> float:
            admissible = min(base_eta, 0.5 * gap, 0.5 * min(d), 0.5 / max(d))
            cfg = ConcentrationConfig(**{"lambda": lam}, beta=beta, d=d, xi=points, eta=admissible)
            return reduced_energy(cfg, dom, tol, hints, workers)

        found, _ = minimize_reduced_energy(objective, d_star)
        d_direct = list(found)
        agreement = max(abs(a - b) / b for a, b in zip(d_direct, d_star))
        consistent = agreement <= config.get('asymptotics.agreement', 0.1)
        if not consistent:
            logger.warning("Formula and direct minimization disagree by %.3g", agreement)

    return BlowupPrediction(
        **{"lambda": lam},
        beta=beta,
        xi_star=[m.point for m in top],
        d_star=d_star,
        d_leading=d_leading,
        delta_star=delta_star,
        H_values=h_values,
        energy_at_min=_expansion_value(constants, lam, d_star, h_values),
        d_direct=d_direct,
        agreement=agreement,
        consistent=consistent,
        n_maxima=k,
        pair_count=k * (k - 1) // 2,
        pairs=list(itertools.combinations(range(k), 2)),
        constants=constants,
    )
