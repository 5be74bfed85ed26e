"""Dual norms of the six pieces of the ansatz error.

For component i (and the other component j):

    E1 = 3 U^2 W          E2 = 3 U W^2          E3 = W^3
    E4 = lambda (U - alpha delta / |x - xi|^2)    E6 = beta V_i V_j^2

are measured in L^{4/3}(Omega); E5 is the normal derivative of V_i measured
in L^{3/2} on the boundary.
"""
import logging
import math
from typing import List, Optional, Sequence

import numpy as np
from scipy import integrate

from src.ansatz.fields import ansatz_arrays, bubble_arrays, correction_arrays
from src.energy.functional import energy_hints, energy_tolerance
from src.geometry.boundary import DomainLike, as_domain
from src.models.schemas import ALPHA, ConcentrationConfig, ErrorNormReport, Tolerance
from src.quadrature.integrator import (
    integrate_ball_vector,
    integrate_boundary_vector,
    integrate_domain_vector,
)

logger = logging.getLogger(__name__)

TERM_NAMES = ("E1", "E2", "E3", "E4", "E5", "E6")
DOMAIN_EXPONENT = 4.0 / 3.0
BOUNDARY_EXPONENT = 1.5
# E4 is singular like |x - xi|^{-8/3}; grade deeper than for the energy
SINGULAR_PANEL_FACTOR = 1e-3


def predicted_scalings(lam: float, delta_i: float, delta_j: float, beta: float) -> List[float]:
    """Size of each error term predicted by the estimates, in TERM_NAMES order."""
    log_lam = math.log(lam)
    log_delta = abs(math.log(delta_i))
    return [
        lam * delta_i ** 2 * log_delta,
        lam ** 1.5 * delta_i ** 3 * log_lam ** 2,
        lam ** 1.5 * delta_i ** 3 * log_lam ** 3,
        lam * delta_i ** 2,
        delta_i * log_delta ** (2.0 / 3.0),
        abs(beta) * delta_i * delta_j,
    ]


def _norm(integral: float, p: float) -> float:
    return max(integral, 0.0) ** (1.0 / p)


def error_dual_norms(
    cfg: ConcentrationConfig,
    i: int,
    domain: DomainLike,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> ErrorNormReport:
    """Compute the six dual norms for component i and compare with their predicted sizes.

    E1 is additionally split at |x - xi_i| = 1/sqrt(lambda); E6 is split into
    the balls of radius eta/2 around both concentration points and the rest.
    """
    if i not in (0, 1):
        raise ValueError(f"component index must be 0 or 1, got {i}")
    dom = as_domain(domain)
    j = 1 - i
    lam, beta = cfg.lam, cfg.beta
    delta, delta_j = cfg.delta[i], cfg.delta[j]
    xi, xi_j = cfg.xi[i].xi_array, cfg.xi[j].xi_array
    tol = energy_tolerance(tol)
    p = DOMAIN_EXPONENT

    def local_terms(x: np.ndarray) -> List[np.ndarray]:
        u, _, _ = bubble_arrays(x, delta, xi)
        w, _, _ = correction_arrays(x, lam, delta, xi)
        r2 = np.sum((x - xi) ** 2, axis=1)
        e4 = lam * ALPHA * delta ** 3 / ((delta * delta + r2) * r2)
        return [np.abs(3.0 * u * u * w) ** p, np.abs(3.0 * u * w * w) ** p, np.abs(w ** 3) ** p, e4 ** p]

    def coupling_term(x: np.ndarray) -> np.ndarray:
        vi = ansatz_arrays(x, lam, delta, xi)[0]
        vj = ansatz_arrays(x, lam, delta_j, xi_j)[0]
        return np.abs(beta * vi * vj * vj) ** p

    def domain_terms(x: np.ndarray) -> np.ndarray:
        cols = local_terms(x)
        if beta != 0.0:
            cols.append(coupling_term(x))
        return np.stack(cols, axis=1)

    hints = energy_hints([xi, xi_j], [delta, delta_j], SINGULAR_PANEL_FACTOR)
    whole = integrate_domain_vector(domain_terms, dom, hints, tol, workers)

    def normal_derivative(x: np.ndarray, normal: np.ndarray) -> np.ndarray:
        _, grad, _ = ansatz_arrays(x, lam, delta, xi)
        return np.abs(np.sum(grad * normal, axis=1)) ** BOUNDARY_EXPONENT

    boundary = integrate_boundary_vector(normal_derivative, dom, energy_hints([xi], [delta]), tol, workers)

    inner_radius = 1.0 / math.sqrt(lam)
    e1_inner = integrate_ball_vector(
        lambda x: local_terms(x)[0], dom, xi, inner_radius, energy_hints([xi], [delta]), tol, workers
    )[0]
    e1_total = whole[0].value
    e1_split = {
        "inner": _norm(e1_inner.value, p),
        "outer": _norm(e1_total - e1_inner.value, p),
    }
    results = list(whole) + list(boundary) + [e1_inner]

    norms = [_norm(whole[k].value, p) for k in range(4)]
    norms.append(_norm(boundary[0].value, BOUNDARY_EXPONENT))
    e6_split = {}
    if beta != 0.0:
        radius = 0.5 * cfg.eta
        near_i = integrate_ball_vector(coupling_term, dom, xi, radius, hints, tol, workers)[0]
        near_j = integrate_ball_vector(coupling_term, dom, xi_j, radius, hints, tol, workers)[0]
        results += [near_i, near_j]
        e6_total = whole[4].value
        e6_split = {
            "near_i": _norm(near_i.value, p),
            "near_j": _norm(near_j.value, p),
            "far": _norm(e6_total - near_i.value - near_j.value, p),
        }
        norms.append(_norm(e6_total, p))
    else:
        norms.append(0.0)

    predicted = predicted_scalings(lam, delta, delta_j, beta)
    ratios = [n / s if s > 0.0 else 0.0 for n, s in zip(norms, predicted)]
    converged = all(r.converged for r in results)
    if not converged:
        logger.warning("error norms for component %d at lambda=%.4g not converged", i, lam)
    logger.debug("error norm ratios at lambda=%.4g: %s", lam, ", ".join(f"{r:.4g}" for r in ratios))
    return ErrorNormReport(
        component=i,
        lam=lam,
        delta=delta,
        norms=norms,
        predicted=predicted,
        ratios=ratios,
        total_bound=float(sum(norms)),
        e1_split=e1_split,
        e6_split=e6_split,
        converged=converged,
    )


def e4_half_space_norm(lam: float, delta: float) -> float:
    """L^{4/3} norm of E4 over a half-space with xi on its boundary (radial oracle)."""
    p = DOMAIN_EXPONENT

    def radial(z: float) -> float:
        return z ** 3 * (1.0 / ((1.0 + z * z) * z * z)) ** p

    head = integrate.quad(radial, 0.0, 1.0, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    tail = integrate.quad(radial, 1.0, np.inf, epsabs=0.0, epsrel=1e-12, limit=200)[0]
    integral = (lam * ALPHA) ** p * delta ** (4.0 - p) * math.pi ** 2 * (head + tail)
    return integral ** (1.0 / p)


def dominant_term(values: Sequence[float]) -> int:
    """Index of the largest entry."""
    return int(np.argmax(np.asarray(values, dtype=float)))
