"""Decomposition of Q = lambda int V U into the near-ball part, its correction and the far part.

With the ball B = B_sqrt(delta)(xi):

    Q  = lambda int_B U^2 - lambda int_B W U + lambda int_{Omega \\ B} V U
       = Q1 - Q2 + Q3

and on the far region V = alpha (m1 + m2) splits Q3 into M1 (the m1 part),
M2 (the m2 part out to radius 1/sqrt(lambda)) and M3 (the m2 part beyond).
Each region integral is a whole-domain or larger-ball integral minus a ball
integral on separate node sets.
"""
import logging
import math
from typing import Optional

import numpy as np

from src.ansatz.fields import bubble_arrays, correction_arrays, split_ansatz_arrays
from src.energy.functional import energy_hints, energy_tolerance
from src.geometry.boundary import DomainLike, as_domain
from src.models.schemas import ALPHA, ConcentrationConfig, QDecomposition, Tolerance
from src.quadrature.integrator import integrate_ball_vector, integrate_domain_vector

logger = logging.getLogger(__name__)

# Limit of Q1 / (lambda delta^2 |ln delta|) for a boundary concentration point
A_BAR_REFERENCE = 4.0 * math.pi ** 2


def q_bounds(lam: float, delta: float) -> dict:
    """Sizes the far-region and correction pieces are expected to stay below."""
    log_delta = abs(math.log(delta))
    return {
        "q2": lam ** 2 * delta ** 3 * log_delta,
        "m1": lam * delta ** 3,
        "m2": lam * delta ** 2 * abs(math.log(log_delta)),
        "m3": lam * delta ** 2,
    }


def q_decomposition(
    cfg: ConcentrationConfig,
    i: int,
    domain: DomainLike,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> QDecomposition:
    """Split Q for component i and report each piece against lambda delta^2 |ln delta|."""
    if i not in (0, 1):
        raise ValueError(f"component index must be 0 or 1, got {i}")
    dom = as_domain(domain)
    lam = cfg.lam
    delta = cfg.delta[i]
    xi = cfg.xi[i].xi_array
    tol = energy_tolerance(tol)
    hints = energy_hints([xi], [delta])
    near_radius = math.sqrt(delta)
    far_radius = 1.0 / math.sqrt(lam)

    def whole_terms(x: np.ndarray) -> np.ndarray:
        u = bubble_arrays(x, delta, xi)[0]
        w = correction_arrays(x, lam, delta, xi)[0]
        m1, m2 = split_ansatz_arrays(x, lam, delta, xi)
        return np.stack([(u - w) * u, m1 * u, m2 * u], axis=1)

    def near_terms(x: np.ndarray) -> np.ndarray:
        u = bubble_arrays(x, delta, xi)[0]
        w = correction_arrays(x, lam, delta, xi)[0]
        m1, m2 = split_ansatz_arrays(x, lam, delta, xi)
        return np.stack([u * u, w * u, m1 * u, m2 * u], axis=1)

    def middle_terms(x: np.ndarray) -> np.ndarray:
        u = bubble_arrays(x, delta, xi)[0]
        return split_ansatz_arrays(x, lam, delta, xi)[1] * u

    whole = integrate_domain_vector(whole_terms, dom, hints, tol, workers)
    near = integrate_ball_vector(near_terms, dom, xi, near_radius, hints, tol, workers)
    middle = integrate_ball_vector(middle_terms, dom, xi, far_radius, hints, tol, workers)

    q = lam * whole[0].value
    q1 = lam * near[0].value
    q2 = lam * near[1].value
    m1 = lam * ALPHA * (whole[1].value - near[2].value)
    m2 = lam * ALPHA * (middle[0].value - near[3].value)
    m3 = lam * ALPHA * (whole[2].value - middle[0].value)
    q3 = m1 + m2 + m3
    scale = lam * delta ** 2 * abs(math.log(delta))
    consistency = abs(q - (q1 - q2 + q3)) / max(abs(q), 1e-300)
    converged = all(r.converged for r in list(whole) + list(near) + list(middle))
    if not converged:
        logger.warning("Q decomposition at lambda=%.4g not converged", lam)
    logger.info("Q1/(lambda delta^2 |ln delta|) = %.6g at lambda=%.4g", q1 / scale, lam)
    return QDecomposition(
        q=q,
        q1=q1,
        q2=q2,
        q3=q3,
        m1=m1,
        m2=m2,
        m3=m3,
        scale=scale,
        q1_ratio=q1 / scale,
        q2_ratio=q2 / scale,
        q3_ratio=q3 / scale,
        bounds=q_bounds(lam, delta),
        consistency=consistency,
        converged=converged,
    )
