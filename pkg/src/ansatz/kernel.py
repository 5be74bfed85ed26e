"""Kernel elements Z_{j,i} of the linearized problem and their Gram matrix."""
import logging
import math
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy import integrate

from src.config import config
from src.exceptions import QuadratureError
from src.geometry.boundary import DomainLike
from src.models.schemas import ALPHA, ConcentrationConfig, FieldEval, SingularityHint, Tolerance
from src.quadrature.integrator import integrate_domain_vector

logger = logging.getLogger(__name__)

_PAIRS = [(k, j) for k in range(4) for j in range(k, 4)]


def kernel_arrays(x: np.ndarray, delta: float, xi: Sequence[float],
                  frame: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """All four kernel elements and their gradients.

    Z_0 = delta dU/ddelta = alpha delta (|y|^2 - delta^2) / D^2 and, for the
    tangent vectors t_j, Z_j = delta dU/dt_j = 2 alpha delta^2 (y . t_j) / D^2.

    Returns:
        values (n, 4) and gradients (n, 4, 4) indexed [point, element, axis].
    """
    y = np.atleast_2d(np.asarray(x, dtype=float)) - np.asarray(xi, dtype=float)
    r2 = np.sum(y * y, axis=1)
    d2 = delta * delta
    denom = d2 + r2
    values = np.empty((len(y), 4))
    grads = np.empty((len(y), 4, 4))
    values[:, 0] = ALPHA * delta * (r2 - d2) / denom ** 2
    grads[:, 0, :] = (2.0 * ALPHA * delta * (3.0 * d2 - r2) / denom ** 3)[:, None] * y
    proj = y @ np.asarray(frame, dtype=float).T
    for j in range(3):
        t = frame[j]
        values[:, j + 1] = 2.0 * ALPHA * d2 * proj[:, j] / denom ** 2
        grads[:, j + 1, :] = 2.0 * ALPHA * d2 * (
            t[None, :] / (denom ** 2)[:, None] - (4.0 * proj[:, j] / denom ** 3)[:, None] * y
        )
    return values, grads


def kernel_element(cfg: ConcentrationConfig, i: int, j: int, x: Sequence[float]) -> FieldEval:
    """Z_{j,i} at x; j = 0 is the dilation element, j = 1..3 the tangential ones."""
    if not 0 <= j <= 3:
        raise ValueError(f"kernel index must be in 0..3, got {j}")
    point = cfg.xi[i]
    values, grads = kernel_arrays(np.asarray(x, dtype=float), cfg.delta[i], point.xi, point.frame_array)
    return FieldEval(value=float(values[0, j]), gradient=grads[0, j].tolist())


def kernel_gram(cfg: ConcentrationConfig, i: int, domain: DomainLike,
                tol: Optional[Tolerance] = None, workers: Optional[int] = None) -> np.ndarray:
    """sigma_{kj} = <Z_k, Z_j> in the H^1_lambda inner product over Omega.

    Returns:
        Symmetric 4x4 matrix.

    Raises:
        QuadratureError: if any entry fails to converge.
    """
    delta = cfg.delta[i]
    point = cfg.xi[i]
    frame = point.frame_array
    lam = cfg.lam

    def integrand(x: np.ndarray) -> np.ndarray:
        values, grads = kernel_arrays(x, delta, point.xi, frame)
        cols = [np.sum(grads[:, k] * grads[:, j], axis=1) + lam * values[:, k] * values[:, j]
                for k, j in _PAIRS]
        return np.stack(cols, axis=1)

    hints = SingularityHint.for_bubbles(
        [point.xi_array], [delta],
        config.get('quadrature.min_panel_factor', 0.1), config.get('quadrature.grading_ratio', 0.5),
    )
    tol = tol or Tolerance(rel=config.rel_tol_energy, abs=config.get('quadrature.abs_tol', 1e-12))
    results = integrate_domain_vector(integrand, domain, hints, tol, workers)
    failed = [f"sigma{k}{j}" for (k, j), res in zip(_PAIRS, results) if not res.converged]
    if failed:
        raise QuadratureError("kernel Gram matrix did not converge", failed)
    gram = np.zeros((4, 4))
    for (k, j), res in zip(_PAIRS, results):
        gram[k, j] = gram[j, k] = res.value
    logger.debug("kernel Gram diagonal at lambda=%.4g: %s", lam, np.diag(gram))
    return gram


def gram_limits() -> Tuple[float, float]:
    """Half-space limits of sigma_00 and sigma_jj (j >= 1) as delta -> 0.

    Both are half of the whole-space Dirichlet integrals of the rescaled
    elements; the angular average of (y . t)^2 is |y|^2 / 4.
    """
    def dilation(r: float) -> float:
        return r ** 3 * 4.0 * ALPHA ** 2 * r ** 2 * (3.0 - r ** 2) ** 2 / (1.0 + r ** 2) ** 6

    def tangential(r: float) -> float:
        d = 1.0 + r * r
        return r ** 3 * 4.0 * ALPHA ** 2 * (1.0 / d ** 4 - 2.0 * r ** 2 / d ** 5 + 4.0 * r ** 4 / d ** 6)

    half_sphere = math.pi ** 2
    a0 = half_sphere * integrate.quad(dilation, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    a1 = half_sphere * integrate.quad(tangential, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)[0]
    return a0, a1
