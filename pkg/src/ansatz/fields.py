"""Bubble U, correction W_lambda, ansatz V = U - W_lambda and the PDE residual.

With y = x - xi, D = delta^2 + |y|^2 and s = sqrt(lambda) |y|:

    U        = alpha delta / D
    W_lambda = alpha lambda delta W(s),   W(s) = 1/s^2 - K1(s)/s

The array kernels take (n, 4) points and return values, gradients (n, 4) and
Laplacians; they do no range checks and are what the quadrature integrands
call. The pointwise functions validate their input and return FieldEval.
"""
import logging
import math
from typing import Sequence, Tuple

import numpy as np

from src.exceptions import SingularPointError
from src.geometry.boundary import DomainLike, as_domain
from src.geometry.domains import sphere_grid
from src.models.schemas import ALPHA, ConcentrationConfig, FieldEval
from src.specialfn.bessel import correction_profile, k0_k1_arrays

logger = logging.getLogger(__name__)

SINGULAR_RADIUS = 1e-14

Arrays = Tuple[np.ndarray, np.ndarray, np.ndarray]


def _offsets(x: np.ndarray, xi: Sequence[float]) -> np.ndarray:
    return np.atleast_2d(np.asarray(x, dtype=float)) - np.asarray(xi, dtype=float)


def bubble_arrays(x: np.ndarray, delta: float, xi: Sequence[float]) -> Arrays:
    """U, grad U and Laplacian of U (= -U^3)."""
    y = _offsets(x, xi)
    denom = delta * delta + np.sum(y * y, axis=1)
    u = ALPHA * delta / denom
    grad = (-2.0 * ALPHA * delta / denom ** 2)[:, None] * y
    lap = -8.0 * ALPHA * delta ** 3 / denom ** 3
    return u, grad, lap


def correction_arrays(x: np.ndarray, lam: float, delta: float, xi: Sequence[float]) -> Arrays:
    """W_lambda, its gradient and Laplacian alpha lambda^2 delta (W'' + 3 W'/s)."""
    y = _offsets(x, xi)
    r = np.linalg.norm(y, axis=1)
    root = math.sqrt(lam)
    s = root * r
    w, wp, wpp = correction_profile(s)
    amp = ALPHA * lam * delta
    value = amp * w
    grad = (amp * root * wp / r)[:, None] * y
    lap = amp * lam * (wpp + 3.0 * wp / s)
    return value, grad, lap


def correction_closed_arrays(x: np.ndarray, lam: float, delta: float, xi: Sequence[float]) -> np.ndarray:
    """alpha (delta/|y|^2 - sqrt(lambda) delta K1(sqrt(lambda)|y|)/|y|)."""
    y = _offsets(x, xi)
    r = np.linalg.norm(y, axis=1)
    root = math.sqrt(lam)
    _, k1 = k0_k1_arrays(root * r)
    return ALPHA * (delta / r ** 2 - root * delta * k1 / r)


def ansatz_arrays(x: np.ndarray, lam: float, delta: float, xi: Sequence[float]) -> Arrays:
    """V = U - W_lambda with gradient and Laplacian."""
    u, ug, ul = bubble_arrays(x, delta, xi)
    w, wg, wl = correction_arrays(x, lam, delta, xi)
    return u - w, ug - wg, ul - wl


def split_ansatz_arrays(x: np.ndarray, lam: float, delta: float,
                        xi: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """V = alpha (m1 + m2): the algebraic part m1 and the K1 part m2.

    m1 = -delta^3 / (|y|^2 D) and m2 = sqrt(lambda) delta K1(sqrt(lambda)|y|) / |y|.
    """
    y = _offsets(x, xi)
    r2 = np.sum(y * y, axis=1)
    r = np.sqrt(r2)
    root = math.sqrt(lam)
    _, k1 = k0_k1_arrays(root * r)
    m1 = -delta ** 3 / (r2 * (delta * delta + r2))
    m2 = root * delta * k1 / r
    return m1, m2


def _point(x: Sequence[float], xi: Sequence[float]) -> Tuple[np.ndarray, float]:
    x = np.asarray(x, dtype=float).reshape(4)
    dist = float(np.linalg.norm(x - np.asarray(xi, dtype=float)))
    return x, dist


def _check_params(lam: float, delta: float) -> None:
    if not (lam > 0.0 and delta > 0.0):
        raise ValueError(f"lambda and delta must be positive, got lambda={lam}, delta={delta}")


def bubble(delta: float, xi: Sequence[float], x: Sequence[float]) -> FieldEval:
    """U_{delta, xi}(x) = alpha delta / (delta^2 + |x - xi|^2)."""
    if not delta > 0.0:
        raise ValueError(f"delta must be positive, got {delta}")
    u, grad, _ = bubble_arrays(np.asarray(x, dtype=float), delta, xi)
    return FieldEval(value=float(u[0]), gradient=grad[0].tolist())


def correction_field(lam: float, delta: float, xi: Sequence[float], x: Sequence[float]) -> FieldEval:
    """W_{lambda, delta, xi}(x) = alpha lambda delta W(sqrt(lambda) |x - xi|).

    Raises:
        SingularPointError: if |x - xi| < 1e-14.
    """
    _check_params(lam, delta)
    x, dist = _point(x, xi)
    if dist < SINGULAR_RADIUS:
        raise SingularPointError(f"correction field is singular at xi (|x - xi| = {dist:.3g})")
    w, grad, _ = correction_arrays(x, lam, delta, xi)
    return FieldEval(value=float(w[0]), gradient=grad[0].tolist())


def correction_field_closed_form(lam: float, delta: float, xi: Sequence[float], x: Sequence[float]) -> float:
    """The K1 representation of W_lambda, for cross-checks where it is well conditioned."""
    _check_params(lam, delta)
    x, dist = _point(x, xi)
    if dist < SINGULAR_RADIUS:
        raise SingularPointError(f"correction field is singular at xi (|x - xi| = {dist:.3g})")
    return float(correction_closed_arrays(x, lam, delta, xi)[0])


def _component(cfg: ConcentrationConfig, i: int) -> Tuple[float, np.ndarray]:
    if i not in (0, 1):
        raise ValueError(f"component index must be 0 or 1, got {i}")
    return cfg.delta[i], cfg.xi[i].xi_array


def ansatz_v(cfg: ConcentrationConfig, i: int, x: Sequence[float]) -> FieldEval:
    """V_i = U_i - W_i at a point off xi_i."""
    delta, xi = _component(cfg, i)
    x, dist = _point(x, xi)
    if dist < SINGULAR_RADIUS:
        raise SingularPointError(f"ansatz is singular at xi_{i}")
    v, grad, _ = ansatz_arrays(x, cfg.lam, delta, xi)
    return FieldEval(value=float(v[0]), gradient=grad[0].tolist())


def pde_residual_arrays(x: np.ndarray, lam: float, delta: float,
                        xi: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Residual -Laplace V + lambda V - U^3 - lambda (U - alpha delta / |y|^2) and its scale |U^3| + lambda U."""
    y = _offsets(x, xi)
    r2 = np.sum(y * y, axis=1)
    u, _, u_lap = bubble_arrays(x, delta, xi)
    w, _, w_lap = correction_arrays(x, lam, delta, xi)
    residual = -(u_lap - w_lap) + lam * (u - w) - u ** 3 - lam * (u - ALPHA * delta / r2)
    return residual, np.abs(u ** 3) + lam * u


def ansatz_pde_residual(cfg: ConcentrationConfig, i: int, x: Sequence[float],
                        relative: bool = False) -> float:
    """R = -Laplace V + lambda V - U^3 - lambda (U - alpha delta / |x - xi|^2).

    Every term uses the closed-form second derivatives. With ``relative`` the
    residual is divided by |U^3| + lambda U.
    """
    delta, xi = _component(cfg, i)
    x, dist = _point(x, xi)
    if dist < SINGULAR_RADIUS:
        raise SingularPointError(f"residual is singular at xi_{i}")
    residual, scale = pde_residual_arrays(x, cfg.lam, delta, xi)
    value = float(residual[0])
    if relative:
        value = abs(value) / float(scale[0])
    return value


def interior_samples(domain: DomainLike, n_directions: int = 400,
                     fractions: Sequence[float] = (0.2, 0.4, 0.6, 0.8, 0.95, 1.0)) -> np.ndarray:
    """Deterministic points of the closed domain on rays of a sphere grid."""
    dom = as_domain(domain)
    omega = sphere_grid(n_directions)
    rho = dom.rho(omega)
    return np.concatenate([f * rho[:, None] * omega for f in fractions])


def interaction_bound(cfg: ConcentrationConfig, i: int, domain: DomainLike,
                      n_directions: int = 400) -> float:
    """max |V_i| / delta_i over sample points of Omega with |x - xi_i| >= eta / 2."""
    delta, xi = _component(cfg, i)
    points = interior_samples(domain, n_directions)
    far = np.linalg.norm(points - xi, axis=1) >= 0.5 * cfg.eta
    v, _, _ = ansatz_arrays(points[far], cfg.lam, delta, xi)
    bound = float(np.max(np.abs(v)) / delta)
    logger.debug("interaction bound for component %d at lambda=%.4g: %.6g", i, cfg.lam, bound)
    return bound
