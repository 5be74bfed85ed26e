"""L^p norms and the H^1_lambda inner product on top of the product quadrature."""
from typing import Callable, Optional, Tuple

import numpy as np

from src.geometry.boundary import DomainLike
from src.models.schemas import QuadResult, SingularityHint, Tolerance
from src.quadrature.integrator import integrate_boundary, integrate_domain

GradField = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]

SUPPORTED_EXPONENTS = (4.0 / 3.0, 1.5, 2.0, 3.0, 4.0)


def _check_exponent(p: float) -> float:
    for q in SUPPORTED_EXPONENTS:
        if abs(p - q) <= 1e-12:
            return q
    raise ValueError(f"unsupported exponent p={p}; expected one of 4/3, 3/2, 2, 3, 4")


def root_result(integral: QuadResult, p: float) -> QuadResult:
    """Turn a result for the integral of |u|^p into one for the norm."""
    value = max(integral.value, 0.0)
    norm = value ** (1.0 / p)
    if value > 0.0:
        err = integral.err_est * norm / (p * value)
    else:
        err = integral.err_est ** (1.0 / p)
    return integral.model_copy(update={"value": norm, "err_est": err})


def lp_norm(
    u: Callable[..., np.ndarray],
    p: float,
    domain: DomainLike,
    region: str = "domain",
    hints: Optional[SingularityHint] = None,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> QuadResult:
    """L^p norm of u over Omega or over its boundary.

    Args:
        u: Field values; called as u(x) on the domain and u(x, inward_normal)
            on the boundary.
        p: One of 4/3, 3/2, 2, 3, 4.
        region: "domain" or "boundary".

    Returns:
        QuadResult whose value is the norm and whose error is propagated from
        the integral of |u|^p.
    """
    p = _check_exponent(p)
    if region == "domain":
        integral = integrate_domain(lambda x: np.abs(u(x)) ** p, domain, hints, tol, workers)
    elif region == "boundary":
        integral = integrate_boundary(lambda x, n: np.abs(u(x, n)) ** p, domain, hints, tol, workers)
    else:
        raise ValueError(f"region must be 'domain' or 'boundary', got {region!r}")
    return root_result(integral, p)


def h1_lambda_inner(
    u: GradField,
    v: GradField,
    lam: float,
    domain: DomainLike,
    hints: Optional[SingularityHint] = None,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> QuadResult:
    """<u, v> = int grad u . grad v + lam int u v over Omega.

    Fields map (n, 4) points to (values (n,), gradients (n, 4)).
    """
    def integrand(x: np.ndarray) -> np.ndarray:
        uv, ug = u(x)
        vv, vg = v(x)
        return np.sum(ug * vg, axis=1) + lam * uv * vv

    return integrate_domain(integrand, domain, hints, tol, workers)
