"""Boundary points, local graph charts and mean curvature.

In the chart at a boundary point xi, x = xi + sum_i y_i t_i + s * nu with nu
the inward normal; the domain lies above the graph s = g(y) where
g(y) = sum_i g_i y_i^2 + sum_{i<=j<=l} g_ijl y_i y_j y_l + O(|y|^4) once the
frame is rotated to the principal directions. The mean curvature is the
average principal curvature, H = (2/3) sum_i g_i.
"""
import itertools
import logging
from typing import Optional, Tuple, Union

import numpy as np

from src.config import config
from src.exceptions import GeometryError
from src.geometry.domains import StarDomain, complete_basis
from src.models.schemas import CUBIC_INDEX, BoundaryPoint, CurvatureEval, DomainSpec

logger = logging.getLogger(__name__)

DomainLike = Union[StarDomain, DomainSpec]

_QUADRATIC_INDEX = [(i, j) for i in range(3) for j in range(i, 3)]
_QUARTIC_INDEX = list(itertools.combinations_with_replacement(range(3), 4))
_N_DIRECTIONS = 50
_RADII = (0.25, 0.5, 0.75, 1.0)


def as_domain(domain: DomainLike) -> StarDomain:
    return domain if isinstance(domain, StarDomain) else StarDomain(domain)


def _unit(omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=float).reshape(4)
    norm = np.linalg.norm(omega)
    if not np.isfinite(norm) or norm == 0.0:
        raise GeometryError("direction must be a nonzero finite 4-vector")
    return omega / norm


def tangent_frame(normal: np.ndarray) -> np.ndarray:
    """Orthonormal tangent triple (rows) orthogonal to ``normal``."""
    return complete_basis(np.asarray(normal, dtype=float)[None, :])


def boundary_point(domain: DomainLike, omega) -> BoundaryPoint:
    """Boundary point in direction omega with inward normal and tangent frame.

    Args:
        domain: StarDomain or DomainSpec.
        omega: Direction in R^4 (normalized here).

    Returns:
        BoundaryPoint with xi = rho(omega) omega, nu = -grad F / |grad F|.

    Raises:
        GeometryError: for a zero direction or a profile below rho_min.
    """
    dom = as_domain(domain)
    omega = _unit(omega)
    rho = float(dom.rho(omega[None, :])[0])
    if rho < dom.rho_min * (1.0 - 1e-12):
        raise GeometryError(f"rho={rho:.6g} below rho_min={dom.rho_min:.6g}")
    xi = rho * omega
    grad = dom.level_grad(xi[None, :])[0]
    normal = -grad / np.linalg.norm(grad)
    frame = tangent_frame(normal)
    return BoundaryPoint(
        omega=omega.tolist(),
        xi=xi.tolist(),
        normal=normal.tolist(),
        tangent_frame=frame.tolist(),
    )


def mean_curvature_fd(domain: DomainLike, omega: np.ndarray, step: Optional[float] = None) -> np.ndarray:
    """Mean curvature from the finite-difference shape operator of F.

    H = trace(P Hess(F) P) / (3 |grad F|) with P the tangential projector;
    vectorized over directions.
    """
    dom = as_domain(domain)
    omega = np.atleast_2d(np.asarray(omega, dtype=float))
    omega = omega / np.linalg.norm(omega, axis=1)[:, None]
    x = dom.boundary(omega)
    grad = dom.level_grad(x)
    gnorm = np.linalg.norm(grad, axis=1)
    n_hat = grad / gnorm[:, None]
    hess = dom.level_hessian(x, step)
    trace = np.trace(hess, axis1=1, axis2=2) - np.einsum("ni,nij,nj->n", n_hat, hess, n_hat)
    return trace / (3.0 * gnorm)


def _chart_directions() -> np.ndarray:
    """Fibonacci directions on S^2."""
    k = np.arange(_N_DIRECTIONS) + 0.5
    z = 1.0 - 2.0 * k / _N_DIRECTIONS
    phi = np.pi * (1.0 + 5.0 ** 0.5) * k
    s = np.sqrt(1.0 - z * z)
    return np.stack([s * np.cos(phi), s * np.sin(phi), z], axis=1)


def _graph_heights(dom: StarDomain, xi: np.ndarray, frame: np.ndarray, normal: np.ndarray,
                   y: np.ndarray) -> np.ndarray:
    """Solve F(xi + T y + s nu) = 0 for s by Newton, per sample."""
    base = xi[None, :] + y @ frame
    s = np.zeros(len(y))
    for _ in range(40):
        x = base + s[:, None] * normal[None, :]
        value = dom.level_value(x)
        slope = dom.level_grad(x) @ normal
        delta = value / slope
        s -= delta
        if np.max(np.abs(delta)) <= 1e-16 * max(1.0, float(np.linalg.norm(xi))):
            break
    return s


def _design(y: np.ndarray, h: float) -> np.ndarray:
    z = y / h
    columns = [z[:, i] * z[:, j] for i, j in _QUADRATIC_INDEX]
    columns += [z[:, i] * z[:, j] * z[:, l] for i, j, l in CUBIC_INDEX]
    columns += [np.prod(z[:, list(idx)], axis=1) for idx in _QUARTIC_INDEX]
    return np.stack(columns, axis=1)


def _multiplicity(idx: Tuple[int, ...]) -> int:
    return len(set(itertools.permutations(idx)))


def _fit_chart(dom: StarDomain, p: BoundaryPoint, h: float) -> Tuple[np.ndarray, np.ndarray, float]:
    frame, normal, xi = p.frame_array, p.normal_array, p.xi_array
    y = np.concatenate([r * h * _chart_directions() for r in _RADII])
    s = _graph_heights(dom, xi, frame, normal, y)
    coef, *_ = np.linalg.lstsq(_design(y, h), s, rcond=None)
    fitted = _design(y, h) @ coef
    residual = float(np.max(np.abs(s - fitted)) / max(np.max(np.abs(s)), 1e-300))
    quad = coef[: len(_QUADRATIC_INDEX)] / h ** 2
    cubic = coef[len(_QUADRATIC_INDEX): len(_QUADRATIC_INDEX) + len(CUBIC_INDEX)] / h ** 3
    return quad, cubic, residual


def local_graph_coeffs(domain: DomainLike, p: BoundaryPoint) -> BoundaryPoint:
    """Quadratic and cubic coefficients of the boundary graph at p.

    Boundary samples in the chart (Newton solves along the normal) are fitted
    by a full quartic least-squares polynomial; the chart radius starts at
    ``chart_radius_factor * rho_min`` and is halved while the relative fit
    residual exceeds ``graph_fit_tol``. The quadratic form is then
    diagonalized, eigenvalues sorted descending with eigenvector signs fixed
    by the first nonzero component, and the cubic tensor is rotated into the
    same principal frame.

    Returns:
        Copy of p with the principal tangent frame, graph_g, graph_cubic,
        fit_residual and chart_radius filled in.

    Raises:
        GeometryError: if no chart radius meets the residual tolerance.
    """
    dom = as_domain(domain)
    h = config.get('geometry.chart_radius_factor', 0.1) * dom.rho_min
    tol = config.get('geometry.graph_fit_tol', 1e-7)
    max_halvings = config.get('geometry.max_halvings', 10)

    for _ in range(max_halvings + 1):
        quad, cubic, residual = _fit_chart(dom, p, h)
        if residual <= tol:
            break
        logger.debug("chart residual %.3e at radius %.3e; halving", residual, h)
        h *= 0.5
    else:
        raise GeometryError(
            f"graph fit residual {residual:.3e} above {tol:.1e}: insufficient smoothness or resolution"
        )

    gmat = np.zeros((3, 3))
    for c, (i, j) in zip(quad, _QUADRATIC_INDEX):
        if i == j:
            gmat[i, i] = c
        else:
            gmat[i, j] = gmat[j, i] = 0.5 * c
    eigvals, eigvecs = np.linalg.eigh(gmat)
    order = np.argsort(-eigvals, kind="stable")
    eigvals, eigvecs = eigvals[order], eigvecs[:, order]
    for col in range(3):
        nonzero = np.flatnonzero(np.abs(eigvecs[:, col]) > 1e-12)
        if nonzero.size and eigvecs[nonzero[0], col] < 0.0:
            eigvecs[:, col] *= -1.0

    tensor = np.zeros((3, 3, 3))
    for c, idx in zip(cubic, CUBIC_INDEX):
        for perm in set(itertools.permutations(idx)):
            tensor[perm] = c / _multiplicity(idx)
    rotated = np.einsum("abc,ai,bj,ck->ijk", tensor, eigvecs, eigvecs, eigvecs)
    cubic_principal = [float(rotated[idx] * _multiplicity(idx)) for idx in CUBIC_INDEX]

    frame = eigvecs.T @ p.frame_array
    return p.model_copy(update={
        "tangent_frame": frame.tolist(),
        "graph_g": eigvals.tolist(),
        "graph_cubic": cubic_principal,
        "fit_residual": residual,
        "chart_radius": h,
    })


def mean_curvature_gradient_fd(dom: StarDomain, p: BoundaryPoint, step: float) -> np.ndarray:
    """Tangential derivative of H along each frame vector by central differences."""
    xi = p.xi_array
    grads = np.empty(3)
    for i, t in enumerate(p.frame_array):
        omegas = np.array([xi + step * t, xi - step * t])
        omegas /= np.linalg.norm(omegas, axis=1)[:, None]
        h_vals = mean_curvature_fd(dom, omegas)
        points = dom.boundary(omegas)
        grads[i] = (h_vals[0] - h_vals[1]) / float((points[0] - points[1]) @ t)
    return grads


def mean_curvature(domain: DomainLike, p: BoundaryPoint, cross_check: bool = True) -> CurvatureEval:
    """H = (2/3) sum g_i and its tangential gradient from the cubic coefficients.

    The gradient component along t_i is
    (2/3) (sum_{j<i} g_jji + sum_{j>i} g_ijj + 3 g_iii).
    With ``cross_check`` the finite-difference shape operator value and
    gradient are attached for comparison.
    """
    dom = as_domain(domain)
    if p.graph_g is None or p.graph_cubic is None:
        p = local_graph_coeffs(dom, p)
    h = 2.0 / 3.0 * float(sum(p.graph_g))
    grad = []
    for i in range(3):
        total = 3.0 * p.cubic(i, i, i)
        total += sum(p.cubic(j, j, i) for j in range(3) if j != i)
        grad.append(2.0 / 3.0 * total)

    h_fd = grad_fd = None
    if cross_check:
        h_fd = float(mean_curvature_fd(dom, p.omega)[0])
        grad_fd = mean_curvature_gradient_fd(dom, p, 1e-3 * dom.rho_min).tolist()
    return CurvatureEval(h=h, h_grad=grad, h_fd=h_fd, h_grad_fd=grad_fd)
