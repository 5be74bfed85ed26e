"""Radial x S^3 product quadrature over a star-shaped domain, its boundary and balls.

Directions on S^3 are written around a pole p as
omega = cos(psi) p + sin(psi) B^T s with s on S^2, so d omega = sin^2(psi) dpsi ds.
Every concentration point with a nonzero direction gets a polar cap whose psi
panels are graded geometrically toward the pole; a global grid covers the rest
of S^3 through a smooth partition of unity. Along each ray the radial panels
are graded toward the point of closest approach to the nearest center.

Each region is integrated at increasing Gauss-Legendre orders; the difference
between consecutive orders is the error estimate. Regions freeze once their
share of the tolerance is met.
"""
import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from src.config import config
from src.geometry.boundary import DomainLike, as_domain
from src.geometry.domains import StarDomain, complete_basis
from src.models.schemas import QuadResult, SingularityHint, Tolerance
from src.quadrature.rules import cap_weight, geometric_edges, graded_ray_edges, panel_rule, s2_rule

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]
BoundaryIntegrand = Callable[[np.ndarray, np.ndarray], np.ndarray]

_BLEND_PANELS = 4
_DOMAIN_CHUNK = 256
_BOUNDARY_CHUNK = 4096
_ORIGIN_TOL = 1e-12


@dataclass(frozen=True)
class _Region:
    """One angular patch of S^3 with its own pole and psi (or tau) panels."""
    label: str
    pole: np.ndarray
    basis: np.ndarray
    edges: np.ndarray
    fine: bool
    blend: Optional[Tuple[np.ndarray, float]] = None
    # (center, radius) for a ball region in tau coordinates
    ball: Optional[Tuple[np.ndarray, float]] = None

    def s2_order(self, order: int) -> int:
        return order // 2 + 2 if self.fine else order + 4


def _tolerance(tol: Optional[Tolerance]) -> Tolerance:
    if tol is not None:
        return tol
    return Tolerance(rel=config.rel_tol_smooth, abs=config.get('quadrature.abs_tol', 1e-12))


def _centers(hints: Optional[SingularityHint]) -> np.ndarray:
    if hints is None or not hints.centers:
        return np.zeros((0, 4))
    return np.asarray(hints.centers, dtype=float)


def _min_panel(hints: Optional[SingularityHint]) -> float:
    return hints.min_panel if hints is not None else 1e-3


def _ratio(hints: Optional[SingularityHint]) -> float:
    return hints.grading_ratio if hints is not None else config.get('quadrature.grading_ratio', 0.5)


def _cap_poles(centers: np.ndarray) -> List[Tuple[np.ndarray, float]]:
    """Distinct nonzero center directions with their radii, in center order."""
    poles: List[Tuple[np.ndarray, float]] = []
    for c in centers:
        norm = float(np.linalg.norm(c))
        if norm <= _ORIGIN_TOL:
            continue
        pole = c / norm
        if any(float(pole @ p) > 1.0 - 1e-12 for p, _ in poles):
            continue
        poles.append((pole, norm))
    return poles


def _cap_angle(poles: List[Tuple[np.ndarray, float]]) -> float:
    cap = config.get('quadrature.cap_angle', 0.5)
    for a in range(len(poles)):
        for b in range(a + 1, len(poles)):
            angle = float(np.arccos(np.clip(poles[a][0] @ poles[b][0], -1.0, 1.0)))
            cap = min(cap, 0.45 * angle)
    return cap


def _blend_edges(psi_cap: float) -> np.ndarray:
    return np.linspace(0.5 * psi_cap, psi_cap, _BLEND_PANELS + 1)


def _sphere_regions(hints: Optional[SingularityHint]) -> List[_Region]:
    """Polar caps around every center direction plus the blended global grid."""
    poles = _cap_poles(_centers(hints))
    n_global = config.get('quadrature.global_panels', 12)
    if not poles:
        pole = np.array([1.0, 0.0, 0.0, 0.0])
        edges = np.linspace(0.0, np.pi, n_global + 1)
        return [_Region("global", pole, complete_basis(pole[None, :]), edges, fine=False)]

    psi_cap = _cap_angle(poles)
    ratio = _ratio(hints)
    regions = []
    for k, (pole, norm) in enumerate(poles):
        inner = geometric_edges(0.5 * psi_cap, _min_panel(hints) / norm, ratio)
        edges = np.concatenate([inner, _blend_edges(psi_cap)[1:]])
        regions.append(_Region(f"cap{k}", pole, complete_basis(pole[None, :]), edges, fine=True))

    stack = np.array([p for p, _ in poles])
    edges = np.concatenate([_blend_edges(psi_cap), np.linspace(psi_cap, np.pi, n_global + 1)[1:]])
    regions.append(_Region(
        "global", poles[0][0], complete_basis(poles[0][0][None, :]), edges,
        fine=False, blend=(stack, psi_cap),
    ))
    return regions


def _ball_region(center: np.ndarray, radius: float, hints: Optional[SingularityHint]) -> _Region:
    norm = float(np.linalg.norm(center))
    if not 0.0 < radius < norm:
        raise ValueError(f"ball radius {radius:.6g} must be positive and below |center| = {norm:.6g}")
    pole = center / norm
    edges = geometric_edges(0.5 * np.pi, _min_panel(hints) / radius, _ratio(hints))
    return _Region("ball", pole, complete_basis(pole[None, :]), edges, fine=True, ball=(center, radius))


def _angular_nodes(region: _Region, order: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Directions, angular weights and polar angles of a region at one order."""
    t, wt = panel_rule(region.edges, order)
    if region.ball is not None:
        center, radius = region.ball
        kappa = radius / float(np.linalg.norm(center))
        psi = np.arcsin(kappa * np.sin(t))
        wt = wt * kappa * np.cos(t) / np.cos(psi)
    else:
        psi = t
    dirs, ws = s2_rule(region.s2_order(order))
    tangent = dirs @ region.basis
    omega = np.cos(psi)[:, None, None] * region.pole + np.sin(psi)[:, None, None] * tangent[None, :, :]
    weight = (wt * np.sin(psi) ** 2)[:, None] * ws[None, :]
    omega = omega.reshape(-1, 4)
    weight = weight.ravel()
    psi = np.repeat(psi, len(ws))

    if region.ball is None and region.fine:
        weight = weight * cap_weight(psi, region.edges[-1])
    if region.blend is not None:
        poles, psi_cap = region.blend
        angles = np.arccos(np.clip(omega @ poles.T, -1.0, 1.0))
        weight = weight * (1.0 - np.sum(cap_weight(angles, psi_cap), axis=1))
    keep = weight != 0.0
    return omega[keep], weight[keep], psi[keep]


def _ray_focus(omega: np.ndarray, upper: np.ndarray, centers: np.ndarray,
               min_panel: float) -> Tuple[np.ndarray, np.ndarray]:
    """Closest-approach radius to the nearest center and the first panel width."""
    if len(centers) == 0:
        return np.zeros(len(omega)), np.maximum(upper, min_panel)
    proj = np.clip(omega @ centers.T, 0.0, upper[:, None])
    gaps = np.linalg.norm(centers[None, :, :] - proj[:, :, None] * omega[:, None, :], axis=2)
    nearest = np.argmin(gaps, axis=1)
    rows = np.arange(len(omega))
    focus = proj[rows, nearest]
    h = np.maximum(min_panel, 0.5 * gaps[rows, nearest])
    return focus, np.minimum(h, np.maximum(0.25 * upper, min_panel))


def _weighted_sum(weights: np.ndarray, values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float).reshape(len(weights), -1)
    return np.sum(weights[:, None] * values, axis=0)


class _Job:
    """Evaluates one region at one order, chunk by chunk."""

    def __init__(self, dom: StarDomain, hints: Optional[SingularityHint], workers: int):
        self.dom = dom
        self.centers = _centers(hints)
        self.min_panel = _min_panel(hints)
        self.ratio = _ratio(hints)
        self.workers = workers

    def _run_chunks(self, fn: Callable[[slice], Tuple[np.ndarray, int]], n: int,
                    size: int) -> Tuple[np.ndarray, int]:
        slices = [slice(i, min(i + size, n)) for i in range(0, n, size)]
        results: List[Optional[Tuple[np.ndarray, int]]] = [None] * len(slices)
        if self.workers <= 1 or len(slices) == 1:
            results = [fn(s) for s in slices]
        else:
            with ThreadPoolExecutor(max_workers=self.workers) as executor:
                future_to_index = {executor.submit(fn, s): i for i, s in enumerate(slices)}
                for future in as_completed(future_to_index):
                    results[future_to_index[future]] = future.result()
        # fixed chunk order keeps the sum independent of the worker count
        width = max(len(r[0]) for r in results)
        partial = np.stack([np.broadcast_to(r[0], width) for r in results])
        return np.sum(partial, axis=0), sum(r[1] for r in results)

    def solid(self, f: Integrand, region: _Region, order: int) -> Tuple[np.ndarray, int]:
        omega, weight, psi = _angular_nodes(region, order)
        if len(omega) == 0:
            return np.zeros(1), 0
        rho = self.dom.rho(omega)
        if region.ball is not None:
            center, radius = region.ball
            norm = float(np.linalg.norm(center))
            mid = norm * np.cos(psi)
            half = np.sqrt(np.maximum(radius ** 2 - (norm * np.sin(psi)) ** 2, 0.0))
            lower = np.maximum(mid - half, 0.0)
            upper = np.maximum(np.minimum(mid + half, rho), lower)
            focus = np.clip(mid, lower, upper)
            h = np.maximum(self.min_panel, 0.5 * norm * np.sin(psi))
        else:
            lower = np.zeros(len(omega))
            upper = rho
            focus, h = _ray_focus(omega, upper, self.centers, self.min_panel)

        def chunk(s: slice) -> Tuple[np.ndarray, int]:
            edges = graded_ray_edges(lower[s], upper[s], focus[s], h[s], self.ratio)
            r, wr = panel_rule(edges, order)
            w = weight[s, None] * wr * r ** 3
            rows, cols = np.nonzero(w)
            if rows.size == 0:
                return np.zeros(1), 0
            points = r[rows, cols][:, None] * omega[s][rows]
            return _weighted_sum(w[rows, cols], f(points)), rows.size

        return self._run_chunks(chunk, len(omega), _DOMAIN_CHUNK)

    def surface(self, f: BoundaryIntegrand, region: _Region, order: int) -> Tuple[np.ndarray, int]:
        omega, weight, _ = _angular_nodes(region, order)
        if len(omega) == 0:
            return np.zeros(1), 0

        def chunk(s: slice) -> Tuple[np.ndarray, int]:
            rho, grad = self.dom.rho_and_grad(omega[s])
            x = rho[:, None] * omega[s]
            jac = rho ** 2 * np.sqrt(rho ** 2 + np.sum(grad * grad, axis=1))
            outward = self.dom.level_grad(x)
            normal = -outward / np.linalg.norm(outward, axis=1)[:, None]
            return _weighted_sum(weight[s] * jac, f(x, normal)), len(x)

        return self._run_chunks(chunk, len(omega), _BOUNDARY_CHUNK)


def _nested(evaluate: Callable[[_Region, int], Tuple[np.ndarray, int]], regions: List[_Region],
            tol: Tolerance, label: str) -> List[QuadResult]:
    """Raise the order region by region until the consecutive-order differences meet tol."""
    orders = config.quadrature_orders
    max_evals = config.get('quadrature.max_evals', 10_000_000)
    values: List[Optional[np.ndarray]] = [None] * len(regions)
    errors: List[Optional[np.ndarray]] = [None] * len(regions)
    done = [False] * len(regions)
    n_evals = 0
    used = orders[0]

    for order in orders:
        used = order
        for k, region in enumerate(regions):
            if done[k]:
                continue
            value, count = evaluate(region, order)
            n_evals += count
            if values[k] is not None:
                width = max(len(value), len(values[k]))
                errors[k] = np.abs(np.broadcast_to(value, width) - np.broadcast_to(values[k], width))
            values[k] = value
        width = max(len(v) for v in values)
        total = np.sum([np.broadcast_to(v, width) for v in values], axis=0)
        allowed = np.maximum(tol.abs, tol.rel * np.abs(total)) / len(regions)
        for k in range(len(regions)):
            if not done[k] and errors[k] is not None and np.all(errors[k] <= allowed):
                done[k] = True
        logger.debug("%s: order %d, %d evaluations, regions done %s", label, order, n_evals, done)
        if all(done):
            break
        if n_evals >= max_evals:
            logger.warning("%s: evaluation budget %d exhausted at order %d", label, max_evals, order)
            break

    width = max(len(v) for v in values)
    total = np.sum([np.broadcast_to(v, width) for v in values], axis=0)
    if all(e is not None for e in errors):
        err = np.sum([np.broadcast_to(e, width) for e in errors], axis=0)
    else:
        err = np.abs(total)
    bound = np.maximum(tol.abs, tol.rel * np.abs(total))
    results = []
    for v, e, b in zip(total, err, bound):
        ok = bool(all(done) and e <= b)
        results.append(QuadResult(value=float(v), err_est=float(e), n_evals=n_evals, converged=ok, order=used))
    if not all(r.converged for r in results):
        logger.warning("%s: not converged (max err %.3e)", label, float(np.max(err)))
    return results


def _workers(workers: Optional[int]) -> int:
    return max(1, int(workers if workers is not None else config.get('quadrature.workers', 1)))


def integrate_domain_vector(
    f: Integrand,
    domain: DomainLike,
    hints: Optional[SingularityHint] = None,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> List[QuadResult]:
    """Integrals over Omega of every column of a vector-valued integrand.

    Args:
        f: Maps (n, 4) points to (n,) or (n, k) values; pure and finite off
            the hint centers.
        domain: StarDomain or DomainSpec.
        hints: Concentration points to grade toward.
        tol: Relative and absolute tolerance (default: smooth tolerance).
        workers: Thread count for chunk evaluation.

    Returns:
        One QuadResult per column; never raises on non-convergence.
    """
    dom = as_domain(domain)
    job = _Job(dom, hints, _workers(workers))
    return _nested(lambda region, order: job.solid(f, region, order),
                   _sphere_regions(hints), _tolerance(tol), "domain")


def integrate_domain(f: Integrand, domain: DomainLike, hints: Optional[SingularityHint] = None,
                     tol: Optional[Tolerance] = None, workers: Optional[int] = None) -> QuadResult:
    """Integral of a scalar integrand over Omega."""
    return integrate_domain_vector(f, domain, hints, tol, workers)[0]


def integrate_boundary_vector(
    f: BoundaryIntegrand,
    domain: DomainLike,
    hints: Optional[SingularityHint] = None,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> List[QuadResult]:
    """Integrals over the boundary with the exact metric factor rho^2 sqrt(rho^2 + |grad rho|^2).

    The integrand receives the boundary points and the inward unit normals.
    """
    dom = as_domain(domain)
    job = _Job(dom, hints, _workers(workers))
    return _nested(lambda region, order: job.surface(f, region, order),
                   _sphere_regions(hints), _tolerance(tol), "boundary")


def integrate_boundary(f: BoundaryIntegrand, domain: DomainLike, hints: Optional[SingularityHint] = None,
                       tol: Optional[Tolerance] = None, workers: Optional[int] = None) -> QuadResult:
    """Integral of a scalar integrand over the boundary."""
    return integrate_boundary_vector(f, domain, hints, tol, workers)[0]


def integrate_ball_vector(
    f: Integrand,
    domain: DomainLike,
    center: Sequence[float],
    radius: float,
    hints: Optional[SingularityHint] = None,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> List[QuadResult]:
    """Integrals over Omega intersected with the ball B_radius(center).

    Rays from the origin are parametrized by sin(psi) = (radius/|center|) sin(tau)
    so the chord through the ball has the closed-form limits
    |center| cos(psi) -/+ radius cos(tau).

    Raises:
        ValueError: if radius >= |center| (the ball must not contain the origin).
    """
    dom = as_domain(domain)
    center = np.asarray(center, dtype=float)
    region = _ball_region(center, float(radius), hints)
    job = _Job(dom, hints, _workers(workers))
    return _nested(lambda reg, order: job.solid(f, reg, order), [region], _tolerance(tol), "ball")


def integrate_ball(f: Integrand, domain: DomainLike, center: Sequence[float], radius: float,
                   hints: Optional[SingularityHint] = None, tol: Optional[Tolerance] = None,
                   workers: Optional[int] = None) -> QuadResult:
    """Integral of a scalar integrand over Omega intersected with a ball."""
    return integrate_ball_vector(f, domain, center, radius, hints, tol, workers)[0]
