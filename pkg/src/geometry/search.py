"""Boundary curvature scans and multi-start search for strict maxima of H."""
import logging
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import minimize

from src.config import config
from src.geometry.boundary import DomainLike, as_domain, boundary_point, mean_curvature_fd
from src.geometry.domains import StarDomain, complete_basis, sphere_grid
from src.models.schemas import CurvatureMaxima, CurvatureMaximum

logger = logging.getLogger(__name__)

_NEIGHBOURS = 12
_STRICT_ANGLE = 5e-3


def scan_curvature(domain: DomainLike, n_points: Optional[int] = None) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mean curvature on a deterministic boundary grid.

    Returns:
        (omega, xi, H) with shapes (n, 4), (n, 4), (n,).
    """
    dom = as_domain(domain)
    n_points = n_points or config.get('geometry.scan_points', 500)
    omega = sphere_grid(n_points)
    return omega, dom.boundary(omega), mean_curvature_fd(dom, omega)


def _tangent_chart(omega0: np.ndarray):
    basis = complete_basis(omega0[None, :])

    def to_sphere(s: np.ndarray) -> np.ndarray:
        w = omega0 + basis.T @ s
        return w / np.linalg.norm(w)

    return to_sphere


def _ascend(dom: StarDomain, omega0: np.ndarray, spacing: float) -> Tuple[np.ndarray, float]:
    """Nelder-Mead ascent of H in tangent coordinates around omega0."""
    to_sphere = _tangent_chart(omega0)

    def objective(s: np.ndarray) -> float:
        return -float(mean_curvature_fd(dom, to_sphere(s))[0])

    simplex = np.vstack([np.zeros(3), 0.25 * spacing * np.eye(3)])
    result = minimize(
        objective,
        np.zeros(3),
        method="Nelder-Mead",
        options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-14, "maxiter": 4000},
    )
    return to_sphere(result.x), -float(result.fun)


def _is_strict(dom: StarDomain, omega: np.ndarray, h_value: float) -> bool:
    """H(omega) exceeds H on a small tangent sphere around omega."""
    basis = complete_basis(omega[None, :])
    offsets = [sign * b for b in basis for sign in (1.0, -1.0)]
    offsets += [(a + b) / np.sqrt(2.0) for a, b in ((basis[0], basis[1]), (basis[1], basis[2]), (basis[0], basis[2]))]
    ring = np.array([omega + _STRICT_ANGLE * off for off in offsets])
    ring /= np.linalg.norm(ring, axis=1)[:, None]
    margin = 1e-9 * max(1.0, abs(h_value))
    return bool(np.all(h_value - mean_curvature_fd(dom, ring) > margin))


def find_curvature_maxima(domain: DomainLike, n_seeds: Optional[int] = None) -> CurvatureMaxima:
    """Deduplicated strict local maxima of H with H > 0, sorted by H descending.

    Seeds come from a deterministic S^3 grid; ascent starts only from seeds
    that dominate their nearest neighbours. When H is constant on the seed
    grid (spread below ``constant_spread``) the result carries the
    constant-curvature flag and no maxima.

    Args:
        domain: StarDomain or DomainSpec.
        n_seeds: Seed count (config ``geometry.n_seeds``).

    Returns:
        CurvatureMaxima record.
    """
    dom = as_domain(domain)
    n_seeds = n_seeds or config.get('geometry.n_seeds', 2000)
    seeds = sphere_grid(n_seeds)
    h_seeds = mean_curvature_fd(dom, seeds)
    h_min, h_max = float(np.min(h_seeds)), float(np.max(h_seeds))
    spread_tol = config.get('geometry.constant_spread', 1e-8) * max(1.0, abs(h_max))
    if h_max - h_min <= spread_tol:
        logger.info("Constant mean curvature H=%.12g on %d seeds", h_max, len(seeds))
        return CurvatureMaxima(constant_curvature=True, h_min=h_min, h_max=h_max, n_seeds=len(seeds))

    cosines = seeds @ seeds.T
    neighbours = np.argsort(-cosines, axis=1, kind="stable")[:, 1:_NEIGHBOURS + 1]
    spacing = float(np.median(np.arccos(np.clip(cosines[np.arange(len(seeds)), neighbours[:, 0]], -1.0, 1.0))))
    candidates = [
        i for i in range(len(seeds))
        if h_seeds[i] > 0.0 and np.all(h_seeds[i] >= h_seeds[neighbours[i]])
    ]
    candidates.sort(key=lambda i: -h_seeds[i])
    candidates = candidates[: config.get('geometry.max_starts', 64)]
    logger.info("Ascending from %d of %d seeds", len(candidates), len(seeds))

    dedup_cos = np.cos(config.get('geometry.dedup_angle', 1e-3))
    found: List[Tuple[np.ndarray, float]] = []
    for idx in candidates:
        omega, h_value = _ascend(dom, seeds[idx], spacing)
        if h_value <= 0.0:
            continue
        duplicate = next((k for k, (w, _) in enumerate(found) if float(w @ omega) > dedup_cos), None)
        if duplicate is not None:
            if h_value > found[duplicate][1]:
                found[duplicate] = (omega, h_value)
            continue
        found.append((omega, h_value))

    strict = [(w, h) for w, h in found if _is_strict(dom, w, h)]
    strict.sort(key=lambda item: (-round(item[1], 9), tuple(np.round(item[0], 9))))
    maxima = [CurvatureMaximum(point=boundary_point(dom, w), h=h) for w, h in strict]
    logger.info("Found %d strict curvature maxima", len(maxima))
    return CurvatureMaxima(maxima=maxima, h_min=h_min, h_max=h_max, n_seeds=len(seeds))
