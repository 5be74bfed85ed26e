"""Extraction of c0, c1, c2 in I(V) = c0 - c1 H delta + c2 lambda delta^2 |ln delta|.

Single-bubble energies are sampled over several boundary points (with
distinct mean curvature) and a lambda grid, then regressed jointly on the
basis {1, H delta, lambda delta^2 |ln delta|}. The variation of H between
points separates c1 from c0.
"""
import logging
import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.asymptotics.fitting import MIN_DECADES, concentration_scale, fit_scaling
from src.asymptotics.sampling import map_samples
from src.config import config
from src.energy.functional import bubble_energy_result
from src.exceptions import ExpansionVerificationError, FitError, QuadratureError
from src.geometry.boundary import DomainLike, as_domain, boundary_point, mean_curvature
from src.models.schemas import BoundaryPoint, ExpansionConstants, ScalingModel, Tolerance

logger = logging.getLogger(__name__)

# Half-space limits: c0 = I(U) on a half-space, c2 = a0 / 2 with a0 = 4 pi^2
C0_REFERENCE = 4.0 * math.pi ** 2 / 3.0
C2_REFERENCE = 2.0 * math.pi ** 2
MIN_POINTS = 3
H_DISTINCT_TOL = 1e-6

PointLike = Union[BoundaryPoint, Sequence[float]]


def expansion_basis(lam: float, delta: float, h: float) -> List[float]:
    """Basis values [H delta, lambda delta^2 |ln delta|] for one sample."""
    return [h * delta, lam * delta ** 2 * abs(math.log(delta))]


def expansion_tolerance() -> Tolerance:
    """Tolerance for the energy samples; the fitted terms are ~1e-5 of I(V)."""
    return Tolerance(
        rel=config.get('asymptotics.energy_rel_tol', 1e-10),
        abs=config.get('quadrature.abs_tol', 1e-12),
    )


def _as_points(dom, points: Sequence[PointLike]) -> List[BoundaryPoint]:
    return [p if isinstance(p, BoundaryPoint) else boundary_point(dom, p) for p in points]


def _distinct(values: Sequence[float]) -> int:
    ordered = sorted(values)
    count = 1 if ordered else 0
    for a, b in zip(ordered, ordered[1:]):
        if b - a > H_DISTINCT_TOL * max(1.0, abs(b)):
            count += 1
    return count


def _fit(samples, basis, min_decades: float) -> Tuple[List[float], float, List[float]]:
    fit = fit_scaling(samples, ScalingModel.AFFINE_IN_BASIS, basis=np.asarray(basis), min_decades=min_decades)
    c0, b1, b2 = fit.coefficients
    return [c0, -b1, b2], fit.r_squared, fit.residuals


def _relative_gap(a: float, b: float) -> float:
    return abs(a - b) / max(0.5 * abs(a + b), 1e-300)


def extract_constants(
    domain: DomainLike,
    points: Sequence[PointLike],
    lambda_grid: Optional[Sequence[float]] = None,
    d: float = 1.0,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> ExpansionConstants:
    """Sample I(V) over points x lambda_grid and fit the energy expansion.

    Args:
        domain: StarDomain or DomainSpec.
        points: Boundary points (or directions) with pairwise distinct H > 0.
        lambda_grid: Grid of lambda values (config ``asymptotics.lambda_grid``).
        d: Rate parameter shared by every sample.
        tol: Quadrature tolerance (default :func:`expansion_tolerance`).
        workers: Threads across samples.

    Returns:
        ExpansionConstants with ``passed`` set when c1 > 0, c2 > 0 and R^2
        reaches ``asymptotics.r2_min``; split-grid fits and reference
        comparisons are attached as diagnostics.

    Raises:
        FitError: fewer than 3 distinct positive H values (basis rank deficient).
        QuadratureError: listing the samples whose energy did not converge.
    """
    dom = as_domain(domain)
    grid = sorted(float(lam) for lam in (lambda_grid or config.lambda_grid))
    tol = tol or expansion_tolerance()
    pts = _as_points(dom, points)
    h_values = [mean_curvature(dom, p, cross_check=False).h for p in pts]
    if any(h <= 0.0 for h in h_values):
        raise FitError(f"energy expansion needs H > 0 at every point, got {h_values}")
    if _distinct(h_values) < MIN_POINTS:
        raise FitError(
            f"basis rank deficient: need {MIN_POINTS} boundary points with distinct H, "
            f"got {_distinct(h_values)}"
        )

    jobs = [(k, lam) for k in range(len(pts)) for lam in grid]
    logger.info("Sampling I(V) at %d points x %d lambdas", len(pts), len(grid))

    def sample(job):
        k, lam = job
        delta = concentration_scale(lam, d)
        return bubble_energy_result(lam, delta, pts[k].xi, dom, tol, workers=1)

    results = map_samples(sample, jobs, workers, label="energy samples")
    failed = [f"point {k} lambda={lam:.6g}" for (k, lam), r in zip(jobs, results) if not r.converged]
    if failed:
        raise QuadratureError("energy samples did not converge", failed)

    samples = [(lam, r.value) for (_, lam), r in zip(jobs, results)]
    basis = [expansion_basis(lam, concentration_scale(lam, d), h_values[k]) for k, lam in jobs]
    (c0, c1, c2), r2, residuals = _fit(samples, basis, min_decades=MIN_DECADES)

    split, stability = {}, {}
    diagnostics = []
    mid = math.sqrt(grid[0] * grid[-1])
    halves = {
        "lower": [n for n, (_, lam) in enumerate(jobs) if lam <= mid * (1.0 + 1e-12)],
        "upper": [n for n, (_, lam) in enumerate(jobs) if lam >= mid * (1.0 - 1e-12)],
    }
    for name, rows in halves.items():
        if len({jobs[n][1] for n in rows}) < 2:
            diagnostics.append(f"split-grid {name} half has fewer than 2 lambda values; skipped")
            continue
        try:
            split[name] = _fit([samples[n] for n in rows], [basis[n] for n in rows], min_decades=0.0)[0]
        except FitError as e:
            diagnostics.append(f"split-grid {name} fit failed: {e}")
    if len(split) == 2:
        stability = {
            "c1": _relative_gap(split["lower"][1], split["upper"][1]),
            "c2": _relative_gap(split["lower"][2], split["upper"][2]),
        }
        limit = config.get('asymptotics.agreement', 0.1)
        for key, gap in stability.items():
            if gap > limit:
                diagnostics.append(f"split-grid {key} differs by {gap:.3g} (> {limit:g})")

    c0_gap = _relative_gap(c0, C0_REFERENCE)
    c2_gap = _relative_gap(c2, C2_REFERENCE)
    diagnostics.append(f"c0 relative to 4 pi^2/3: {c0_gap:.3g}")
    diagnostics.append(f"c2 relative to a0/2 = 2 pi^2: {c2_gap:.3g}")

    r2_min = config.get('asymptotics.r2_min', 0.99)
    passed = c1 > 0.0 and c2 > 0.0 and r2 >= r2_min
    if c1 <= 0.0 or c2 <= 0.0:
        diagnostics.append(f"sign violation: c1={c1:.6g}, c2={c2:.6g}")
    if r2 < r2_min:
        diagnostics.append(f"R^2 = {r2:.6f} below {r2_min:g}")
    if passed:
        logger.info("Expansion constants c0=%.8g c1=%.6g c2=%.6g (R2=%.6f)", c0, c1, c2, r2)
    else:
        logger.warning("Expansion verification failed: %s", "; ".join(diagnostics[-2:]))

    return ExpansionConstants(
        c0=c0,
        c1=c1,
        c2=c2,
        r_squared=r2,
        residuals=residuals,
        n_samples=len(samples),
        split=split,
        stability=stability,
        passed=passed,
        diagnostics=diagnostics,
    )


def require_expansion(constants: ExpansionConstants) -> ExpansionConstants:
    """Return constants unchanged, or raise when the expansion failed verification.

    Raises:
        ExpansionVerificationError: c1 or c2 not positive, or R^2 too low.
    """
    if not constants.passed:
        raise ExpansionVerificationError(
            f"energy expansion not verified: c1={constants.c1:.6g}, c2={constants.c2:.6g}, "
            f"R^2={constants.r_squared:.6f}"
        )
    return constants


def constants_from_values(c0: float, c1: float, c2: float) -> ExpansionConstants:
    """Wrap user-supplied constants (no fit diagnostics)."""
    return ExpansionConstants(
        c0=c0, c1=c1, c2=c2, r_squared=1.0, passed=c1 > 0.0 and c2 > 0.0,
        diagnostics=["supplied by configuration"],
    )
