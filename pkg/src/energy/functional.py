"""The energy E(u1, u2), single-component energy I(V), coupling and reduced energy.

    E(u1, u2) = 1/2 int |grad u1|^2 + |grad u2|^2 + lambda/2 int u1^2 + u2^2
                - 1/4 int u1^4 + u2^4 - beta/2 int u1^2 u2^2
"""
import logging
import math
from typing import List, Optional, Sequence

import numpy as np

from src.ansatz.fields import ansatz_arrays
from src.config import config
from src.exceptions import QuadratureError
from src.geometry.boundary import DomainLike, as_domain
from src.models.schemas import (
    ConcentrationConfig,
    EnergyBreakdown,
    QuadResult,
    ReducedEnergySample,
    SingularityHint,
    Tolerance,
)
from src.quadrature.integrator import integrate_domain_vector

logger = logging.getLogger(__name__)


def energy_tolerance(tol: Optional[Tolerance] = None) -> Tolerance:
    """Tolerance for bubble-singular energy integrals (config ``rel_tol_energy``)."""
    if tol is not None:
        return tol
    return Tolerance(rel=config.rel_tol_energy, abs=config.get('quadrature.abs_tol', 1e-12))


def energy_hints(centers: Sequence[Sequence[float]], deltas: Sequence[float],
                 min_panel_factor: Optional[float] = None) -> SingularityHint:
    """Grading hint for bubbles at ``centers`` with scales ``deltas``."""
    factor = config.get('quadrature.min_panel_factor', 0.1) if min_panel_factor is None else min_panel_factor
    return SingularityHint.for_bubbles(
        [np.asarray(c, dtype=float) for c in centers], list(deltas),
        factor, config.get('quadrature.grading_ratio', 0.5),
    )


def _single_columns(x: np.ndarray, lam: float, delta: float, xi: np.ndarray) -> List[np.ndarray]:
    v, grad, _ = ansatz_arrays(x, lam, delta, xi)
    v2 = v * v
    return [np.sum(grad * grad, axis=1), v2, v2 * v2]


def _single_value(parts: Sequence[float], lam: float) -> float:
    return 0.5 * parts[0] + 0.5 * lam * parts[1] - 0.25 * parts[2]


def energy_full(
    cfg: ConcentrationConfig,
    domain: DomainLike,
    tol: Optional[Tolerance] = None,
    hints: Optional[SingularityHint] = None,
    workers: Optional[int] = None,
) -> EnergyBreakdown:
    """E(V1, V2) on one node set graded toward both concentration points.

    For beta = 0 the coupling integral is skipped and reported as exactly 0.
    Non-convergence is recorded per part in ``converged``.
    """
    dom = as_domain(domain)
    lam, beta = cfg.lam, cfg.beta
    d1, d2 = cfg.delta
    xi1, xi2 = cfg.xi[0].xi_array, cfg.xi[1].xi_array
    hints = hints or energy_hints([xi1, xi2], [d1, d2])

    def integrand(x: np.ndarray) -> np.ndarray:
        first = _single_columns(x, lam, d1, xi1)
        second = _single_columns(x, lam, d2, xi2)
        cols = first + second
        if beta != 0.0:
            cols.append(first[1] * second[1])
        return np.stack(cols, axis=1)

    res = integrate_domain_vector(integrand, dom, hints, energy_tolerance(tol), workers)
    singles = [_single_value([r.value for r in res[0:3]], lam), _single_value([r.value for r in res[3:6]], lam)]
    dirichlet = 0.5 * (res[0].value + res[3].value)
    mass = 0.5 * lam * (res[1].value + res[4].value)
    quartic = -0.25 * (res[2].value + res[5].value)
    coupling = -0.5 * beta * res[6].value if beta != 0.0 else 0.0

    def _err(*pairs) -> float:
        return float(sum(abs(w) * res[k].err_est for k, w in pairs))

    err = {
        "dirichlet": _err((0, 0.5), (3, 0.5)),
        "mass": _err((1, 0.5 * lam), (4, 0.5 * lam)),
        "quartic": _err((2, 0.25), (5, 0.25)),
        "coupling": _err((6, 0.5 * beta)) if beta != 0.0 else 0.0,
    }
    converged = {
        "dirichlet": res[0].converged and res[3].converged,
        "mass": res[1].converged and res[4].converged,
        "quartic": res[2].converged and res[5].converged,
        "coupling": res[6].converged if beta != 0.0 else True,
    }
    breakdown = EnergyBreakdown(
        dirichlet=dirichlet,
        mass=mass,
        quartic=quartic,
        coupling=coupling,
        total=dirichlet + mass + quartic + coupling,
        single=singles,
        err_est=err,
        converged=converged,
    )
    if not breakdown.all_converged:
        logger.warning("energy at lambda=%.4g not converged: %s", lam,
                       [k for k, ok in converged.items() if not ok])
    return breakdown


def bubble_energy_result(
    lam: float,
    delta: float,
    xi: Sequence[float],
    domain: DomainLike,
    tol: Optional[Tolerance] = None,
    hints: Optional[SingularityHint] = None,
    workers: Optional[int] = None,
) -> QuadResult:
    """I(V) for one bubble at xi with scale delta, as a QuadResult."""
    xi = np.asarray(xi, dtype=float)
    hints = hints or energy_hints([xi], [delta])

    def integrand(x: np.ndarray) -> np.ndarray:
        return np.stack(_single_columns(x, lam, delta, xi), axis=1)

    res = integrate_domain_vector(integrand, domain, hints, energy_tolerance(tol), workers)
    value = _single_value([r.value for r in res], lam)
    err = 0.5 * res[0].err_est + 0.5 * lam * res[1].err_est + 0.25 * res[2].err_est
    return QuadResult(
        value=value,
        err_est=err,
        n_evals=res[0].n_evals,
        converged=all(r.converged for r in res),
        order=res[0].order,
    )


def bubble_energy(lam: float, delta: float, xi: Sequence[float], domain: DomainLike,
                  tol: Optional[Tolerance] = None, hints: Optional[SingularityHint] = None,
                  workers: Optional[int] = None) -> float:
    """I(V) = 1/2 int |grad V|^2 + lambda/2 int V^2 - 1/4 int V^4.

    Raises:
        QuadratureError: if the integrals do not converge.
    """
    result = bubble_energy_result(lam, delta, xi, domain, tol, hints, workers)
    if not result.converged:
        raise QuadratureError(f"I(V) at lambda={lam:.6g}, delta={delta:.3e} did not converge")
    return result.value


def single_energy(cfg: ConcentrationConfig, i: int, domain: DomainLike,
                  tol: Optional[Tolerance] = None, workers: Optional[int] = None) -> float:
    """I(V_i) for component i of a configuration."""
    if i not in (0, 1):
        raise ValueError(f"component index must be 0 or 1, got {i}")
    return bubble_energy(cfg.lam, cfg.delta[i], cfg.xi[i].xi_array, domain, tol, workers=workers)


def coupling_term(cfg: ConcentrationConfig, domain: DomainLike, tol: Optional[Tolerance] = None,
                  hints: Optional[SingularityHint] = None, workers: Optional[int] = None) -> float:
    """-beta/2 int V1^2 V2^2; exactly 0.0 for beta = 0."""
    if cfg.beta == 0.0:
        return 0.0
    lam = cfg.lam
    d1, d2 = cfg.delta
    xi1, xi2 = cfg.xi[0].xi_array, cfg.xi[1].xi_array
    hints = hints or energy_hints([xi1, xi2], [d1, d2])

    def integrand(x: np.ndarray) -> np.ndarray:
        v1 = ansatz_arrays(x, lam, d1, xi1)[0]
        v2 = ansatz_arrays(x, lam, d2, xi2)[0]
        return v1 * v1 * v2 * v2

    res = integrate_domain_vector(integrand, domain, hints, energy_tolerance(tol), workers)[0]
    if not res.converged:
        raise QuadratureError(f"coupling integral at lambda={lam:.6g} did not converge")
    return -0.5 * cfg.beta * res.value


def reduced_energy(cfg: ConcentrationConfig, domain: DomainLike, tol: Optional[Tolerance] = None,
                   hints: Optional[SingularityHint] = None, workers: Optional[int] = None) -> float:
    """I(V1) + I(V2) - beta/2 int V1^2 V2^2, the reduced energy without the remainder.

    Raises:
        QuadratureError: if any part does not converge.
    """
    breakdown = energy_full(cfg, domain, tol, hints, workers)
    if not breakdown.all_converged:
        failed = [k for k, ok in breakdown.converged.items() if not ok]
        raise QuadratureError(f"reduced energy at lambda={cfg.lam:.6g} did not converge", failed)
    return breakdown.total


def psi_margin(cfg: ConcentrationConfig) -> float:
    """Predicted size of the neglected remainder term.

    sum_i delta_i |ln delta_i|^{2/3} times 1 / (lambda (ln lambda)^{1/3}).
    """
    lam = cfg.lam
    error_size = sum(d * abs(math.log(d)) ** (2.0 / 3.0) for d in cfg.delta)
    return error_size / (lam * math.log(lam) ** (1.0 / 3.0))


def regime(beta: float) -> str:
    """'competitive' for beta > 0, 'cooperative' for beta < 0, 'decoupled' at 0."""
    if beta > 0.0:
        return "competitive"
    if beta < 0.0:
        return "cooperative"
    return "decoupled"


def reduced_energy_sample(cfg: ConcentrationConfig, domain: DomainLike, tol: Optional[Tolerance] = None,
                          workers: Optional[int] = None) -> ReducedEnergySample:
    """Reduced energy with its breakdown, remainder margin and regime tag."""
    breakdown = energy_full(cfg, domain, tol, workers=workers)
    if not breakdown.all_converged:
        failed = [k for k, ok in breakdown.converged.items() if not ok]
        raise QuadratureError(f"reduced energy at lambda={cfg.lam:.6g} did not converge", failed)
    if cfg.beta < 0.0:
        logger.info("beta=%.4g < 0: recording cooperative-regime sample", cfg.beta)
    return ReducedEnergySample(
        lam=cfg.lam,
        beta=cfg.beta,
        d=list(cfg.d),
        delta=list(cfg.delta),
        value=breakdown.total,
        breakdown=breakdown,
        psi_margin=psi_margin(cfg),
        regime=regime(cfg.beta),
    )
