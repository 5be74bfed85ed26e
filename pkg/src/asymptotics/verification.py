"""Scaling verification of the error terms, the Q1 constant, the coupling and ||W||_4.

Every scan computes one quantity per lambda on the grid (samples in
parallel), divides by its reference size and judges the resulting ratio
band with one of four criteria:

* ``flat``: fitted log-slope of the ratio in lambda within +-flatness_slope.
* ``bounded``: the ratio does not grow (slope <= flatness_slope) and stays
  within ``ratio_band`` of its first value.
* ``converging``: monotone, with the last two values within 5%.
* ``decreasing``: |ratio| non-increasing along the grid.
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.ansatz.fields import correction_arrays
from src.asymptotics.fitting import concentration_scale, fit_scaling, reference_function, reference_scaling
from src.asymptotics.sampling import map_samples
from src.config import config
from src.energy.error_terms import TERM_NAMES, error_dual_norms
from src.energy.functional import coupling_term, energy_hints
from src.energy.q_terms import A_BAR_REFERENCE, q_decomposition
from src.exceptions import ConfigError, FitError, QuadratureError
from src.geometry.boundary import DomainLike, as_domain, mean_curvature
from src.geometry.domains import cartesian_to_hyperspherical
from src.models.schemas import (
    BoundaryPoint,
    ConcentrationConfig,
    EnergySampleRecord,
    ErrorScalingReport,
    ScalingModel,
    ScalingScan,
    TermScaling,
    Tolerance,
)
from src.quadrature.norms import lp_norm

logger = logging.getLogger(__name__)

QUANTITIES = ("error", "coupling", "q1", "wnorm")

# reference scaling and band criterion per error term, in TERM_NAMES order
ERROR_TERM_BANDS: Tuple[Tuple[str, str], ...] = (
    ("lambda_delta2_log", "flat"),
    ("lambda32_delta3_log2", "flat"),
    ("lambda32_delta3_log3", "flat"),
    ("lambda_delta2", "flat"),
    ("delta_log23", "flat"),
    ("beta_delta_delta", "bounded"),
)
E5_INDEX = TERM_NAMES.index("E5")
CONVERGENCE_GAP = 0.05


def scan_config(lam: float, beta: float, d: Sequence[float], points: Sequence[BoundaryPoint],
                eta: float) -> ConcentrationConfig:
    """ConcentrationConfig for one grid point."""
    if len(points) != 2:
        raise ConfigError(f"scaling scans need two boundary points, got {len(points)}")
    try:
        return ConcentrationConfig(**{"lambda": lam}, beta=beta, d=tuple(d), xi=tuple(points), eta=eta)
    except ValueError as e:
        raise ConfigError(f"inadmissible configuration at lambda={lam:.6g}: {e}") from e


def _flatness() -> float:
    return config.get('asymptotics.flatness_slope', 0.1)


def _flat_offending(lams: np.ndarray, ratios: np.ndarray) -> List[float]:
    log_r = np.log(np.abs(ratios))
    allowed = _flatness() * 0.5 * math.log(lams[-1] / lams[0])
    deviation = np.abs(log_r - np.mean(log_r))
    bad = [float(lam) for lam, dev in zip(lams, deviation) if dev > allowed]
    return bad or [float(lams[int(np.argmax(deviation))])]


def _bounded_offending(lams: np.ndarray, ratios: np.ndarray) -> List[float]:
    r = np.abs(ratios)
    growth = r[0] * (lams / lams[0]) ** _flatness()
    band = config.get('asymptotics.ratio_band', 10.0) * r[0]
    return [float(lam) for lam, value, cap in zip(lams, r, growth) if value > min(cap, band) * (1.0 + 1e-12)]


def judge_band(term: str, criterion: str, lams: Sequence[float], values: Sequence[float],
               reference: Optional[Callable[[float], float]]) -> TermScaling:
    """Judge values / reference along the grid with the named criterion.

    A band whose values are all exactly zero passes with a notice and no fit.
    """
    lams = np.asarray(lams, dtype=float)
    values = np.asarray(values, dtype=float)
    if reference is None:
        ratios = values.copy()
    else:
        ratios = values / np.array([reference(float(lam)) for lam in lams])
    if np.all(values == 0.0):
        return TermScaling(term=term, criterion=criterion, ratios=ratios.tolist(), passed=True,
                           notice=f"{term} vanishes identically on the grid; fit skipped")
    if np.any(values == 0.0) or not np.all(np.isfinite(ratios)):
        return TermScaling(term=term, criterion=criterion, ratios=ratios.tolist(), passed=False,
                           offending=[float(lam) for lam, r in zip(lams, ratios) if r == 0.0 or not np.isfinite(r)],
                           notice=f"{term} has zero or non-finite samples")

    if criterion in ("flat", "bounded"):
        try:
            fit = fit_scaling(list(zip(lams, values)), ScalingModel.POWER_WITH_LOG, reference=reference or (lambda lam: 1.0))
        except FitError as e:
            return TermScaling(term=term, criterion=criterion, ratios=ratios.tolist(), passed=False, notice=str(e))
        if criterion == "flat":
            passed = bool(fit.flat)
            offending = [] if passed else _flat_offending(lams, ratios)
        else:
            offending = _bounded_offending(lams, ratios)
            passed = fit.slope <= _flatness() and not offending
        return TermScaling(term=term, criterion=criterion, ratios=ratios.tolist(), fit=fit,
                           passed=passed, offending=offending)

    if criterion == "converging":
        steps = np.diff(ratios)
        monotone = bool(np.all(steps >= 0.0) or np.all(steps <= 0.0))
        gap = abs(ratios[-1] - ratios[-2]) / max(abs(ratios[-1]), 1e-300) if len(ratios) > 1 else math.inf
        passed = monotone and gap <= CONVERGENCE_GAP
        offending = [] if passed else [float(lams[-1])]
        return TermScaling(term=term, criterion=criterion, ratios=ratios.tolist(), passed=passed,
                           offending=offending, notice=f"last-step change {gap:.3g}")

    if criterion == "decreasing":
        r = np.abs(ratios)
        offending = [float(lams[k + 1]) for k in range(len(r) - 1) if r[k + 1] > r[k] * (1.0 + 1e-12)]
        return TermScaling(term=term, criterion=criterion, ratios=ratios.tolist(),
                           passed=not offending, offending=offending)

    raise ValueError(f"unknown band criterion '{criterion}'")


def sample_records(dom, configs: Sequence[ConcentrationConfig], **parts) -> List[EnergySampleRecord]:
    """Per-sample JSON records; ``parts`` maps a record field to one value per config."""
    if not configs:
        return []
    points = configs[0].xi
    h_values = [mean_curvature(dom, p, cross_check=False).h for p in points]
    xi_spherical = cartesian_to_hyperspherical(np.array([p.omega for p in points])).tolist()
    return [
        EnergySampleRecord(**{"lambda": cfg.lam}, beta=cfg.beta, d=list(cfg.d), xi_spherical=xi_spherical,
                           H_values=h_values, **{name: values[k] for name, values in parts.items()})
        for k, cfg in enumerate(configs)
    ]


def _grid(lambda_grid: Optional[Sequence[float]]) -> List[float]:
    return sorted(float(lam) for lam in (lambda_grid or config.lambda_grid))


def _eta(eta: Optional[float]) -> float:
    return float(eta if eta is not None else config.get('energy.eta', 0.5))


def verify_error_scaling(
    domain: DomainLike,
    points: Sequence[BoundaryPoint],
    lambda_grid: Optional[Sequence[float]] = None,
    beta: float = 1.0,
    d: Sequence[float] = (1.0, 1.0),
    eta: Optional[float] = None,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> ErrorScalingReport:
    """Check that each error-term norm tracks its predicted size along the grid.

    Component 0 (at ``points[0]``) is measured; ``points[1]`` carries the
    second bubble that enters E6. E1 to E5 must have flat ratio bands; E6
    must stay bounded. E5's predicted size must dominate at every grid point.

    Raises:
        QuadratureError: listing the lambdas whose norms did not converge.
    """
    dom = as_domain(domain)
    grid = _grid(lambda_grid)
    eta = _eta(eta)
    configs = [scan_config(lam, beta, d, points, eta) for lam in grid]
    reports = map_samples(lambda cfg: error_dual_norms(cfg, 0, dom, tol, workers=1), configs, workers,
                          label="error norms")
    failed = [f"lambda={r.lam:.6g}" for r in reports if not r.converged]
    if failed:
        raise QuadratureError("error norms did not converge", failed)

    terms = []
    for k, (name, (reference, criterion)) in enumerate(zip(TERM_NAMES, ERROR_TERM_BANDS)):
        values = [r.norms[k] for r in reports]
        ref = reference_function(reference, d, beta) if not (k == 5 and beta == 0.0) else None
        band = judge_band(name, criterion, grid, values, ref)
        if not band.passed:
            logger.warning("%s band (%s) failed at lambda=%s", name, criterion, band.offending)
        terms.append(band)

    e5_dominant = [
        all(r.predicted[E5_INDEX] >= p for n, p in enumerate(r.predicted) if n != E5_INDEX)
        for r in reports
    ]
    passed = all(t.passed for t in terms) and all(e5_dominant)
    logger.info("Error scaling %s on %d grid points", "passed" if passed else "FAILED", len(grid))
    return ErrorScalingReport(lambda_grid=grid, beta=beta, terms=terms, e5_dominant=e5_dominant,
                              passed=passed, reports=reports)


def _error_scan(dom, points, grid, beta, d, eta, tol, workers) -> ScalingScan:
    report = verify_error_scaling(dom, points, grid, beta, d, eta, tol, workers)
    rows = []
    for r, dominant in zip(report.reports, report.e5_dominant):
        row: Dict[str, float] = {"lambda": r.lam, "delta": r.delta}
        for name, norm, ratio in zip(TERM_NAMES, r.norms, r.ratios):
            row[f"{name.lower()}_norm"] = norm
            row[f"{name.lower()}_ratio"] = ratio
        row["total_bound"] = r.total_bound
        row["e5_dominant"] = float(dominant)
        rows.append(row)
    configs = [scan_config(lam, beta, d, points, eta) for lam in grid]
    return ScalingScan(quantity="error", lambda_grid=grid, beta=beta, rows=rows, terms=report.terms,
                       passed=report.passed, samples=sample_records(dom, configs, error_report=report.reports))


def _q1_scan(dom, points, grid, beta, d, eta, tol, workers) -> ScalingScan:
    configs = [scan_config(lam, beta, d, points, eta) for lam in grid]
    decompositions = map_samples(lambda cfg: q_decomposition(cfg, 0, dom, tol, workers=1), configs, workers,
                                 label="Q decomposition")
    failed = [f"lambda={cfg.lam:.6g}" for cfg, q in zip(configs, decompositions) if not q.converged]
    if failed:
        raise QuadratureError("Q decomposition did not converge", failed)
    rows = []
    for cfg, q in zip(configs, decompositions):
        rows.append({
            "lambda": cfg.lam, "delta": cfg.delta[0], "q": q.q, "q1": q.q1, "q2": q.q2, "q3": q.q3,
            "m1": q.m1, "m2": q.m2, "m3": q.m3, "q1_ratio": q.q1_ratio, "q2_ratio": q.q2_ratio,
            "q3_ratio": q.q3_ratio, "a0_gap": abs(q.q1_ratio - A_BAR_REFERENCE) / A_BAR_REFERENCE,
            "consistency": q.consistency,
        })
    terms = [
        judge_band("Q1", "converging", grid, [q.q1_ratio for q in decompositions], None),
        judge_band("Q2", "decreasing", grid, [q.q2_ratio for q in decompositions], None),
        judge_band("Q3", "decreasing", grid, [q.q3_ratio for q in decompositions], None),
    ]
    return ScalingScan(quantity="q1", lambda_grid=grid, beta=beta, rows=rows, terms=terms,
                       passed=all(t.passed for t in terms),
                       samples=sample_records(dom, configs, q_decomposition=decompositions))


def _coupling_scan(dom, points, grid, beta, d, eta, tol, workers) -> ScalingScan:
    configs = [scan_config(lam, beta, d, points, eta) for lam in grid]

    def sample(cfg: ConcentrationConfig) -> Optional[float]:
        try:
            return coupling_term(cfg, dom, tol, workers=1)
        except QuadratureError:
            return None

    values = map_samples(sample, configs, workers, label="coupling")
    failed = [f"lambda={cfg.lam:.6g}" for cfg, v in zip(configs, values) if v is None]
    if failed:
        raise QuadratureError("coupling integrals did not converge", failed)
    rows = []
    for cfg, value in zip(configs, values):
        reference = reference_scaling("coupling", cfg.lam, d, beta)
        rows.append({"lambda": cfg.lam, "delta1": cfg.delta[0], "delta2": cfg.delta[1],
                     "coupling": value, "ratio": abs(value) / reference})
    band = judge_band("coupling", "bounded", grid, [abs(v) for v in values],
                      reference_function("coupling", d, beta))
    return ScalingScan(quantity="coupling", lambda_grid=grid, beta=beta, rows=rows, terms=[band],
                       passed=band.passed, samples=sample_records(dom, configs))


def _wnorm_scan(dom, points, grid, beta, d, eta, tol, workers) -> ScalingScan:
    xi = points[0].xi_array

    def sample(lam: float):
        delta = concentration_scale(lam, d[0])
        return lp_norm(lambda x: correction_arrays(x, lam, delta, xi)[0], 4.0, dom,
                       hints=energy_hints([xi], [delta]), tol=tol, workers=1)

    results = map_samples(sample, grid, workers, label="W norms")
    failed = [f"lambda={lam:.6g}" for lam, r in zip(grid, results) if not r.converged]
    if failed:
        raise QuadratureError("W norms did not converge", failed)
    rows = []
    for lam, r in zip(grid, results):
        reference = reference_scaling("w_norm", lam, d, beta)
        rows.append({"lambda": lam, "delta": concentration_scale(lam, d[0]), "w_norm": r.value,
                     "ratio": r.value / reference})
    band = judge_band("wnorm", "bounded", grid, [r.value for r in results], reference_function("w_norm", d, beta))
    return ScalingScan(quantity="wnorm", lambda_grid=grid, beta=beta, rows=rows, terms=[band],
                       passed=band.passed,
                       samples=sample_records(dom, [scan_config(lam, beta, d, points, eta) for lam in grid]))


_SCANS = {
    "error": _error_scan,
    "coupling": _coupling_scan,
    "q1": _q1_scan,
    "wnorm": _wnorm_scan,
}


def scan_quantity(
    quantity: str,
    domain: DomainLike,
    points: Sequence[BoundaryPoint],
    lambda_grid: Optional[Sequence[float]] = None,
    beta: float = 1.0,
    d: Sequence[float] = (1.0, 1.0),
    eta: Optional[float] = None,
    tol: Optional[Tolerance] = None,
    workers: Optional[int] = None,
) -> ScalingScan:
    """Run one scaling scan ('error', 'coupling', 'q1' or 'wnorm') along the lambda grid.

    Raises:
        ConfigError: unknown quantity or inadmissible configuration.
        QuadratureError: listing the grid points that did not converge.
    """
    if quantity not in _SCANS:
        raise ConfigError(f"unknown quantity '{quantity}'; expected one of {', '.join(QUANTITIES)}")
    dom = as_domain(domain)
    grid = _grid(lambda_grid)
    logger.info("Scanning %s over %d lambda values (beta=%.4g)", quantity, len(grid), beta)
    scan = _SCANS[quantity](dom, list(points), grid, beta, tuple(d), _eta(eta), tol, workers)
    if not scan.passed:
        logger.warning("%s scan failed: %s", quantity, [t.term for t in scan.terms if not t.passed])
    return scan
