"""Invariant suites for the special functions and the ansatz identity."""
import logging
import math
from typing import Dict, List, Optional, Sequence

import numpy as np

from src.ansatz.fields import (
    bubble_arrays,
    correction_arrays,
    correction_closed_arrays,
    interaction_bound,
    interior_samples,
    pde_residual_arrays,
)
from src.config import config
from src.exceptions import ConfigError
from src.geometry.boundary import DomainLike, as_domain, boundary_point
from src.geometry.domains import sphere_grid
from src.models.schemas import ConcentrationConfig, InvariantCheck, InvariantReport
from src.specialfn.bessel import R_MIN, R_UNDERFLOW, bessel_k1, bessel_k1_derivs, correction_w
from src.specialfn.oracle import oracle_k1, oracle_overlap_check
from src.specialfn.windows import all_window_constants

logger = logging.getLogger(__name__)


def _check(name: str, value: float, threshold: float, description: str,
           severity: str = "high", below: bool = True) -> InvariantCheck:
    passed = bool(np.isfinite(value) and (value <= threshold if below else value >= threshold))
    if not passed:
        logger.warning("Invariant %s failed: %.6g vs threshold %.6g", name, value, threshold)
    return InvariantCheck(name=name, passed=passed, value=float(value), threshold=threshold,
                          severity=severity, description=description)


def _relative(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.abs(a - b) / np.maximum(np.abs(b), 1e-300)


class SpecialFunctionValidator:
    """K1 against the mpmath oracle, derivative cross-checks, the W ODE and expansion windows."""

    def __init__(self):
        self.oracle_points = config.get('specialfn.oracle_grid', 1000)
        self.ode_points = config.get('specialfn.ode_grid', 1000)
        self.window_points = config.get('specialfn.window_grid', 40)
        self.oracle_tol = config.get('specialfn.oracle_rel_tol', 1e-12)
        self.ode_tol = config.get('specialfn.ode_rel_tol', 1e-8)
        self.fd_tol = config.get('specialfn.fd_rel_tol', 1e-6)

    def validate(self, rmin: Optional[float] = None, rmax: Optional[float] = None) -> InvariantReport:
        """Run the full suite on [rmin, rmax] (config ``specialfn.rmin`` / ``rmax``).

        Raises:
            ConfigError: range outside [1e-8, 700] or empty.
        """
        rmin = float(rmin if rmin is not None else config.get('specialfn.rmin', R_MIN))
        rmax = float(rmax if rmax is not None else config.get('specialfn.rmax', R_UNDERFLOW))
        if rmin < R_MIN or rmax > R_UNDERFLOW or not rmin < rmax:
            raise ConfigError(
                f"radius range [{rmin:g}, {rmax:g}] outside the supported [{R_MIN:g}, {R_UNDERFLOW:g}]"
            )
        logger.info("Special-function suite on [%g, %g]", rmin, rmax)

        checks: List[InvariantCheck] = []
        checks += self._check_k1(rmin, rmax)
        checks += self._check_derivatives(max(rmin, 0.01), min(rmax, 50.0))
        checks += self._check_correction(max(rmin, 1e-6), min(rmax, 50.0))
        windows = all_window_constants(self.window_points)
        for name in ("k1_small", "k1_large"):
            stats = windows[name]
            checks.append(_check(f"window_{name}", stats["variation"], 2.0,
                                 f"sup remainder ratio {stats['sup']:.4g}; variation under 2x refinement",
                                 severity="medium"))

        report = InvariantReport(suite="specialfn", checks=checks, window_constants=windows,
                                 is_valid=all(c.passed for c in checks))
        logger.info("Special-function suite: %d/%d checks passed",
                    sum(c.passed for c in checks), len(checks))
        return report

    def _check_k1(self, rmin: float, rmax: float) -> List[InvariantCheck]:
        grid = np.geomspace(rmin, rmax, self.oracle_points)
        values = np.array([bessel_k1(r) for r in grid])
        oracle = np.array([float(oracle_k1(r)) for r in grid])
        overlap = oracle_overlap_check(list(np.linspace(20.0, 40.0, 11)))
        return [
            _check("k1_oracle", float(np.max(_relative(values, oracle))), self.oracle_tol,
                   "max relative error of K1 against the arbitrary-precision oracle"),
            _check("k1_positive", float(np.min(values)), 0.0, "K1 > 0 on the grid", below=False),
            _check("k1_decreasing", float(np.max(np.diff(values))), 0.0, "K1 strictly decreasing",
                   severity="medium"),
            _check("oracle_overlap", overlap, self.oracle_tol,
                   "series and asymptotic oracle branches agree on [20, 40]", severity="medium"),
        ]

    def _check_derivatives(self, lo: float, hi: float) -> List[InvariantCheck]:
        grid = np.geomspace(lo, hi, 200)
        worst_k1 = worst_w = 0.0
        for r in grid:
            h = 1e-5 * r
            fd_k1 = (bessel_k1(r + h) - bessel_k1(r - h)) / (2.0 * h)
            worst_k1 = max(worst_k1, abs(fd_k1 - bessel_k1_derivs(r).k1_prime) / abs(fd_k1))
            fd_w = (correction_w(r + h).w - correction_w(r - h).w) / (2.0 * h)
            analytic = correction_w(r).w_prime
            worst_w = max(worst_w, abs(fd_w - analytic) / abs(analytic))
        return [
            _check("k1_prime_fd", worst_k1, self.fd_tol, "K1' matches central differences"),
            _check("w_prime_fd", worst_w, self.fd_tol, "W' matches central differences"),
        ]

    def _check_correction(self, lo: float, hi: float) -> List[InvariantCheck]:
        grid = np.geomspace(lo, hi, self.ode_points)
        evals = [correction_w(r) for r in grid]
        residual = max(e.ode_residual() for e in evals)
        # the K1 form loses digits to cancellation below r = 0.1
        conditioned = [e for e in evals if e.r >= 0.1]
        closed = max(abs(e.w - (1.0 / e.r ** 2 - bessel_k1(e.r) / e.r)) / abs(e.w) for e in conditioned)
        small = [e for e in evals if e.r <= 0.1]
        log_ratio = max(e.w / abs(math.log(e.r)) for e in small) if small else 0.0
        far = correction_w(20.0)
        return [
            _check("w_ode_residual", residual, self.ode_tol,
                   "max of |-W'' - 3W'/r + W - 1/r^2| r^2 on the log grid"),
            _check("w_closed_form", closed, self.oracle_tol, "series W equals 1/r^2 - K1/r for r >= 0.1"),
            _check("w_small_r_log", log_ratio, 2.0, "W / |ln r| on r <= 0.1", severity="medium"),
            _check("w_far_field", abs(far.w * 400.0 - 1.0), 0.1, "W(20) * 20^2 close to 1",
                   severity="medium"),
            _check("w_positive", min(e.w for e in small) if small else 1.0, 0.0,
                   "W > 0 near the origin", below=False, severity="medium"),
        ]


class AnsatzValidator:
    """The ansatz PDE identity, the two forms of W_lambda and bubble scaling on stratified samples."""

    def __init__(self, residual_tol: float = 1e-7, closed_form_tol: float = 1e-10):
        self.residual_tol = residual_tol
        self.closed_form_tol = closed_form_tol
        self.eta = config.get('energy.eta', 0.5)
        self.bound_growth = config.get('ansatz.interaction_growth', 2.0)

    def stratified_points(self, domain: DomainLike, delta: float, xi: np.ndarray,
                          n_directions: int = 170) -> np.ndarray:
        """Interior ray samples plus shells at delta, 10 delta and 100 delta around xi."""
        dom = as_domain(domain)
        bulk = interior_samples(dom, n_directions)
        directions = sphere_grid(24)
        shells = [xi + f * delta * directions for f in (1.0, 10.0, 100.0)]
        near = np.concatenate(shells)
        inside = dom.contains(near)
        points = np.concatenate([bulk, near[inside]])
        far_enough = np.linalg.norm(points - xi, axis=1) > 1e-12
        return points[far_enough]

    def validate(self, domain: DomainLike, lambdas: Sequence[float] = (1e2, 1e3, 1e4),
                 directions: Sequence[Sequence[float]] = ((1.0, 0.0, 0.0, 0.0), (-1.0, 0.0, 0.0, 0.0)),
                 d: Sequence[float] = (1.0, 1.0)) -> InvariantReport:
        """Run the identity suite for each lambda, component 0 at ``directions[0]``."""
        dom = as_domain(domain)
        points = tuple(boundary_point(dom, w) for w in directions)
        checks: List[InvariantCheck] = []
        bounds: Dict[str, float] = {}
        for lam in lambdas:
            cfg = ConcentrationConfig(**{"lambda": lam}, beta=0.0, d=tuple(d), xi=points, eta=self.eta)
            delta = cfg.delta[0]
            xi = points[0].xi_array
            x = self.stratified_points(dom, delta, xi)
            residual, scale = pde_residual_arrays(x, lam, delta, xi)
            checks.append(_check(f"pde_residual_lambda_{lam:g}", float(np.max(np.abs(residual) / scale)),
                                 self.residual_tol, f"ansatz identity residual on {len(x)} points"))

            w = correction_arrays(x, lam, delta, xi)[0]
            closed = correction_closed_arrays(x, lam, delta, xi)
            # where sqrt(lambda)|y| < 0.1 the K1 form cancels catastrophically
            conditioned = math.sqrt(lam) * np.linalg.norm(x - xi, axis=1) >= 0.1
            gap = float(np.max(_relative(w[conditioned], closed[conditioned]))) if np.any(conditioned) else 0.0
            checks.append(_check(f"w_forms_lambda_{lam:g}", gap, self.closed_form_tol,
                                 "profile and K1 forms of W_lambda agree"))

            u = bubble_arrays(x, delta, xi)[0]
            unit = bubble_arrays((x - xi) / delta, 1.0, np.zeros(4))[0] / delta
            checks.append(_check(f"bubble_scaling_lambda_{lam:g}", float(np.max(_relative(u, unit))), 1e-12,
                                 "U_{delta,xi}(x) = U_{1,0}((x - xi)/delta) / delta", severity="medium"))
            bounds[f"{lam:g}"] = interaction_bound(cfg, 0, dom)

        # |V| <= C delta away from xi: C must not grow along the grid
        base = bounds[f"{min(lambdas):g}"]
        growth = max(bounds.values()) / base if base > 0.0 else math.inf
        checks.append(_check("interaction_bound_stable", growth, self.bound_growth,
                             "max over lambda of |V|/delta for |x - xi| >= eta/2, relative to the smallest lambda"))

        report = InvariantReport(suite="ansatz", checks=checks, window_constants={"interaction_bound": bounds},
                                 is_valid=all(c.passed for c in checks))
        logger.info("Ansatz suite: %d/%d checks passed", sum(c.passed for c in checks), len(checks))
        return report
