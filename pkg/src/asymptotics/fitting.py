"""Scaling-law regression along lambda grids.

Three models are supported:

* ``PURE_POWER``: value = C lambda^p, least squares on (ln lambda, ln|value|).
* ``POWER_WITH_LOG``: value = C ref(lambda) lambda^s for a reference scaling
  ref that carries the log factors; the ratio band is flat when |s| is small.
* ``AFFINE_IN_BASIS``: value = c0 + sum_k c_k b_k for basis columns b_k.
"""
import logging
import math
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from sklearn.linear_model import LinearRegression
from sklearn.metrics import r2_score

from src.config import config
from src.exceptions import FitError
from src.models.schemas import ScalingFit, ScalingModel

logger = logging.getLogger(__name__)

MIN_SAMPLES = 4
MIN_DECADES = 2.0

Scaling = Callable[[float, Tuple[float, float], float], float]


def concentration_scale(lam: float, d: float) -> float:
    """delta = d / (lambda ln lambda)."""
    return d / (lam * math.log(lam))


def _deltas(lam: float, d: Tuple[float, float]) -> Tuple[float, float]:
    return concentration_scale(lam, d[0]), concentration_scale(lam, d[1])


def _lambda_delta2_log(lam, d, beta):
    delta = _deltas(lam, d)[0]
    return lam * delta ** 2 * abs(math.log(delta))


def _lambda32_delta3_log(power: int) -> Scaling:
    def scaling(lam, d, beta):
        delta = _deltas(lam, d)[0]
        return lam ** 1.5 * delta ** 3 * math.log(lam) ** power
    return scaling


def _lambda_delta2(lam, d, beta):
    return lam * _deltas(lam, d)[0] ** 2


def _delta_log23(lam, d, beta):
    delta = _deltas(lam, d)[0]
    return delta * abs(math.log(delta)) ** (2.0 / 3.0)


def _beta_delta_delta(lam, d, beta):
    d1, d2 = _deltas(lam, d)
    return abs(beta) * d1 * d2


def _coupling(lam, d, beta):
    d1, d2 = _deltas(lam, d)
    return d1 ** 2 * d2 ** 2 * abs(math.log(d1 * d2))


def _w_norm(lam, d, beta):
    return math.sqrt(lam) * _deltas(lam, d)[0] * math.log(lam)


# Reference sizes as functions of (lambda, (d1, d2), beta); component 1 is the measured one
REFERENCE_SCALINGS: Dict[str, Scaling] = {
    "lambda_delta2_log": _lambda_delta2_log,
    "lambda32_delta3_log2": _lambda32_delta3_log(2),
    "lambda32_delta3_log3": _lambda32_delta3_log(3),
    "lambda_delta2": _lambda_delta2,
    "delta_log23": _delta_log23,
    "beta_delta_delta": _beta_delta_delta,
    "coupling": _coupling,
    "w_norm": _w_norm,
}


def reference_scaling(name: str, lam: float, d: Sequence[float] = (1.0, 1.0), beta: float = 1.0) -> float:
    """Evaluate a named reference scaling at lambda."""
    try:
        scaling = REFERENCE_SCALINGS[name]
    except KeyError:
        raise FitError(f"unknown reference scaling '{name}'; known: {sorted(REFERENCE_SCALINGS)}") from None
    return float(scaling(lam, (float(d[0]), float(d[1])), beta))


def reference_function(name: str, d: Sequence[float] = (1.0, 1.0), beta: float = 1.0) -> Callable[[float], float]:
    """Named reference scaling as a function of lambda alone."""
    reference_scaling(name, math.e ** 2, d, beta)
    return lambda lam: reference_scaling(name, lam, d, beta)


def _r2(y: np.ndarray, predicted: np.ndarray) -> float:
    return float(np.clip(r2_score(y, predicted), 0.0, 1.0))


def _check_samples(lams: np.ndarray, values: np.ndarray, min_decades: float) -> None:
    if len(lams) < MIN_SAMPLES:
        raise FitError(f"need at least {MIN_SAMPLES} samples, got {len(lams)}")
    if np.any(lams <= 0.0) or not np.all(np.isfinite(values)):
        raise FitError("samples need lambda > 0 and finite values")
    span = math.log10(float(np.max(lams)) / float(np.min(lams)))
    if span < min_decades - 1e-9:
        raise FitError(f"lambda samples span {span:.3g} decades, need {min_decades:g}")


def _log_values(values: np.ndarray, what: str) -> Tuple[float, np.ndarray]:
    if np.any(values == 0.0):
        raise FitError(f"{what} fit needs nonzero values")
    signs = np.sign(values)
    if np.any(signs != signs[0]):
        raise FitError(f"{what} fit needs values of one sign")
    return float(signs[0]), np.log(np.abs(values))


def _fit_power(lams: np.ndarray, values: np.ndarray, grid) -> ScalingFit:
    sign, log_v = _log_values(values, "pure-power")
    log_lam = np.log(lams)[:, None]
    reg = LinearRegression().fit(log_lam, log_v)
    predicted = reg.predict(log_lam)
    exponent = float(reg.coef_[0])
    return ScalingFit(
        model=ScalingModel.PURE_POWER,
        coefficients=[sign * math.exp(float(reg.intercept_)), exponent],
        r_squared=_r2(log_v, predicted),
        residuals=(log_v - predicted).tolist(),
        grid=grid,
        slope=exponent,
    )


def _fit_ratio(lams: np.ndarray, values: np.ndarray, reference: Callable[[float], float],
               grid, flatness: float) -> ScalingFit:
    ref = np.array([reference(float(lam)) for lam in lams])
    if np.any(ref <= 0.0) or not np.all(np.isfinite(ref)):
        raise FitError("reference scaling must be positive and finite on the grid")
    sign, log_ratio = _log_values(values / ref, "power-with-log")
    log_lam = np.log(lams)[:, None]
    reg = LinearRegression().fit(log_lam, log_ratio)
    predicted = reg.predict(log_lam)
    slope = float(reg.coef_[0])
    # the fitted line passes through the means: C is the ratio at the grid's log-centre
    coefficient = sign * math.exp(float(np.mean(log_ratio)))
    log_ref = np.log(ref)
    return ScalingFit(
        model=ScalingModel.POWER_WITH_LOG,
        coefficients=[coefficient, slope],
        r_squared=_r2(log_ratio + log_ref, predicted + log_ref),
        residuals=(log_ratio - predicted).tolist(),
        grid=grid,
        slope=slope,
        flat=abs(slope) <= flatness,
    )


def _fit_affine(values: np.ndarray, basis: np.ndarray, grid) -> ScalingFit:
    if basis.ndim == 1:
        basis = basis[:, None]
    if basis.shape[0] != len(values):
        raise FitError(f"basis has {basis.shape[0]} rows for {len(values)} samples")
    # columns are scaled to unit RMS so the rank test and solve see comparable magnitudes
    scale = np.sqrt(np.mean(basis ** 2, axis=0))
    if np.any(scale == 0.0):
        raise FitError("basis rank deficient: zero column")
    scaled = basis / scale
    design = np.column_stack([np.ones(len(values)), scaled])
    if np.linalg.matrix_rank(design, tol=1e-10 * len(values)) < design.shape[1]:
        raise FitError("basis rank deficient")
    reg = LinearRegression().fit(scaled, values)
    predicted = reg.predict(scaled)
    return ScalingFit(
        model=ScalingModel.AFFINE_IN_BASIS,
        coefficients=[float(reg.intercept_)] + (reg.coef_ / scale).tolist(),
        r_squared=_r2(values, predicted),
        residuals=(values - predicted).tolist(),
        grid=grid,
    )


def fit_scaling(
    samples: Sequence[Tuple[float, float]],
    model: ScalingModel,
    reference: Optional[Callable[[float], float]] = None,
    basis: Optional[np.ndarray] = None,
    min_decades: float = MIN_DECADES,
) -> ScalingFit:
    """Fit a scaling law to (lambda, value) samples.

    Args:
        samples: (lambda, value) pairs; at least 4 spanning ``min_decades`` decades.
        model: Which regression to run.
        reference: Reference scaling of lambda (``POWER_WITH_LOG`` only).
        basis: (n, k) basis values per sample (``AFFINE_IN_BASIS`` only).
        min_decades: Required span of the lambda samples.

    Returns:
        ScalingFit. Coefficients are [C, p] for the power model, [C, s] for
        the ratio model and [c0, c1, ..., ck] for the affine model.

    Raises:
        FitError: too few samples, too narrow a grid, zero or mixed-sign
            values in a log fit, or a rank-deficient basis.
    """
    model = ScalingModel(model)
    lams = np.array([float(s[0]) for s in samples])
    values = np.array([float(s[1]) for s in samples])
    _check_samples(lams, values, min_decades)
    grid = [(float(a), float(b)) for a, b in zip(lams, values)]

    if model is ScalingModel.PURE_POWER:
        fit = _fit_power(lams, values, grid)
    elif model is ScalingModel.POWER_WITH_LOG:
        if reference is None:
            raise FitError("power-with-log fit needs a reference scaling")
        fit = _fit_ratio(lams, values, reference, grid, config.get('asymptotics.flatness_slope', 0.1))
    else:
        if basis is None:
            raise FitError("affine fit needs a basis")
        fit = _fit_affine(values, np.asarray(basis, dtype=float), grid)
    logger.debug("%s fit: coefficients=%s R2=%.6f", model.value, fit.coefficients, fit.r_squared)
    return fit
