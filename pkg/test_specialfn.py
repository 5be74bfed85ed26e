"""Special functions: K1 against the mpmath oracle, the W profile and expansion windows."""
import logging
import math
import warnings

import numpy as np
import pytest

from src.exceptions import ConfigError, SpecialFunctionDomainError, UnderflowWarning
from src.specialfn import (
    WINDOWS,
    bessel_k0,
    bessel_k1,
    bessel_k1_derivs,
    correction_profile,
    correction_w,
    k0_k1_arrays,
    oracle_k0,
    oracle_k1,
    oracle_overlap_check,
    oracle_w,
    window_constant,
)
from src.validation import SpecialFunctionValidator


@pytest.mark.parametrize("r", [1e-8, 1e-4, 0.3, 1.0, 2.5, 19.9, 20.1, 80.0, 400.0, 700.0])
def test_k1_matches_oracle(r):
    assert bessel_k1(r) == pytest.approx(float(oracle_k1(r)), rel=1e-12)


@pytest.mark.parametrize("r", [1e-6, 0.5, 7.0, 60.0])
def test_k0_matches_oracle(r):
    assert bessel_k0(r) == pytest.approx(float(oracle_k0(r)), rel=1e-12)


def test_k1_small_argument_pole():
    r = 1e-6
    assert bessel_k1(r) * r == pytest.approx(1.0, rel=1e-10)


@pytest.mark.parametrize("r", [0.0, -1.0, 5e-9, float("nan"), float("inf")])
def test_k1_rejects_unsupported_radius(r):
    with pytest.raises(SpecialFunctionDomainError):
        bessel_k1(r)


def test_k1_underflow_is_flagged_zero():
    with pytest.warns(UnderflowWarning):
        assert bessel_k1(750.0) == 0.0
    with pytest.warns(UnderflowWarning):
        derivs = bessel_k1_derivs(800.0)
    assert derivs.underflow
    assert derivs.k1 == 0.0


def test_correction_underflow_is_flagged():
    with pytest.warns(UnderflowWarning):
        far = correction_w(900.0)
    assert far.underflow
    assert far.w == pytest.approx(1.0 / 900.0 ** 2, rel=1e-15)
    assert not correction_w(50.0).underflow


def test_array_kernel_logs_underflow_count(caplog):
    with caplog.at_level(logging.DEBUG, logger="src.specialfn.bessel"):
        k0, k1 = k0_k1_arrays(np.array([1.0, 750.0, 900.0]))
    assert k0[1:].tolist() == [0.0, 0.0]
    assert k1[0] > 0.0
    assert "underflow at 2 of 3 radii" in caplog.text


def test_domain_error_is_value_error():
    with pytest.raises(ValueError):
        bessel_k1(-2.0)


def test_k1_derivatives_satisfy_bessel_equation():
    for r in (0.05, 0.7, 3.0, 15.0):
        e = bessel_k1_derivs(r)
        residual = r ** 2 * e.k1_second + r * e.k1_prime - (r ** 2 + 1.0) * e.k1
        assert abs(residual) <= 1e-12 * max(1.0, (r ** 2 + 1.0) * abs(e.k1))


def test_correction_ode_residual_on_log_grid():
    grid = np.geomspace(1e-6, 50.0, 1000)
    worst = max(correction_w(r).ode_residual() for r in grid)
    assert worst <= 1e-8


@pytest.mark.parametrize("r", [1e-5, 0.01, 0.5, 0.999, 1.0, 3.0, 30.0])
def test_correction_matches_oracle(r):
    assert correction_w(r).w == pytest.approx(float(oracle_w(r)), rel=1e-10)


def test_correction_series_and_closed_form_agree_at_switch():
    below = correction_w(1.0 - 1e-12)
    above = correction_w(1.0)
    assert below.w == pytest.approx(above.w, rel=1e-10)
    assert below.w_prime == pytest.approx(above.w_prime, rel=1e-10)
    assert below.w_second == pytest.approx(above.w_second, rel=1e-9)


def test_correction_asymptotics():
    # logarithmic growth at 0, 1/r^2 decay at infinity
    r = 1e-6
    assert correction_w(r).w / abs(math.log(r)) == pytest.approx(0.5, rel=0.1)
    assert correction_w(40.0).w * 40.0 ** 2 == pytest.approx(1.0, rel=1e-3)


def test_correction_profile_vectorized_matches_scalar():
    r = np.array([1e-3, 0.2, 0.99, 1.0, 4.0])
    w, wp, wpp = correction_profile(r)
    for k, value in enumerate(r):
        e = correction_w(value)
        assert w[k] == pytest.approx(e.w, rel=1e-14)
        assert wp[k] == pytest.approx(e.w_prime, rel=1e-14)
        assert wpp[k] == pytest.approx(e.w_second, rel=1e-14)


def test_oracle_branches_overlap():
    assert oracle_overlap_check([20.0, 25.0, 30.0, 40.0]) <= 1e-12


@pytest.mark.parametrize("name", ["k1_small", "k1_large"])
def test_window_constants_stable_under_refinement(name):
    window = next(w for w in WINDOWS if w.name == name)
    stats = window_constant(window, 20)
    assert math.isfinite(stats["sup"])
    assert stats["variation"] <= 2.0


def test_validator_rejects_range_beyond_underflow():
    with pytest.raises(ConfigError):
        SpecialFunctionValidator().validate(rmax=1000.0)


def test_validator_full_suite_passes():
    with warnings.catch_warnings():
        warnings.simplefilter("error", UnderflowWarning)
        report = SpecialFunctionValidator().validate()
    assert report.is_valid, [c.name for c in report.failed()]
    names = {c.name for c in report.checks}
    assert {"k1_oracle", "w_ode_residual", "window_k1_small", "window_k1_large"} <= names
    assert "k1_prime_small" in report.window_constants
