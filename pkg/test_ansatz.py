"""Bubble, correction field, ansatz identity and kernel elements."""
import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.ansatz import (
    ansatz_pde_residual,
    bubble,
    bubble_arrays,
    correction_arrays,
    correction_field,
    correction_field_closed_form,
    gram_limits,
    kernel_arrays,
    kernel_element,
    kernel_gram,
    split_ansatz_arrays,
    ansatz_arrays,
    ansatz_v,
)
from src.exceptions import SingularPointError
from src.geometry import boundary_point
from src.models.schemas import ALPHA, ConcentrationConfig, DomainSpec
from src.validation import AnsatzValidator

BALL = DomainSpec(kind="ball")
XI = np.array([1.0, 0.0, 0.0, 0.0])


def _config(lam: float, d=(1.0, 1.0), eta: float = 0.5) -> ConcentrationConfig:
    points = (boundary_point(BALL, [1.0, 0.0, 0.0, 0.0]), boundary_point(BALL, [-1.0, 0.0, 0.0, 0.0]))
    return ConcentrationConfig(**{"lambda": lam}, beta=1.0, d=d, xi=points, eta=eta)


def test_alpha_constant():
    assert ALPHA == pytest.approx(2.0 * math.sqrt(2.0), rel=1e-15)


def test_bubble_peak_and_laplacian():
    delta = 0.01
    assert bubble(delta, XI, XI).value == pytest.approx(ALPHA / delta, rel=1e-15)
    x = XI + np.array([[0.003, -0.01, 0.02, 0.0], [0.1, 0.2, -0.3, 0.05]])
    u, _, lap = bubble_arrays(x, delta, XI)
    assert np.allclose(lap, -u ** 3, rtol=1e-12)


def test_bubble_gradient_matches_finite_differences():
    delta, x = 0.2, XI + np.array([0.1, -0.05, 0.2, 0.3])
    grad = bubble(delta, XI, x).gradient
    h = 1e-6
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        fd = (bubble(delta, XI, x + e).value - bubble(delta, XI, x - e).value) / (2.0 * h)
        assert grad[k] == pytest.approx(fd, rel=1e-6)


def test_correction_singular_at_center():
    with pytest.raises(SingularPointError):
        correction_field(1e4, 1e-5, XI, XI)


def test_correction_far_field_is_bubble_tail():
    lam, delta = 1e4, 1e-5
    x = XI + np.array([0.0, 0.5, 0.0, 0.0])
    assert correction_field(lam, delta, XI, x).value == pytest.approx(ALPHA * delta / 0.25, rel=1e-12)


@pytest.mark.parametrize("dist", [1e-3, 1e-2, 0.3])
def test_correction_profile_and_k1_forms_agree(dist):
    lam, delta = 1e4, 1e-5
    x = XI + np.array([0.0, 0.0, dist, 0.0])
    assert correction_field(lam, delta, XI, x).value == pytest.approx(
        correction_field_closed_form(lam, delta, XI, x), rel=1e-10
    )


def test_split_ansatz_recombines():
    lam, delta = 1e3, 1e-4
    x = XI + np.array([[0.0, 0.01, 0.0, 0.0], [0.0, 0.0, 0.2, 0.1]])
    m1, m2 = split_ansatz_arrays(x, lam, delta, XI)
    v, _, _ = ansatz_arrays(x, lam, delta, XI)
    assert np.allclose(ALPHA * (m1 + m2), v, rtol=1e-10)


@pytest.mark.parametrize("lam", [1e2, 1e4])
def test_ansatz_identity_pointwise(lam):
    cfg = _config(lam)
    delta = cfg.delta[0]
    for offset in (delta, 10.0 * delta, 0.2):
        x = XI + np.array([0.0, offset, 0.0, 0.0])
        assert ansatz_pde_residual(cfg, 0, x, relative=True) <= 1e-7


def test_correction_laplacian_solves_helmholtz():
    # -Laplace W_lambda + lambda W_lambda = lambda alpha delta / |y|^2
    lam, delta = 1e3, 1e-4
    x = XI + np.array([[0.0, 0.002, 0.0, 0.0], [0.0, 0.05, 0.05, 0.0]])
    w, _, lap = correction_arrays(x, lam, delta, XI)
    r2 = np.sum((x - XI) ** 2, axis=1)
    assert np.allclose(-lap + lam * w, lam * ALPHA * delta / r2, rtol=1e-8)


def test_concentration_scale():
    cfg = _config(1e3, d=(1.0, 1.5))
    assert cfg.delta[0] == pytest.approx(1.0 / (1e3 * math.log(1e3)))
    assert cfg.delta[1] == pytest.approx(1.5 / (1e3 * math.log(1e3)))
    swapped = cfg.swapped()
    assert swapped.d == (1.5, 1.0)
    assert swapped.xi[0] == cfg.xi[1]


@pytest.mark.parametrize(
    "kwargs",
    [{"lam": 2.0}, {"lam": 1e3, "d": (0.4, 1.0)}, {"lam": 1e3, "d": (1.0, 2.5)}, {"lam": 1e3, "eta": 1.5}],
)
def test_inadmissible_configs_rejected(kwargs):
    with pytest.raises(ValidationError):
        _config(**kwargs)


def test_kernel_elements_at_center():
    cfg = _config(1e4)
    delta = cfg.delta[0]
    assert kernel_element(cfg, 0, 0, XI).value == pytest.approx(-ALPHA / delta, rel=1e-14)
    for j in (1, 2, 3):
        assert kernel_element(cfg, 0, j, XI).value == 0.0


def test_kernel_gradients_match_finite_differences():
    delta = 0.3
    frame = boundary_point(BALL, XI).frame_array
    x = XI + np.array([-0.2, 0.1, 0.15, -0.05])
    _, grads = kernel_arrays(x, delta, XI, frame)
    h = 1e-6
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        plus, _ = kernel_arrays(x + e, delta, XI, frame)
        minus, _ = kernel_arrays(x - e, delta, XI, frame)
        assert np.allclose(grads[0, :, k], (plus[0] - minus[0]) / (2.0 * h), rtol=1e-6, atol=1e-8)


def test_gram_half_space_limits():
    a0, a1 = gram_limits()
    assert a0 == pytest.approx(3.2 * math.pi ** 2, rel=1e-10)
    assert a1 == pytest.approx(3.2 * math.pi ** 2, rel=1e-10)


@pytest.mark.slow
def test_kernel_gram_approaches_half_space_limits():
    cfg = _config(1e4)
    gram = kernel_gram(cfg, 0, BALL)
    a0, a1 = gram_limits()
    assert gram[0, 0] == pytest.approx(a0, rel=0.01)
    for j in (1, 2, 3):
        assert gram[j, j] == pytest.approx(a1, rel=0.01)
    off = gram - np.diag(np.diag(gram))
    assert np.max(np.abs(off)) <= 0.01 * a0


def test_ansatz_validator_suite_on_ball():
    report = AnsatzValidator().validate(BALL)
    assert report.is_valid, [c.name for c in report.failed()]
    assert set(report.window_constants["interaction_bound"]) == {"100", "1000", "10000"}
    stable = next(c for c in report.checks if c.name == "interaction_bound_stable")
    assert stable.passed
    assert stable.value >= 1.0


def test_growing_interaction_bound_fails_suite(monkeypatch):
    growing = iter([1.0, 1.5, 4.0])
    monkeypatch.setattr("src.validation.validator.interaction_bound", lambda cfg, i, dom: next(growing))
    report = AnsatzValidator().validate(BALL)
    assert not report.is_valid
    assert [c.name for c in report.failed()] == ["interaction_bound_stable"]
    assert report.failed()[0].value == pytest.approx(4.0)


def test_ansatz_v_is_bubble_minus_correction():
    cfg = _config(1e3)
    delta = cfg.delta[0]
    x = XI + np.array([0.0, 0.01, -0.02, 0.0])
    v = ansatz_v(cfg, 0, x)
    u = bubble(delta, XI, x)
    w = correction_field(cfg.lam, delta, XI, x)
    assert v.value == pytest.approx(u.value - w.value, rel=1e-12)
    assert v.gradient == pytest.approx(np.subtract(u.gradient, w.gradient).tolist(), rel=1e-10)


def test_ansatz_v_rejects_center_and_bad_index():
    cfg = _config(1e3)
    with pytest.raises(SingularPointError):
        ansatz_v(cfg, 1, cfg.xi[1].xi)
    with pytest.raises(ValueError):
        ansatz_v(cfg, 2, XI + 0.1)


@pytest.mark.parametrize("delta", [1e-1, 1e-3])
def test_kernel_elements_dominated_by_bubble(delta):
    # |Z_0| = U |r^2 - delta^2| / D and |Z_j| <= U 2 delta r / D, both at most U
    rng = np.random.default_rng(11)
    x = rng.uniform(-1.0, 1.0, size=(10_000, 4))
    x = x[np.linalg.norm(x, axis=1) < 1.0]
    frame = boundary_point(BALL, XI).frame_array
    values, _ = kernel_arrays(x, delta, XI, frame)
    u = bubble_arrays(x, delta, XI)[0]
    ratios = np.abs(values) / u[:, None]
    assert np.max(ratios) <= 1.0 + 1e-12
    assert np.max(ratios[:, 0]) >= 0.9
