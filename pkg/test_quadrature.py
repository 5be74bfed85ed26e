"""Product quadrature oracles: volumes, areas, bubble integrals, determinism."""
import math

import numpy as np
import pytest

from src.ansatz import bubble_arrays
from src.models.schemas import ALPHA, DomainSpec, SingularityHint, Tolerance
from src.quadrature import (
    gauss_legendre,
    graded_ray_edges,
    h1_lambda_inner,
    integrate_ball,
    integrate_boundary,
    integrate_domain,
    integrate_domain_vector,
    lp_norm,
    panel_rule,
    s2_rule,
)

BALL = DomainSpec(kind="ball")
TIGHT = Tolerance(rel=1e-10, abs=1e-14)


def _ones(x):
    return np.ones(len(x))


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(6)
    assert np.sum(w) == pytest.approx(1.0, rel=1e-15)
    assert np.sum(w * x ** 11) == pytest.approx(1.0 / 12.0, rel=1e-13)


def test_panel_rule_integrates_across_panels():
    nodes, weights = panel_rule(np.array([0.0, 0.5, 2.0, 3.0]), 4)
    assert nodes.shape == (12,)
    assert np.sum(weights * nodes ** 3) == pytest.approx(3.0 ** 4 / 4.0, rel=1e-13)


def test_s2_rule_area_and_moments():
    dirs, weights = s2_rule(8)
    assert np.sum(weights) == pytest.approx(4.0 * math.pi, rel=1e-14)
    assert np.sum(weights * dirs[:, 0] ** 2) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-13)


def test_graded_edges_cover_segment_and_refine_at_focus():
    edges = graded_ray_edges(np.array([0.0]), np.array([1.0]), np.array([0.25]), np.array([1e-4]), 0.5)[0]
    assert edges[0] == 0.0 and edges[-1] == 1.0
    assert np.all(np.diff(edges) >= 0.0)
    assert np.min(np.diff(edges)[np.diff(edges) > 0.0]) <= 1e-4 * (1.0 + 1e-12)


def test_unit_ball_volume():
    result = integrate_domain(_ones, BALL, tol=TIGHT)
    assert result.converged
    assert result.value == pytest.approx(math.pi ** 2 / 2.0, rel=1e-8)


def test_unit_sphere_area():
    result = integrate_boundary(lambda x, n: np.ones(len(x)), BALL, tol=TIGHT)
    assert result.converged
    assert result.value == pytest.approx(2.0 * math.pi ** 2, rel=1e-8)


def test_ellipsoid_volume():
    spec = DomainSpec(kind="ellipsoid", semi_axes=[2.0, 1.0, 1.0, 1.0])
    assert integrate_domain(_ones, spec, tol=TIGHT).value == pytest.approx(math.pi ** 2, rel=1e-8)


def test_inward_normals_on_sphere():
    # x . n = -1 on the unit sphere, so the integral is minus the area
    result = integrate_boundary(lambda x, n: np.sum(x * n, axis=1), BALL, tol=TIGHT)
    assert result.value == pytest.approx(-2.0 * math.pi ** 2, rel=1e-8)


def test_interior_ball_volume():
    result = integrate_ball(_ones, BALL, [0.5, 0.0, 0.0, 0.0], 0.3, tol=TIGHT)
    assert result.value == pytest.approx(math.pi ** 2 / 2.0 * 0.3 ** 4, rel=1e-8)


def test_ball_must_not_contain_origin():
    with pytest.raises(ValueError):
        integrate_ball(_ones, BALL, [0.2, 0.0, 0.0, 0.0], 0.5)


def test_bubble_quartic_integral_whole_space():
    # int U_{1,0}^4 over R^4 = 32 pi^2 / 3; the tail beyond radius 20 is below 1e-5
    spec = DomainSpec(kind="ball", radius=20.0)
    hints = SingularityHint.for_bubbles([np.zeros(4)], [1.0])
    result = integrate_domain(lambda x: bubble_arrays(x, 1.0, np.zeros(4))[0] ** 4, spec, hints,
                              Tolerance(rel=1e-6, abs=1e-14))
    assert result.value == pytest.approx(32.0 * math.pi ** 2 / 3.0, rel=1e-3)


def test_boundary_bubble_integral_is_half():
    # a bubble concentrated at a boundary point sees half of R^4 up to O(delta)
    delta = 1e-4
    xi = np.array([1.0, 0.0, 0.0, 0.0])
    hints = SingularityHint.for_bubbles([xi], [delta])
    result = integrate_domain(lambda x: bubble_arrays(x, delta, xi)[0] ** 4, BALL, hints,
                              Tolerance(rel=1e-6, abs=1e-14))
    assert result.converged
    assert result.value == pytest.approx(16.0 * math.pi ** 2 / 3.0, rel=1e-3)


def test_vector_integrand_columns():
    results = integrate_domain_vector(lambda x: np.stack([np.ones(len(x)), np.sum(x * x, axis=1)], axis=1),
                                      BALL, tol=TIGHT)
    assert results[0].value == pytest.approx(math.pi ** 2 / 2.0, rel=1e-8)
    # int |x|^2 over B^4 = 2 pi^2 / 6
    assert results[1].value == pytest.approx(math.pi ** 2 / 3.0, rel=1e-8)


def test_results_independent_of_thread_count():
    xi = np.array([1.0, 0.0, 0.0, 0.0])
    hints = SingularityHint.for_bubbles([xi], [1e-3])

    def integrand(x):
        return bubble_arrays(x, 1e-3, xi)[0] ** 2

    serial = integrate_domain(integrand, BALL, hints, workers=1)
    threaded = integrate_domain(integrand, BALL, hints, workers=4)
    assert serial.value == threaded.value
    assert serial.err_est == threaded.err_est


def test_lp_norm_of_constant():
    result = lp_norm(_ones, 2.0, BALL, tol=TIGHT)
    assert result.value == pytest.approx(math.sqrt(math.pi ** 2 / 2.0), rel=1e-8)
    boundary = lp_norm(lambda x, n: np.ones(len(x)), 4.0 / 3.0, BALL, region="boundary", tol=TIGHT)
    assert boundary.value == pytest.approx((2.0 * math.pi ** 2) ** 0.75, rel=1e-8)


def test_lp_norm_rejects_unsupported_inputs():
    with pytest.raises(ValueError):
        lp_norm(_ones, 5.0, BALL)
    with pytest.raises(ValueError):
        lp_norm(_ones, 2.0, BALL, region="surface")


def test_h1_lambda_inner_of_linear_fields():
    def field(x):
        return x[:, 0], np.tile([1.0, 0.0, 0.0, 0.0], (len(x), 1))

    lam = 10.0
    result = h1_lambda_inner(field, field, lam, BALL, tol=TIGHT)
    # |grad|^2 integrates to the volume, x1^2 to a quarter of int |x|^2
    expected = math.pi ** 2 / 2.0 + lam * math.pi ** 2 / 12.0
    assert result.value == pytest.approx(expected, rel=1e-8)


def _centered_bubble_quartic(delta, radius):
    # 64 pi^2 [1/6 - (1+S)^-2 / 2 + (1+S)^-3 / 3] with S = (radius/delta)^2
    s = 1.0 + (radius / delta) ** 2
    return 64.0 * math.pi ** 2 * (1.0 / 6.0 - 0.5 / s ** 2 + 1.0 / (3.0 * s ** 3))


ORIGIN = np.zeros(4)
HONESTY_BATTERY = [
    ("gaussian", lambda x: np.exp(-np.sum(x * x, axis=1)), None, math.pi ** 2 * (1.0 - 2.0 / math.e)),
    ("radial_log", lambda x: np.log(np.linalg.norm(x, axis=1)), None, -math.pi ** 2 / 8.0),
    ("bubble_quartic", lambda x: bubble_arrays(x, 1e-2, ORIGIN)[0] ** 4,
     SingularityHint.for_bubbles([ORIGIN], [1e-2]), _centered_bubble_quartic(1e-2, 1.0)),
    ("quadratic", lambda x: np.sum(x * x, axis=1), None, math.pi ** 2 / 3.0),
]


@pytest.mark.parametrize("name, integrand, hints, exact", HONESTY_BATTERY, ids=[b[0] for b in HONESTY_BATTERY])
def test_error_estimate_covers_true_error(name, integrand, hints, exact):
    result = integrate_domain(integrand, BALL, hints, Tolerance(rel=1e-6, abs=1e-14))
    assert result.converged
    # rounding floor for integrands the rule resolves exactly
    assert abs(result.value - exact) <= 3.0 * result.err_est + 1e-12 * abs(exact)


def test_grading_reaches_micro_scale():
    delta = 1e-6
    edges = graded_ray_edges(np.array([0.0]), np.array([1.0]), np.array([1.0]), np.array([0.1 * delta]), 0.5)[0]
    widths = np.diff(edges)
    assert np.min(widths[widths > 0.0]) <= 0.1 * delta * (1.0 + 1e-12)

    xi = np.array([1.0, 0.0, 0.0, 0.0])
    hints = SingularityHint.for_bubbles([xi], [delta])
    result = integrate_domain(lambda x: bubble_arrays(x, delta, xi)[0] ** 4, BALL, hints,
                              Tolerance(rel=1e-6, abs=1e-14))
    assert result.converged
    assert result.value == pytest.approx(16.0 * math.pi ** 2 / 3.0, rel=1e-3)


def test_boundary_integral_of_bubble_is_linear_in_delta():
    # on the unit sphere the integral is alpha delta pi^2 (2 + delta^2 - delta sqrt(4 + delta^2))
    xi = np.array([1.0, 0.0, 0.0, 0.0])
    deltas = [1e-2, 1e-3, 1e-4]
    values = []
    for delta in deltas:
        hints = SingularityHint.for_bubbles([xi], [delta])
        result = integrate_boundary(lambda x, n: bubble_arrays(x, delta, xi)[0], BALL, hints,
                                    Tolerance(rel=1e-8, abs=1e-14))
        exact = ALPHA * delta * math.pi ** 2 * (2.0 + delta ** 2 - delta * math.sqrt(4.0 + delta ** 2))
        assert result.converged
        assert result.value == pytest.approx(exact, rel=1e-6)
        values.append(result.value)
    slope = np.polyfit(np.log(deltas), np.log(values), 1)[0]
    assert slope == pytest.approx(1.0, rel=0.05)
