"""Star-shaped domains, boundary charts and mean curvature."""
import math
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError

from src.exceptions import GeometryError
from src.geometry import (
    StarDomain,
    boundary_point,
    cartesian_to_hyperspherical,
    complete_basis,
    find_curvature_maxima,
    hyperspherical_to_cartesian,
    local_graph_coeffs,
    mean_curvature,
    mean_curvature_fd,
    scan_curvature,
    sphere_grid,
)
from src.models.schemas import DomainSpec
from src.pipeline import load_experiment

BALL = DomainSpec(kind="ball")
ELLIPSOID = DomainSpec(kind="ellipsoid", semi_axes=[2.0, 1.0, 1.0, 1.0])


def _rotation(seed: int = 3) -> np.ndarray:
    q, _ = np.linalg.qr(np.random.default_rng(seed).normal(size=(4, 4)))
    return q


def test_sphere_grid_is_unit_and_deterministic():
    a = sphere_grid(300)
    b = sphere_grid(300)
    assert len(a) >= 300
    assert np.allclose(np.linalg.norm(a, axis=1), 1.0)
    assert np.array_equal(a, b)


def test_hyperspherical_round_trip():
    omega = sphere_grid(50)
    assert np.allclose(hyperspherical_to_cartesian(cartesian_to_hyperspherical(omega)), omega, atol=1e-12)


def test_complete_basis_is_orthonormal():
    normal = np.array([1.0, 2.0, -0.5, 0.3])
    normal /= np.linalg.norm(normal)
    basis = complete_basis(normal[None, :])
    full = np.vstack([normal, basis])
    assert np.allclose(full @ full.T, np.eye(4), atol=1e-14)


def test_ball_boundary_point_and_normal():
    p = boundary_point(DomainSpec(kind="ball", radius=2.0), [0.0, 3.0, 0.0, 0.0])
    assert p.xi == pytest.approx([0.0, 2.0, 0.0, 0.0])
    assert p.normal == pytest.approx([0.0, -1.0, 0.0, 0.0])
    frame = p.frame_array
    assert np.allclose(frame @ frame.T, np.eye(3), atol=1e-12)
    assert np.allclose(frame @ p.normal_array, 0.0, atol=1e-12)


def test_zero_direction_rejected():
    with pytest.raises(GeometryError):
        boundary_point(BALL, [0.0, 0.0, 0.0, 0.0])


def test_profile_below_floor_rejected():
    with pytest.raises(GeometryError):
        StarDomain(DomainSpec(kind="ball", radius=1e-4))


def test_ellipsoid_requires_semi_axes():
    with pytest.raises(ValidationError):
        DomainSpec(kind="ellipsoid")


def test_protrusion_amplitude_bounded():
    with pytest.raises(ValidationError):
        DomainSpec(kind="protrusion", amplitude=1.5)


def test_protrusion_lobe_tip_radius():
    dom = StarDomain(DomainSpec(kind="protrusion", amplitude=0.1, frequency=8))
    theta = 0.5 * math.pi / 8
    tip = np.array([math.cos(theta), math.sin(theta), 0.0, 0.0])
    assert dom.rho(tip)[0] == pytest.approx(1.1, rel=1e-12)
    assert dom.rho_min == pytest.approx(0.9)


@pytest.mark.parametrize("radius", [0.5, 1.0, 3.0])
def test_ball_mean_curvature(radius):
    spec = DomainSpec(kind="ball", radius=radius)
    p = boundary_point(spec, [0.3, -0.2, 0.9, 0.1])
    h = mean_curvature(spec, p)
    assert h.h == pytest.approx(1.0 / radius, rel=1e-6)
    assert h.h_fd == pytest.approx(1.0 / radius, rel=1e-6)
    assert np.allclose(h.h_grad, 0.0, atol=1e-4 / radius)


def test_ball_graph_normalization():
    # the unit sphere is the graph x4 = |x'|^2 / 2 + ..., so every g_i = 1/2
    p = local_graph_coeffs(BALL, boundary_point(BALL, [1.0, 0.0, 0.0, 0.0]))
    assert p.graph_g == pytest.approx([0.5, 0.5, 0.5], rel=1e-6)
    assert p.fit_residual <= 1e-7


def test_ellipsoid_curvature_at_tip_and_equator():
    tip = mean_curvature(ELLIPSOID, boundary_point(ELLIPSOID, [1.0, 0.0, 0.0, 0.0]))
    equator = mean_curvature(ELLIPSOID, boundary_point(ELLIPSOID, [0.0, 1.0, 0.0, 0.0]))
    # principal curvatures a/b^2 at the tip, (b/a^2, 1/b, 1/b) on the equator
    assert tip.h == pytest.approx(2.0, rel=1e-5)
    assert equator.h == pytest.approx((0.25 + 1.0 + 1.0) / 3.0, rel=1e-5)


def test_graph_and_shape_operator_agree():
    h = mean_curvature(ELLIPSOID, boundary_point(ELLIPSOID, [2.0, 1.0, 0.5, 0.0]))
    assert h.h == pytest.approx(h.h_fd, rel=1e-4)
    assert np.allclose(h.h_grad, h.h_grad_fd, atol=1e-3)


def test_curvature_rotation_equivariant():
    rot = _rotation()
    rotated = ELLIPSOID.rotated(rot)
    omega = np.array([0.6, 0.5, -0.4, 0.2])
    omega /= np.linalg.norm(omega)
    assert mean_curvature_fd(rotated, rot @ omega)[0] == pytest.approx(
        mean_curvature_fd(ELLIPSOID, omega)[0], rel=1e-7
    )


def test_scan_curvature_on_ball_is_constant():
    omega, xi, h = scan_curvature(BALL, 200)
    assert omega.shape == xi.shape
    assert np.allclose(h, 1.0, rtol=1e-7)


def test_ball_has_constant_curvature_and_no_maxima():
    maxima = find_curvature_maxima(BALL, 300)
    assert maxima.constant_curvature
    assert maxima.maxima == []


def test_ellipsoid_maxima_at_long_axis_tips():
    maxima = find_curvature_maxima(ELLIPSOID, 500)
    assert not maxima.constant_curvature
    assert len(maxima.maxima) == 2
    for m in maxima.maxima:
        assert m.h == pytest.approx(2.0, rel=1e-5)
        assert abs(m.point.xi[0]) == pytest.approx(2.0, rel=1e-4)
    assert maxima.maxima[0].point.xi[0] * maxima.maxima[1].point.xi[0] < 0.0


def test_maxima_rotate_with_the_domain():
    rot = _rotation()
    base = find_curvature_maxima(ELLIPSOID, 500)
    turned = find_curvature_maxima(ELLIPSOID.rotated(rot), 500)
    assert len(turned.maxima) == len(base.maxima) == 2
    for m in turned.maxima:
        gaps = [np.linalg.norm(m.point.xi_array - rot @ b.point.xi_array) for b in base.maxima]
        match = base.maxima[int(np.argmin(gaps))]
        assert min(gaps) < 1e-3
        assert m.h == pytest.approx(match.h, rel=1e-6)


def test_shipped_protrusion_points_have_distinct_curvature():
    experiment = load_experiment(Path(__file__).parent / "configs" / "protrusion.json")
    dom = StarDomain(experiment.domain)
    h = [mean_curvature(dom, boundary_point(dom, w), cross_check=False).h for w in experiment.boundary_points]
    assert all(value > 0.0 for value in h)
    assert len({round(value, 6) for value in h}) == len(h)
    # the first point is a lobe tip and carries the largest H
    assert dom.rho(np.asarray(experiment.boundary_points[0]))[0] == pytest.approx(1.15, rel=1e-12)
    assert h[0] == max(h)


@pytest.mark.slow
def test_protrusion_maxima_at_the_eight_lobe_tips():
    spec = DomainSpec(kind="protrusion", amplitude=0.15, frequency=8)
    maxima = find_curvature_maxima(spec)
    assert len(maxima.maxima) == 8
    tips = [(0.5 * math.pi + 2.0 * math.pi * k) / 8 for k in range(8)]
    angles = sorted(float(np.mod(math.atan2(m.point.xi[1], m.point.xi[0]), 2.0 * math.pi)) for m in maxima.maxima)
    assert angles == pytest.approx(tips, abs=1e-3)
    for m in maxima.maxima:
        assert np.linalg.norm(m.point.xi_array) == pytest.approx(1.15, rel=1e-5)
        assert m.point.xi[2:] == pytest.approx([0.0, 0.0], abs=1e-3)
        assert m.h == pytest.approx(maxima.maxima[0].h, rel=1e-5)
