"""Energy functional, coupling, error dual norms and the Q decomposition."""
import math

import numpy as np
import pytest

from src.energy import (
    A_BAR_REFERENCE,
    TERM_NAMES,
    bubble_energy,
    coupling_term,
    dominant_term,
    e4_half_space_norm,
    energy_full,
    error_dual_norms,
    predicted_scalings,
    psi_margin,
    q_decomposition,
    reduced_energy_sample,
    regime,
    single_energy,
)
from src.geometry import boundary_point
from src.models.schemas import ConcentrationConfig, DomainSpec

BALL = DomainSpec(kind="ball")


def _config(lam: float, beta: float = 1.0, d=(1.0, 1.0)) -> ConcentrationConfig:
    points = (boundary_point(BALL, [1.0, 0.0, 0.0, 0.0]), boundary_point(BALL, [-1.0, 0.0, 0.0, 0.0]))
    return ConcentrationConfig(**{"lambda": lam}, beta=beta, d=d, xi=points, eta=0.5)


def test_coupling_vanishes_without_interaction():
    assert coupling_term(_config(1e3, beta=0.0), BALL) == 0.0


def test_regime_tags():
    assert regime(1.0) == "competitive"
    assert regime(-0.5) == "cooperative"
    assert regime(0.0) == "decoupled"


def test_psi_margin_formula():
    cfg = _config(1e3, d=(1.0, 1.5))
    lam = 1e3
    expected = sum(d * abs(math.log(d)) ** (2.0 / 3.0) for d in cfg.delta) / (lam * math.log(lam) ** (1.0 / 3.0))
    assert psi_margin(cfg) == pytest.approx(expected, rel=1e-14)


def test_predicted_scalings_order_and_e6():
    lam, delta = 1e3, 1e-4
    values = predicted_scalings(lam, delta, 2e-4, 0.0)
    assert len(values) == len(TERM_NAMES) == 6
    assert values[3] == pytest.approx(lam * delta ** 2)
    assert values[5] == 0.0
    assert dominant_term([0.1, 3.0, 0.2]) == 1


def test_half_bubble_energy_near_leading_constant():
    # I(V) of a boundary bubble tends to half the whole-space energy 8 pi^2 / 3
    cfg = _config(1e3)
    value = bubble_energy(cfg.lam, cfg.delta[0], cfg.xi[0].xi_array, BALL)
    assert value == pytest.approx(4.0 * math.pi ** 2 / 3.0, rel=0.05)


def test_energy_symmetric_under_component_swap():
    cfg = _config(1e3, d=(0.8, 1.2))
    direct = energy_full(cfg, BALL)
    swapped = energy_full(cfg.swapped(), BALL)
    assert direct.total == pytest.approx(swapped.total, rel=1e-12)
    assert direct.single == pytest.approx(swapped.single[::-1], rel=1e-12)
    assert direct.coupling < 0.0


def test_cooperative_sample_is_tagged():
    sample = reduced_energy_sample(_config(1e3, beta=-1.0), BALL)
    assert sample.regime == "cooperative"
    assert sample.breakdown.coupling > 0.0
    assert sample.value == pytest.approx(sum(sample.breakdown.single) + sample.breakdown.coupling, rel=1e-12)


def test_e4_half_space_oracle_scaling():
    # the half-space norm scales exactly like lambda delta^2
    a = e4_half_space_norm(1e3, 1e-4)
    b = e4_half_space_norm(1e3, 2e-4)
    assert b / a == pytest.approx(4.0, rel=1e-10)


@pytest.mark.slow
def test_e4_norm_matches_half_space_oracle():
    cfg = _config(1e3)
    report = error_dual_norms(cfg, 0, BALL)
    assert report.converged
    assert report.norms[3] == pytest.approx(e4_half_space_norm(cfg.lam, cfg.delta[0]), rel=0.05)
    assert set(report.e1_split) == {"inner", "outer"}
    assert set(report.e6_split) == {"near_i", "near_j", "far"}
    assert np.all(np.isfinite(report.ratios))


@pytest.mark.slow
def test_q_decomposition_is_consistent():
    cfg = _config(1e3)
    q = q_decomposition(cfg, 0, BALL)
    assert q.converged
    assert q.consistency <= 1e-3
    assert q.q1 > 0.0
    # the ratio approaches its limit from a finite distance on a desk-scale grid
    assert 0.2 * A_BAR_REFERENCE <= q.q1_ratio <= 2.0 * A_BAR_REFERENCE


def test_single_energy_matches_bubble_energy():
    cfg = _config(1e3, d=(1.0, 1.5))
    expected = bubble_energy(cfg.lam, cfg.delta[1], cfg.xi[1].xi_array, BALL)
    assert single_energy(cfg, 1, BALL) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        single_energy(cfg, 2, BALL)
