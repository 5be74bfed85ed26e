"""Product quadrature over star-shaped domains, their boundaries and balls."""
from .integrator import (
    integrate_ball,
    integrate_ball_vector,
    integrate_boundary,
    integrate_boundary_vector,
    integrate_domain,
    integrate_domain_vector,
)
from .norms import h1_lambda_inner, lp_norm, root_result
from .rules import gauss_legendre, graded_ray_edges, panel_rule, s2_rule

__all__ = [
    "gauss_legendre",
    "graded_ray_edges",
    "h1_lambda_inner",
    "integrate_ball",
    "integrate_ball_vector",
    "integrate_boundary",
    "integrate_boundary_vector",
    "integrate_domain",
    "integrate_domain_vector",
    "lp_norm",
    "panel_rule",
    "root_result",
    "s2_rule",
]
