"""Star-shaped domains, boundary charts and mean curvature."""
from .boundary import (
    as_domain,
    boundary_point,
    local_graph_coeffs,
    mean_curvature,
    mean_curvature_fd,
    mean_curvature_gradient_fd,
    tangent_frame,
)
from .domains import (
    StarDomain,
    cartesian_to_hyperspherical,
    complete_basis,
    hyperspherical_to_cartesian,
    sphere_grid,
)
from .search import find_curvature_maxima, scan_curvature

__all__ = [
    "StarDomain",
    "as_domain",
    "boundary_point",
    "cartesian_to_hyperspherical",
    "complete_basis",
    "find_curvature_maxima",
    "hyperspherical_to_cartesian",
    "local_graph_coeffs",
    "mean_curvature",
    "mean_curvature_fd",
    "mean_curvature_gradient_fd",
    "scan_curvature",
    "sphere_grid",
    "tangent_frame",
]
