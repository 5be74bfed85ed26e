"""Gauss-Legendre panels, geometric grading and spherical product rules."""
from functools import lru_cache
from typing import Tuple

import numpy as np
from scipy.special import roots_legendre

# Hard cap on geometric levels per side of a graded ray
MAX_LEVELS = 64


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]."""
    nodes, weights = roots_legendre(n)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def panel_rule(edges: np.ndarray, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on panels given by ascending edges.

    Args:
        edges: (..., P + 1) panel edges along the last axis.
        n: Nodes per panel.

    Returns:
        (nodes, weights), each of shape (..., P * n).
    """
    edges = np.asarray(edges, dtype=float)
    x, w = gauss_legendre(n)
    lo = edges[..., :-1]
    width = edges[..., 1:] - lo
    nodes = lo[..., None] + width[..., None] * x
    weights = width[..., None] * w
    shape = edges.shape[:-1] + (-1,)
    return nodes.reshape(shape), weights.reshape(shape)


def geometric_edges(stop: float, h_min: float, ratio: float) -> np.ndarray:
    """Edges 0, h, h/ratio, h/ratio^2, ... clipped at ``stop``."""
    edges = [0.0]
    h = h_min
    while h < stop and len(edges) < MAX_LEVELS:
        edges.append(h)
        h /= ratio
    edges.append(stop)
    return np.array(edges)


def graded_ray_edges(
    lower: np.ndarray,
    upper: np.ndarray,
    focus: np.ndarray,
    h_min: np.ndarray,
    ratio: float,
) -> np.ndarray:
    """Panel edges on [lower, upper] per ray, graded geometrically toward ``focus``.

    Offsets from the focus are h (q^k - 1) / (q - 1) with q = 1/ratio, clipped
    to the segment. All rays share one level count, so panels past the
    segment end have zero width.

    Returns:
        (n_rays, 2K + 1) ascending edges.
    """
    q = 1.0 / ratio
    reach = np.maximum(focus - lower, upper - focus)
    need = np.log1p(reach / h_min * (q - 1.0)) / np.log(q)
    levels = int(np.clip(np.ceil(np.max(need, initial=1.0)), 1, MAX_LEVELS))
    k = np.arange(levels + 1)
    offsets = h_min[:, None] * (q ** k - 1.0) / (q - 1.0)
    offsets[:, -1] = np.inf
    left = np.maximum(focus[:, None] - offsets[:, :0:-1], lower[:, None])
    right = np.minimum(focus[:, None] + offsets, upper[:, None])
    return np.concatenate([left, right], axis=1)


@lru_cache(maxsize=None)
def s2_rule(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Product rule on S^2: Gauss-Legendre in cos(theta), trapezoid in phi.

    Exact for polynomials of degree up to 2n - 1 on n * 2n nodes;
    weights sum to 4 pi.
    """
    z, wz = roots_legendre(n)
    phi = (np.arange(2 * n) + 0.5) * np.pi / n
    s = np.sqrt(1.0 - z * z)
    dirs = np.stack(
        [np.repeat(z, 2 * n), np.outer(s, np.cos(phi)).ravel(), np.outer(s, np.sin(phi)).ravel()],
        axis=1,
    )
    weights = np.repeat(wz, 2 * n) * (np.pi / n)
    dirs.setflags(write=False)
    weights.setflags(write=False)
    return dirs, weights


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step from 0 (t <= 0) to 1 (t >= 1)."""
    t = np.clip(np.asarray(t, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.where(t < 1.0, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


def cap_weight(psi: np.ndarray, psi_cap: float) -> np.ndarray:
    """Partition-of-unity weight of a polar cap: 1 inside psi_cap/2, 0 beyond psi_cap."""
    half = 0.5 * psi_cap
    return 1.0 - smooth_step((np.asarray(psi, dtype=float) - half) / half)
