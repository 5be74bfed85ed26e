"""Star-shaped domains Omega = {r * omega : 0 <= r < rho(omega)} in R^4.

The boundary is the zero set of the level function F(x) = |x| - rho(x/|x|),
whose gradient points outward. Profiles are evaluated in the unrotated frame
and the optional rotation of :class:`DomainSpec` is applied on top, so
R(Omega) has profile rho(R^T omega).
"""
import logging
from typing import Optional, Tuple

import numpy as np

from src.config import config
from src.exceptions import GeometryError
from src.models.schemas import DomainKind, DomainSpec

logger = logging.getLogger(__name__)


def complete_basis(fixed: np.ndarray) -> np.ndarray:
    """Orthonormal complement of the rows of ``fixed`` in R^4.

    Gram-Schmidt over the seeds e1..e4, always taking the seed with the largest
    residual (lowest index on ties), so the result is deterministic.

    Args:
        fixed: (k, 4) array of orthonormal rows.

    Returns:
        (4 - k, 4) array of orthonormal rows orthogonal to ``fixed``.
    """
    fixed = np.atleast_2d(np.asarray(fixed, dtype=float))
    basis = [row / np.linalg.norm(row) for row in fixed]
    added = []
    seeds = np.eye(4)
    while len(basis) < 4:
        stack = np.array(basis)
        residuals = seeds - (seeds @ stack.T) @ stack
        norms = np.linalg.norm(residuals, axis=1)
        pick = int(np.argmax(norms))
        vec = residuals[pick] / norms[pick]
        # second pass for orthogonality at round-off level
        vec = vec - stack.T @ (stack @ vec)
        vec /= np.linalg.norm(vec)
        basis.append(vec)
        added.append(vec)
    return np.array(added)


def hyperspherical_to_cartesian(angles: np.ndarray) -> np.ndarray:
    """(psi, theta, phi) -> unit vectors (cos psi, sin psi cos theta, ...)."""
    angles = np.atleast_2d(angles)
    psi, theta, phi = angles[:, 0], angles[:, 1], angles[:, 2]
    sp, st = np.sin(psi), np.sin(theta)
    return np.stack(
        [np.cos(psi), sp * np.cos(theta), sp * st * np.cos(phi), sp * st * np.sin(phi)], axis=1
    )


def cartesian_to_hyperspherical(omega: np.ndarray) -> np.ndarray:
    """Inverse of :func:`hyperspherical_to_cartesian` (phi in [0, 2 pi))."""
    omega = np.atleast_2d(omega)
    psi = np.arccos(np.clip(omega[:, 0], -1.0, 1.0))
    theta = np.arctan2(np.linalg.norm(omega[:, 2:], axis=1), omega[:, 1])
    phi = np.mod(np.arctan2(omega[:, 3], omega[:, 2]), 2.0 * np.pi)
    return np.stack([psi, theta, phi], axis=1)


def sphere_grid(n_target: int) -> np.ndarray:
    """Deterministic quasi-uniform directions on S^3 (at least ``n_target``)."""
    n_psi = 2
    while True:
        points = []
        for k in range(n_psi):
            psi = (k + 0.5) * np.pi / n_psi
            n_theta = max(1, int(round(n_psi * np.sin(psi))))
            for j in range(n_theta):
                theta = (j + 0.5) * np.pi / n_theta
                n_phi = max(1, int(round(2.0 * n_psi * np.sin(psi) * np.sin(theta))))
                for i in range(n_phi):
                    points.append((psi, theta, (i + 0.5) * 2.0 * np.pi / n_phi))
        if len(points) >= n_target:
            return hyperspherical_to_cartesian(np.array(points))
        n_psi += 1


class StarDomain:
    """Immutable star-shaped domain built from a :class:`DomainSpec`."""

    def __init__(self, spec: DomainSpec, rho_floor: Optional[float] = None):
        """Initialize domain.

        Args:
            spec: Validated domain description.
            rho_floor: Smallest admissible boundary radius (config default).

        Raises:
            GeometryError: if the profile drops below ``rho_floor`` or is not finite.
        """
        self.spec = spec
        self._rotation = None if spec.rotation is None else np.asarray(spec.rotation, dtype=float)
        if spec.kind == DomainKind.ELLIPSOID:
            self._inv_axes_sq = 1.0 / np.asarray(spec.semi_axes, dtype=float) ** 2
        if spec.kind == DomainKind.PROTRUSION:
            axis = np.asarray(spec.axis or [0.0, 0.0, 0.0, 1.0], dtype=float)
            self._axis = axis / np.linalg.norm(axis)
            # lobe plane: first two Gram-Schmidt survivors against the axis
            self._plane = complete_basis(self._axis[None, :])[:2]

        self.rho_min, self.rho_max = self._radius_bounds()
        floor = config.get('geometry.rho_floor', 1e-3) if rho_floor is None else rho_floor
        if self.rho_min < floor:
            raise GeometryError(f"profile minimum {self.rho_min:.3g} below floor {floor:.3g}")
        if spec.smoothness_check:
            self._check_samples()
        logger.debug("Built %r", self)

    def _radius_bounds(self) -> Tuple[float, float]:
        spec = self.spec
        if spec.kind == DomainKind.BALL:
            return spec.radius, spec.radius
        if spec.kind == DomainKind.ELLIPSOID:
            return float(min(spec.semi_axes)), float(max(spec.semi_axes))
        eps = abs(spec.amplitude)
        return spec.base * (1.0 - eps), spec.base * (1.0 + eps)

    def _check_samples(self) -> None:
        omega = sphere_grid(2000)
        rho, grad = self.rho_and_grad(omega)
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(grad))):
            raise GeometryError("profile is not finite on the sample grid")
        if np.min(rho) < self.rho_min * (1.0 - 1e-12):
            raise GeometryError("sampled profile falls below its analytic minimum")

    def __repr__(self) -> str:
        return f"StarDomain(kind={self.spec.kind.value}, rho_min={self.rho_min:.6g})"

    # -- profile ---------------------------------------------------------

    def _profile(self, w: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """rho and its unconstrained gradient in the unrotated frame."""
        spec = self.spec
        if spec.kind == DomainKind.BALL:
            return np.full(len(w), spec.radius), np.zeros_like(w)
        if spec.kind == DomainKind.ELLIPSOID:
            q = np.sum(w * w * self._inv_axes_sq, axis=1)
            rho = q ** -0.5
            return rho, -(rho ** 3)[:, None] * w * self._inv_axes_sq
        u, v = self._plane
        z = (w @ u) + 1j * (w @ v)
        m = spec.frequency
        scale = spec.base * spec.amplitude
        rho = spec.base + scale * np.imag(z ** m)
        dz = m * z ** (m - 1)
        grad = scale * (np.imag(dz)[:, None] * u + np.real(dz)[:, None] * v)
        return rho, grad

    def rho_and_grad(self, omega: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Boundary radius and its tangential gradient on S^3.

        Args:
            omega: (n, 4) unit directions.

        Returns:
            (rho, grad_s) with shapes (n,) and (n, 4); grad_s is tangent to S^3.
        """
        omega = np.atleast_2d(np.asarray(omega, dtype=float))
        w = omega if self._rotation is None else omega @ self._rotation
        rho, grad = self._profile(w)
        if self._rotation is not None:
            grad = grad @ self._rotation.T
        grad = grad - np.sum(grad * omega, axis=1)[:, None] * omega
        return rho, grad

    def rho(self, omega: np.ndarray) -> np.ndarray:
        """Boundary radius rho(omega) for unit directions."""
        omega = np.atleast_2d(np.asarray(omega, dtype=float))
        w = omega if self._rotation is None else omega @ self._rotation
        return self._profile(w)[0]

    def boundary(self, omega: np.ndarray) -> np.ndarray:
        """Boundary points rho(omega) * omega."""
        omega = np.atleast_2d(np.asarray(omega, dtype=float))
        return self.rho(omega)[:, None] * omega

    def contains(self, x: np.ndarray) -> np.ndarray:
        """Boolean mask of points strictly inside Omega."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=1)
        inside = r == 0.0
        nz = ~inside
        inside[nz] = r[nz] < self.rho(x[nz] / r[nz, None])
        return inside

    # -- level function F(x) = |x| - rho(x/|x|) --------------------------

    def level_value(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=1)
        return r - self.rho(x / r[:, None])

    def level_grad(self, x: np.ndarray) -> np.ndarray:
        """Outward gradient x/|x| - grad_s rho(x/|x|) / |x|."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=1)
        omega = x / r[:, None]
        _, grad_s = self.rho_and_grad(omega)
        return omega - grad_s / r[:, None]

    def level_hessian(self, x: np.ndarray, step: Optional[float] = None) -> np.ndarray:
        """Symmetrized central-difference Hessian of F from its analytic gradient."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if step is None:
            step = config.get('geometry.fd_step', 1e-5)
        h = step * np.maximum(np.linalg.norm(x, axis=1), 1.0)
        hess = np.empty((len(x), 4, 4))
        for k in range(4):
            shift = np.zeros_like(x)
            shift[:, k] = h
            diff = self.level_grad(x + shift) - self.level_grad(x - shift)
            hess[:, :, k] = diff / (2.0 * h[:, None])
        return 0.5 * (hess + np.transpose(hess, (0, 2, 1)))
