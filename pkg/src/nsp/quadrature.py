"""Sphere and ball quadrature plus off-grid interpolation of grid fields."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy import ndimage
from scipy.integrate import lebedev_rule

from .errors import InputDomainError
from .grid import GridSpec


@lru_cache(maxsize=16)
def sphere_rule(order: int = 41) -> tuple[np.ndarray, np.ndarray]:
    """Lebedev nodes on the unit sphere, shape ``(N, 3)``, weights summing to 4*pi."""
    nodes, weights = lebedev_rule(order)
    nodes = np.ascontiguousarray(nodes.T)
    nodes.flags.writeable = False
    weights = np.asarray(weights)
    weights.flags.writeable = False
    return nodes, weights


def sphere_points(center, radius: float, order: int = 41) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Points, outward normals and area weights of a sphere."""
    nodes, weights = sphere_rule(order)
    center = np.asarray(center, dtype=float)
    return center + radius * nodes, nodes, radius**2 * weights


def ball_points(center, radius: float, radial_nodes: int = 24, order: int = 41) -> tuple[np.ndarray, np.ndarray]:
    """Volume quadrature for a ball: Gauss-Legendre in r times Lebedev."""
    nodes, weights = sphere_rule(order)
    t, wt = np.polynomial.legendre.leggauss(radial_nodes)
    s = 0.5 * (t + 1.0) * radius
    ws = 0.5 * radius * wt * s**2
    center = np.asarray(center, dtype=float)
    points = center + s[:, None, None] * nodes[None, :, :]
    return points.reshape(-1, 3), (ws[:, None] * weights[None, :]).ravel()


class FieldInterpolator:
    """Cubic B-spline interpolant of a real grid field at arbitrary points."""

    def __init__(self, values: np.ndarray, spec: GridSpec, order: int = 3):
        values = np.asarray(values)
        if np.iscomplexobj(values):
            raise InputDomainError("interpolation expects a real field")
        self.spec = spec
        self.order = order
        self._coeffs = ndimage.spline_filter(values, order=order, mode="mirror") if order > 1 else values

    def __call__(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        self.require_inside(points)
        spec = self.spec
        coords = (points.reshape(-1, 3).T + spec.half_width) / spec.spacing - 0.5
        out = ndimage.map_coordinates(self._coeffs, coords, order=self.order, mode="mirror", prefilter=False)
        return out.reshape(points.shape[:-1])

    def gradient(self, points: np.ndarray, step: float | None = None) -> np.ndarray:
        """Central differences of the interpolant itself."""
        delta = 1e-2 * self.spec.spacing if step is None else step
        points = np.asarray(points, dtype=float)
        grad = np.empty(points.shape)
        for axis in range(3):
            shift = np.zeros(3)
            shift[axis] = delta
            grad[..., axis] = (self(points + shift) - self(points - shift)) / (2.0 * delta)
        return grad

    def require_inside(self, points: np.ndarray, margin_cells: float = 2.0) -> None:
        limit = self.spec.half_width - margin_cells * self.spec.spacing
        if points.size and np.max(np.abs(points)) > limit:
            raise InputDomainError("quadrature points reach the grid boundary layer")
