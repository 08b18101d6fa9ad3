"""Exact torsion functions with analytic gradients and Hessians.

These fields solve Laplacian(u) = -1 with zero boundary values on their
natural domains and act as oracles for the grid solver and the analysis
modules.  Dimension n is generic here; the rest of the package works in
the plane.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import ConvexPolygon, Disk, Ellipse, GeometryError

# counter-clockwise ordering of the equilateral triangle used throughout
TRIANGLE_VERTICES = ((-2.0, 0.0), (1.0, -np.sqrt(3.0)), (1.0, np.sqrt(3.0)))


@dataclass(frozen=True)
class SmoothField:
    """Closed-form scalar field: x -> (value, gradient, Hessian)."""

    dim: int
    domain: object  # natural domain, None if not representable
    max_value: float
    argmax: np.ndarray
    _value: Callable
    _gradient: Callable
    _hessian: Callable

    # evaluation margin; analytic fields have none
    min_eval_distance = 0.0

    def value(self, x):
        return self._value(np.asarray(x, dtype=float))

    def gradient(self, x):
        return self._gradient(np.asarray(x, dtype=float))

    def hessian(self, x):
        return self._hessian(np.asarray(x, dtype=float))

    def jet(self, x):
        x = np.asarray(x, dtype=float)
        return self._value(x), self._gradient(x), self._hessian(x)


def ball_torsion(center=(0.0, 0.0), radius=1.0, n=2):
    """Torsion function of the ball: (R^2 - |x - c|^2) / (2n)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    c = np.asarray(center, dtype=float)
    if len(c) != n:
        raise ValueError("center dimension mismatch")

    def value(x):
        d = x - c
        return (radius**2 - (d * d).sum(axis=-1)) / (2 * n)

    def gradient(x):
        return -(x - c) / n

    def hessian(x):
        eye = -np.eye(n) / n
        if x.ndim == 1:
            return eye.copy()
        return np.broadcast_to(eye, x.shape[:-1] + (n, n)).copy()

    domain = Disk(center=tuple(c), radius=radius) if n == 2 else None
    return SmoothField(
        dim=n,
        domain=domain,
        max_value=radius**2 / (2 * n),
        argmax=c.copy(),
        _value=value,
        _gradient=gradient,
        _hessian=hessian,
    )


def ellipsoid_torsion(coefficients, radius=1.0, center=None, n=None):
    """Torsion function of the ellipsoid sum a_i (x_i - c_i)^2 < R^2.

    The coefficients must be positive and sum to the dimension, which makes
    the Laplacian exactly -1.
    """
    a = np.asarray(coefficients, dtype=float)
    if n is None:
        n = len(a)
    if len(a) != n:
        raise ValueError("coefficient count must match the dimension")
    if np.any(a <= 0):
        raise ValueError("coefficients must be positive")
    if abs(a.sum() - n) > 1e-12:
        raise GeometryError(f"coefficients must sum to {n}, got {a.sum()!r}")
    if radius <= 0:
        raise ValueError("radius must be positive")
    c = np.zeros(n) if center is None else np.asarray(center, dtype=float)

    def value(x):
        d = x - c
        return (radius**2 - (a * d * d).sum(axis=-1)) / (2 * n)

    def gradient(x):
        return -a * (x - c) / n

    def hessian(x):
        H = np.diag(-a / n)
        if x.ndim == 1:
            return H.copy()
        return np.broadcast_to(H, x.shape[:-1] + (n, n)).copy()

    domain = (
        Ellipse(coefficients=tuple(a), radius=radius, center=tuple(c)) if n == 2 else None
    )
    return SmoothField(
        dim=n,
        domain=domain,
        max_value=radius**2 / (2 * n),
        argmax=c.copy(),
        _value=value,
        _gradient=gradient,
        _hessian=hessian,
    )


def triangle_torsion():
    """Torsion function of the equilateral triangle (-2,0), (1,±sqrt 3).

    u(x, y) = (4 - 3y^2 + 3xy^2 - 3x^2 - x^3) / 12; the Hessian has trace -1
    everywhere and determinant (1 - x^2 - y^2) / 4.
    """

    def value(p):
        x, y = p[..., 0], p[..., 1]
        return (4.0 - 3.0 * y**2 + 3.0 * x * y**2 - 3.0 * x**2 - x**3) / 12.0

    def gradient(p):
        x, y = p[..., 0], p[..., 1]
        gx = (3.0 * y**2 - 6.0 * x - 3.0 * x**2) / 12.0
        gy = (6.0 * x * y - 6.0 * y) / 12.0
        return np.stack([gx, gy], axis=-1)

    def hessian(p):
        x, y = p[..., 0], p[..., 1]
        hxx = (-6.0 - 6.0 * x) / 12.0
        hyy = (6.0 * x - 6.0) / 12.0
        hxy = 6.0 * y / 12.0
        H = np.empty(np.shape(x) + (2, 2))
        H[..., 0, 0] = hxx
        H[..., 0, 1] = hxy
        H[..., 1, 0] = hxy
        H[..., 1, 1] = hyy
        return H

    return SmoothField(
        dim=2,
        domain=ConvexPolygon(vertices=TRIANGLE_VERTICES),
        max_value=1.0 / 3.0,
        argmax=np.zeros(2),
        _value=value,
        _gradient=gradient,
        _hessian=hessian,
    )
