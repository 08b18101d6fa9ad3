"""Named domain presets and field construction shared by the service and CLI.

A preset resolves to a Domain; ``build_field`` turns a domain into an
evaluable field, either from the closed form (disk, ellipse, equilateral
triangle) or by solving on a grid.
"""

from __future__ import annotations

import numpy as np

from .closed_forms import (
    TRIANGLE_VERTICES,
    ball_torsion,
    ellipsoid_torsion,
    triangle_torsion,
)
from .fields import interpolant
from .geometry import ConvexPolygon, Disk, Ellipse, GeometryError, build_grid
from .solver import solve_torsion

PRESET_NAMES = ("disk", "ellipse", "square", "paper-triangle")

DEFAULT_H = 1.0 / 128.0
DEFAULT_SOLVER_TOL = 1e-10


def preset_domain(name, a=None):
    """Resolve a preset name (and optional ellipse coefficients) to a Domain."""
    if name == "disk":
        return Disk(center=(0.0, 0.0), radius=1.0)
    if name == "ellipse":
        coeffs = (1.5, 0.5) if a is None else tuple(a)
        return Ellipse(coefficients=coeffs, radius=1.0, center=(0.0, 0.0))
    if name == "square":
        return ConvexPolygon(vertices=((-1, -1), (1, -1), (1, 1), (-1, 1)))
    if name == "paper-triangle":
        return ConvexPolygon(vertices=TRIANGLE_VERTICES)
    raise GeometryError(f"unknown preset {name!r}; expected one of {PRESET_NAMES}")


def closed_form_field(domain):
    """Closed-form torsion field for the domain, or None when unavailable."""
    if isinstance(domain, Disk):
        return ball_torsion(center=domain.center, radius=domain.radius, n=2)
    if isinstance(domain, Ellipse):
        return ellipsoid_torsion(
            coefficients=domain.coefficients,
            radius=domain.radius,
            center=domain.center,
        )
    if isinstance(domain, ConvexPolygon):
        verts = np.asarray(domain.vertices, dtype=float)
        tri = np.asarray(TRIANGLE_VERTICES)
        if verts.shape == tri.shape and np.allclose(verts, tri, atol=1e-12):
            return triangle_torsion()
    return None


def build_field(domain, source="auto", h=DEFAULT_H, tol=DEFAULT_SOLVER_TOL):
    """(field, solve_result_or_None) for the requested source.

    ``source`` is "analytic", "solved" or "auto" (analytic when a closed
    form exists, solved otherwise).
    """
    if source not in ("auto", "analytic", "solved"):
        raise ValueError(f"unknown field source {source!r}")
    if source in ("auto", "analytic"):
        f = closed_form_field(domain)
        if f is not None:
            return f, None
        if source == "analytic":
            raise GeometryError("no closed-form torsion function for this domain")
    result = solve_torsion(build_grid(domain, h), tol=tol)
    return interpolant(result), result
