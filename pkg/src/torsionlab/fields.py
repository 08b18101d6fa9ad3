"""Smooth evaluation layer over grid fields: bicubic jets and radial restrictions.

A solved GridField becomes an EvaluableField through GridInterpolant, which
reproduces node values exactly and provides gradients and Hessians accurate
to O(h^2) away from the boundary.  Closed-form SmoothFields already expose
the same jet interface.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .geometry import EXTERIOR
from .solver import GridField, SolveResult, _refine_max

# margin, in units of h, below which grid-backed jets are refused
EVAL_MARGIN_CELLS = 2.0

# cubic Hermite basis in monomial coefficients
_HERMITE = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [-3.0, 3.0, -2.0, -1.0],
        [2.0, -2.0, 1.0, 1.0],
    ]
)


class EvaluationError(ValueError):
    pass


class OutOfDomainError(EvaluationError):
    pass


def _axis_derivative(F, axis):
    """Node derivatives along *axis* in grid units, adaptive 4th/2nd order."""
    good = np.isfinite(F)
    W = np.where(good, F, 0.0)

    def shift(A, k):
        out = np.full_like(A, np.nan if A.dtype == float else False)
        src = [slice(None)] * A.ndim
        dst = [slice(None)] * A.ndim
        if k > 0:
            src[axis] = slice(k, None)
            dst[axis] = slice(None, -k)
        elif k < 0:
            src[axis] = slice(None, k)
            dst[axis] = slice(-k, None)
        else:
            return A.copy()
        out[tuple(dst)] = A[tuple(src)]
        return out

    g = {k: shift(good, k) for k in (-2, -1, 1, 2)}
    f = {k: shift(W, k) for k in (-2, -1, 1, 2)}
    ok4 = g[-2] & g[-1] & g[1] & g[2]
    ok2 = g[-1] & g[1]
    d4 = (-f[2] + 8.0 * f[1] - 8.0 * f[-1] + f[-2]) / 12.0
    d2 = (f[1] - f[-1]) / 2.0
    # one-sided second-order fallbacks on the extrapolated boundary ring
    fwd = (-3.0 * W + 4.0 * f[1] - f[2]) / 2.0
    bwd = (3.0 * W - 4.0 * f[-1] + f[-2]) / 2.0
    out = np.where(
        ok4,
        d4,
        np.where(
            ok2,
            d2,
            np.where(g[1] & g[2], fwd, np.where(g[-1] & g[-2], bwd, np.nan)),
        ),
    )
    out[~good] = np.nan
    return out


@dataclass
class GridInterpolant:
    """Bicubic C^1 interpolant of a GridField with analytic-in-cell jets."""

    field: GridField
    max_value: float
    argmax: np.ndarray

    def __post_init__(self):
        mask = self.field.mask
        self.domain = mask.domain
        self.h = mask.h
        self.min_eval_distance = EVAL_MARGIN_CELLS * mask.h

    @cached_property
    def _node_data(self):
        F = self.field.extended_values
        FX = _axis_derivative(F, 0)
        FY = _axis_derivative(F, 1)
        FXY = _axis_derivative(FX, 1)
        return F, FX, FY, FXY

    def _cells(self, pts):
        mask = self.field.mask
        x0, y0 = mask.origin
        h = mask.h
        fx = (pts[:, 0] - x0) / h
        fy = (pts[:, 1] - y0) / h
        i = np.clip(np.floor(fx).astype(int), 0, mask.shape[0] - 2)
        j = np.clip(np.floor(fy).astype(int), 0, mask.shape[1] - 2)
        return i, j, fx - i, fy - j

    def _check(self, pts):
        d = self.domain.boundary_distance(pts)
        inside = self.domain.contains(pts)
        if not np.all(inside):
            raise OutOfDomainError("evaluation point outside the domain")
        if np.any(d < self.min_eval_distance):
            raise EvaluationError(
                f"point closer than {EVAL_MARGIN_CELLS}h to the boundary"
            )

    def jet_many(self, pts, check=True):
        """Vectorized (value, gradient, Hessian) at an (n, 2) array of points."""
        pts = np.asarray(pts, dtype=float)
        if check:
            self._check(pts)
        F, FX, FY, FXY = self._node_data
        i, j, tx, ty = self._cells(pts)
        h = self.h

        def corner(A, di, dj):
            return A[i + di, j + dj]

        # data matrix D[a, b]: rows (f0, f1, mx0, mx1) x cols (f0, f1, my0, my1)
        D = np.empty((len(pts), 4, 4))
        D[:, 0, 0] = corner(F, 0, 0)
        D[:, 0, 1] = corner(F, 0, 1)
        D[:, 1, 0] = corner(F, 1, 0)
        D[:, 1, 1] = corner(F, 1, 1)
        D[:, 2, 0] = corner(FX, 0, 0)
        D[:, 2, 1] = corner(FX, 0, 1)
        D[:, 3, 0] = corner(FX, 1, 0)
        D[:, 3, 1] = corner(FX, 1, 1)
        D[:, 0, 2] = corner(FY, 0, 0)
        D[:, 0, 3] = corner(FY, 0, 1)
        D[:, 1, 2] = corner(FY, 1, 0)
        D[:, 1, 3] = corner(FY, 1, 1)
        D[:, 2, 2] = corner(FXY, 0, 0)
        D[:, 2, 3] = corner(FXY, 0, 1)
        D[:, 3, 2] = corner(FXY, 1, 0)
        D[:, 3, 3] = corner(FXY, 1, 1)
        if not np.all(np.isfinite(D)):
            raise EvaluationError("interpolation stencil touches unusable nodes")

        C = np.einsum("ai,nij,bj->nab", _HERMITE, D, _HERMITE)

        def powers(t):
            return np.stack([np.ones_like(t), t, t * t, t**3], axis=1)

        def dpowers(t):
            return np.stack(
                [np.zeros_like(t), np.ones_like(t), 2 * t, 3 * t * t], axis=1
            )

        def ddpowers(t):
            return np.stack(
                [np.zeros_like(t), np.zeros_like(t), 2 * np.ones_like(t), 6 * t],
                axis=1,
            )

        X, Y = powers(tx), powers(ty)
        dX, dY = dpowers(tx), dpowers(ty)
        ddX, ddY = ddpowers(tx), ddpowers(ty)

        val = np.einsum("na,nab,nb->n", X, C, Y)
        gx = np.einsum("na,nab,nb->n", dX, C, Y) / h
        gy = np.einsum("na,nab,nb->n", X, C, dY) / h
        hxx = np.einsum("na,nab,nb->n", ddX, C, Y) / h**2
        hyy = np.einsum("na,nab,nb->n", X, C, ddY) / h**2
        hxy = np.einsum("na,nab,nb->n", dX, C, dY) / h**2
        grad = np.stack([gx, gy], axis=1)
        hess = np.empty((len(pts), 2, 2))
        hess[:, 0, 0] = hxx
        hess[:, 0, 1] = hxy
        hess[:, 1, 0] = hxy
        hess[:, 1, 1] = hyy
        return val, grad, hess

    def jet(self, x):
        v, g, H = self.jet_many(np.asarray(x, dtype=float)[None, :])
        return float(v[0]), g[0], H[0]

    def value_many(self, pts, check=True):
        return self.jet_many(pts, check=check)[0]


def interpolant(source):
    """Wrap a SolveResult or GridField into an evaluable bicubic field."""
    if isinstance(source, SolveResult):
        return GridInterpolant(
            field=source.field,
            max_value=source.max_value,
            argmax=np.asarray(source.argmax, dtype=float),
        )
    if isinstance(source, GridField):
        (mi, mj), m_node = source.max_node()
        M, argmax = _refine_max(source, mi, mj, m_node)
        return GridInterpolant(field=source, max_value=M, argmax=argmax)
    raise TypeError(f"cannot interpolate {type(source)!r}")


def eval_jet(f, x):
    """(value, gradient, Hessian) of an evaluable field at a single point.

    Raises OutOfDomainError outside the domain and EvaluationError inside
    the boundary margin of grid-backed fields.
    """
    x = np.asarray(x, dtype=float)
    if f.domain is not None and not f.domain.contains(x):
        raise OutOfDomainError(f"{x.tolist()} is outside the domain")
    return f.jet(x)


def jet_many(f, pts):
    """Vectorized jets for either analytic or grid-backed fields."""
    pts = np.asarray(pts, dtype=float)
    if isinstance(f, GridInterpolant):
        return f.jet_many(pts)
    v = f.value(pts)
    g = f.gradient(pts)
    H = f.hessian(pts)
    return v, g, H


def value_many(f, pts):
    pts = np.asarray(pts, dtype=float)
    if isinstance(f, GridInterpolant):
        return f.value_many(pts)
    return f.value(pts)


def radial_jet(f, base, xi, r):
    """(v, v_r, v_rr) of v(r) = M - u(base + r*xi) along the unit direction xi."""
    base = np.asarray(base, dtype=float)
    xi = np.asarray(xi, dtype=float)
    nrm = np.linalg.norm(xi)
    if nrm == 0:
        raise ValueError("direction must be nonzero")
    xi = xi / nrm
    x = base + r * xi
    val, grad, hess = eval_jet(f, x)
    v = f.max_value - val
    v_r = -float(grad @ xi)
    v_rr = -float(xi @ hess @ xi)
    return v, v_r, v_rr


def radial_jet_many(f, base, xi, rs):
    base = np.asarray(base, dtype=float)
    xi = np.asarray(xi, dtype=float)
    xi = xi / np.linalg.norm(xi)
    rs = np.asarray(rs, dtype=float)
    pts = base[None, :] + rs[:, None] * xi[None, :]
    val, grad, hess = jet_many(f, pts)
    v = f.max_value - val
    v_r = -grad @ xi
    v_rr = -np.einsum("i,nij,j->n", xi, hess, xi)
    return v, v_r, v_rr
