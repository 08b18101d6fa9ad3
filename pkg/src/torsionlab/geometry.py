"""Planar convex domains, embedded-boundary grids and level-set extraction.

Domains are immutable value objects.  The grid machinery classifies the
nodes of a Cartesian lattice against the true (curved) boundary and stores
fractional leg lengths for Shortley-Weller stencils.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

# Cross-product tolerance for convexity tests, scaled by (domain scale)^2.
CONVEXITY_EPS = 1e-12

# Axis neighbor offsets, order: +x, -x, +y, -y.
DIRECTIONS = np.array([[1, 0], [-1, 0], [0, 1], [0, -1]])

EXTERIOR, INTERIOR, BOUNDARY_ADJ = 0, 1, 2


class GeometryError(ValueError):
    pass


class GridTooCoarseError(GeometryError):
    pass


class LevelSetError(GeometryError):
    pass


def _as_points(x):
    p = np.asarray(x, dtype=float)
    if p.ndim == 1:
        return p[None, :], True
    return p, False


# ---------------------------------------------------------------------------
# domain types

@dataclass(frozen=True)
class Disk:
    center: tuple[float, float] = (0.0, 0.0)
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError("disk radius must be positive")

    @property
    def diameter(self):
        return 2.0 * self.radius

    def contains(self, x):
        p, single = _as_points(x)
        r2 = ((p - np.asarray(self.center)) ** 2).sum(axis=1)
        out = r2 < self.radius**2
        return bool(out[0]) if single else out

    def boundary_distance(self, x):
        """Distance from interior point(s) to the boundary (>=0 inside)."""
        p, single = _as_points(x)
        d = self.radius - np.linalg.norm(p - np.asarray(self.center), axis=1)
        return float(d[0]) if single else d

    def bounding_box(self):
        cx, cy = self.center
        r = self.radius
        return (cx - r, cx + r), (cy - r, cy + r)

    def boundary_samples(self, n):
        t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        pts = np.asarray(self.center) + self.radius * np.stack([np.cos(t), np.sin(t)], axis=1)
        normals = -np.stack([np.cos(t), np.sin(t)], axis=1)  # inward
        return pts, normals

    def inradius(self):
        return self.radius

    def to_json(self):
        return {"type": "disk", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Ellipse:
    """Region sum_i a_i (x_i - c_i)^2 < R^2 with a_i > 0 and a_1 + a_2 = 2."""

    coefficients: tuple[float, float]
    radius: float = 1.0
    center: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        a = np.asarray(self.coefficients, dtype=float)
        if self.radius <= 0:
            raise GeometryError("ellipse radius must be positive")
        if np.any(a <= 0):
            raise GeometryError("ellipse coefficients must be positive")
        if abs(a.sum() - len(a)) > 1e-12:
            raise GeometryError(
                f"ellipse coefficients must sum to the dimension, got {a.sum()!r}"
            )

    @property
    def semi_axes(self):
        a = np.asarray(self.coefficients)
        return self.radius / np.sqrt(a)

    @property
    def diameter(self):
        return 2.0 * float(self.semi_axes.max())

    def contains(self, x):
        p, single = _as_points(x)
        a = np.asarray(self.coefficients)
        q = ((p - np.asarray(self.center)) ** 2 * a).sum(axis=1)
        out = q < self.radius**2
        return bool(out[0]) if single else out

    def boundary_distance(self, x):
        # First-order estimate (R - |y|) |y| / |a*x| in the scaled coordinates
        # y_i = sqrt(a_i) x_i; exact for the disk, O(d^2 curvature) otherwise.
        p, single = _as_points(x)
        a = np.asarray(self.coefficients)
        rel = p - np.asarray(self.center)
        ynorm = np.sqrt((rel**2 * a).sum(axis=1))
        gnorm = np.sqrt((rel**2 * a**2).sum(axis=1))
        with np.errstate(invalid="ignore", divide="ignore"):
            d = np.where(
                ynorm > 0.25 * self.radius,
                (self.radius - ynorm) * ynorm / gnorm,
                (self.radius - ynorm) / np.sqrt(a.max()),
            )
        return float(d[0]) if single else d

    def bounding_box(self):
        cx, cy = self.center
        bx, by = self.semi_axes
        return (cx - bx, cx + bx), (cy - by, cy + by)

    def boundary_samples(self, n):
        t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        bx, by = self.semi_axes
        pts = np.asarray(self.center) + np.stack([bx * np.cos(t), by * np.sin(t)], axis=1)
        a = np.asarray(self.coefficients)
        grad = 2.0 * a * (pts - np.asarray(self.center))  # outward normal direction
        normals = -grad / np.linalg.norm(grad, axis=1, keepdims=True)
        return pts, normals

    def inradius(self):
        return float(self.semi_axes.min())

    def to_json(self):
        return {
            "type": "ellipse",
            "center": list(self.center),
            "coefficients": list(self.coefficients),
            "radius": self.radius,
        }


def _polygon_convex(v, eps_scale):
    n = len(v)
    e = np.roll(v, -1, axis=0) - v
    cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
    tol = CONVEXITY_EPS * eps_scale**2
    return bool(np.all(cross > -tol)), cross


def polygon_metrics(vertices):
    """Shoelace area (positive) and perimeter of a simple closed polyline."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[0] < 3 or v.shape[1] != 2:
        raise GeometryError("polyline needs at least 3 planar vertices")
    if np.allclose(v[0], v[-1]):
        v = v[:-1]
        if len(v) < 3:
            raise GeometryError("degenerate polyline")
    x, y = v[:, 0], v[:, 1]
    area = 0.5 * abs(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
    if area <= 0:
        raise GeometryError("degenerate (zero-area) polyline")
    per = float(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1).sum())
    return float(area), per


@dataclass(frozen=True)
class ConvexPolygon:
    vertices: tuple  # ((x, y), ...) counter-clockwise

    def __post_init__(self):
        v = self._v
        if len(v) < 3:
            raise GeometryError("polygon needs at least 3 vertices")
        scale = float(np.ptp(v, axis=0).max())
        signed = 0.5 * np.sum(
            v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1]
        )
        if signed <= 0:
            raise GeometryError("polygon vertices must be counter-clockwise")
        ok, _ = _polygon_convex(v, scale)
        if not ok:
            raise GeometryError("polygon is not convex")

    @property
    def _v(self):
        return np.asarray(self.vertices, dtype=float)

    @property
    def diameter(self):
        v = self._v
        return float(max(np.linalg.norm(p - q) for p in v for q in v))

    def _edge_frames(self):
        v = self._v
        e = np.roll(v, -1, axis=0) - v
        length = np.linalg.norm(e, axis=1)
        tang = e / length[:, None]
        inward = np.stack([-tang[:, 1], tang[:, 0]], axis=1)
        return v, tang, inward, length

    def contains(self, x):
        p, single = _as_points(x)
        v, _, inward, _ = self._edge_frames()
        # strictly inside iff strictly on the inner side of every edge
        d = np.min(np.einsum("pki,ki->pk", p[:, None, :] - v[None, :, :], inward), axis=1)
        out = d > 0
        return bool(out[0]) if single else out

    def boundary_distance(self, x):
        p, single = _as_points(x)
        v, _, inward, _ = self._edge_frames()
        d = np.min(np.einsum("pki,ki->pk", p[:, None, :] - v[None, :, :], inward), axis=1)
        return float(d[0]) if single else d

    def bounding_box(self):
        v = self._v
        return (v[:, 0].min(), v[:, 0].max()), (v[:, 1].min(), v[:, 1].max())

    def boundary_samples(self, n):
        v, tang, inward, length = self._edge_frames()
        per = length.sum()
        pts, normals = [], []
        for i in range(len(v)):
            m = max(2, int(round(n * length[i] / per)))
            # skip corners: sample strictly inside each edge
            s = (np.arange(m) + 0.5) / m * length[i]
            pts.append(v[i] + s[:, None] * tang[i])
            normals.append(np.repeat(inward[i][None, :], m, axis=0))
        return np.concatenate(pts), np.concatenate(normals)

    def inradius(self):
        # radius of the largest inscribed disk (Chebyshev center) via coarse search
        v, _, inward, _ = self._edge_frames()
        (x0, x1), (y0, y1) = self.bounding_box()
        gx = np.linspace(x0, x1, 101)
        gy = np.linspace(y0, y1, 101)
        X, Y = np.meshgrid(gx, gy, indexing="ij")
        p = np.stack([X.ravel(), Y.ravel()], axis=1)
        d = np.min(np.einsum("pki,ki->pk", p[:, None, :] - v[None, :, :], inward), axis=1)
        return float(d.max())

    def area_perimeter(self):
        return polygon_metrics(self._v)

    def to_json(self):
        return {"type": "polygon", "vertices": [list(p) for p in self._v]}


@dataclass(frozen=True)
class SampledLevelSet:
    """Closed polyline extracted from a level set; convexity is reported, not assumed."""

    vertices: tuple
    is_convex: bool = field(init=False)

    def __post_init__(self):
        v = self._v
        if len(v) < 3:
            raise GeometryError("polyline needs at least 3 vertices")
        scale = float(np.ptp(v, axis=0).max())
        ok, _ = _polygon_convex(v if _signed_area(v) > 0 else v[::-1], scale)
        object.__setattr__(self, "is_convex", ok)

    @property
    def _v(self):
        v = np.asarray(self.vertices, dtype=float)
        if np.allclose(v[0], v[-1]):
            v = v[:-1]
        if _signed_area(v) < 0:
            v = v[::-1]
        return v

    @property
    def diameter(self):
        v = self._v
        c = v.mean(axis=0)
        return 2.0 * float(np.linalg.norm(v - c, axis=1).max())

    def contains(self, x):
        p, single = _as_points(x)
        d = _polyline_signed_inset(self._v, p)
        out = d > 0
        return bool(out[0]) if single else out

    def boundary_distance(self, x):
        p, single = _as_points(x)
        d = _polyline_signed_inset(self._v, p)
        return float(d[0]) if single else d

    def bounding_box(self):
        v = self._v
        return (v[:, 0].min(), v[:, 0].max()), (v[:, 1].min(), v[:, 1].max())

    def boundary_samples(self, n):
        v = self._v
        e = np.roll(v, -1, axis=0) - v
        length = np.linalg.norm(e, axis=1)
        tang = e / length[:, None]
        inward = np.stack([-tang[:, 1], tang[:, 0]], axis=1)
        mids = v + 0.5 * e
        return mids, inward

    def inradius(self):
        v = self._v
        c = v.mean(axis=0)
        return float(_polyline_signed_inset(v, c[None, :])[0])

    def area_perimeter(self):
        return polygon_metrics(self._v)

    def to_json(self):
        return {"type": "level_set", "vertices": [list(p) for p in self._v]}


def _signed_area(v):
    return 0.5 * np.sum(v[:, 0] * np.roll(v[:, 1], -1) - np.roll(v[:, 0], -1) * v[:, 1])


def _polyline_signed_inset(v, p):
    """min over edges of the inward half-plane offset (exact for convex polylines)."""
    e = np.roll(v, -1, axis=0) - v
    tang = e / np.linalg.norm(e, axis=1)[:, None]
    inward = np.stack([-tang[:, 1], tang[:, 0]], axis=1)
    return np.min(np.einsum("pki,ki->pk", p[:, None, :] - v[None, :, :], inward), axis=1)


Domain = Disk | Ellipse | ConvexPolygon | SampledLevelSet


def domain_from_json(doc):
    kind = doc.get("type")
    if kind == "disk":
        return Disk(center=tuple(doc.get("center", (0.0, 0.0))), radius=doc["radius"])
    if kind == "ellipse":
        return Ellipse(
            coefficients=tuple(doc["coefficients"]),
            radius=doc.get("radius", 1.0),
            center=tuple(doc.get("center", (0.0, 0.0))),
        )
    if kind == "polygon":
        return ConvexPolygon(vertices=tuple(tuple(p) for p in doc["vertices"]))
    if kind == "level_set":
        return SampledLevelSet(vertices=tuple(tuple(p) for p in doc["vertices"]))
    raise GeometryError(f"unknown domain type {kind!r}")


# ---------------------------------------------------------------------------
# embedded-boundary grid

@dataclass(frozen=True)
class GridMask:
    """Node classification of a Cartesian lattice against a convex domain.

    ``status`` is 0 (exterior), 1 (interior: all four axis neighbors in the
    domain) or 2 (boundary-adjacent).  ``theta`` holds fractional distances
    to the true boundary along +x, -x, +y, -y in units of ``h`` (1.0 when
    the neighbor node itself is in the domain).
    """

    domain: Domain
    origin: tuple[float, float]
    h: float
    status: np.ndarray  # (nx, ny) int8
    theta: np.ndarray   # (nx, ny, 4) float

    @property
    def shape(self):
        return self.status.shape

    def node_xy(self):
        nx, ny = self.shape
        xs = self.origin[0] + self.h * np.arange(nx)
        ys = self.origin[1] + self.h * np.arange(ny)
        return xs, ys

    def node_points(self):
        xs, ys = self.node_xy()
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        return np.stack([X, Y], axis=-1)

    @property
    def n_inside(self):
        return int(np.count_nonzero(self.status != EXTERIOR))


def build_grid(domain, h):
    """Shortley-Weller mask of *domain* with spacing *h*.

    Raises GridTooCoarseError when fewer than 16 nodes fall inside.
    """
    if h <= 0:
        raise GeometryError("grid spacing must be positive")
    (x0, x1), (y0, y1) = domain.bounding_box()
    # pad by two layers of nodes so every in-domain node has lattice neighbors
    i0 = math.floor(x0 / h) - 2
    i1 = math.ceil(x1 / h) + 2
    j0 = math.floor(y0 / h) - 2
    j1 = math.ceil(y1 / h) + 2
    xs = h * np.arange(i0, i1 + 1)
    ys = h * np.arange(j0, j1 + 1)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    inside = domain.contains(pts).reshape(X.shape)

    if np.count_nonzero(inside) < 16:
        raise GridTooCoarseError(
            f"only {np.count_nonzero(inside)} nodes inside the domain at h={h}"
        )

    nbr_in = np.zeros(inside.shape + (4,), dtype=bool)
    nbr_in[:-1, :, 0] = inside[1:, :]
    nbr_in[1:, :, 1] = inside[:-1, :]
    nbr_in[:, :-1, 2] = inside[:, 1:]
    nbr_in[:, 1:, 3] = inside[:, :-1]

    status = np.where(
        inside, np.where(nbr_in.all(axis=-1), INTERIOR, BOUNDARY_ADJ), EXTERIOR
    ).astype(np.int8)

    theta = np.ones(inside.shape + (4,), dtype=float)
    badj = np.argwhere(status == BOUNDARY_ADJ)
    for d in range(4):
        need = badj[~nbr_in[badj[:, 0], badj[:, 1], d]]
        if len(need) == 0:
            continue
        base = np.stack(
            [xs[need[:, 0]], ys[need[:, 1]]], axis=1
        )
        step = DIRECTIONS[d] * h
        theta[need[:, 0], need[:, 1], d] = _crossing_fraction(domain, base, step)

    return GridMask(domain=domain, origin=(xs[0], ys[0]), h=h, status=status, theta=theta)


def _crossing_fraction(domain, base, step):
    """Bisect the boundary crossing along base + t*step for t in (0, 1]."""
    lo = np.zeros(len(base))
    hi = np.ones(len(base))
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        inside = domain.contains(base + mid[:, None] * step[None, :])
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
    t = 0.5 * (lo + hi)
    # a neighbor lying exactly on the boundary counts as a full leg
    t = np.where(t > 1.0 - 1e-9, 1.0, t)
    return np.clip(t, 1e-6, 1.0)


# ---------------------------------------------------------------------------
# level-set extraction

def marching_level_set(xs, ys, values, c):
    """Extract the closed level curve {field = c} from a node-sampled field.

    ``values`` is indexed [i, j] matching ``xs[i], ys[j]``; NaN entries mark
    unusable nodes.  Returns a counter-clockwise closed polyline (first
    vertex not repeated).  Raises LevelSetError when the level set is empty,
    open (touching unusable or edge nodes) or split into several loops.
    """
    V = np.asarray(values, dtype=float)
    finite = np.isfinite(V)
    vmax = np.nanmax(V) if finite.any() else -np.inf
    if not np.any(V[finite] > c):
        raise LevelSetError(f"empty level set at c={c}")
    work = np.where(finite, V, -np.inf)
    contours = measure.find_contours(work, level=c, positive_orientation="high")
    loops = [ct for ct in contours if np.allclose(ct[0], ct[-1])]
    if not loops:
        raise LevelSetError("level set touches the grid boundary or unusable nodes")
    # keep the largest loop; reject genuinely split level sets
    loops.sort(key=len, reverse=True)
    if len(loops) > 1 and len(loops[1]) > 8:
        raise LevelSetError("level set splits into multiple loops")
    ct = loops[0][:-1]
    h_x = xs[1] - xs[0]
    h_y = ys[1] - ys[0]
    poly = np.stack([xs[0] + ct[:, 0] * h_x, ys[0] + ct[:, 1] * h_y], axis=1)
    if _signed_area(poly) < 0:
        poly = poly[::-1]
    return poly
