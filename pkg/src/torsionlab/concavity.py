"""Power-concavity certification and related diagnostics.

The central test is eigenvalue sampling of chain-rule Hessians (never
finite differences of the transformed field), combined with derivative-free
midpoint sampling that also covers the boundary layer where grid Hessians
are unreliable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fields import EVAL_MARGIN_CELLS, GridInterpolant, jet_many, value_many
from .geometry import LevelSetError, marching_level_set, polygon_metrics
from .solver import SolveResult

DEFAULT_MIDPOINT_PAIRS = 10_000
# fraction of the eigenvalue tolerance below which a violation is treated
# as discretization noise rather than a certified failure
INCONCLUSIVE_BAND = 0.5


class ConcavityError(ValueError):
    pass


@dataclass(frozen=True)
class ConcavityReport:
    verdict: str  # holds | fails | inconclusive
    witness: dict | None
    points_tested: int
    margin: float
    tol: float
    max_violation: float

    def to_dict(self):
        return {
            "verdict": self.verdict,
            "witness": self.witness,
            "points_tested": self.points_tested,
            "margin": self.margin,
            "tol": self.tol,
            "max_violation": self.max_violation,
        }


def _diameter(domain):
    return domain.diameter


def default_margin(f):
    """Boundary standoff for Hessian sampling: 3h on grids, ~0.2% of scale otherwise."""
    if isinstance(f, GridInterpolant):
        return 3.0 * f.h
    return 2e-3 * _diameter(f.domain)


def default_eig_tol(f):
    """Scale-invariant eigenvalue tolerance.

    Analytic fields carry no discretization noise; grid-backed fields get a
    floor proportional to the interpolated-Hessian error, which scales like
    h^2 in the bulk (with a larger constant near corners).
    """
    M = f.max_value
    d = _diameter(f.domain)
    base = 1e-6 * M / d**2
    if isinstance(f, GridInterpolant):
        # measured bulk Hessian error ~ h^2; corners are handled by the
        # low-value exclusion, not by inflating this tolerance
        base = max(base, 80.0 * f.h**2 * M / d**2)
    return base


def _value_floor(f):
    """Field values below this are probed by midpoints only (grid fields).

    Near corners the torsion function is small and the chain-rule factor
    u^(alpha-2) amplifies interpolation noise beyond any fixed tolerance.
    """
    if isinstance(f, GridInterpolant):
        return 6.0 * f.h * f.max_value / f.domain.inradius()
    return 0.0


def hessian_sample_points(f, margin):
    """Interior sample points at least *margin* from the boundary."""
    dom = f.domain
    if isinstance(f, GridInterpolant):
        mask = f.field.mask
        xs, ys = mask.node_xy()
        X, Y = np.meshgrid(xs, ys, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        keep = mask.status.ravel() != 0
        pts = pts[keep]
    else:
        (x0, x1), (y0, y1) = dom.bounding_box()
        n = 192
        gx = np.linspace(x0, x1, n)
        gy = np.linspace(y0, y1, n)
        X, Y = np.meshgrid(gx, gy, indexing="ij")
        pts = np.stack([X.ravel(), Y.ravel()], axis=1)
        pts = pts[dom.contains(pts)]
    eff = max(margin, getattr(f, "min_eval_distance", 0.0))
    pts = pts[dom.boundary_distance(pts) >= eff]
    if len(pts) == 0:
        raise ConcavityError("margin too large: no sample points remain")
    return pts


def midpoint_triples(f, n_pairs, seed, extra_boundary=True):
    """Pairs (x, y) with their midpoints, all within the evaluable region.

    Includes deterministic triples along inward normals near the boundary,
    where Hessian sampling is unavailable.
    """
    dom = f.domain
    standoff = max(getattr(f, "min_eval_distance", 0.0), 1e-9 * _diameter(dom))
    rng = np.random.default_rng(seed)
    (x0, x1), (y0, y1) = dom.bounding_box()
    pts = []
    need = 2 * n_pairs
    while sum(len(p) for p in pts) < need:
        cand = rng.uniform((x0, y0), (x1, y1), size=(4 * need, 2))
        good = cand[dom.boundary_distance(cand) > standoff]
        pts.append(good)
    P = np.concatenate(pts)[:need]
    A, B = P[:n_pairs], P[n_pairs:]

    if extra_boundary:
        bp, nrm = dom.boundary_samples(256)
        # collinear triples hugging the boundary at several depth scales
        for s in (1.5, 3.0, 6.0):
            t = s * max(standoff, 1e-3 * _diameter(dom))
            a = bp + t * nrm
            b = bp + 3.0 * t * nrm
            ok = (dom.boundary_distance(a) > standoff) & (
                dom.boundary_distance(b) > standoff
            )
            A = np.concatenate([A, a[ok]])
            B = np.concatenate([B, b[ok]])
    mid = 0.5 * (A + B)
    return A, B, mid


def power_hessian_eigmax(f, alpha, pts):
    """Largest eigenvalue of D^2(f^alpha) from the chain rule, per point."""
    v, g, H = jet_many(f, pts)
    if np.any(v <= 0):
        raise ConcavityError("field must be positive at sample points")
    outer = g[:, :, None] * g[:, None, :]
    D2 = alpha * v[:, None, None] ** (alpha - 2) * (
        (alpha - 1) * outer + v[:, None, None] * H
    )
    return _eigmax_sym2(D2), v


def _eigmax_sym2(H):
    a, b, c = H[:, 0, 0], H[:, 0, 1], H[:, 1, 1]
    mean = 0.5 * (a + c)
    rad = np.sqrt(0.25 * (a - c) ** 2 + b * b)
    return mean + rad


def _eigmin_sym2(H):
    a, b, c = H[:, 0, 0], H[:, 0, 1], H[:, 1, 1]
    mean = 0.5 * (a + c)
    rad = np.sqrt(0.25 * (a - c) ** 2 + b * b)
    return mean - rad


def _classify(max_violation, tol, witness):
    if max_violation > tol:
        return "fails", witness
    if max_violation > INCONCLUSIVE_BAND * tol:
        return "inconclusive", witness
    return "holds", None


def is_power_concave(
    f,
    alpha,
    margin=None,
    tol=None,
    seed=0,
    n_pairs=DEFAULT_MIDPOINT_PAIRS,
):
    """Certify concavity of f^alpha by Hessian and midpoint sampling."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    if margin is None:
        margin = default_margin(f)
    if tol is None:
        tol = default_eig_tol(f)

    pts = hessian_sample_points(f, margin)
    eig, vals = power_hessian_eigmax(f, alpha, pts)
    floor = _value_floor(f)
    live = vals >= floor
    eig = np.where(live, eig, -np.inf)
    i_eig = int(np.argmax(eig))
    eig_violation = float(eig[i_eig])
    n_tested = int(live.sum())

    A, B, mid = midpoint_triples(f, n_pairs, seed)
    fa = value_many(f, A) ** alpha
    fb = value_many(f, B) ** alpha
    fm = value_many(f, mid) ** alpha
    deficit = 0.5 * (fa + fb) - fm
    i_mid = int(np.argmax(deficit))
    mid_violation = float(deficit[i_mid])
    n_tested += len(mid)

    if eig_violation >= mid_violation:
        witness = {
            "kind": "hessian",
            "point": pts[i_eig].tolist(),
            "violation": eig_violation,
        }
        worst = eig_violation
    else:
        witness = {
            "kind": "midpoint",
            "pair": [A[i_mid].tolist(), B[i_mid].tolist()],
            "midpoint": mid[i_mid].tolist(),
            "violation": mid_violation,
        }
        worst = mid_violation
    verdict, witness = _classify(worst, tol, witness)
    return ConcavityReport(
        verdict=verdict,
        witness=witness,
        points_tested=n_tested,
        margin=margin,
        tol=tol,
        max_violation=worst,
    )


def concavity_exponent(
    f,
    bisection_tol=0.02,
    alpha_lo=0.45,
    alpha_hi=1.10,
    **check_kwargs,
):
    """Bracket the torsional concavity exponent by bisection on verdicts."""
    lo_report = is_power_concave(f, alpha_lo, **check_kwargs)
    hi_report = is_power_concave(f, alpha_hi, **check_kwargs)
    if lo_report.verdict != "holds" or hi_report.verdict == "holds":
        raise ConcavityError(
            "inconsistent endpoint verdicts: "
            f"alpha={alpha_lo} -> {lo_report.verdict}, "
            f"alpha={alpha_hi} -> {hi_report.verdict}"
        )
    lo, hi = alpha_lo, alpha_hi
    while hi - lo > bisection_tol:
        mid = 0.5 * (lo + hi)
        if is_power_concave(f, mid, **check_kwargs).verdict == "holds":
            lo = mid
        else:
            hi = mid
    return lo, hi


def _sqrt_hessian_eigmin(vals, grads, hess):
    """Smallest eigenvalue of D^2 sqrt(g) given the jet of g > 0."""
    outer = grads[:, :, None] * grads[:, None, :]
    D2 = (
        2.0 * vals[:, None, None] * hess - outer
    ) / (4.0 * vals[:, None, None] ** 1.5)
    return _eigmin_sym2(D2)


def property_A_check(
    f,
    margin=None,
    tol=None,
    seed=0,
    n_pairs=DEFAULT_MIDPOINT_PAIRS,
    argmax_exclusion=0.15,
):
    """Convexity test of w = sqrt(M - f).

    Near the maximum w is non-smooth, so a ball of radius
    ``argmax_exclusion * dist(argmax, boundary)`` is probed by midpoint
    sampling only.
    """
    if margin is None:
        margin = default_margin(f)
    if tol is None:
        tol = default_eig_tol(f)
    M = f.max_value
    x_star = np.asarray(f.argmax, dtype=float)
    r_excl = argmax_exclusion * float(f.domain.boundary_distance(x_star))

    pts = hessian_sample_points(f, margin)
    pts = pts[np.linalg.norm(pts - x_star, axis=1) >= r_excl]
    if len(pts) == 0:
        raise ConcavityError("no Hessian sample points outside the exclusions")
    v, g, H = jet_many(f, pts)
    gv = M - v
    ok = gv > 0
    eigmin = _sqrt_hessian_eigmin(gv[ok], -g[ok], -H[ok])
    i = int(np.argmin(eigmin))
    eig_violation = float(-eigmin[i])
    n_tested = int(ok.sum())

    A, B, mid = midpoint_triples(f, n_pairs, seed)
    wa = np.sqrt(np.maximum(M - value_many(f, A), 0.0))
    wb = np.sqrt(np.maximum(M - value_many(f, B), 0.0))
    wm = np.sqrt(np.maximum(M - value_many(f, mid), 0.0))
    deficit = wm - 0.5 * (wa + wb)
    j = int(np.argmax(deficit))
    mid_violation = float(deficit[j])
    n_tested += len(mid)

    if eig_violation >= mid_violation:
        witness = {
            "kind": "hessian",
            "point": pts[ok][i].tolist(),
            "violation": eig_violation,
        }
        worst = eig_violation
    else:
        witness = {
            "kind": "midpoint",
            "pair": [A[j].tolist(), B[j].tolist()],
            "midpoint": mid[j].tolist(),
            "violation": mid_violation,
        }
        worst = mid_violation
    verdict, witness = _classify(worst, tol, witness)
    return ConcavityReport(
        verdict=verdict,
        witness=witness,
        points_tested=n_tested,
        margin=margin,
        tol=tol,
        max_violation=worst,
    )


def local_property_A_check(f, x0, radius, tol=None, n_radii=24, n_angles=96):
    """Local variant: v = u(x0) + <grad u(x0), x - x0> - u(x) on a ball.

    Checks v >= -tol and convexity of sqrt(v) on the punctured ball; if both
    hold, the field is quadratic there up to the certification tolerance.
    """
    x0 = np.asarray(x0, dtype=float)
    if f.domain is not None and f.domain.boundary_distance(x0) < radius:
        raise ConcavityError("ball not contained in the domain")
    if tol is None:
        tol = default_eig_tol(f)
    u0, g0, _ = jet_many(f, x0[None, :])
    u0, g0 = float(u0[0]), g0[0]

    eff = max(getattr(f, "min_eval_distance", 0.0), 0.0)
    rs = np.linspace(radius / n_radii, radius, n_radii)
    th = np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False)
    R, T = np.meshgrid(rs, th, indexing="ij")
    pts = x0 + np.stack([(R * np.cos(T)).ravel(), (R * np.sin(T)).ravel()], axis=1)
    if eff > 0:
        pts = pts[f.domain.boundary_distance(pts) >= eff]
    u, g, H = jet_many(f, pts)
    v = u0 + (pts - x0) @ g0 - u
    if np.min(v) < -tol:
        i = int(np.argmin(v))
        return ConcavityReport(
            verdict="fails",
            witness={"kind": "negativity", "point": pts[i].tolist(), "violation": float(-v[i])},
            points_tested=len(pts),
            margin=0.0,
            tol=tol,
            max_violation=float(-v[i]),
        )
    # exclude the center where v vanishes and sqrt(v) is singular
    keep = v > max(1e-4 * np.max(v), 1e-14)
    eigmin = _sqrt_hessian_eigmin(v[keep], g0 - g[keep], -H[keep])
    i = int(np.argmin(eigmin))
    worst = float(-eigmin[i])
    witness = {
        "kind": "hessian",
        "point": pts[keep][i].tolist(),
        "violation": worst,
    }
    verdict, witness = _classify(worst, tol, witness)
    return ConcavityReport(
        verdict=verdict,
        witness=witness,
        points_tested=len(pts),
        margin=0.0,
        tol=tol,
        max_violation=worst,
    )


def excess_laplacian_power(f, alpha, x):
    """G(x) = alpha * u^(alpha-2) * [(alpha-1) |grad u|^2 - u]."""
    v, g, H = jet_many(f, np.asarray(x, dtype=float)[None, :])
    u = float(v[0])
    if u <= 0:
        raise ConcavityError("field must be positive at x")
    return float(alpha * u ** (alpha - 2) * ((alpha - 1) * (g[0] @ g[0]) - u))


def level_set_bound_check(result, alpha, eps):
    """Bracket (alpha-1) Vol^2/Per - eps Per for the level set {u > eps}.

    A positive value certifies that u^alpha is not concave for this alpha.
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    if not (0 < eps < result.max_value / 2):
        raise ValueError("eps must lie in (0, M/2)")
    mask = result.field.mask
    xs, ys = mask.node_xy()
    poly = marching_level_set(xs, ys, result.field.extended_values, eps)
    vol, per = polygon_metrics(poly)
    bracket = (alpha - 1) * vol**2 / per - eps * per
    return vol, per, float(bracket)


def boundary_gradient_stats(result, n_samples=256, depth_cells=2.5):
    """|grad u| on the boundary by one-sided differences along inward normals."""
    f = result if isinstance(result, GridInterpolant) else None
    if f is None:
        from .fields import interpolant

        f = interpolant(result)
    dom = f.domain
    bp, nrm = dom.boundary_samples(n_samples)
    s = max(depth_cells, EVAL_MARGIN_CELLS + 0.5) * f.h
    p1 = bp + s * nrm
    p2 = bp + 2.0 * s * nrm
    ok = (dom.boundary_distance(p1) >= f.min_eval_distance) & (
        dom.boundary_distance(p2) >= f.min_eval_distance
    )
    if not np.any(ok):
        raise ConcavityError("no boundary probes clear the evaluation margin")
    u1 = value_many(f, p1[ok])
    u2 = value_many(f, p2[ok])
    g = (4.0 * u1 - u2) / (2.0 * s)  # one-sided derivative with u(boundary) = 0
    g = np.abs(g)
    mean = float(g.mean())
    stats = {
        "min": float(g.min()),
        "max": float(g.max()),
        "mean": mean,
        "spread": float((g.max() - g.min()) / mean),
        "samples": int(ok.sum()),
    }
    return stats
