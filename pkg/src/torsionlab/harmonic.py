"""Circular-harmonic analysis of the deviation from the osculating quadratic.

About the interior maximum x* the deficit v = M - u splits into the
quadratic form given by the Hessian eigenvalues plus a harmonic remainder
z.  Fourier analysis of z on circles detects the first nonvanishing mode
k >= 3, whose presence certifies that the domain is not an ellipse, and
the radial sign quantity 2 v v_rr - v_r^2 carries the quantitative
obstruction to convexity of sqrt(v).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fields import jet_many, radial_jet, radial_jet_many

DETECTION_COEFF = 1e-4  # amplitude threshold scale: DETECTION_COEFF * M / rho^k


class HarmonicError(ValueError):
    pass


@dataclass(frozen=True)
class HarmonicDecomposition:
    base_point: np.ndarray
    max_value: float
    lam: tuple[float, float]      # Hessian eigenvalues of v at x*, descending
    rotation: float               # angle of the first eigenvector
    rho: float
    radii: np.ndarray
    cos_coeffs: np.ndarray        # (n_radii, K+1)
    sin_coeffs: np.ndarray
    c_cos: np.ndarray             # fitted amplitudes of r^k per mode
    c_sin: np.ndarray
    amplitudes: np.ndarray        # hypot(c_cos, c_sin)
    thresholds: np.ndarray
    harmonicity_dev: np.ndarray   # relative pure-power deviation per mode
    k_bar: int | None

    def to_dict(self):
        modes = [
            {
                "k": int(k),
                "c_cos": float(self.c_cos[k]),
                "c_sin": float(self.c_sin[k]),
                "amplitude": float(self.amplitudes[k]),
                "threshold": float(self.thresholds[k]),
                "harmonicity_dev": float(self.harmonicity_dev[k]),
            }
            for k in range(len(self.c_cos))
        ]
        return {
            "base_point": self.base_point.tolist(),
            "M": self.max_value,
            "lambda": [self.lam[0], self.lam[1]],
            "rotation": self.rotation,
            "rho": self.rho,
            "modes": modes,
            "k_bar": self.k_bar,
        }


def _eigenframe(H):
    """Eigenvalues (descending) and rotation with first axis in the upper half-plane.

    A (numerically) degenerate Hessian fixes no frame; keep the original axes.
    """
    w, V = np.linalg.eigh(H)   # ascending
    lam = (float(w[1]), float(w[0]))
    if lam[0] - lam[1] <= 1e-9 * max(abs(lam[0]), 1.0):
        return lam, 0.0
    e1 = V[:, 1]
    if e1[1] < 0 or (e1[1] == 0 and e1[0] < 0):
        e1 = -e1
    return lam, float(np.arctan2(e1[1], e1[0]))


def decompose(f, n_radii=8, n_angles=256, max_mode=12, noise_floor=None):
    """Harmonic decomposition of v = M - f about the maximum of f.

    ``noise_floor`` optionally holds per-mode amplitude floors (e.g. taken
    from a null case at the same resolution); detected amplitudes must
    exceed both the scale threshold and five times this floor.
    """
    if n_angles < 4 * max_mode:
        raise HarmonicError("n_angles must be at least 4 * max_mode (aliasing)")
    x_star = np.asarray(f.argmax, dtype=float)
    M = f.max_value
    dist = float(f.domain.boundary_distance(x_star))
    if dist <= 0:
        raise HarmonicError("maximum lies on the boundary")
    rho = 0.8 * dist
    margin = getattr(f, "min_eval_distance", 0.0)
    if rho <= 2 * margin:
        raise HarmonicError("inscribed radius too small for the grid resolution")

    _, _, H = jet_many(f, x_star[None, :])
    lam, rot = _eigenframe(-H[0])
    R = np.array([[np.cos(rot), -np.sin(rot)], [np.sin(rot), np.cos(rot)]])

    radii = np.geomspace(rho / 16.0, rho / 2.0, n_radii)
    theta = 2.0 * np.pi * np.arange(n_angles) / n_angles
    circle = np.stack([np.cos(theta), np.sin(theta)], axis=1)

    cos_c = np.zeros((n_radii, max_mode + 1))
    sin_c = np.zeros((n_radii, max_mode + 1))
    for j, r in enumerate(radii):
        pts = x_star + r * circle @ R.T
        vals = jet_many(f, pts)[0]
        X = r * circle  # rotated-frame coordinates
        quad = 0.5 * (lam[0] * X[:, 0] ** 2 + lam[1] * X[:, 1] ** 2)
        z = (M - vals) - quad
        spec = np.fft.rfft(z) / n_angles
        cos_c[j, 0] = spec[0].real
        cos_c[j, 1:] = 2.0 * spec[1 : max_mode + 1].real
        sin_c[j, 1:] = -2.0 * spec[1 : max_mode + 1].imag

    rk = radii[:, None] ** np.arange(max_mode + 1)[None, :]
    denom = (rk * rk).sum(axis=0)
    c_cos = (cos_c * rk).sum(axis=0) / denom
    c_sin = (sin_c * rk).sum(axis=0) / denom
    amplitudes = np.hypot(c_cos, c_sin)

    thresholds = DETECTION_COEFF * M / rho ** np.arange(max_mode + 1)
    if noise_floor is not None:
        nf = np.asarray(noise_floor, dtype=float)
        thresholds = np.maximum(thresholds, 5.0 * nf[: max_mode + 1])

    # relative deviation of a_k(r)/r^k from constancy, per mode
    per_r = np.hypot(cos_c, sin_c) / rk
    fitted = np.hypot(c_cos, c_sin)
    scale = np.maximum(fitted, thresholds)
    harmonicity_dev = np.abs(per_r - np.hypot(c_cos, c_sin)[None, :]).max(axis=0) / scale

    k_bar = None
    for k in range(3, max_mode + 1):
        if amplitudes[k] >= thresholds[k]:
            k_bar = k
            break

    return HarmonicDecomposition(
        base_point=x_star,
        max_value=M,
        lam=lam,
        rotation=rot,
        rho=rho,
        radii=radii,
        cos_coeffs=cos_c,
        sin_coeffs=sin_c,
        c_cos=c_cos,
        c_sin=c_sin,
        amplitudes=amplitudes,
        thresholds=thresholds,
        harmonicity_dev=harmonicity_dev,
        k_bar=k_bar,
    )


def harmonicity_check(d, tol=1e-3):
    """Pure r^k radial dependence of every retained mode, within tol."""
    out = {}
    for k in range(3, len(d.amplitudes)):
        if d.amplitudes[k] >= d.thresholds[k]:
            out[k] = bool(d.harmonicity_dev[k] <= tol)
    return out


def radial_sign_quantity(f, base, xi, r):
    """2 v v_rr - v_r^2 along the ray from *base* in direction *xi*.

    Nonnegativity for all (r, xi) is necessary for convexity of sqrt(v)
    along rays from the maximum.
    """
    v, v_r, v_rr = radial_jet(f, base, xi, r)
    return 2.0 * v * v_rr - v_r**2


@dataclass(frozen=True)
class LeadingTermFit:
    exponent: float
    coefficient: float
    r_values: np.ndarray
    q_values: np.ndarray


def leading_term_fit(f, d, xi, r_lo, r_hi, n_r=24, noise_scale=1e-10):
    """Log-log power fit of |2 v v_rr - v_r^2| over [r_lo, r_hi].

    Returns None when the quantity sits at the numerical noise floor (the
    rigidity signature); raises HarmonicError when it changes sign inside
    the fit range.
    """
    if not (0 < r_lo < r_hi < d.rho):
        raise HarmonicError("fit range must lie inside (0, rho)")
    rs = np.geomspace(r_lo, r_hi, n_r)
    v, v_r, v_rr = radial_jet_many(f, d.base_point, xi, rs)
    q = 2.0 * v * v_rr - v_r**2
    floor = noise_scale * f.max_value**2
    if np.max(np.abs(q)) < floor:
        return None
    signs = np.sign(q[np.abs(q) > floor])
    if signs.size == 0 or not np.all(signs == signs[0]):
        raise HarmonicError("sign change inside the fit range: range too large")
    s = signs[0]
    coef = np.polyfit(np.log(rs), np.log(np.abs(q)), 1)
    return LeadingTermFit(
        exponent=float(coef[0]),
        coefficient=float(s * np.exp(coef[1])),
        r_values=rs,
        q_values=q,
    )
