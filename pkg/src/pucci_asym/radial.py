"""Closed-form radial solutions, global sub-solutions and barriers.

Every solution is returned as log u.  With ell = lam (minus) or Lam (plus)
and a = 1 / (sqrt(ell) eps):

* ball of radius R: u = g(|x|) / g(R), b = N - 2;
* exterior of the ball: u = f(|x|) / f(R), with b = -1 + (N-1) Lam/lam for
  the minus operator and b = -1 + (N-1) lam/Lam for the plus operator.

The barriers compare a general domain with the ball inscribed at x (from
above) or the exterior of a ball centred at an outside point z (from below).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, GeometryError, InputError
from .pucci import PucciParams, check_sign
from .special import (ProfileParams, log_F, log_G, log_f_profile, log_g_profile,
                      log_sine_power_integral)

_EDGE_TOL = 1e-12


def ball_profile(sign, eps, p):
    ell = p.ell(sign)
    return ProfileParams(1.0 / (math.sqrt(ell) * eps), p.dim - 2.0)


def exterior_power(sign, p):
    if check_sign(sign) == "minus":
        return -1.0 + (p.dim - 1) * p.Lam / p.lam
    return -1.0 + (p.dim - 1) * p.lam / p.Lam


def exterior_profile(sign, eps, p):
    ell = p.ell(sign)
    return ProfileParams(1.0 / (math.sqrt(ell) * eps), exterior_power(sign, p))


def _positive(name, v):
    if not (v > 0 and math.isfinite(v)):
        raise InputError(f"{name} must be positive and finite, got {v!r}")


@dataclass(frozen=True)
class RadialEllipticSolution:
    """u for the ball or its exterior; call ``log_u`` on |x| values."""
    sign: str
    R: float
    eps: float
    params: PucciParams
    kind: str = "ball"

    def __post_init__(self):
        check_sign(self.sign)
        _positive("R", self.R)
        _positive("epsilon", self.eps)
        if self.kind not in ("ball", "exterior"):
            raise InputError("kind must be 'ball' or 'exterior'")

    def log_u(self, x_norm):
        if self.kind == "ball":
            return ball_solution(self.sign, x_norm, self.R, self.eps, self.params)
        return exterior_solution(self.sign, x_norm, self.R, self.eps, self.params)

    def discrepancy(self, x_norm):
        """eps log u + d/sqrt(ell)."""
        d = np.abs(self.R - np.asarray(x_norm, dtype=float))
        return self.eps * self.log_u(x_norm) + d / math.sqrt(self.params.ell(self.sign))


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def ball_solution(sign, x_norm, R, eps, p):
    """log u of the solution in the ball B_R(0), evaluated at |x|."""
    check_sign(sign)
    _positive("R", R)
    _positive("epsilon", eps)
    r = np.asarray(x_norm, dtype=float)
    if np.any(r < 0) or np.any(r > R * (1 + _EDGE_TOL)):
        raise DomainError("ball solution needs 0 <= |x| <= R")
    r = np.minimum(r, R)
    pp = ball_profile(sign, eps, p)
    # log g(r) - log g(R) = a (r - R) + log G(a r) - log G(a R)
    lg_r = log_G(pp.a * r, pp.b)[0]
    lg_R = log_G(np.array(pp.a * R), pp.b)[0]
    out = pp.a * (r - R) + lg_r - lg_R
    return _out(np.where(r == R, 0.0, out))


def exterior_solution(sign, x_norm, R, eps, p):
    """log u of the bounded solution outside B_R(0), evaluated at |x|."""
    check_sign(sign)
    _positive("R", R)
    _positive("epsilon", eps)
    r = np.asarray(x_norm, dtype=float)
    if np.any(r < R * (1 - _EDGE_TOL)):
        raise DomainError("exterior solution needs |x| >= R")
    r = np.maximum(r, R)
    pp = exterior_profile(sign, eps, p)
    lf_r = log_F(pp.a * r, pp.b)[0]
    lf_R = log_F(np.array(pp.a * R), pp.b)[0]
    out = -pp.a * (r - R) + lf_r - lf_R
    return _out(np.where(r == R, 0.0, out))


def exterior_lower_bound(sign, delta, R, eps, p):
    """Lower bound of eps log u + d/sqrt(ell) for R <= |x| <= delta.

    ``delta`` is the outer radius of the compact annulus on which the bound
    holds.  The bound tends to zero like eps * limit_coefficient.
    """
    if delta < R:
        raise DomainError("outer radius delta must be >= R")
    pp = exterior_profile(sign, eps, p)
    lf = log_F(np.array([pp.a * delta, pp.a * R]), pp.b)[0]
    return eps * float(lf[0] - lf[1])


def exterior_limit_coefficient(sign, delta, R, p):
    """c with exterior_lower_bound = eps * c * (1 + O(eps)); c = (b+1)/2 log(R/delta)."""
    b = exterior_power(sign, p)
    return 0.5 * (b + 1.0) * math.log(R / delta)


def elliptic_barrier_above(sign, d, eps, p):
    """Upper bound for eps log u + d/sqrt(ell) at a point at distance d from the boundary."""
    check_sign(sign)
    _positive("epsilon", eps)
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise DomainError("distance must be nonnegative")
    ell = p.ell(sign)
    b = p.dim - 2.0
    k = d / (eps * math.sqrt(ell))
    out = eps * (log_sine_power_integral(b) - log_G(k, b)[0])
    return _out(np.where(d == 0, 0.0, out))


def elliptic_barrier_below(sign, x, z, d_z, eps, p):
    """Lower bound for eps log u + (|x - z| - d_z)/sqrt(ell).

    z is a point outside the closed domain at distance d_z from it; x may be
    a single point or an array of points (last axis = coordinates).
    """
    check_sign(sign)
    _positive("epsilon", eps)
    _positive("d_z", d_z)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    dist = np.linalg.norm(x - z, axis=-1)
    if np.any(dist < d_z * (1 - 1e-12)):
        raise GeometryError("|x - z| < d_z: z is not at distance d_z from the domain")
    dist = np.maximum(dist, d_z)
    pp = exterior_profile(sign, eps, p)
    lf_x = log_F(pp.a * dist, pp.b)[0]
    lf_z = log_F(np.array(pp.a * d_z), pp.b)[0]
    out = eps * (lf_x - lf_z)
    return _out(np.where(dist == d_z, 0.0, out))


def phi_exponent(sign, p):
    """Time exponent alpha of Phi = t^-alpha exp(-|x|^2 / (4 ell t))."""
    n = p.dim
    if check_sign(sign) == "minus":
        return n * p.Lam / (2.0 * p.lam)
    return ((n - 1) * p.lam + p.Lam) / (2.0 * p.Lam)


def log_phi_global(sign, x_norm, t, p):
    ell = p.ell(sign)
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("time must be positive")
    r = np.asarray(x_norm, dtype=float)
    return _out(-phi_exponent(sign, p) * np.log(t) - r * r / (4.0 * ell * t))


def phi_residual_factor(sign, x_norm, t, p):
    """(Phi_t - M(D^2 Phi)) / Phi from the closed-form derivatives.

    minus: (lam-Lam)/(2 lam t) where r^2 >= 2 lam t, else r^2 (lam-Lam)/(4 lam^2 t^2)
    plus:  0 where r^2 >= 2 Lam t, else (Lam-lam)(r^2 - 2 Lam t)/(4 Lam^2 t^2)
    """
    r2 = np.asarray(x_norm, dtype=float) ** 2
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise DomainError("time must be positive")
    lam, Lam = p.lam, p.Lam
    if check_sign(sign) == "minus":
        far = (lam - Lam) / (2.0 * lam * t) + 0.0 * r2
        near = r2 * (lam - Lam) / (4.0 * lam ** 2 * t ** 2)
        return _out(np.where(r2 >= 2.0 * lam * t, far, near))
    near = (Lam - lam) * (r2 - 2.0 * Lam * t) / (4.0 * Lam ** 2 * t ** 2)
    return _out(np.where(r2 >= 2.0 * Lam * t, 0.0 * near, near))


def phi_global(sign, x_norm, t, p):
    """(Phi, Phi_t - M(D^2 Phi)) for the global sub-solution."""
    phi = np.exp(log_phi_global(sign, x_norm, t, p))
    return _out(phi), _out(phi * phi_residual_factor(sign, x_norm, t, p))


def log_phi_prefactor(sign, delta, p):
    """log A with A * max_t Phi(delta, t) = 1.

    Phi(delta, .) peaks at t* = delta^2 / (4 ell alpha) with value
    (t* e)^-alpha, so log A = alpha (log t* + 1).
    """
    _positive("delta", delta)
    alpha = phi_exponent(sign, p)
    ell = p.ell(sign)
    log_tstar = 2.0 * math.log(delta) - math.log(4.0 * ell * alpha)
    return alpha * (log_tstar + 1.0)


def parabolic_barrier_above(sign, d, t, p):
    """Upper bound for 4 t log v at a point at distance d from the boundary."""
    check_sign(sign)
    _positive("t", t)
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise DomainError("distance must be nonnegative")
    ell = p.ell(sign)
    b = p.dim - 2.0
    k = d * d / (2.0 * ell * t)
    out = -d * d / ell + 4.0 * t * (log_sine_power_integral(b) - log_G(k, b)[0])
    return _out(np.where(d == 0, 0.0, out))


def parabolic_barrier_below(sign, x, z, delta, t, p):
    """log(A Phi(x - z, t)), a lower bound for log v."""
    check_sign(sign)
    _positive("t", t)
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    dist = np.linalg.norm(x - z, axis=-1)
    if np.any(dist < delta * (1 - 1e-12)):
        raise GeometryError("|x - z| < delta: z is not at distance delta from the domain")
    return _out(log_phi_prefactor(sign, delta, p) + log_phi_global(sign, dist, t, p))


def radial_log_profile(kind, sign, r, R, eps, p):
    if kind == "ball":
        return ball_solution(sign, r, R, eps, p)
    if kind == "exterior":
        return exterior_solution(sign, r, R, eps, p)
    raise InputError(f"unknown radial kind {kind!r}")


def radial_table(kind, r_values, R, eps, p):
    """Rows (r, log_u_minus, log_u_plus, bound_above, bound_below).

    Both bounds refer to the minus operator and to eps log u + d/sqrt(lam)
    with d = |R - r|.  The lower one uses an outside ball of radius R placed
    on the ray through the sample point, so that |x - z| - d_z = d.
    """
    r = np.asarray(r_values, dtype=float)
    lm = radial_log_profile(kind, "minus", r, R, eps, p)
    lp = radial_log_profile(kind, "plus", r, R, eps, p)
    d = np.abs(R - r)
    above = elliptic_barrier_above("minus", d, eps, p)
    pts = np.stack([r, np.zeros_like(r)], axis=-1)
    z = np.zeros(2) if kind == "exterior" else np.array([2.0 * R, 0.0])
    below = elliptic_barrier_below("minus", pts, z, R, eps, p)
    return np.column_stack([r, np.atleast_1d(lm), np.atleast_1d(lp),
                            np.atleast_1d(above), np.atleast_1d(below)])


# convenience re-exports for callers that work with whole profiles
__all__ = [
    "RadialEllipticSolution", "ball_solution", "exterior_solution",
    "exterior_lower_bound", "exterior_limit_coefficient",
    "elliptic_barrier_above", "elliptic_barrier_below",
    "phi_exponent", "log_phi_global", "phi_residual_factor", "phi_global",
    "log_phi_prefactor", "parabolic_barrier_above", "parabolic_barrier_below",
    "ball_profile", "exterior_profile", "exterior_power", "radial_table",
    "log_g_profile", "log_f_profile",
]
