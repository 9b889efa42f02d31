"""Bessel-type profile integrals and the Gamma/Erfc kernels.

The two profiles are

    g(s) = int_0^pi  exp(a s cos th) sin(th)^b dth
    f(s) = int_0^inf exp(-a s cosh th) sinh(th)^b dth

for a > 0 and b > -1.  Both are evaluated in log form with a tanh-sinh
rule whose nodes and weights are themselves kept in log form, so the
endpoint singularities (b < 1) and the extreme magnitudes reached for
large a*s cost nothing extra.

After the substitutions u = 1 - cos th and u = cosh th - 1,

    g(s) = exp(+a s) * G(a s),   G(k) = int_0^2   exp(-k u) (u (2 - u))^c du
    f(s) = exp(-a s) * F(a s),   F(k) = int_0^inf exp(-k u) (u (u + 2))^c du

with c = (b - 1) / 2.  G and F carry no exponential growth, which is what
makes the log form cheap and exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, InputError, ParameterError

LOG2 = math.log(2.0)
EULER_GAMMA = 0.57721566490153286061

# tanh-sinh settings
_T_MAX = 6.5
_FIRST_LEVEL = 3
_LAST_LEVEL = 11
_RTOL = 1e-14
# how far (in log units) below its peak the integrand may be cut off
_CUT = 45.0


@dataclass(frozen=True)
class ProfileParams:
    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and a > 0):
            raise ParameterError(f"profile rate a must be positive, got {self.a!r}")
        if not (math.isfinite(b) and b > -1):
            raise ParameterError(f"profile power b must exceed -1, got {self.b!r}")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)


@dataclass(frozen=True)
class QuadratureReport:
    value: float
    log_value: float
    abs_error_estimate: float
    evaluations: int
    truncation_point: float


@lru_cache(maxsize=None)
def _rule(level):
    """Nodes of the tanh-sinh rule on [-1, 1] with step 2**-level.

    Returns xi, log(1 + xi), log(1 - xi) and log weights.  The cache is a
    read-only table keyed by level; arrays are frozen.
    """
    h = 2.0 ** -level
    n = int(math.ceil(_T_MAX / h))
    t = np.arange(-n, n + 1) * h
    y = 0.5 * math.pi * np.sinh(t)
    xi = np.tanh(y)
    log_1p = LOG2 - np.logaddexp(0.0, -2.0 * y)
    log_1m = LOG2 - np.logaddexp(0.0, 2.0 * y)
    ay = np.abs(y)
    log_cosh_y = ay + np.log1p(np.exp(-2.0 * ay)) - LOG2
    log_w = math.log(h * 0.5 * math.pi) + np.log(np.cosh(t)) - 2.0 * log_cosh_y
    out = (xi, log_1p, log_1m, log_w)
    for arr in out:
        arr.setflags(write=False)
    return out


def _logsumexp(x, axis=-1):
    m = np.max(x, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return np.log(np.sum(np.exp(x - m), axis=axis)) + np.squeeze(m, axis=axis)


def tanh_sinh_log(log_integrand, lo, hi, rtol=_RTOL):
    """Log of int_lo^hi of exp(log_integrand), vectorised over lo/hi.

    ``log_integrand(x, log_dlo, log_dhi)`` receives nodes x (shape S + (n,))
    together with log(x - lo) and log(hi - x), computed without
    cancellation, and returns the log of the integrand.

    Returns (log_value, log-change at the last refinement, evaluations).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    lo, hi = np.broadcast_arrays(lo, hi)
    half = 0.5 * (hi - lo)
    empty = half <= 0
    half_safe = np.where(empty, 1.0, half)
    log_half = np.log(half_safe)[..., None]
    mid = (lo + half_safe)[..., None]

    prev = None
    evals = 0
    change = np.full(lo.shape, np.inf)
    for level in range(_FIRST_LEVEL, _LAST_LEVEL + 1):
        xi, log_1p, log_1m, log_w = _rule(level)
        x = mid + half_safe[..., None] * xi
        vals = log_integrand(x, log_half + log_1p, log_half + log_1m)
        vals = np.where(np.isnan(vals), -np.inf, vals)
        cur = _logsumexp(vals + log_w, axis=-1) + log_half[..., 0]
        evals += xi.size
        if prev is not None:
            with np.errstate(invalid="ignore"):
                change = np.abs(cur - prev)
            change = np.where(np.isneginf(cur) & np.isneginf(prev), 0.0, change)
            if np.all(change[~empty] <= rtol) if np.any(~empty) else True:
                prev = cur
                break
        prev = cur
    prev = np.where(empty, -np.inf, prev)
    change = np.where(empty, 0.0, change)
    return prev, change, evals


def _cutoff(p):
    """Smallest v > p with -v + p log v = (peak value) - _CUT, for p >= 0."""
    if p <= 0:
        return _CUT
    target = p * math.log(p) - p - _CUT
    v = max(2.0 * p, _CUT)
    for _ in range(100):
        v_new = p * math.log(v) - target
        if abs(v_new - v) < 1e-12 * v:
            break
        v = v_new
    return v


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if not np.all(np.isfinite(s)):
        raise DomainError("profile argument must be finite")
    return s


def log_G(k, b):
    """log G(k) for k >= 0 (the g-profile with its exp(a s) factor removed)."""
    k = _check_s(k)
    if np.any(k < 0):
        raise DomainError("g-profile argument must be nonnegative")
    c = 0.5 * (float(b) - 1.0)
    v_cut = _cutoff(max(c, 0.0))
    with np.errstate(divide="ignore"):
        upper = np.minimum(2.0, v_cut / k)
    gap = 2.0 - upper
    kk = k[..., None]
    gg = gap[..., None]

    def integrand(x, log_dlo, log_dhi):
        # x - 0 = x, 2 - x = gap + (upper - x)
        with np.errstate(divide="ignore"):
            log_2mx = np.where(gg > 0, np.log(gg + np.exp(log_dhi)), log_dhi)
        return -kk * x + c * (log_dlo + log_2mx)

    val, change, evals = tanh_sinh_log(integrand, np.zeros_like(k), upper)
    return val, change, evals, upper


def log_F(k, b):
    """log F(k) for k > 0 (the f-profile with its exp(-a s) factor removed)."""
    k = _check_s(k)
    if np.any(k <= 0):
        raise DomainError("f-profile argument must be positive")
    c = 0.5 * (float(b) - 1.0)
    v_cut = _cutoff(max(2.0 * c, 0.0) + 1.0)
    upper = np.minimum(2.0, v_cut / k)
    kk = k[..., None]

    def near(x, log_dlo, log_dhi):
        return -kk * x + c * (log_dlo + np.log(x + 2.0))

    v1, ch1, e1 = tanh_sinh_log(near, np.zeros_like(k), upper)

    # tail over w = log(k u) in [log 2k, log v_cut]; du = u dw
    w_lo = np.log(2.0 * k)
    w_hi = np.full_like(k, math.log(v_cut))
    w_hi = np.where(w_hi > w_lo, w_hi, w_lo)
    logk = np.log(k)[..., None]

    def tail(w, log_dlo, log_dhi):
        log_u = w - logk
        u = np.exp(log_u)
        return -np.exp(w) + c * (log_u + np.log(u + 2.0)) + log_u

    v2, ch2, e2 = tanh_sinh_log(tail, w_lo, w_hi)
    val = np.logaddexp(v1, v2)
    change = np.maximum(ch1, ch2)
    return val, change, e1 + e2, v_cut / k


def _report(log_val, change, evals, trunc):
    log_val = float(log_val)
    with np.errstate(over="ignore"):
        value = float(np.exp(log_val))
    # the last refinement changed log I by `change`; tanh-sinh error at the
    # finer level is much smaller, so this is a safe upper estimate
    err = abs(value) * float(change) if math.isfinite(value) else math.inf
    return QuadratureReport(value=value, log_value=log_val,
                            abs_error_estimate=max(err, 0.0),
                            evaluations=int(evals), truncation_point=float(trunc))


def log_g_profile(sigma, pp):
    """Vectorised log g(sigma)."""
    k = pp.a * np.asarray(sigma, dtype=float)
    val, _, _, _ = log_G(k, pp.b)
    return k + val


def log_f_profile(sigma, pp):
    """Vectorised log f(sigma)."""
    k = pp.a * np.asarray(sigma, dtype=float)
    val, _, _, _ = log_F(k, pp.b)
    return -k + val


def g_profile(sigma, pp):
    """g(sigma) with an error estimate; see :class:`QuadratureReport`.

    ``truncation_point`` is the upper limit in the angle variable actually
    integrated (pi unless the integrand is negligible earlier).
    """
    sigma = float(sigma)
    if not (sigma >= 0):
        raise DomainError(f"g-profile needs sigma >= 0, got {sigma!r}")
    k = pp.a * sigma
    val, change, evals, upper = log_G(np.array(k), pp.b)
    theta_max = math.acos(1.0 - float(upper)) if upper < 2.0 else math.pi
    return _report(k + val, change, evals, theta_max)


def f_profile(sigma, pp):
    """f(sigma) with an error estimate; truncation point in the angle variable."""
    sigma = float(sigma)
    if not (sigma > 0):
        raise DomainError(f"f-profile needs sigma > 0, got {sigma!r}")
    k = pp.a * sigma
    val, change, evals, trunc_u = log_F(np.array(k), pp.b)
    return _report(-k + val, change, evals, math.acosh(1.0 + float(trunc_u)))


def log_sine_power_integral(b):
    """log of int_0^pi sin(th)^b dth = sqrt(pi) Gamma((b+1)/2) / Gamma(b/2 + 1)."""
    return (0.5 * math.log(math.pi) + math.lgamma(0.5 * (b + 1.0))
            - math.lgamma(0.5 * b + 1.0))


def _log_large_prefactor(sigma, pp):
    k = pp.a * np.asarray(sigma, dtype=float)
    b = pp.b
    return 0.5 * (b - 1.0) * LOG2 + math.lgamma(0.5 * (b + 1.0)) - 0.5 * (b + 1.0) * np.log(k), k


def g_asymptotic_large(sigma, pp):
    """Leading term of g for large sigma."""
    lp, k = _log_large_prefactor(sigma, pp)
    return np.exp(lp + k)


def f_asymptotic_large(sigma, pp):
    """Leading term of f for large sigma."""
    lp, k = _log_large_prefactor(sigma, pp)
    return np.exp(lp - k)


def log_g_asymptotic_large(sigma, pp):
    lp, k = _log_large_prefactor(sigma, pp)
    return lp + k


def log_f_asymptotic_large(sigma, pp):
    lp, k = _log_large_prefactor(sigma, pp)
    return lp - k


def f_small_constant(b):
    """f(0) for -1 < b < 0, written with a positive prefactor.

    The value is -sqrt(pi)/(2 sin(b pi/2)) * Gamma((b+1)/2) / Gamma(b/2 + 1);
    sin(b pi/2) < 0 on this range, so the result is positive as f must be.
    """
    if not (-1.0 < b < 0.0):
        raise ParameterError("f(0) is finite only for -1 < b < 0")
    return (-0.5 * math.sqrt(math.pi) / math.sin(0.5 * b * math.pi)
            * math.gamma(0.5 * (b + 1.0)) / math.gamma(0.5 * b + 1.0))


def f_asymptotic_small(sigma, pp, zero_tol=1e-12):
    """Leading behaviour of f as sigma -> 0+, one branch per sign of b."""
    k = pp.a * np.asarray(sigma, dtype=float)
    b = pp.b
    if abs(b) <= zero_tol:
        return -np.log(k)
    if b > 0:
        return np.exp(math.lgamma(b) - b * np.log(k))
    return np.full_like(k, f_small_constant(b))


def ode_residual_check(which, pp, sigma, rel_step=3e-4):
    """Relative residual of -h'' - (b+1)/s h' + a^2 h = 0 at sigma.

    Derivatives are central differences of the quadrature values taken on
    the length scale of h: 1/a for g (smooth through s = 0), min(s, 1/a)
    for f (singular at s = 0), times rel_step.  They are taken on ratios h(s)/h(sigma) so that the check is insensitive to the
    magnitude of h.  The residual is divided by |h''| + (b+1)/s |h'| + a^2 h,
    the size of the terms that must cancel; near s = 0 the first two
    dominate and a^2 h alone would be a misleading scale.
    """
    sigma = float(sigma)
    if not (sigma > 0):
        raise DomainError("ode residual needs sigma > 0")
    if which not in ("f", "g"):
        raise InputError("which must be 'f' or 'g'")
    if which == "g":
        step = min(rel_step / pp.a, 0.5 * sigma)
    else:
        step = rel_step * min(sigma, 1.0 / pp.a)
    pts = np.array([sigma - step, sigma, sigma + step])
    logs = log_f_profile(pts, pp) if which == "f" else log_g_profile(pts, pp)
    r = np.expm1(logs - logs[1])
    d1 = (r[2] - r[0]) / (2.0 * step)
    d2 = (r[2] + r[0]) / step ** 2
    t1 = (pp.b + 1.0) / sigma * d1
    res = -d2 - t1 + pp.a ** 2
    return abs(res) / (abs(d2) + abs(t1) + pp.a ** 2)


def gamma_fn(x):
    x = float(x)
    if not (x > 0):
        raise DomainError(f"gamma_fn needs x > 0, got {x!r}")
    return math.gamma(x)


def erfc_fn(x):
    return math.erfc(float(x))
