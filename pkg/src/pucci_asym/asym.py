"""Asymptotics harness: Varadhan-type sweeps, rate fits and q-means.

The observed discrepancies are

    elliptic:   eps log u + d / sqrt(ell)
    parabolic:  4 t log v + d^2 / ell

with ell = lam for the minus operator and Lam for the plus operator.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import FitError, GeometryError, InputError
from .fd import GridConfig, solve_elliptic, solve_parabolic, solve_radial_parabolic
from .geometry import Ball, ExteriorBall, ModulusOfContinuity, distance_to_boundary, psi_omega
from .pucci import PucciParams, check_sign
from .radial import ball_solution, exterior_solution
from .special import erfc_fn, gamma_fn, log_F

# ---------------------------------------------------------------- q-means


def _samples(values, weights):
    u = np.asarray(values, dtype=float).ravel()
    w = np.ones_like(u) if weights is None else np.asarray(weights, dtype=float).ravel()
    if u.size == 0 or u.shape != w.shape:
        raise InputError("q-mean needs a nonempty sample with one weight per value")
    if np.any(w < 0) or not np.any(w > 0):
        raise InputError("weights must be nonnegative with at least one positive")
    if not np.all(np.isfinite(u)):
        raise InputError("sample values must be finite")
    return u, w


def q_objective(values, weights, q, mu):
    """sum w |u - mu|^q (or max |u - mu| for q = inf)."""
    u, w = _samples(values, weights)
    if math.isinf(q):
        return float(np.max(np.abs(u - mu)))
    return float(np.sum(w * np.abs(u - mu) ** q))


def q_mean(values, weights=None, q=2.0):
    """Unique minimiser of mu -> ||u - mu||_q over a weighted sample.

    q = inf gives the midrange (all samples count, whatever their weight).
    Otherwise the decreasing stationarity function
    sum w sign(u - mu) |u - mu|^(q-1) is bracketed on [min u, max u] and
    bisected, then polished by Newton steps when q >= 2.
    """
    q = float(q)
    if not q > 1:
        raise InputError(f"q-mean needs q > 1, got {q}")
    u, w = _samples(values, weights)
    if math.isinf(q):
        return 0.5 * (float(u.max()) + float(u.min()))
    keep = w > 0
    u, w = u[keep], w[keep]
    lo, hi = float(u.min()), float(u.max())
    if hi == lo:
        return lo
    if q == 2.0:
        return float(np.sum(w * u) / np.sum(w))
    rng = hi - lo

    def phi(m):
        d = u - m
        return float(np.sum(w * np.sign(d) * np.abs(d) ** (q - 1)))

    while hi - lo > 1e-12 * rng:
        mid = 0.5 * (lo + hi)
        if phi(mid) > 0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    if q >= 2:
        for _ in range(3):
            d = np.abs(u - mu)
            dphi = -(q - 1) * float(np.sum(w * d ** (q - 2)))
            if dphi == 0:
                break
            step = -phi(mu) / dphi
            if abs(step) > 1e-9 * rng:
                break
            mu += step
    return float(mu)


def c_constant(N, q):
    """Elliptic q-mean constant [2^-(N+1)/2 N! / ((q-1)^((N+1)/2) Gamma((N+1)/2))]^(1/(q-1))."""
    _check_nq(N, q)
    base = 2.0 ** (-(N + 1) / 2.0) * math.factorial(N) / ((q - 1.0) ** ((N + 1) / 2.0) * gamma_fn((N + 1) / 2.0))
    return base ** (1.0 / (q - 1.0))


def erfc_moment(N, q):
    """int_0^inf Erfc(s)^(q-1) s^((N-1)/2) ds; Erfc(8) < 1e-28 so [0, 8] suffices."""
    _check_nq(N, q)
    val, _ = integrate.quad(lambda s: erfc_fn(s) ** (q - 1.0) * s ** ((N - 1) / 2.0),
                            0.0, 8.0, epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def big_c_constant(N, q):
    """Parabolic q-mean constant [N! M / Gamma((N+1)/2)^2]^(1/(q-1)), M the Erfc moment."""
    _check_nq(N, q)
    base = math.factorial(N) * erfc_moment(N, q) / gamma_fn((N + 1) / 2.0) ** 2
    return base ** (1.0 / (q - 1.0))


def _check_nq(N, q):
    if int(N) != N or N < 2:
        raise InputError("N must be an integer >= 2")
    if not (q > 1 and math.isfinite(q)):
        raise InputError("the constants need 1 < q < inf")


def qmean_scaling_exponent(kind, N, q):
    if kind == "elliptic":
        return (N + 1) / (2.0 * (q - 1.0))
    return (N + 1) / (4.0 * (q - 1.0))


def predicted_qmean_limit(kind, N, q, pi0, ell):
    """Limit of the scaled q-mean for contact factor pi0 and diffusion ell."""
    if math.isinf(q):
        return 0.5
    const = c_constant(N, q) if kind == "elliptic" else big_c_constant(N, q)
    return const * (pi0 / ell ** ((N + 1) / 2.0)) ** (-1.0 / (2.0 * (q - 1.0)))


def ball_weights(grid, center, R, sub=8):
    """Area of B_R(center) inside each grid cell, by sub-cell counting.

    Returns (flat node indices, weights).  Cells are centred on nodes.
    """
    h = grid.h
    c = np.asarray(center, dtype=float)
    i0 = max(int(math.floor((c[0] - R - grid.x0) / h)) - 1, 0)
    i1 = min(int(math.ceil((c[0] + R - grid.x0) / h)) + 1, grid.nx - 1)
    j0 = max(int(math.floor((c[1] - R - grid.y0) / h)) - 1, 0)
    j1 = min(int(math.ceil((c[1] + R - grid.y0) / h)) + 1, grid.ny - 1)
    ii, jj = np.meshgrid(np.arange(i0, i1 + 1), np.arange(j0, j1 + 1))
    ii, jj = ii.ravel(), jj.ravel()
    off = (np.arange(sub) + 0.5) / sub - 0.5
    ox, oy = np.meshgrid(off, off)
    px = (grid.x0 + ii * h)[:, None] + h * ox.ravel()[None, :]
    py = (grid.y0 + jj * h)[:, None] + h * oy.ravel()[None, :]
    inside = (px - c[0]) ** 2 + (py - c[1]) ** 2 < R * R
    w = inside.mean(axis=1) * h * h
    keep = w > 0
    return jj[keep] * grid.nx + ii[keep], w[keep]


# ---------------------------------------------------------------- rate fits

RATE_MODELS = ("eps_log_eps", "eps_log_psi", "eps_loglog_psi", "eps",
               "t_log_t", "t_log_psi", "t")


def rate_function(model, s, psi=None):
    """Rate rho(s) for the parameter s (eps or t); psi is psi_omega(s) where needed."""
    s = np.asarray(s, dtype=float)
    if model in ("eps_log_eps", "t_log_t"):
        return s * np.log(1.0 / s)
    if model in ("eps", "t"):
        return s.copy()
    if psi is None:
        raise InputError(f"model {model!r} needs psi values")
    psi = np.asarray(psi, dtype=float)
    if model in ("eps_log_psi", "t_log_psi"):
        return s * np.log(1.0 / psi)
    if model == "eps_loglog_psi":
        return s * np.log(np.abs(np.log(psi)))
    raise InputError(f"unknown rate model {model!r}")


@dataclass
class FitResult:
    model: str
    coef: float
    r2: float
    n: int
    band: float                       # two standard errors of coef
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        return {"model": self.model, "coef": self.coef, "r2": self.r2, "n": self.n,
                "band": self.band, **self.extra}


def fit_through_origin(rho, y, model="custom"):
    """Least squares y ~ a rho without intercept; R^2 is uncentred."""
    rho = np.asarray(rho, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if rho.size < 4:
        raise FitError("rate fits need at least 4 sequence points")
    ss = float(rho @ rho)
    if ss == 0:
        raise FitError("degenerate regressor")
    a = float(rho @ y) / ss
    res = y - a * rho
    yy = float(y @ y)
    r2 = 1.0 - float(res @ res) / yy if yy > 0 else 1.0
    dof = max(rho.size - 1, 1)
    se = math.sqrt(float(res @ res) / dof / ss)
    return FitResult(model, a, r2, int(rho.size), 2.0 * se)


def fit_two_term(rho, s, y, model="custom"):
    """y ~ a rho + b s without intercept (rate plus its first correction)."""
    rho = np.asarray(rho, dtype=float).ravel()
    s = np.asarray(s, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if rho.size < 4:
        raise FitError("rate fits need at least 4 sequence points")
    X = np.column_stack([rho, s])
    coef, *_ = np.linalg.lstsq(X, y, rcond=None)
    res = y - X @ coef
    yy = float(y @ y)
    r2 = 1.0 - float(res @ res) / yy if yy > 0 else 1.0
    dof = max(rho.size - 2, 1)
    cov = float(res @ res) / dof * np.linalg.inv(X.T @ X)
    one = fit_through_origin(rho, y, model)
    return FitResult(model + "+linear", float(coef[0]), r2, int(rho.size),
                     2.0 * math.sqrt(max(cov[0, 0], 0.0)),
                     {"linear_coef": float(coef[1]), "one_term_r2": one.r2,
                      "one_term_coef": one.coef})


def fit_power(s, y):
    """Exponent p of |y| ~ C s^p by log-log least squares (with intercept)."""
    s = np.asarray(s, dtype=float)
    y = np.abs(np.asarray(y, dtype=float))
    if s.size < 3:
        raise FitError("power fits need at least 3 points")
    if np.any(y <= 0):
        raise FitError("power fit needs nonzero values")
    A = np.column_stack([np.log(s), np.ones_like(s)])
    coef, *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    res = np.log(y) - A @ coef
    tot = np.log(y) - np.log(y).mean()
    r2 = 1.0 - float(res @ res) / float(tot @ tot) if float(tot @ tot) > 0 else 1.0
    return FitResult("power", float(coef[0]), r2, int(s.size), 0.0,
                     {"log_constant": float(coef[1])})


def select_model(s, y, models, psi=None, margin=0.02):
    """Fit every candidate through the origin; the best R^2 wins if it leads by margin."""
    fits = [fit_through_origin(rate_function(m, s, psi), y, m) for m in models]
    fits.sort(key=lambda f: -f.r2)
    if len(fits) > 1 and fits[0].r2 - fits[1].r2 < margin:
        return "tie", fits
    return fits[0].model, fits


def theorem_rate_model(problem, sign, N, lam, Lam):
    """Rate model that the regime table assigns to a C^{0,omega} domain."""
    check_sign(sign)
    if problem == "parabolic":
        return "t_log_psi"
    if problem != "elliptic":
        raise InputError(f"unknown problem kind {problem!r}")
    if sign == "minus":
        return "eps_loglog_psi" if (N == 2 and lam == Lam) else "eps_log_psi"
    edge = lam * (N - 1)
    if abs(Lam - edge) <= 1e-12 * edge:
        return "eps_loglog_psi"
    return "eps_log_eps" if Lam > edge else "eps_log_psi"


def envelope_power(sign, N, lam, Lam):
    """Exponent b of the exterior profile in the lower envelope."""
    if check_sign(sign) == "minus":
        return -1.0 + (N - 1) * Lam / lam
    return -1.0 + (N - 1) * lam / Lam


def lower_envelope(sign, N, lam, Lam, eps, d, psi):
    """Lower bound of eps log u + d/sqrt(ell) from an outside ball at depth psi.

    -eps/sqrt(ell) + eps log[F(2d/(eps sqrt ell)) / F(psi/(eps sqrt ell))],
    F(k) = int_0^inf e^{-k u} (u(u+2))^((b-1)/2) du.
    """
    ell = lam if sign == "minus" else Lam
    b = envelope_power(sign, N, lam, Lam)
    eps = np.asarray(eps, dtype=float)
    psi = np.asarray(psi, dtype=float)
    se = np.sqrt(ell)
    num = log_F(2.0 * d / (eps * se), b)[0]
    den = log_F(psi / (eps * se), b)[0]
    return -eps / se + eps * (num - den)


def psi_sensitivity(sign, N, lam, Lam, eps=0.05, d=1.0, L_values=(20.0, 40.0, 80.0)):
    """Empirical regime detector from the depth dependence of the envelope.

    With L = log(1/psi), the slope k(L) = L dY/dL of Y = eps log u-envelope
    behaves as: growing like L (log psi regime), tending to a constant
    (log|log psi| regime), or decaying to 0 (no psi dependence, leaving
    the eps log eps rate).  Returns (model, ratios) using k(L2)/k(L1) on
    successive pairs.
    """
    L = np.asarray(L_values, dtype=float)
    k = []
    for Lv in L:
        pts = np.array([Lv - 0.5, Lv + 0.5])
        Y = lower_envelope(sign, N, lam, Lam, eps, d, eps * np.exp(-pts))
        k.append(Lv * (Y[0] - Y[1]) / eps)       # dY/dL with L increasing as psi shrinks
    k = np.abs(np.asarray(k))
    ratios = k[1:] / np.maximum(k[:-1], 1e-300)
    scale = L[1:] / L[:-1]
    r = float(np.min(ratios / scale))           # ~1 for log psi, ~1/scale for loglog, ~0 for none
    if r > 0.75:
        model = "eps_log_psi"
    elif float(np.min(ratios)) > 0.5:
        model = "eps_loglog_psi"
    else:
        model = "eps_log_eps"
    return model, {"L": L.tolist(), "k": k.tolist(), "ratios": ratios.tolist()}


def richardson(params, values, order):
    """Extrapolate values(p) = v0 + c p^order to p = 0.

    Uses successive pairs; returns (limit, error bar, all extrapolants).
    The error bar is the gap between the last two extrapolants, or the last
    correction when only one extrapolant exists.
    """
    p = np.asarray(params, dtype=float)
    v = np.asarray(values, dtype=float)
    if p.size < 2:
        raise FitError("extrapolation needs at least two values")
    pa = p ** order
    ex = (v[1:] * pa[:-1] - v[:-1] * pa[1:]) / (pa[:-1] - pa[1:])
    lim = float(ex[-1])
    err = float(abs(ex[-1] - ex[-2])) if ex.size > 1 else float(abs(ex[-1] - v[-1]))
    return lim, err, ex.tolist()


# ---------------------------------------------------------------- sweeps


def worker_count():
    try:
        n = int(os.environ.get("PUCCI_ASYM_THREADS", "0"))
    except ValueError:
        n = 0
    if n <= 0:
        n = min(os.cpu_count() or 1, 8)
    return max(n, 1)


def _run_cells(fn, cells):
    """Evaluate fn on each cell, in parallel, keyed by position."""
    n = worker_count()
    if n == 1 or len(cells) == 1:
        return [fn(c) for c in cells]
    with ThreadPoolExecutor(max_workers=n) as ex:
        return list(ex.map(fn, cells))


@dataclass
class AsymStudy:
    kind: str
    sign: str
    params: PucciParams
    probes: np.ndarray
    distances: np.ndarray
    sequence: np.ndarray
    observed: np.ndarray              # (n_probes, n_params)
    source: str
    fits: dict = field(default_factory=dict)
    selected: str | None = None

    def __post_init__(self):
        s = np.asarray(self.sequence, dtype=float)
        if s.size > 1 and not np.all(np.diff(s) < 0):
            raise InputError("parameter sequence must be strictly decreasing")
        if np.any(s <= 0):
            raise InputError("parameter sequence must be positive")

    def envelope(self):
        """Largest discrepancy magnitude over probes, per parameter value."""
        return np.max(np.abs(self.observed), axis=0)

    def rows(self):
        out = []
        for i, x in enumerate(self.probes):
            for k, s in enumerate(self.sequence):
                out.append((float(x[0]), float(x[1]), float(self.distances[i]), float(s),
                            float(self.observed[i, k])))
        return out

    def to_dict(self):
        return {
            "kind": self.kind, "sign": self.sign, "source": self.source,
            "lam": self.params.lam, "Lam": self.params.Lam, "dim": self.params.dim,
            "probes": np.asarray(self.probes).tolist(), "distances": np.asarray(self.distances).tolist(),
            "sequence": np.asarray(self.sequence).tolist(),
            "observed": np.asarray(self.observed).tolist(),
            "selected": self.selected,
            "fits": {k: v.to_dict() for k, v in sorted(self.fits.items())},
        }


def _interp_log(fld, x):
    """Bilinear interpolation of log u at a point."""
    g = fld.grid
    fx = (x[0] - g.x0) / g.h
    fy = (x[1] - g.y0) / g.h
    i = min(max(int(math.floor(fx)), 0), g.nx - 2)
    j = min(max(int(math.floor(fy)), 0), g.ny - 2)
    tx, ty = fx - i, fy - j
    v = np.log(np.maximum(fld.values[j:j + 2, i:i + 2], 1e-300))
    return float((1 - ty) * ((1 - tx) * v[0, 0] + tx * v[0, 1]) + ty * ((1 - tx) * v[1, 0] + tx * v[1, 1]))


def radial_parabolic_log_v(sign, R, params, t, r_probe, kappa_h=0.08, margin=10.0):
    """log v(r, t) in B_R from the radially reduced scheme with a tail-resolving grid.

    The spacing keeps kappa h = kappa_h with kappa = d/(2 ell t) the local
    decay rate of the Gaussian tail; the inner end is truncated `margin`
    diffusion lengths inside the innermost probe.
    """
    r_probe = np.atleast_1d(np.asarray(r_probe, dtype=float))
    ell = params.ell(sign)
    d = float(np.max(R - r_probe))
    kappa = max(d, 1e-12) / (2.0 * ell * t)
    h = min(kappa_h / kappa, R / 64.0)
    r_in = max(0.0, float(r_probe.min()) - margin * math.sqrt(params.Lam * t))
    if r_in < 4 * h:
        r_in = 0.0
    res = solve_radial_parabolic(sign, R, params, [t], h, r_in=r_in)
    v = res.values[0]
    return np.array([math.log(max(np.interp(r0, res.r, v), 1e-300)) for r0 in r_probe])


def varadhan_sweep(kind, dom, sign, probes, sequence, params, source="radial",
                   cfg=None, models=None, psi_mod=None, margin=0.02, two_term=False):
    """Observed Varadhan discrepancies over a decreasing eps or t sequence.

    source "radial" uses the closed forms (elliptic, ball or exterior) or
    the radially reduced scheme (parabolic, ball); "fd" runs the 2D solver.
    Candidate models are fitted to the largest discrepancy over the probes.
    """
    check_sign(sign)
    if kind not in ("elliptic", "parabolic"):
        raise InputError("kind must be 'elliptic' or 'parabolic'")
    seq = np.asarray(sequence, dtype=float)
    pts = np.atleast_2d(np.asarray(probes, dtype=float))
    if np.any(dom.signed_distance(pts) < -1e-12):
        raise GeometryError("probes must lie in the closed domain")
    d = np.maximum(dom.signed_distance(pts), 0.0)
    ell = params.ell(sign)
    if source == "radial":
        if not isinstance(dom, (Ball, ExteriorBall)):
            raise InputError("radial source needs a ball or ball exterior domain")
        c = np.asarray(dom.center, dtype=float)
        r = np.linalg.norm(pts - c, axis=1)
        R = dom.R

        def cell(s):
            if kind == "elliptic":
                fn = ball_solution if isinstance(dom, Ball) else exterior_solution
                lu = np.asarray(fn(sign, r, R, s, params))
                return s * lu + d / math.sqrt(ell)
            if not isinstance(dom, Ball):
                raise InputError("parabolic radial source needs a ball")
            inner = d > 0
            out = np.zeros(len(r))
            if np.any(inner):
                lv = radial_parabolic_log_v(sign, R, params, s, r[inner])
                out[inner] = 4.0 * s * lv + d[inner] ** 2 / ell
            return out
    elif source == "fd":
        base = cfg or GridConfig()

        def cell(s):
            if kind == "elliptic":
                fld = solve_elliptic(dom, sign, s, params, base)
                lu = np.array([_interp_log(fld, x) for x in pts])
                return s * lu + d / math.sqrt(ell)
            res = solve_parabolic(dom, sign, s, params, base)
            fld = res.fields[-1]
            lv = np.array([_interp_log(fld, x) for x in pts])
            return 4.0 * s * lv + d ** 2 / ell
    else:
        raise InputError(f"unknown source {source!r}")

    obs = np.column_stack(_run_cells(cell, list(seq)))
    obs[d == 0, :] = 0.0
    study = AsymStudy(kind, sign, params, pts, d, seq, obs, source)
    if models:
        psi = None
        if psi_mod is not None:
            psi = np.array([psi_omega(psi_mod, float(s)) for s in seq])
        y = signed_envelope(obs)
        sel, fits = select_model(seq, y, models, psi, margin)
        study.selected = sel
        for f in fits:
            study.fits[f.model] = f
        if two_term:
            for m in models:
                f2 = fit_two_term(rate_function(m, seq, psi), seq, y, m)
                study.fits[f2.model] = f2
    return study


def signed_envelope(obs):
    """Per parameter value, the discrepancy of largest magnitude (sign kept)."""
    obs = np.asarray(obs, dtype=float)
    idx = np.argmax(np.abs(obs), axis=0)
    return obs[idx, np.arange(obs.shape[1])]


# ---------------------------------------------------------------- q-mean limits


@dataclass
class QMeanResult:
    q: float
    center: tuple
    R: float
    param: float
    value: float
    scaled: float
    predicted: float
    lo: float
    hi: float

    def to_dict(self):
        return {"q": self.q if math.isfinite(self.q) else "inf", "center": list(self.center),
                "R": self.R, "param": self.param, "value": self.value, "scaled": self.scaled,
                "predicted": self.predicted, "min": self.lo, "max": self.hi}


@dataclass
class QMeanStudy:
    kind: str
    sign: str
    results: list
    limit: float
    error: float
    extrapolants: list
    predicted: float

    def to_dict(self):
        return {"kind": self.kind, "sign": self.sign, "limit": self.limit, "error": self.error,
                "extrapolants": self.extrapolants, "predicted": self.predicted,
                "results": [r.to_dict() for r in self.results]}


def _ball_sample(fld, contact):
    idx, w = ball_weights(fld.grid, contact.x, contact.R)
    u = fld.values.ravel()[idx]
    # the contact point itself belongs to the closed ball and carries u = 1
    return np.append(u, 1.0), np.append(w, 0.0)


def _qmean_studies(kind, dom, contact, sign, qs, seq, params, cfg, order):
    check_sign(sign)
    N = params.dim
    ell = params.ell(sign)
    c = cfg or GridConfig()

    def field_at(s):
        if kind == "elliptic":
            return solve_elliptic(dom, sign, s, params, c)
        return solve_parabolic(dom, sign, s, params, c).fields[-1]

    samples = [_ball_sample(field_at(s), contact) for s in seq]
    out = {}
    for q in qs:
        pred = predicted_qmean_limit(kind, N, q, contact.pi0, ell)
        expo = 0.0 if math.isinf(q) else qmean_scaling_exponent(kind, N, q)
        res = []
        for s, (u, w) in zip(seq, samples):
            mu = q_mean(u, w, q)
            scale = contact.R / s if kind == "elliptic" else contact.R ** 2 / s
            res.append(QMeanResult(q, tuple(map(float, contact.x)), contact.R, float(s), mu,
                                   mu * scale ** expo, pred, float(u[w > 0].min()), float(u.max())))
        lim, err, ex = richardson([r.param for r in res], [r.scaled for r in res], order)
        out[q] = QMeanStudy(kind, sign, res, lim, err, ex, pred)
    return out


def elliptic_qmean_limit(dom, contact, sign, q, eps_seq, params, cfg=None, order=1.0):
    """Scaled q-means of the grid solution on B_R(x) and their limit, extrapolated in eps.

    ``q`` may be a single exponent or a list; a list shares the grid solves
    and returns a dict keyed by q.
    """
    qs = list(q) if isinstance(q, (list, tuple)) else [q]
    out = _qmean_studies("elliptic", dom, contact, sign, qs, list(eps_seq), params, cfg, order)
    return out if isinstance(q, (list, tuple)) else out[qs[0]]


def parabolic_qmean_limit(dom, contact, sign, q, t_seq, params, cfg=None, order=0.5):
    """Scaled q-means of v(., t) on B_R(x), extrapolated in sqrt(t)."""
    qs = list(q) if isinstance(q, (list, tuple)) else [q]
    out = _qmean_studies("parabolic", dom, contact, sign, qs, list(t_seq), params, cfg, order)
    return out if isinstance(q, (list, tuple)) else out[qs[0]]
