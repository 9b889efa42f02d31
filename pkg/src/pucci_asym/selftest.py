"""Randomised invariant checks used by ``pucci_asym selftest``."""

from __future__ import annotations

import math

import importlib

import numpy as np

pucci = importlib.import_module(__package__ + ".pucci")
from . import asym, fd, radial, special


def _check(name, ok, worst, note=""):
    return {"name": name, "passed": bool(ok), "worst": float(worst), "note": note}


def _random_sym(rng, n=2, scale=3.0):
    a = rng.normal(scale=scale, size=(n, n))
    return 0.5 * (a + a.T)


def _random_params(rng):
    lam = float(rng.uniform(0.2, 2.0))
    return pucci.PucciParams(lam, lam * float(rng.uniform(1.0, 4.0)))


def run_selftest(seed=0, samples=2000):
    rng = np.random.default_rng(seed)
    out = []

    # Pucci ordering, duality and ellipticity on random symmetric matrices
    bad_order = bad_dual = bad_ell = 0.0
    for _ in range(samples):
        p = _random_params(rng)
        X = _random_sym(rng)
        P = _random_sym(rng)
        P = P @ P.T
        lo, hi = pucci.pucci_minus(X, p), pucci.pucci_plus(X, p)
        bad_order = max(bad_order, lo - hi)
        bad_dual = max(bad_dual, abs(lo + pucci.pucci_plus(-X, p)))
        tr = float(np.trace(P))
        for sign in ("minus", "plus"):
            inc = pucci.pucci(X + P, p, sign) - pucci.pucci(X, p, sign)
            bad_ell = max(bad_ell, p.lam * tr - inc - 1e-9 * (1 + abs(inc)),
                          inc - p.Lam * tr - 1e-9 * (1 + abs(inc)))
    out.append(_check("pucci_minus_below_plus", bad_order <= 1e-12, bad_order))
    out.append(_check("pucci_duality", bad_dual <= 1e-10, bad_dual))
    out.append(_check("pucci_ellipticity", bad_ell <= 0.0, bad_ell))

    # eigenvalue form against the sup/inf over rotated frames
    worst = 0.0
    for _ in range(max(samples // 20, 10)):
        p = _random_params(rng)
        X = _random_sym(rng)
        worst = max(worst, abs(pucci.pucci_minus(X, p) - pucci.pucci_minus_sup_inf(X, p, frames=720)),
                    abs(pucci.pucci_plus(X, p) - pucci.pucci_plus_sup_inf(X, p, frames=720)))
    out.append(_check("pucci_sup_inf_agreement", worst <= 1e-3, worst, "720 rotated frames"))

    # profile ODE residuals
    worst = 0.0
    for _ in range(25):
        pp = special.ProfileParams(float(rng.uniform(0.5, 5.0)), float(rng.uniform(0.3, 3.0)))
        s = float(rng.uniform(0.1, 10.0))
        worst = max(worst, special.ode_residual_check("g", pp, s), special.ode_residual_check("f", pp, s))
    out.append(_check("profile_ode_residual", worst <= 1e-4, worst))

    # radial solutions lie between the two barriers and below 1
    worst = 0.0
    for _ in range(20):
        p = _random_params(rng)
        eps = float(rng.uniform(0.02, 0.5))
        tab = radial.radial_table("ball", np.linspace(0.0, 1.0, 9), 1.0, eps, p)
        val = eps * tab[:, 1] + np.abs(1.0 - tab[:, 0]) / math.sqrt(p.lam)
        worst = max(worst, float(np.max(tab[:, 1])), float(np.max(val - tab[:, 3])),
                    float(np.max(tab[:, 4] - val)))
    out.append(_check("radial_barrier_bracket", worst <= 1e-9, worst))

    # q-means are shift equivariant and lie within the sample range
    worst = 0.0
    for _ in range(200):
        u = rng.uniform(-1, 1, size=int(rng.integers(3, 40)))
        w = rng.uniform(0.1, 1.0, size=u.size)
        q = float(rng.uniform(1.2, 8.0))
        c = float(rng.normal())
        m = asym.q_mean(u, w, q)
        worst = max(worst, abs(asym.q_mean(u + c, w, q) - m - c), u.min() - m, m - u.max())
    out.append(_check("q_mean_equivariance", worst <= 1e-9, worst))

    # on quadratics every lattice frame is exact, so the discrete minus
    # operator sits above the continuous one (plus below), with equality
    # for diagonal Hessians where the axis frame is optimal
    worst = 0.0
    for k in range(20):
        p = _random_params(rng)
        H = _random_sym(rng)
        if k % 2:
            H = np.diag(np.diag(H))
        fld = fd.quadratic_test_field(0.1, H, half_width=1.0)
        lo = fd.discrete_pucci(fld, (10, 10), "minus", p)
        hi = fd.discrete_pucci(fld, (10, 10), "plus", p)
        gap = max(pucci.pucci_minus(H, p) - lo, hi - pucci.pucci_plus(H, p))
        if k % 2:
            gap = max(gap, abs(lo - pucci.pucci_minus(H, p)), abs(hi - pucci.pucci_plus(H, p)))
        worst = max(worst, gap)
    out.append(_check("discrete_operator_quadratics", worst <= 1e-9, worst, "lattice frames"))

    return {"seed": seed, "samples": samples, "checks": out,
            "passed": all(c["passed"] for c in out)}
