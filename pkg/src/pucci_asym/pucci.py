"""Pucci extremal operators on symmetric matrices.

For 0 < lam <= Lam,

    M-(X) = Lam * (sum of negative eigenvalues) + lam * (sum of positive ones)
    M+(X) = lam * (sum of negative eigenvalues) + Lam * (sum of positive ones)

which are the inf and sup of tr(A X) over lam I <= A <= Lam I.  Everything
here accepts either a single matrix or a stack of shape (..., N, N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InputError, ParameterError

SIGNS = ("minus", "plus")

JACOBI_TOL = 1e-14
ZERO_EIG_TOL = 1e-13
MAX_SWEEPS = 60


@dataclass(frozen=True)
class PucciParams:
    lam: float
    Lam: float
    dim: int = 2

    def __post_init__(self):
        lam, Lam = float(self.lam), float(self.Lam)
        if not (math.isfinite(lam) and math.isfinite(Lam)):
            raise ParameterError("ellipticity constants must be finite")
        if not 0 < lam <= Lam:
            raise ParameterError(f"need 0 < lam <= Lam, got lam={lam}, Lam={Lam}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise ParameterError(f"dimension must be an integer >= 2, got {self.dim!r}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "Lam", Lam)
        object.__setattr__(self, "dim", int(self.dim))

    def ell(self, sign):
        """Diffusion constant that sets the distance scale for a sign."""
        return self.lam if check_sign(sign) == "minus" else self.Lam


def check_sign(sign):
    if sign not in SIGNS:
        raise InputError(f"sign must be 'minus' or 'plus', got {sign!r}")
    return sign


class SymMatrix:
    """Symmetric matrix stored as its packed upper triangle (row major)."""

    __slots__ = ("order", "entries")

    def __init__(self, order, entries):
        order = int(order)
        entries = np.array(entries, dtype=float).ravel()
        if order < 1 or entries.size != order * (order + 1) // 2:
            raise InputError(f"need {order * (order + 1) // 2} packed entries for order {order}")
        if not np.all(np.isfinite(entries)):
            raise InputError("matrix entries must be finite")
        entries.setflags(write=False)
        self.order = order
        self.entries = entries

    @classmethod
    def from_dense(cls, a, atol=0.0):
        a = np.asarray(a, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError("expected a square matrix")
        if not np.all(np.isfinite(a)):
            raise InputError("matrix entries must be finite")
        if np.max(np.abs(a - a.T), initial=0.0) > atol:
            raise InputError("matrix is not symmetric")
        iu = np.triu_indices(a.shape[0])
        return cls(a.shape[0], a[iu])

    @classmethod
    def diag(cls, values):
        return cls.from_dense(np.diag(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, n):
        return cls.from_dense(np.eye(n))

    def dense(self):
        n = self.order
        a = np.zeros((n, n))
        iu = np.triu_indices(n)
        a[iu] = self.entries
        a.T[iu] = self.entries
        return a

    def __neg__(self):
        return SymMatrix(self.order, -self.entries)

    def __repr__(self):
        return f"SymMatrix({self.order}, {self.entries.tolist()})"


def as_dense(x):
    """Dense (..., N, N) float array from a SymMatrix or array input."""
    if isinstance(x, SymMatrix):
        return x.dense()
    a = np.asarray(x, dtype=float)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise InputError("expected a square matrix or a stack of them")
    if not np.all(np.isfinite(a)):
        raise InputError("matrix entries must be finite")
    return a


def jacobi_eigh(a, tol=JACOBI_TOL, max_sweeps=MAX_SWEEPS):
    """Cyclic Jacobi eigen-decomposition of a stack of symmetric matrices.

    Rotations are applied to every matrix of the stack at once.  Stops when
    the off-diagonal Frobenius norm is below tol * ||A||_F everywhere.
    Returns ascending eigenvalues and matching column eigenvectors.
    """
    a = np.array(as_dense(a), dtype=float)
    single = a.ndim == 2
    if single:
        a = a[None]
    shape = a.shape[:-2]
    n = a.shape[-1]
    a = a.reshape((-1, n, n)).copy()
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    v = np.broadcast_to(np.eye(n), a.shape).copy()
    scale = np.sqrt(np.sum(a * a, axis=(-1, -2)))
    off_mask = ~np.eye(n, dtype=bool)
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.where(off_mask, a * a, 0.0), axis=(-1, -2)))
        if np.all(off <= tol * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[:, p, q]
                active = apq != 0.0
                if not np.any(active):
                    continue
                app = a[:, p, p]
                aqq = a[:, q, q]
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    theta = (aqq - app) / (2.0 * apq)
                    t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
                t = np.where(theta == 0.0, 1.0, t)
                t = np.where(active, t, 0.0)
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                cc, ss = c[:, None], s[:, None]
                col_p = a[:, :, p].copy()
                col_q = a[:, :, q].copy()
                a[:, :, p] = cc * col_p - ss * col_q
                a[:, :, q] = ss * col_p + cc * col_q
                row_p = a[:, p, :].copy()
                row_q = a[:, q, :].copy()
                a[:, p, :] = cc * row_p - ss * row_q
                a[:, q, :] = ss * row_p + cc * row_q
                a[:, p, q] = 0.0
                a[:, q, p] = 0.0
                vp = v[:, :, p].copy()
                vq = v[:, :, q].copy()
                v[:, :, p] = cc * vp - ss * vq
                v[:, :, q] = ss * vp + cc * vq
    w = np.diagonal(a, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[:, None, :], axis=-1)
    w = w.reshape(shape + (n,))
    v = v.reshape(shape + (n, n))
    if single:
        return w[0], v[0]
    return w, v


def eigenvalues(x, vectors=False):
    """Ascending eigenvalues (and optionally eigenvectors) of X."""
    w, v = jacobi_eigh(x)
    return (w, v) if vectors else w


def _norm(a):
    return np.sqrt(np.sum(a * a, axis=(-1, -2)))


def _check_order(a, p):
    if a.shape[-1] != p.dim:
        raise InputError(f"matrix order {a.shape[-1]} does not match dimension {p.dim}")


def _signed_sums(x, p):
    a = as_dense(x)
    _check_order(a, p)
    w = eigenvalues(a)
    zero = ZERO_EIG_TOL * _norm(a)
    zero = np.asarray(zero)[..., None]
    neg = np.sum(np.where(w < -zero, w, 0.0), axis=-1)
    pos = np.sum(np.where(w > zero, w, 0.0), axis=-1)
    return neg, pos


def _out(v):
    return float(v) if np.ndim(v) == 0 else v


def pucci_minus(x, p):
    neg, pos = _signed_sums(x, p)
    return _out(p.Lam * neg + p.lam * pos)


def pucci_plus(x, p):
    neg, pos = _signed_sums(x, p)
    return _out(p.lam * neg + p.Lam * pos)


def pucci(x, p, sign):
    return pucci_minus(x, p) if check_sign(sign) == "minus" else pucci_plus(x, p)


def _extremal_trace(x, p, frames, minimize, seed):
    a = as_dense(x)
    _check_order(a, p)
    w, q = np.linalg.eigh(a)
    lo, hi = (p.lam, p.Lam) if minimize else (p.Lam, p.lam)
    coeff = np.where(w < 0, hi, lo)
    coef_mat = np.einsum("...ik,...k,...jk->...ij", q, coeff, q)
    best = np.sum(coef_mat * a, axis=(-1, -2))
    if frames > 1:
        # extra random frames with random admissible coefficients; these
        # can only be worse than the eigenframe choice
        rng = np.random.default_rng(seed)
        n = p.dim
        for _ in range(frames - 1):
            g = rng.standard_normal((n, n))
            r, _ = np.linalg.qr(g)
            c = rng.uniform(p.lam, p.Lam, n)
            val = np.einsum("ij,...ij->...", (r * c) @ r.T, a)
            best = np.minimum(best, val) if minimize else np.maximum(best, val)
    return _out(best)


def pucci_minus_sup_inf(x, p, frames=1, seed=0):
    """inf of tr(A X) over lam I <= A <= Lam I, attained in the eigenframe."""
    if frames < 1:
        raise InputError("frames must be >= 1")
    return _extremal_trace(x, p, frames, True, seed)


def pucci_plus_sup_inf(x, p, frames=1, seed=0):
    """sup of tr(A X) over lam I <= A <= Lam I."""
    if frames < 1:
        raise InputError("frames must be >= 1")
    return _extremal_trace(x, p, frames, False, seed)


def beta_gamma(sigma, p):
    """(beta, gamma) with beta = min(lam s, Lam s) and gamma = max(lam s, Lam s)."""
    s = np.asarray(sigma, dtype=float)
    beta = np.minimum(p.lam * s, p.Lam * s)
    gamma = np.maximum(p.lam * s, p.Lam * s)
    return _out(beta), _out(gamma)


def radial_pucci(u_r, u_rr, r, p, sign):
    """M-+ of the Hessian of a radial function from u_r, u_rr at radius r."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise DomainError("radius must be positive")
    pick = 0 if check_sign(sign) == "minus" else 1
    return _out(beta_gamma(u_rr, p)[pick] + (p.dim - 1) / r * beta_gamma(u_r, p)[pick])


def radial_hessian(u_r, u_rr, r, xhat):
    """u_rr xhat xhat^T + (u_r / r)(I - xhat xhat^T)."""
    xhat = np.asarray(xhat, dtype=float)
    xhat = xhat / np.linalg.norm(xhat)
    proj = np.outer(xhat, xhat)
    return u_rr * proj + (u_r / r) * (np.eye(xhat.size) - proj)


def game_p_laplacian(grad, hess, p_exp):
    """(1/p) [tr H + (p - 2) <H g, g> / |g|^2]."""
    if not p_exp > 1:
        raise ParameterError("exponent p must exceed 1")
    g = np.asarray(grad, dtype=float)
    h = as_dense(hess)
    gg = float(g @ g)
    if math.sqrt(gg) < 1e-12:
        raise DomainError("game p-Laplacian needs a nonzero gradient")
    return (np.trace(h) + (p_exp - 2.0) * float(g @ h @ g) / gg) / p_exp


def game_sandwich_params(p_exp, dim):
    """Ellipticity pair bracketing the game p-Laplacian."""
    lo = min(1.0 / p_exp, (p_exp - 1.0) / p_exp)
    hi = max(1.0 / p_exp, (p_exp - 1.0) / p_exp)
    return PucciParams(lo, hi, dim)
