"""Domains, distance to the boundary, contact balls and boundary moduli.

Signed distances are positive inside the domain and negative outside.
Curvatures are principal curvatures of the boundary measured so that a
ball seen from inside has kappa = 1/radius and the exterior of a ball has
kappa = -1/radius.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (CurvatureConditionError, DomainError, GeometryError,
                     InputError, MultiContactError)

# ---------------------------------------------------------------- moduli

MODULUS_KINDS = ("lipschitz", "holder", "log_lipschitz", "tabulated")


@dataclass(frozen=True)
class ModulusOfContinuity:
    """omega(s) for s >= 0; strictly increasing with omega(0+) = 0.

    lipschitz      omega = L s
    holder         omega = C s^alpha, 0 < alpha <= 1
    log_lipschitz  omega = C s (1 + log(1/s)) for s <= 1, C s beyond
    tabulated      piecewise linear through (0, 0) and the given nodes,
                   continued with the last slope
    """
    kind: str
    L: float = 1.0
    C: float = 1.0
    alpha: float = 1.0
    s_nodes: tuple = ()
    w_nodes: tuple = ()

    def __post_init__(self):
        if self.kind not in MODULUS_KINDS:
            raise InputError(f"unknown modulus kind {self.kind!r}")
        if self.kind == "lipschitz" and not self.L > 0:
            raise InputError("Lipschitz constant must be positive")
        if self.kind in ("holder", "log_lipschitz") and not self.C > 0:
            raise InputError("modulus constant must be positive")
        if self.kind == "holder" and not 0 < self.alpha <= 1:
            raise InputError("Holder exponent must lie in (0, 1]")
        if self.kind == "tabulated":
            s = np.asarray(self.s_nodes, dtype=float)
            w = np.asarray(self.w_nodes, dtype=float)
            if s.ndim != 1 or s.size < 1 or s.size != w.size:
                raise InputError("tabulated modulus needs matching node lists")
            if not (np.all(np.isfinite(s)) and np.all(np.isfinite(w))):
                raise InputError("tabulated modulus nodes must be finite")
            if s[0] <= 0 or w[0] <= 0 or np.any(np.diff(s) <= 0) or np.any(np.diff(w) <= 0):
                raise InputError("tabulated modulus must be strictly increasing from (0, 0)")
            object.__setattr__(self, "s_nodes", tuple(float(v) for v in s))
            object.__setattr__(self, "w_nodes", tuple(float(v) for v in w))

    @classmethod
    def lipschitz(cls, L):
        return cls("lipschitz", L=float(L))

    @classmethod
    def holder(cls, alpha, C=1.0):
        return cls("holder", alpha=float(alpha), C=float(C))

    @classmethod
    def log_lipschitz(cls, C=1.0):
        return cls("log_lipschitz", C=float(C))

    @classmethod
    def tabulated(cls, s_nodes, w_nodes):
        return cls("tabulated", s_nodes=tuple(s_nodes), w_nodes=tuple(w_nodes))

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if self.kind == "lipschitz":
            out = self.L * s
        elif self.kind == "holder":
            out = self.C * np.power(np.maximum(s, 0.0), self.alpha)
        elif self.kind == "log_lipschitz":
            ss = np.clip(s, 1e-300, 1.0)
            out = np.where(s <= 1.0, self.C * ss * (1.0 - np.log(ss)), self.C * s)
            out = np.where(s <= 0, 0.0, out)
        else:
            sn = np.concatenate([[0.0], self.s_nodes])
            wn = np.concatenate([[0.0], self.w_nodes])
            slope = (wn[-1] - wn[-2]) / (sn[-1] - sn[-2])
            out = np.where(s <= sn[-1], np.interp(s, sn, wn), wn[-1] + slope * (s - sn[-1]))
        return float(out) if np.ndim(out) == 0 else out

    def inverse(self, y):
        """omega^-1(y) for y >= 0."""
        y = float(y)
        if y <= 0:
            return 0.0
        if self.kind == "lipschitz":
            return y / self.L
        if self.kind == "holder":
            return (y / self.C) ** (1.0 / self.alpha)
        hi = 1.0
        while self(hi) < y:
            hi *= 2.0
        lo = 0.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if self(mid) < y:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * hi:
                break
        return hi

    def to_dict(self):
        d = {"kind": self.kind}
        if self.kind == "lipschitz":
            d["L"] = self.L
        elif self.kind == "holder":
            d.update(alpha=self.alpha, C=self.C)
        elif self.kind == "log_lipschitz":
            d["C"] = self.C
        else:
            d.update(s_nodes=list(self.s_nodes), w_nodes=list(self.w_nodes))
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        kind = d.pop("kind", None)
        try:
            return cls(kind, **{k: (tuple(v) if isinstance(v, list) else v) for k, v in d.items()})
        except TypeError as exc:
            raise InputError(f"bad modulus fields: {exc}") from None


_GOLD = (math.sqrt(5.0) - 1.0) / 2.0


def psi_omega(mod, sigma, scan_points=256):
    """inf over s >= 0 of sqrt(s^2 + (omega(s) - sigma)^2).

    Only s in [0, min(sigma, omega^-1(2 sigma))] can beat s = 0, so the
    search is a scan of that interval followed by golden-section refinement
    around the best scan point.
    """
    sigma = float(sigma)
    if sigma < 0:
        raise DomainError("psi_omega needs sigma >= 0")
    if sigma == 0:
        return 0.0
    s_max = min(sigma, mod.inverse(2.0 * sigma))

    def obj(s):
        return np.hypot(s, mod(s) - sigma)

    s = np.linspace(0.0, s_max, scan_points + 1)
    vals = obj(s)
    i = int(np.argmin(vals))
    lo = s[max(i - 1, 0)]
    hi = s[min(i + 1, scan_points)]
    a, b = lo, hi
    c = b - _GOLD * (b - a)
    d = a + _GOLD * (b - a)
    fc, fd = obj(c), obj(d)
    for _ in range(200):
        if b - a <= 1e-13 * max(s_max, 1e-300):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - _GOLD * (b - a)
            fc = obj(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLD * (b - a)
            fd = obj(d)
    best = min(float(vals[i]), float(fc), float(fd), float(obj(0.5 * (a + b))))
    return best


def psi_lipschitz(L, sigma):
    return sigma / math.sqrt(1.0 + L * L)


# ---------------------------------------------------------------- domains


def _pts(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise InputError("points must be finite")
    return x


class Domain:
    """Base class; subclasses provide signed_distance and boundary queries."""

    kind = "domain"
    dim = 2
    modulus = None
    bounded = True
    h_geo = 0.0

    def signed_distance(self, x):
        raise NotImplementedError

    def contains(self, x, closed=True):
        sd = self.signed_distance(x)
        return sd >= 0 if closed else sd > 0

    def bbox(self):
        raise GeometryError(f"{self.kind} domain is unbounded")

    def nearest_boundary_points(self, x):
        """All nearest boundary points of an interior point (list)."""
        raise NotImplementedError

    def curvatures(self, z):
        """Principal curvatures of the boundary at z (N - 1 values)."""
        raise NotImplementedError

    def boundary_fraction(self, x, v):
        """theta in (0, 1] with x + theta v on the boundary when x + v is
        outside, else 1.  Generic version: bisection on the signed distance."""
        x = _pts(x)
        v = np.asarray(v, dtype=float)
        end = self.signed_distance(x + v)
        out = np.ones(end.shape)
        cut = end < 0
        if np.any(cut):
            lo = np.zeros(int(cut.sum()))
            hi = np.ones(int(cut.sum()))
            xc = np.broadcast_to(x, end.shape + (x.shape[-1],))[cut]
            vc = np.broadcast_to(v, end.shape + (x.shape[-1],))[cut]
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                inside = self.signed_distance(xc + mid[:, None] * vc) >= 0
                lo = np.where(inside, mid, lo)
                hi = np.where(inside, hi, mid)
            out[cut] = np.maximum(0.5 * (lo + hi), 1e-12)
        return out

    def to_dict(self):
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Ball(Domain):
    center: tuple
    R: float
    modulus: ModulusOfContinuity | None = None
    kind = "ball"

    def __post_init__(self):
        c = tuple(float(v) for v in np.ravel(self.center))
        if len(c) < 2 or not all(math.isfinite(v) for v in c):
            raise InputError("ball center must be a finite point in dimension >= 2")
        if not (self.R > 0 and math.isfinite(self.R)):
            raise InputError("ball radius must be positive")
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "R", float(self.R))

    @property
    def dim(self):
        return len(self.center)

    def _rel(self, x):
        return _pts(x) - np.asarray(self.center)

    def signed_distance(self, x):
        return self.R - np.linalg.norm(self._rel(x), axis=-1)

    def bbox(self):
        c = np.asarray(self.center)
        return tuple(c - self.R), tuple(c + self.R)

    def nearest_boundary_points(self, x):
        y = self._rel(x)
        n = np.linalg.norm(y)
        if n < 1e-14 * self.R:
            raise MultiContactError("the center of a ball has no unique nearest boundary point")
        return [np.asarray(self.center) + self.R * y / n]

    def curvatures(self, z):
        return [1.0 / self.R] * (self.dim - 1)

    def boundary_fraction(self, x, v):
        y = self._rel(x)
        v = np.asarray(v, dtype=float)
        a = np.sum(v * v, axis=-1)
        b = 2.0 * np.sum(y * v, axis=-1)
        c = np.sum(y * y, axis=-1) - self.R ** 2
        disc = np.maximum(b * b - 4.0 * a * c, 0.0)
        # c <= 0 inside: the positive root, written without cancellation
        root = np.where(b > 0, -2.0 * c / (b + np.sqrt(disc)),
                        (-b + np.sqrt(disc)) / (2.0 * a))
        return np.clip(np.where(a + b + c > 0, root, 1.0), 1e-12, 1.0)

    def to_dict(self):
        return {"shape": "ball", "center": list(self.center), "R": self.R}


@dataclass(frozen=True, eq=False)
class ExteriorBall(Domain):
    center: tuple
    R: float
    modulus: ModulusOfContinuity | None = None
    kind = "exterior_ball"
    bounded = False

    def __post_init__(self):
        Ball.__post_init__(self)

    @property
    def dim(self):
        return len(self.center)

    def signed_distance(self, x):
        return np.linalg.norm(_pts(x) - np.asarray(self.center), axis=-1) - self.R

    def nearest_boundary_points(self, x):
        y = _pts(x) - np.asarray(self.center)
        return [np.asarray(self.center) + self.R * y / np.linalg.norm(y)]

    def curvatures(self, z):
        return [-1.0 / self.R] * (self.dim - 1)

    def boundary_fraction(self, x, v):
        y = _pts(x) - np.asarray(self.center)
        v = np.asarray(v, dtype=float)
        a = np.sum(v * v, axis=-1)
        b = 2.0 * np.sum(y * v, axis=-1)
        c = np.sum(y * y, axis=-1) - self.R ** 2
        disc = b * b - 4.0 * a * c
        sq = np.sqrt(np.maximum(disc, 0.0))
        root = np.where(b < 0, 2.0 * c / (-b + sq), np.inf)
        hit = (disc > 0) & (root <= 1.0)
        return np.clip(np.where(hit, root, 1.0), 1e-12, 1.0)

    def to_dict(self):
        return {"shape": "exterior_ball", "center": list(self.center), "R": self.R}


@dataclass(frozen=True, eq=False)
class Annulus(Domain):
    center: tuple
    R_in: float
    R_out: float
    modulus: ModulusOfContinuity | None = None
    kind = "annulus"

    def __post_init__(self):
        c = tuple(float(v) for v in np.ravel(self.center))
        if len(c) < 2:
            raise InputError("annulus center must be a point in dimension >= 2")
        if not 0 < self.R_in < self.R_out:
            raise InputError("annulus needs 0 < R_in < R_out")
        object.__setattr__(self, "center", c)

    @property
    def dim(self):
        return len(self.center)

    def signed_distance(self, x):
        r = np.linalg.norm(_pts(x) - np.asarray(self.center), axis=-1)
        return np.minimum(r - self.R_in, self.R_out - r)

    def bbox(self):
        c = np.asarray(self.center)
        return tuple(c - self.R_out), tuple(c + self.R_out)

    def nearest_boundary_points(self, x):
        y = _pts(x) - np.asarray(self.center)
        r = np.linalg.norm(y)
        d_in, d_out = r - self.R_in, self.R_out - r
        c = np.asarray(self.center)
        pts = []
        if d_in <= d_out + 1e-14:
            pts.append(c + self.R_in * y / r)
        if d_out <= d_in + 1e-14:
            pts.append(c + self.R_out * y / r)
        return pts

    def curvatures(self, z):
        r = np.linalg.norm(np.asarray(z) - np.asarray(self.center))
        k = 1.0 / self.R_out if abs(r - self.R_out) < abs(r - self.R_in) else -1.0 / self.R_in
        return [k] * (self.dim - 1)

    def boundary_fraction(self, x, v):
        outer = Ball(self.center, self.R_out).boundary_fraction(x, v)
        inner = ExteriorBall(self.center, self.R_in).boundary_fraction(x, v)
        return np.minimum(outer, inner)

    def to_dict(self):
        return {"shape": "annulus", "center": list(self.center),
                "R_in": self.R_in, "R_out": self.R_out}


@dataclass(frozen=True, eq=False)
class ConvexPolygon(Domain):
    vertices: tuple
    modulus: ModulusOfContinuity | None = None
    kind = "convex_polygon"

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise InputError("polygon needs at least three 2D vertices")
        if not np.all(np.isfinite(v)):
            raise InputError("polygon vertices must be finite")
        e = np.roll(v, -1, axis=0) - v
        cross = e[:, 0] * np.roll(e, -1, axis=0)[:, 1] - e[:, 1] * np.roll(e, -1, axis=0)[:, 0]
        if np.any(cross <= 0):
            raise GeometryError("polygon vertices must be strictly convex and counterclockwise")
        object.__setattr__(self, "vertices", tuple(map(tuple, v.tolist())))

    @classmethod
    def rectangle(cls, x0, y0, x1, y1):
        return cls(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))

    @property
    def _v(self):
        return np.asarray(self.vertices)

    def _edges(self):
        v = self._v
        e = np.roll(v, -1, axis=0) - v
        length = np.linalg.norm(e, axis=1)
        n_out = np.stack([e[:, 1], -e[:, 0]], axis=1) / length[:, None]
        offs = np.sum(n_out * v, axis=1)
        return v, e, length, n_out, offs

    def signed_distance(self, x):
        x = _pts(x)
        v, e, length, n_out, offs = self._edges()
        line = offs - x @ n_out.T           # >= 0 inside each half-plane
        inside = np.all(line >= 0, axis=-1)
        d_in = np.min(line, axis=-1)
        rel = x[..., None, :] - v
        tt = np.clip(np.sum(rel * e, axis=-1) / length ** 2, 0.0, 1.0)
        seg = np.linalg.norm(rel - tt[..., None] * e, axis=-1)
        d_out = np.min(seg, axis=-1)
        return np.where(inside, d_in, -d_out)

    def bbox(self):
        v = self._v
        return tuple(v.min(axis=0)), tuple(v.max(axis=0))

    def nearest_boundary_points(self, x):
        x = _pts(x)
        v, e, length, n_out, offs = self._edges()
        line = offs - n_out @ x
        d = line.min()
        tol = 1e-12 * (1.0 + abs(d))
        pts = []
        for k in np.flatnonzero(line <= d + tol):
            foot = x + line[k] * n_out[k]
            tt = np.dot(foot - v[k], e[k]) / length[k] ** 2
            pts.append((foot, tt))
        if len(pts) > 1:
            raise MultiContactError("nearest boundary point is not unique (several edges tie)")
        foot, tt = pts[0]
        if tt <= 1e-12 or tt >= 1 - 1e-12:
            raise GeometryError("contact at a polygon vertex")
        return [foot]

    def curvatures(self, z):
        return [0.0]

    def boundary_fraction(self, x, v):
        x = _pts(x)
        v = np.asarray(v, dtype=float)
        _, _, _, n_out, offs = self._edges()
        nx = x @ n_out.T
        nv = np.broadcast_to(v, x.shape) @ n_out.T
        with np.errstate(divide="ignore", invalid="ignore"):
            th = np.where(nv > 0, (offs - nx) / nv, np.inf)
        th = np.min(th, axis=-1)
        return np.clip(np.where(th < 1.0, th, 1.0), 1e-12, 1.0)

    def interior_angles(self):
        v = self._v
        a = np.roll(v, 1, axis=0) - v
        b = np.roll(v, -1, axis=0) - v
        cosang = np.sum(a * b, axis=1) / (np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1))
        return np.arccos(np.clip(cosang, -1.0, 1.0))

    def to_dict(self):
        return {"shape": "convex_polygon", "vertices": [list(p) for p in self.vertices]}


@dataclass(frozen=True, eq=False)
class ImplicitDomain(Domain):
    """Domain given by signed-distance samples on a regular grid.

    ``values[j, i]`` is the signed distance (positive inside) at
    origin + (i dx, j dy).  Queries use bilinear interpolation.
    """
    values: np.ndarray
    dx: float
    dy: float
    origin: tuple = (0.0, 0.0)
    modulus: ModulusOfContinuity | None = None
    kind = "implicit"
    _boundary: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.ndim != 2 or min(vals.shape) < 2:
            raise InputError("implicit domain needs a 2D grid with at least 2x2 samples")
        if not np.all(np.isfinite(vals)):
            raise InputError("signed-distance samples must be finite")
        if not (self.dx > 0 and self.dy > 0):
            raise InputError("grid spacings must be positive")
        if not np.any(vals > 0):
            raise GeometryError("implicit domain is empty")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dx", float(self.dx))
        object.__setattr__(self, "dy", float(self.dy))
        object.__setattr__(self, "origin", tuple(float(v) for v in self.origin))
        object.__setattr__(self, "_boundary", self._zero_crossings())

    @property
    def h_geo(self):
        return max(self.dx, self.dy)

    def signed_distance(self, x):
        x = _pts(x)
        ny, nx = self.values.shape
        fx = (x[..., 0] - self.origin[0]) / self.dx
        fy = (x[..., 1] - self.origin[1]) / self.dy
        i = np.clip(np.floor(fx).astype(int), 0, nx - 2)
        j = np.clip(np.floor(fy).astype(int), 0, ny - 2)
        tx = fx - i
        ty = fy - j
        v = self.values
        out = ((1 - tx) * (1 - ty) * v[j, i] + tx * (1 - ty) * v[j, i + 1]
               + (1 - tx) * ty * v[j + 1, i] + tx * ty * v[j + 1, i + 1])
        outside = (fx < 0) | (fx > nx - 1) | (fy < 0) | (fy > ny - 1)
        return np.where(outside, np.minimum(out, -1e-300), out)

    def bbox(self):
        ny, nx = self.values.shape
        o = self.origin
        return (o[0], o[1]), (o[0] + (nx - 1) * self.dx, o[1] + (ny - 1) * self.dy)

    def _zero_crossings(self):
        v = self.values
        ny, nx = v.shape
        pts = []
        a, b = v[:, :-1], v[:, 1:]
        jj, ii = np.nonzero((a > 0) != (b > 0))
        t = a[jj, ii] / (a[jj, ii] - b[jj, ii])
        pts.append(np.stack([self.origin[0] + (ii + t) * self.dx,
                             self.origin[1] + jj * self.dy], axis=1))
        a, b = v[:-1, :], v[1:, :]
        jj, ii = np.nonzero((a > 0) != (b > 0))
        t = a[jj, ii] / (a[jj, ii] - b[jj, ii])
        pts.append(np.stack([self.origin[0] + ii * self.dx,
                             self.origin[1] + (jj + t) * self.dy], axis=1))
        return np.concatenate(pts, axis=0)

    def nearest_boundary_points(self, x):
        x = _pts(x)
        samples = self._boundary
        if samples.size == 0:
            raise GeometryError("implicit domain has no sampled boundary")
        dist = np.linalg.norm(samples - x, axis=1)
        d_min = dist.min()
        h = self.h_geo
        cand = samples[dist <= d_min + 2.0 * h]
        # single-linkage clusters of near-minimal samples; more than one
        # cluster means two separated contact regions
        label = -np.ones(len(cand), dtype=int)
        n_lab = 0
        for s in range(len(cand)):
            if label[s] >= 0:
                continue
            stack = [s]
            label[s] = n_lab
            while stack:
                k = stack.pop()
                near = np.flatnonzero((label < 0) & (np.linalg.norm(cand - cand[k], axis=1) <= 2.0 * h))
                label[near] = n_lab
                stack.extend(near.tolist())
            n_lab += 1
        if n_lab > 1:
            raise MultiContactError("sampled boundary has several separated nearest regions")
        # one connected cluster can still wrap around x (e.g. a circle seen
        # from its centre); a unique contact is seen inside a narrow cone
        dirs = cand - x
        dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-300)
        m = dirs.mean(axis=0)
        if np.linalg.norm(m) < 0.7 or np.min(dirs @ (m / np.linalg.norm(m))) < 0.0:
            raise MultiContactError("near-minimal boundary samples surround the point")
        g = self._grad(x)
        gn = np.linalg.norm(g)
        if gn > 0:
            z = x - self.signed_distance(x) * g / gn
        else:
            z = samples[int(np.argmin(dist))]
        return [z]

    def _grad(self, x):
        h = 0.5 * self.h_geo
        ex = np.array([h, 0.0])
        ey = np.array([0.0, h])
        return np.array([
            (self.signed_distance(x + ex) - self.signed_distance(x - ex)) / (2 * h),
            (self.signed_distance(x + ey) - self.signed_distance(x - ey)) / (2 * h),
        ])

    def curvatures(self, z):
        z = np.asarray(z, dtype=float)
        h = self.h_geo
        n = lambda p: self._grad(p) / max(np.linalg.norm(self._grad(p)), 1e-300)
        ex = np.array([h, 0.0])
        ey = np.array([0.0, h])
        div = (n(z + ex)[0] - n(z - ex)[0]) / (2 * h) + (n(z + ey)[1] - n(z - ey)[1]) / (2 * h)
        return [-float(div)]

    def to_dict(self):
        ny, nx = self.values.shape
        return {"shape": "implicit", "nx": nx, "ny": ny, "dx": self.dx, "dy": self.dy,
                "origin": list(self.origin)}

    @classmethod
    def from_files(cls, header_path, data_path=None, modulus=None):
        """Load a JSON header (nx, ny, dx, dy, origin, optional data, inside)
        plus a CSV grid (ny rows of nx values) or raw little-endian float64.

        ``inside`` is "negative" (default, the usual SDF convention) or
        "positive" and says which sign marks interior samples in the file.
        """
        header_path = Path(header_path)
        try:
            hdr = json.loads(header_path.read_text())
            nx, ny = int(hdr["nx"]), int(hdr["ny"])
            dx, dy = float(hdr["dx"]), float(hdr["dy"])
            origin = tuple(float(v) for v in hdr.get("origin", (0.0, 0.0)))
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"bad implicit-domain header: {exc}") from None
        data_path = Path(data_path or header_path.parent / hdr["data"])
        if data_path.suffix.lower() == ".csv":
            vals = np.loadtxt(data_path, delimiter=",", ndmin=2)
        else:
            raw = np.fromfile(data_path, dtype="<f8")
            if raw.size != nx * ny:
                raise InputError(f"expected {nx * ny} samples, found {raw.size}")
            vals = raw.reshape(ny, nx)
        if vals.shape != (ny, nx):
            raise InputError(f"grid shape {vals.shape} does not match header ({ny}, {nx})")
        if hdr.get("inside", "negative") == "negative":
            vals = -vals
        return cls(vals, dx, dy, origin, modulus=modulus)


def domain_from_dict(d):
    """Build a domain from a config record (see ``to_dict`` of each shape)."""
    d = dict(d)
    shape = d.get("shape")
    mod = d.get("modulus")
    mod = ModulusOfContinuity.from_dict(mod) if mod else None
    try:
        if shape == "ball":
            return Ball(tuple(d.get("center", (0.0, 0.0))), float(d["R"]), mod)
        if shape == "exterior_ball":
            return ExteriorBall(tuple(d.get("center", (0.0, 0.0))), float(d["R"]), mod)
        if shape == "annulus":
            return Annulus(tuple(d.get("center", (0.0, 0.0))), float(d["R_in"]), float(d["R_out"]), mod)
        if shape == "convex_polygon":
            return ConvexPolygon(tuple(map(tuple, d["vertices"])), mod)
        if shape == "rectangle":
            x0, y0, x1, y1 = (float(v) for v in d["box"])
            return ConvexPolygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)), mod)
        if shape == "implicit":
            return ImplicitDomain.from_files(d["header"], d.get("data"), modulus=mod)
    except KeyError as exc:
        raise InputError(f"domain field missing: {exc}") from None
    raise InputError(f"unknown domain shape {shape!r}")


# ---------------------------------------------------------------- queries


def distance_to_boundary(dom, x, signed=False):
    """d_Gamma(x); points outside the closed domain are an error unless signed."""
    sd = dom.signed_distance(x)
    if not signed and np.any(sd < -1e-12 * (1.0 + np.abs(sd))):
        raise DomainError("point lies outside the closed domain (ask for signed distance)")
    if not signed:
        sd = np.maximum(sd, 0.0)
    return float(sd) if np.ndim(sd) == 0 else sd


@dataclass(frozen=True)
class ContactData:
    x: tuple
    R: float
    z_x: tuple
    curvatures: tuple
    pi0: float


def contact_ball(dom, x):
    """Touching ball B_R(x) with R = d(x), its contact point and Pi_0."""
    x = _pts(x)
    R = distance_to_boundary(dom, x)
    if R <= 0:
        raise GeometryError("contact ball needs an interior point")
    pts = dom.nearest_boundary_points(x)
    if len(pts) != 1:
        raise MultiContactError("nearest boundary point is not unique")
    z = np.asarray(pts[0], dtype=float)
    kappa = [float(k) for k in dom.curvatures(z)]
    for k in kappa:
        if not k < 1.0 / R:
            raise CurvatureConditionError(f"curvature {k} violates kappa < 1/R = {1.0 / R}")
    pi0 = float(np.prod([1.0 - R * k for k in kappa]))
    return ContactData(tuple(x.tolist()), float(R), tuple(z.tolist()), tuple(kappa), pi0)


def classify_regularity(dom):
    """A boundary modulus for primitive shapes (Lipschitz in every case).

    Circles of radius rho are graphs over their tangent line with slope at
    most 1/sqrt(3) in charts of radius rho/2; a convex polygon corner with
    interior angle alpha is a graph of slope cot(alpha/2) after rotating
    the chart to the angle bisector.
    """
    if isinstance(dom, (Ball, ExteriorBall, Annulus)):
        return ModulusOfContinuity.lipschitz(1.0 / math.sqrt(3.0))
    if isinstance(dom, ConvexPolygon):
        ang = dom.interior_angles()
        return ModulusOfContinuity.lipschitz(float(np.max(1.0 / np.tan(0.5 * ang))))
    if dom.modulus is not None:
        return dom.modulus
    raise GeometryError("implicit domains need a user-supplied modulus")


def chart_radius(dom):
    """Radius of the boundary charts matching ``classify_regularity``."""
    if isinstance(dom, (Ball, ExteriorBall)):
        return 0.5 * dom.R
    if isinstance(dom, Annulus):
        return 0.5 * min(dom.R_in, dom.R_out - dom.R_in)
    if isinstance(dom, ConvexPolygon):
        v = np.asarray(dom.vertices)
        return 0.5 * float(np.min(np.linalg.norm(np.roll(v, -1, axis=0) - v, axis=1)))
    return dom.h_geo
