"""Monotone wide-stencil finite differences for the Pucci problems in 2D.

The discrete operator at an interior node is

    M-_h u = min over frames k of sum_i beta(D_{k,i} u)
    M+_h u = max over frames k of sum_i gamma(D_{k,i} u)

where each frame is an orthogonal pair of directions and D_{k,i} is a
centred (or, next to the boundary, Shortley-Weller) second difference.
Every D has nonnegative off-centre weights, so the scheme is monotone.

Two frame families are available:

* ``lattice`` (default): directions are the primitive integer vectors with
  components at most s_w, paired with their rotation by 90 degrees.  All
  stencil points are grid nodes.
* ``angular``: ``directions`` frames at angles k pi / (2 directions) with
  reach s_w h; off-lattice points are bilinear interpolants.

Near the boundary an arm that leaves the domain is either cut at the
boundary crossing (``boundary="cut"``, value 1 at the crossing) or read
from the node beyond it, which carries the value 1 (``boundary="extend"``).
"""

from __future__ import annotations

import logging
import math
import pathlib
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, InputError, SolverError
from .pucci import PucciParams, check_sign

log = logging.getLogger(__name__)

BOUNDARY_VALUE = 1.0


@dataclass(frozen=True)
class GridConfig:
    h: float | None = None
    s_w: int = 3
    frames: str = "lattice"        # lattice | angular | axis
    directions: int = 8            # frame count for the angular family
    boundary: str = "cut"          # cut | extend
    snap: float | None = None      # nodes with d < snap*h are boundary nodes
    box: tuple | None = None       # (x0, y0, x1, y1) computational box
    resolution: float = 8.0        # default h = scale / resolution
    tol: float = 1e-10
    max_policy_rounds: int = 200
    direct_limit: int = 60000      # above this size use BiCGSTAB
    cfl: float = 0.9
    dt: float | None = None
    enforce_resolution: bool = True

    def __post_init__(self):
        if self.frames not in ("lattice", "angular", "axis"):
            raise ConfigurationError(f"unknown frame family {self.frames!r}")
        if self.boundary not in ("cut", "extend"):
            raise ConfigurationError(f"unknown boundary treatment {self.boundary!r}")
        if int(self.s_w) != self.s_w or self.s_w < 1:
            raise ConfigurationError("stencil radius s_w must be a positive integer")
        if self.frames == "angular" and self.directions < 2:
            raise ConfigurationError("angular frames need directions >= 2")
        if self.h is not None and not self.h > 0:
            raise ConfigurationError("grid spacing must be positive")
        if not 0 < self.cfl <= 1:
            raise ConfigurationError("cfl factor must lie in (0, 1]")

    def reach(self):
        return 1 if self.frames == "axis" else self.s_w


def lattice_frames(s_w):
    """Orthogonal integer frames (v, v_perp) with max(|v_x|, |v_y|) <= s_w."""
    dirs = []
    for p in range(0, s_w + 1):
        for q in range(0, s_w + 1):
            if (p, q) == (0, 0) or math.gcd(p, q) != 1:
                continue
            if p > 0 and q >= 0:     # first-quadrant representatives
                dirs.append((p, q))
    dirs.sort(key=lambda v: math.atan2(v[1], v[0]))
    return [(np.array(v, float), np.array((-v[1], v[0]), float)) for v in dirs]


def angular_frames(directions):
    out = []
    for k in range(directions):
        th = k * math.pi / (2 * directions)
        out.append((np.array((math.cos(th), math.sin(th))),
                    np.array((-math.sin(th), math.cos(th)))))
    return out


class Grid:
    """Uniform node grid over a box with interior/boundary classification."""

    def __init__(self, dom, h, box=None, reach=3, snap=0.0):
        if not h > 0:
            raise ConfigurationError("grid spacing must be positive")
        self.dom = dom
        self.h = float(h)
        if box is None:
            lo, hi = dom.bbox()
            pad = (reach + 1) * h
            box = (lo[0] - pad, lo[1] - pad, hi[0] + pad, hi[1] + pad)
        x0, y0, x1, y1 = (float(v) for v in box)
        if not (x1 > x0 and y1 > y0):
            raise ConfigurationError("empty computational box")
        self.box = (x0, y0, x1, y1)
        self.nx = int(math.floor((x1 - x0) / h + 1e-9)) + 1
        self.ny = int(math.floor((y1 - y0) / h + 1e-9)) + 1
        self.x0, self.y0 = x0, y0
        self.xs = x0 + h * np.arange(self.nx)
        self.ys = y0 + h * np.arange(self.ny)
        X, Y = np.meshgrid(self.xs, self.ys)
        self.points = np.stack([X, Y], axis=-1)
        self.sd = dom.signed_distance(self.points)
        self.snap = float(snap)
        self.interior = self.sd > self.snap * h
        self.index = -np.ones((self.ny, self.nx), dtype=np.int64)
        self.n = int(self.interior.sum())
        if self.n == 0:
            raise ConfigurationError("grid has no interior nodes; refine h")
        self.index[self.interior] = np.arange(self.n)
        jj, ii = np.nonzero(self.interior)
        self.node_ij = np.stack([jj, ii], axis=1)
        self.node_xy = self.points[jj, ii]

    @property
    def shape(self):
        return (self.ny, self.nx)

    def node_of(self, x):
        """Nearest grid node (j, i) to the point x."""
        i = int(round((x[0] - self.x0) / self.h))
        j = int(round((x[1] - self.y0) / self.h))
        if not (0 <= i < self.nx and 0 <= j < self.ny):
            raise InputError("point outside the computational box")
        return j, i

    def full(self, u_int, fill=BOUNDARY_VALUE):
        out = np.full(self.shape, fill, dtype=float)
        out[self.interior] = u_int
        return out


class Stencil:
    """Second differences for every (frame, direction) at interior nodes.

    ``D`` has shape (K * 2 * n, n) and ``b`` holds the boundary
    contributions, so that D_{k,i} u = (D @ u + b)[(2k + i) n + j].
    """

    def __init__(self, grid, cfg):
        self.grid = grid
        self.cfg = cfg
        h = grid.h
        if cfg.frames == "lattice":
            frames = [(a * h, b * h) for a, b in lattice_frames(cfg.s_w)]
        elif cfg.frames == "axis":
            frames = [(np.array((h, 0.0)), np.array((0.0, h)))]
        else:
            frames = [(a * cfg.s_w * h, b * cfg.s_w * h) for a, b in angular_frames(cfg.directions)]
        self.frames = frames
        self.K = len(frames)
        n = len(grid.node_ij)
        rows, cols, vals = [], [], []
        b = np.zeros(2 * self.K * n)
        diag = np.zeros(2 * self.K * n)
        lattice = cfg.frames in ("lattice", "axis")
        for k, pair in enumerate(frames):
            for i, v in enumerate(pair):
                base = (2 * k + i) * n
                parts = [self._side(v, lattice), self._side(-v, lattice)]
                (Lp, wp, bp), (Lm, wm, bm) = parts
                ap = 2.0 / (Lp * (Lp + Lm))
                am = 2.0 / (Lm * (Lp + Lm))
                r = base + np.arange(n)
                rows.append(r)
                cols.append(grid.index[grid.node_ij[:, 0], grid.node_ij[:, 1]])
                vals.append(-(ap + am))
                diag[r] = -(ap + am)
                for (wr, wc, wv), a_side, bb in ((wp, ap, bp), (wm, am, bm)):
                    rows.append(base + wr)
                    cols.append(wc)
                    vals.append(a_side[wr] * wv)
                    b[r] += a_side * bb
        self.D = sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                               shape=(2 * self.K * n, grid.n))
        self.D.sum_duplicates()
        self.b = b
        self.diag = diag

    def _side(self, v, lattice):
        """Arm lengths, interior weights (row, col, w) and boundary mass."""
        g = self.grid
        n = len(g.node_ij)
        cfg = self.cfg
        h = g.h
        length = float(np.linalg.norm(v))
        frac = np.ones(n)
        if cfg.boundary == "cut":
            end_sd = g.dom.signed_distance(g.node_xy + v)
            out = end_sd < 0
            if np.any(out):
                frac[out] = g.dom.boundary_fraction(g.node_xy[out], v)
        cut = frac < 1.0
        L = frac * length
        bmass = np.zeros(n)
        bmass[cut] = BOUNDARY_VALUE
        keep = ~cut
        rows, cols, ws = [], [], []
        if lattice:
            di = int(round(v[0] / h))
            dj = int(round(v[1] / h))
            jj = g.node_ij[:, 0] + dj
            ii = g.node_ij[:, 1] + di
            inside_box = (jj >= 0) & (jj < g.ny) & (ii >= 0) & (ii < g.nx)
            if np.any(keep & ~inside_box):
                raise ConfigurationError("stencil leaves the computational box; enlarge it")
            jj = np.clip(jj, 0, g.ny - 1)
            ii = np.clip(ii, 0, g.nx - 1)
            idx = g.index[jj, ii]
            known = keep & (idx < 0)
            bmass[known] = BOUNDARY_VALUE
            use = keep & (idx >= 0)
            rows.append(np.flatnonzero(use))
            cols.append(idx[use])
            ws.append(np.ones(int(use.sum())))
        else:
            p = g.node_xy + v
            fx = (p[:, 0] - g.x0) / h
            fy = (p[:, 1] - g.y0) / h
            i0 = np.floor(fx + 1e-12).astype(np.int64)
            j0 = np.floor(fy + 1e-12).astype(np.int64)
            tx = np.clip(fx - i0, 0.0, 1.0)
            ty = np.clip(fy - j0, 0.0, 1.0)
            for dj, di, w in ((0, 0, (1 - tx) * (1 - ty)), (0, 1, tx * (1 - ty)),
                              (1, 0, (1 - tx) * ty), (1, 1, tx * ty)):
                jj = j0 + dj
                ii = i0 + di
                inside_box = (jj >= 0) & (jj < g.ny) & (ii >= 0) & (ii < g.nx)
                active = keep & (w > 0)
                if np.any(active & ~inside_box):
                    raise ConfigurationError("stencil leaves the computational box; enlarge it")
                jj = np.clip(jj, 0, g.ny - 1)
                ii = np.clip(ii, 0, g.nx - 1)
                idx = g.index[jj, ii]
                known = active & (idx < 0)
                bmass[known] += w[known] * BOUNDARY_VALUE
                use = active & (idx >= 0)
                rows.append(np.flatnonzero(use))
                cols.append(idx[use])
                ws.append(w[use])
        return L, (np.concatenate(rows), np.concatenate(cols), np.concatenate(ws)), bmass

    def second_differences(self, u_int):
        return (self.D @ u_int + self.b).reshape(self.K, 2, -1)


class DiscreteOperator:
    """M-+_h on a grid, with the policy (frame, coefficients) that attains it."""

    def __init__(self, stencil, params, sign):
        self.st = stencil
        self.p = params
        self.sign = check_sign(sign)

    def evaluate(self, u_int, with_policy=False):
        d = self.st.second_differences(u_int)
        lam, Lam = self.p.lam, self.p.Lam
        if self.sign == "minus":
            coef = np.where(d >= 0, lam, Lam)
            vals = (coef * d).sum(axis=1)
            k = np.argmin(vals, axis=0)
        else:
            coef = np.where(d >= 0, Lam, lam)
            vals = (coef * d).sum(axis=1)
            k = np.argmax(vals, axis=0)
        n = self.st.grid.n
        out = vals[k, np.arange(n)]
        if not with_policy:
            return out
        c = coef[k, :, np.arange(n)]          # (n, 2)
        return out, (k, c, vals)

    def linear_part(self, k, c):
        """Sparse L and vector g with L u + g = sum_i c_i D_{k,i} u."""
        n = self.st.grid.n
        j = np.arange(n)
        r1 = (2 * k) * n + j
        r2 = (2 * k + 1) * n + j
        D = self.st.D
        L = sp.diags(c[:, 0]) @ D[r1] + sp.diags(c[:, 1]) @ D[r2]
        g = c[:, 0] * self.st.b[r1] + c[:, 1] * self.st.b[r2]
        return L.tocsr(), g

    def max_rate(self):
        """Largest diagonal magnitude any policy can produce (for the CFL bound)."""
        n = self.st.grid.n
        d = -self.st.diag.reshape(self.st.K, 2, n)
        return float(self.p.Lam * d.sum(axis=1).max())


@dataclass
class SolveReport:
    kind: str
    converged: bool
    max_residual: float
    mean_residual: float
    tolerance: float
    policy_rounds: int = 0
    linear_iterations: int = 0
    steps: int = 0
    dt: float = 0.0
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "kind": self.kind, "converged": self.converged,
            "max_residual": self.max_residual, "mean_residual": self.mean_residual,
            "tolerance": self.tolerance, "policy_rounds": self.policy_rounds,
            "linear_iterations": self.linear_iterations, "steps": self.steps,
            "dt": self.dt, "notes": list(self.notes),
        }


@dataclass
class ScalarField:
    """Grid values (boundary nodes hold the datum) plus run metadata."""
    grid: Grid
    values: np.ndarray
    meta: dict
    report: SolveReport | None = None
    operator: DiscreteOperator | None = None

    @property
    def interior_values(self):
        return self.values[self.grid.interior]

    def at(self, x):
        j, i = self.grid.node_of(x)
        return float(self.values[j, i])


def _grid_for(dom, cfg, h, snap):
    return Grid(dom, h, box=cfg.box, reach=cfg.reach(), snap=snap)


def _solve_linear(A, rhs, x0, cfg, tol):
    n = A.shape[0]
    if n <= cfg.direct_limit:
        return spla.spsolve(A.tocsc(), rhs), 1
    dinv = 1.0 / A.diagonal()
    M = spla.LinearOperator(A.shape, matvec=lambda x: dinv * x)
    its = [0]

    def cb(_):
        its[0] += 1

    x, info = spla.bicgstab(A, rhs, x0=x0, rtol=min(tol, 1e-12) * 1e-2, atol=0.0,
                            maxiter=20000, M=M, callback=cb)
    if info != 0:
        log.info("bicgstab stalled (info=%s); falling back to a direct solve", info)
        return spla.spsolve(A.tocsc(), rhs), its[0] + 1
    return x, its[0]


def elliptic_residual(op, u_int, eps):
    return -eps ** 2 * op.evaluate(u_int) + u_int


def solve_elliptic(dom, sign, eps, params, cfg=None, u0=None):
    """Solve -eps^2 M-+_h(u) + u = 0 inside, u = 1 outside, by policy iteration.

    Each round fixes, at every node, the frame and the coefficient of each
    second difference that realise the extremum, then solves the resulting
    M-matrix system exactly.  Rounds stop when the policy repeats or the
    residual is below the tolerance.
    """
    cfg = cfg or GridConfig()
    check_sign(sign)
    if not eps > 0:
        raise InputError("epsilon must be positive")
    ell_min = params.lam
    h = cfg.h if cfg.h is not None else eps * math.sqrt(ell_min) / cfg.resolution
    notes = []
    if h > eps * math.sqrt(ell_min) / 4:
        msg = f"h = {h:g} does not resolve the layer (h <= eps sqrt(lam)/4 = {eps * math.sqrt(ell_min) / 4:g})"
        if cfg.enforce_resolution:
            raise ConfigurationError(msg + "; set enforce_resolution=false to override")
        log.warning(msg)
        notes.append(msg)
    snap = 0.05 if cfg.snap is None else cfg.snap
    grid = _grid_for(dom, cfg, h, snap)
    st = Stencil(grid, cfg)
    op = DiscreteOperator(st, params, sign)
    n = grid.n
    I = sp.identity(n, format="csr")
    e2 = eps * eps

    if u0 is None:
        k = np.zeros(n, dtype=np.int64)
        c = np.full((n, 2), params.ell(sign))
    else:
        _, (k, c, _) = op.evaluate(np.asarray(u0, float), with_policy=True)
    u = np.zeros(n) if u0 is None else np.asarray(u0, float)
    rounds = 0
    lin_its = 0
    res = np.inf
    same = False
    for rounds in range(1, cfg.max_policy_rounds + 1):
        L, g = op.linear_part(k, c)
        A = I - e2 * L
        u, its = _solve_linear(A, e2 * g, u, cfg, cfg.tol)
        lin_its += its
        val, (k_new, c_new, vals) = op.evaluate(u, with_policy=True)
        r = -e2 * val + u
        res = float(np.max(np.abs(r)))
        # keep the current frame where it is still optimal (avoids cycling on ties)
        cur = vals[k, np.arange(n)]
        keep = np.abs(cur - val) <= 1e-13 * (1.0 + np.abs(val))
        k_new = np.where(keep, k, k_new)
        n_idx = np.arange(n)
        d = st.second_differences(u)[k_new, :, n_idx]
        if sign == "minus":
            c_new = np.where(d >= 0, params.lam, params.Lam)
        else:
            c_new = np.where(d >= 0, params.Lam, params.lam)
        same = np.array_equal(k_new, k) and np.array_equal(c_new, c)
        k, c = k_new, c_new
        if res <= cfg.tol or same:
            break
    # a stationary policy means the last linear solve was the exact discrete
    # solution; its residual is then limited by the conditioning of A
    roundoff = 1e-14 * (1.0 + e2 * op.max_rate())
    converged = res <= cfg.tol or (same and res <= max(cfg.tol, 100 * roundoff))
    if converged and res > cfg.tol:
        notes.append(f"residual {res:.2e} is at the roundoff level of the linear solves")
    report = SolveReport("elliptic", converged, res, float(np.mean(np.abs(r))), cfg.tol,
                         policy_rounds=rounds, linear_iterations=lin_its, notes=notes)
    meta = {"problem": "elliptic", "sign": sign, "epsilon": eps,
            "lam": params.lam, "Lam": params.Lam, "h": h}
    fld = ScalarField(grid, grid.full(u), meta, report, op)
    if not converged:
        raise SolverError(f"policy iteration stopped at residual {res:.3e} > {cfg.tol:g}", report)
    return fld


@dataclass
class ParabolicResult:
    grid: Grid
    times: list
    fields: list
    report: SolveReport

    def field_at(self, t):
        for tt, f in zip(self.times, self.fields):
            if abs(tt - t) <= 1e-12 * max(1.0, abs(t)):
                return f
        raise InputError(f"no snapshot at t = {t}")


def solve_parabolic(dom, sign, t_final, params, cfg=None, snapshots=None):
    """Explicit monotone time stepping for v_t = M-+_h(v), v(0) = 0, v = 1 on the boundary.

    The step is cfl / (largest total diagonal coefficient), which keeps
    every update a convex combination of old values.  Steps are shortened
    so that each requested snapshot time is hit exactly.
    """
    cfg = cfg or GridConfig()
    check_sign(sign)
    if not t_final > 0:
        raise InputError("final time must be positive")
    times = sorted(set([float(t) for t in (snapshots or [])] + [float(t_final)]))
    if times[0] <= 0:
        raise InputError("snapshot times must be positive")
    h = cfg.h if cfg.h is not None else math.sqrt(params.lam * times[0]) / cfg.resolution
    snap = 0.25 if cfg.snap is None else cfg.snap
    grid = _grid_for(dom, cfg, h, snap)
    st = Stencil(grid, cfg)
    op = DiscreteOperator(st, params, sign)
    rate = op.max_rate()
    dt_max = cfg.cfl / rate
    if cfg.dt is not None:
        if cfg.dt > 1.0 / rate:
            raise ConfigurationError(f"dt = {cfg.dt:g} violates the monotonicity bound {1.0 / rate:g}")
        dt_max = cfg.dt
    v = np.zeros(grid.n)
    t = 0.0
    steps = 0
    out = []
    lo_ok = True
    for target in times:
        while t < target * (1 - 1e-14):
            dt = min(dt_max, target - t)
            v_new = v + dt * op.evaluate(v)
            if np.any(v_new < v - 1e-15):
                lo_ok = False
            v = v_new
            t = target if dt == target - t else t + dt
            steps += 1
        meta = {"problem": "parabolic", "sign": sign, "t": target,
                "lam": params.lam, "Lam": params.Lam, "h": h}
        out.append(ScalarField(grid, grid.full(v.copy()), meta, None, op))
    notes = [] if lo_ok else ["non-monotone step detected"]
    report = SolveReport("parabolic", True, 0.0, 0.0, 0.0, steps=steps, dt=dt_max, notes=notes)
    for f in out:
        f.report = report
    return ParabolicResult(grid, times, out, report)


def residual_report(fld):
    """Interior residual of an elliptic field against its own operator."""
    if fld.meta.get("problem") != "elliptic" or fld.operator is None:
        rep = fld.report
        if rep is None:
            raise InputError("field carries no solver record")
        return rep
    eps = fld.meta["epsilon"]
    r = elliptic_residual(fld.operator, fld.values[fld.grid.interior], eps)
    base = fld.report
    mx = float(np.max(np.abs(r)))
    return SolveReport("elliptic", mx <= (base.tolerance if base else 1e-10), mx,
                       float(np.mean(np.abs(r))), base.tolerance if base else 1e-10,
                       policy_rounds=base.policy_rounds if base else 0,
                       linear_iterations=base.linear_iterations if base else 0,
                       notes=list(base.notes) if base else [])


def residual_field(fld):
    """Pointwise |residual| on the grid (zero at boundary nodes)."""
    eps = fld.meta["epsilon"]
    r = elliptic_residual(fld.operator, fld.values[fld.grid.interior], eps)
    return fld.grid.full(np.abs(r), fill=0.0)


def discrete_pucci(fld, node, sign, params, directions=None, s_w=3):
    """M-+_h of the field at one interior node (j, i).

    With ``directions`` the angular family with that many frames is used,
    otherwise the lattice family of radius s_w.
    """
    g = fld.grid
    j, i = node
    if not g.interior[j, i]:
        raise InputError("node is not interior")
    cfg = GridConfig(h=g.h, s_w=s_w, frames="angular" if directions else "lattice",
                     directions=directions or 8, boundary="extend")
    sub = _SubGrid(g, [(j, i)])
    st = Stencil(sub, cfg)
    d = (st.D @ fld.values[g.interior] + st.b).reshape(st.K, 2)
    lam, Lam = params.lam, params.Lam
    if check_sign(sign) == "minus":
        return float(np.min(np.minimum(lam * d, Lam * d).sum(axis=1)))
    return float(np.max(np.maximum(lam * d, Lam * d).sum(axis=1)))


class _SubGrid:
    """View of a grid that exposes only selected rows as stencil centres."""

    def __init__(self, g, nodes):
        self.__dict__.update({k: v for k, v in g.__dict__.items()})
        self.node_ij = np.asarray(nodes, dtype=np.int64)
        self.node_xy = g.points[self.node_ij[:, 0], self.node_ij[:, 1]]

    @property
    def shape(self):
        return (self.ny, self.nx)


def quadratic_test_field(h, hess, half_width=1.0):
    """Field u = x^T H x / 2 on a square box treated as all-interior (for operator tests)."""
    from .geometry import ConvexPolygon
    w = half_width
    dom = ConvexPolygon.rectangle(-w, -w, w, w)
    g = Grid(dom, h, box=(-w, -w, w, w), reach=0, snap=-1e9)
    H = np.asarray(hess, float)
    P = g.points
    vals = 0.5 * np.einsum("...i,ij,...j->...", P, H, P)
    return ScalarField(g, vals, {"problem": "test"})


@dataclass
class RadialParabolicResult:
    r: np.ndarray
    times: list
    values: list          # one array per snapshot time
    steps: int
    dt: float

    def value_at(self, t, r0):
        """Linear interpolation of the snapshot at time t in the radius."""
        for tt, v in zip(self.times, self.values):
            if abs(tt - t) <= 1e-12 * max(1.0, abs(t)):
                return float(np.interp(r0, self.r, v))
        raise InputError(f"no snapshot at t = {t}")


def solve_radial_parabolic(sign, R, params, times, h, r_in=0.0, cfl=0.9):
    """Radially symmetric v_t = M-+(D^2 v) in the ball B_R, v(0) = 0, v(R) = 1.

    Upwind monotone scheme for beta(v_rr) + (N-1)/r beta(v_r) (gamma for the
    plus operator): centred second difference and forward first difference,
    which is the upwind side for a drift pointing outwards.  At r = 0 the
    Hessian is v_rr I, so the operator is N beta(v_rr).  With r_in > 0 the
    inner end carries v = 0, a truncation that is harmless when r_in is many
    diffusion lengths away from the radii of interest.
    """
    check_sign(sign)
    if not (0 <= r_in < R):
        raise InputError("need 0 <= r_in < R")
    m = max(int(math.ceil((R - r_in) / h)), 2)
    h = (R - r_in) / m
    r = r_in + h * np.arange(m + 1)
    lam, Lam = params.lam, params.Lam
    lo, hi = (lam, Lam) if sign == "minus" else (Lam, lam)   # coefficient for s >= 0, s < 0
    N = params.dim
    centre = r_in == 0.0
    inner = r[1:-1]
    drift = (N - 1) / inner
    rate = Lam * (2.0 / h ** 2 + drift / h)
    if centre:
        rate = np.concatenate([[2.0 * N * Lam / h ** 2], rate])
    dt_max = cfl / float(rate.max())
    v = np.zeros(m + 1)
    v[-1] = 1.0
    ts = sorted(float(t) for t in times)
    out = []
    t = 0.0
    steps = 0
    ih2 = 1.0 / h ** 2
    ih = 1.0 / h
    d2 = np.empty(m - 1)
    d1 = np.empty(m - 1)
    for target in ts:
        while t < target * (1 - 1e-14):
            dt = min(dt_max, target - t)
            np.subtract(v[2:], v[1:-1], out=d1)
            np.subtract(d1, v[1:-1], out=d2)
            d2 += v[:-2]
            d2 *= ih2
            d1 *= ih
            upd = np.where(d2 >= 0, lo, hi) * d2 + drift * np.where(d1 >= 0, lo, hi) * d1
            if centre:
                s = 2.0 * (v[1] - v[0]) * ih2
                v0 = v[0] + dt * N * (lo if s >= 0 else hi) * s
            v[1:-1] += dt * upd
            if centre:
                v[0] = v0
            t = target if dt == target - t else t + dt
            steps += 1
        out.append(v.copy())
    return RadialParabolicResult(r, ts, out, steps, dt_max)


_HEADER = np.dtype([("nx", "<i8"), ("ny", "<i8"), ("h", "<f8"), ("x0", "<f8"), ("y0", "<f8")])


def field_rows(fld):
    """(x, y, value) rows in row-major node order."""
    g = fld.grid
    X, Y = np.meshgrid(g.xs, g.ys)
    return np.column_stack([X.ravel(), Y.ravel(), fld.values.ravel()])


def write_field_csv(fld, path):
    rows = field_rows(fld)
    with open(path, "w", newline="\n") as fh:
        fh.write("x,y,value\n")
        for x, y, v in rows:
            fh.write(f"{x:.17g},{y:.17g},{v:.17g}\n")


def write_field_binary(fld, path):
    """Header (nx, ny as int64; h, x0, y0 as float64), then row-major float64, all little-endian."""
    g = fld.grid
    head = np.array([(g.nx, g.ny, g.h, g.x0, g.y0)], dtype=_HEADER)
    with open(path, "wb") as fh:
        fh.write(head.tobytes())
        fh.write(np.ascontiguousarray(fld.values, dtype="<f8").tobytes())


def read_field_binary(path):
    """(values[ny, nx], h, (x0, y0)) from a binary grid dump."""
    raw = pathlib.Path(path).read_bytes()
    head = np.frombuffer(raw[:_HEADER.itemsize], dtype=_HEADER)[0]
    nx, ny = int(head["nx"]), int(head["ny"])
    vals = np.frombuffer(raw[_HEADER.itemsize:], dtype="<f8")
    if vals.size != nx * ny:
        raise InputError("binary grid dump is truncated")
    return vals.reshape(ny, nx).copy(), float(head["h"]), (float(head["x0"]), float(head["y0"]))
