import importlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pucci_asym import fd, geometry, radial
from pucci_asym.errors import ConfigurationError, SolverError

pucci = importlib.import_module("pucci_asym.pucci")
P = pucci.PucciParams
DISK = geometry.Ball((0.0, 0.0), 1.0)


@pytest.fixture(scope="module")
def disk_pair():
    p = P(1.0, 2.0)
    return {s: fd.solve_elliptic(DISK, s, 0.25, p) for s in ("minus", "plus")}


def test_lattice_frames():
    frames = fd.lattice_frames(3)
    assert len(frames) == 8
    for a, b in frames:
        assert a @ b == 0 and np.linalg.norm(a) == pytest.approx(np.linalg.norm(b))
    assert len(fd.lattice_frames(1)) == 2
    ang = fd.angular_frames(6)
    assert len(ang) == 6 and all(abs(a @ b) < 1e-15 for a, b in ang)


def test_config_validation():
    with pytest.raises(ConfigurationError):
        fd.GridConfig(frames="hex")
    with pytest.raises(ConfigurationError):
        fd.GridConfig(boundary="mirror")
    with pytest.raises(ConfigurationError):
        fd.GridConfig(s_w=0)
    with pytest.raises(ConfigurationError):
        fd.GridConfig(h=-1.0)
    with pytest.raises(ConfigurationError):
        fd.GridConfig(cfl=1.5)


@pytest.mark.parametrize("frames", ["lattice", "axis", "angular"])
@pytest.mark.parametrize("dom", [DISK, geometry.ConvexPolygon.rectangle(-1, -1, 1, 0.5)])
def test_stencil_is_monotone_and_consistent(frames, dom):
    cfg = fd.GridConfig(frames=frames, directions=5)
    g = fd.Grid(dom, 0.08, reach=cfg.reach() + 1, snap=0.05)
    stn = fd.Stencil(g, cfg)
    D = stn.D.tocoo()
    n = len(g.node_ij)
    centre = g.index[g.node_ij[:, 0], g.node_ij[:, 1]]
    own = D.col == centre[D.row % n]
    assert np.all(D.data[own] < 0)
    assert np.all(D.data[~own] >= 0)
    assert np.all(stn.b >= 0)
    # the boundary value is 1, so the constant 1 has zero second differences
    assert np.max(np.abs(stn.D @ np.ones(g.n) + stn.b)) < 1e-9 / g.h ** 2


def test_quadratic_exactness_lattice():
    H = np.array([[2.0, 0.7], [0.7, -1.0]])
    fld = fd.quadratic_test_field(0.1, H)
    p = P(1.0, 1.0)
    # with lam = Lam every frame gives the trace
    assert fd.discrete_pucci(fld, (10, 10), "minus", p) == pytest.approx(np.trace(H))


def test_elliptic_solution_properties(disk_pair):
    lo, hi = disk_pair["minus"], disk_pair["plus"]
    for f in (lo, hi):
        u = f.interior_values
        assert np.all(u > 0) and np.all(u <= 1.0)
        assert f.report.converged and f.report.max_residual <= 1e-10
        assert fd.residual_report(f).max_residual <= 1e-10
    # discrete comparison: M-_h <= M+_h makes the minus solution a subsolution of the plus problem
    assert np.all(lo.values <= hi.values + 1e-12)


def test_elliptic_centre_close_to_exact(disk_pair):
    p = P(1.0, 2.0)
    for s, f in disk_pair.items():
        exact = math.exp(radial.ball_solution(s, 0.0, 1.0, 0.25, p))
        assert f.at((0.0, 0.0)) == pytest.approx(exact, rel=0.03)


def test_resolution_guard_and_override():
    p = P(1.0, 2.0)
    with pytest.raises(ConfigurationError):
        fd.solve_elliptic(DISK, "minus", 0.2, p, fd.GridConfig(h=0.2))
    f = fd.solve_elliptic(DISK, "minus", 0.2, p, fd.GridConfig(h=0.1, enforce_resolution=False))
    assert any("resolve" in n for n in f.report.notes)


def test_nonconvergence_raises():
    with pytest.raises(SolverError) as exc:
        fd.solve_elliptic(DISK, "plus", 0.3, P(1.0, 2.0), fd.GridConfig(max_policy_rounds=1))
    assert exc.value.report is not None and not exc.value.report.converged


def test_parabolic_monotone_in_time():
    p = P(1.0, 2.0)
    res = fd.solve_parabolic(DISK, "plus", 0.1, p, fd.GridConfig(h=0.05), snapshots=[0.025, 0.05])
    assert res.times == [0.025, 0.05, 0.1]
    prev = None
    for t in res.times:
        v = res.field_at(t).interior_values
        assert np.all(v >= 0) and np.all(v <= 1.0 + 1e-12)
        if prev is not None:
            assert np.all(v >= prev - 1e-12)
        prev = v
    assert res.report.dt * fd.DiscreteOperator(fd.Stencil(res.grid, fd.GridConfig(h=0.05)), p, "plus").max_rate() <= 1.0


def test_parabolic_dt_guard():
    with pytest.raises(ConfigurationError):
        fd.solve_parabolic(DISK, "minus", 0.01, P(1.0, 2.0), fd.GridConfig(h=0.05, dt=1.0))


def test_radial_solver_matches_2d():
    # the 2D scheme approaches the (much finer) radial reduction as h halves
    p = P(1.0, 2.0)
    t = 0.05
    rad = fd.solve_radial_parabolic("minus", 1.0, p, [t], h=0.0025)
    gaps = []
    for h in (0.05, 0.025):
        f = fd.solve_parabolic(DISK, "minus", t, p, fd.GridConfig(h=h)).field_at(t)
        gaps.append([abs(f.at((r0, 0.0)) / rad.value_at(t, r0) - 1) for r0 in (0.0, 0.5, 0.8)])
    assert all(b < a for a, b in zip(*gaps))
    assert max(gaps[1]) < 0.1


@settings(max_examples=15, deadline=None)
@given(st.floats(0.05, 0.6), st.floats(0.0, 0.95))
def test_radial_solver_bounds(t, r0):
    p = P(1.0, 1.5)
    res = fd.solve_radial_parabolic("plus", 1.0, p, [t], h=0.02)
    v = res.value_at(t, r0)
    assert 0.0 <= v <= 1.0
    assert res.value_at(t, 1.0) == pytest.approx(1.0)


def test_field_io(tmp_path, disk_pair):
    f = disk_pair["minus"]
    fd.write_field_binary(f, tmp_path / "u.bin")
    vals, h, origin = fd.read_field_binary(tmp_path / "u.bin")
    assert np.array_equal(vals, f.values) and h == f.grid.h
    assert origin == (f.grid.x0, f.grid.y0)
    fd.write_field_csv(f, tmp_path / "u.csv")
    lines = (tmp_path / "u.csv").read_text().splitlines()
    assert lines[0] == "x,y,value" and len(lines) == f.values.size + 1
