import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pucci_asym import geometry as G
from pucci_asym.errors import (CurvatureConditionError, DomainError, GeometryError, InputError,
                               MultiContactError)


def test_modulus_validation_and_inverse():
    with pytest.raises(InputError):
        G.ModulusOfContinuity("wiggly")
    with pytest.raises(InputError):
        G.ModulusOfContinuity.holder(1.5)
    with pytest.raises(InputError):
        G.ModulusOfContinuity.tabulated([0.1, 0.05], [0.1, 0.2])
    for mod in (G.ModulusOfContinuity.lipschitz(2.0), G.ModulusOfContinuity.holder(0.5, 3.0),
                G.ModulusOfContinuity.log_lipschitz(), G.ModulusOfContinuity.tabulated([0.1, 1.0], [0.2, 0.5])):
        for s in (1e-3, 0.05, 0.7, 2.0):
            assert mod.inverse(mod(s)) == pytest.approx(s, rel=1e-9)
        assert G.ModulusOfContinuity.from_dict(mod.to_dict()) == mod


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(1e-6, 1.0))
def test_psi_lipschitz_closed_form(L, sigma):
    mod = G.ModulusOfContinuity.lipschitz(L)
    assert G.psi_omega(mod, sigma) == pytest.approx(G.psi_lipschitz(L, sigma), rel=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 1.0), st.floats(1e-6, 0.5))
def test_psi_bounds(alpha, sigma):
    # psi is at most sigma (take s = 0) and grows with sigma
    mod = G.ModulusOfContinuity.holder(alpha)
    v = G.psi_omega(mod, sigma)
    assert 0 < v <= sigma
    assert G.psi_omega(mod, 1.5 * sigma) >= v


def test_psi_domain():
    mod = G.ModulusOfContinuity.lipschitz(1.0)
    assert G.psi_omega(mod, 0.0) == 0.0
    with pytest.raises(DomainError):
        G.psi_omega(mod, -1.0)


def test_ball_and_exterior():
    b = G.Ball((1.0, 0.0), 2.0)
    assert b.signed_distance([1.0, 0.0]) == pytest.approx(2.0)
    assert b.signed_distance([4.0, 0.0]) == pytest.approx(-1.0)
    e = G.ExteriorBall((0.0, 0.0), 1.0)
    assert e.signed_distance([3.0, 0.0]) == pytest.approx(2.0)
    with pytest.raises(MultiContactError):
        b.nearest_boundary_points([1.0, 0.0])
    z = b.nearest_boundary_points([2.0, 0.0])
    assert np.allclose(z[0], [3.0, 0.0])
    with pytest.raises(DomainError):
        G.distance_to_boundary(b, [5.0, 0.0])
    assert G.distance_to_boundary(b, [5.0, 0.0], signed=True) == pytest.approx(-2.0)


def test_annulus():
    a = G.Annulus((0.0, 0.0), 1.0, 3.0)
    assert a.signed_distance([2.0, 0.0]) == pytest.approx(1.0)
    assert a.signed_distance([2.5, 0.0]) == pytest.approx(0.5)
    assert a.signed_distance([0.5, 0.0]) == pytest.approx(-0.5)


def test_polygon():
    sq = G.ConvexPolygon.rectangle(-1, -1, 1, 1)
    assert sq.signed_distance([0.0, 0.0]) == pytest.approx(1.0)
    assert sq.signed_distance([2.0, 2.0]) == pytest.approx(-math.sqrt(2))
    assert np.allclose(sq.interior_angles(), math.pi / 2)
    with pytest.raises(GeometryError):
        G.ConvexPolygon(((0, 0), (0, 1), (1, 0)))          # clockwise
    with pytest.raises(MultiContactError):
        sq.nearest_boundary_points([0.0, 0.0])
    assert np.allclose(sq.nearest_boundary_points([0.5, 0.2])[0], [1.0, 0.2])


@settings(max_examples=100, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_polygon_distance_is_one_lipschitz(x, y):
    sq = G.ConvexPolygon.rectangle(-1, -1, 2, 1)
    d0 = sq.signed_distance([x, y])
    d1 = sq.signed_distance([x + 0.01, y - 0.02])
    assert abs(d1 - d0) <= math.hypot(0.01, 0.02) + 1e-12


def test_contact_ball():
    flat = G.ConvexPolygon.rectangle(-2, 0, 2, 3)
    c = G.contact_ball(flat, (0.0, 1.0))
    assert c.R == pytest.approx(1.0) and c.pi0 == pytest.approx(1.0)
    assert np.allclose(c.z_x, (0.0, 0.0))
    disk = G.Ball((0.0, 0.0), 2.0)
    c = G.contact_ball(disk, (1.0, 0.0))
    assert c.pi0 == pytest.approx(0.5)
    with pytest.raises(MultiContactError):
        G.contact_ball(disk, (0.0, 0.0))


def test_contact_on_concave_side():
    # the inner circle of an annulus curves away from the touching ball
    a = G.Annulus((0.0, 0.0), 1.0, 3.0)
    c = G.contact_ball(a, (1.5, 0.0))
    assert c.curvatures[0] < 0 and c.pi0 == pytest.approx(1.5)
    with pytest.raises(DomainError):
        G.contact_ball(a, (0.0, 0.0))


def _disk_sdf(n=81, R=0.8):
    xs = np.linspace(-1, 1, n)
    X, Y = np.meshgrid(xs, xs)
    return R - np.hypot(X, Y), xs[1] - xs[0]


def test_implicit_domain(tmp_path):
    vals, h = _disk_sdf()
    dom = G.ImplicitDomain(vals, h, h, (-1.0, -1.0))
    assert dom.signed_distance([0.2, 0.1]) == pytest.approx(0.8 - math.hypot(0.2, 0.1), abs=2e-3)
    with pytest.raises(MultiContactError):
        dom.nearest_boundary_points([0.0, 0.0])
    c = G.contact_ball(dom, (0.5, 0.1))
    assert c.R == pytest.approx(0.8 - math.hypot(0.5, 0.1), abs=2e-3)
    # file loader with the usual negative-inside convention
    (tmp_path / "grid.csv").write_text("\n".join(",".join(f"{v:.17g}" for v in row) for row in -vals))
    (tmp_path / "hdr.json").write_text(json.dumps({"nx": 81, "ny": 81, "dx": h, "dy": h, "origin": [-1, -1],
                                                   "data": "grid.csv"}))
    dom2 = G.domain_from_dict({"shape": "implicit", "header": str(tmp_path / "hdr.json")})
    assert dom2.signed_distance([0.2, 0.1]) == pytest.approx(dom.signed_distance([0.2, 0.1]))
    with pytest.raises(GeometryError):
        G.classify_regularity(dom2)


def test_implicit_validation():
    with pytest.raises(InputError):
        G.ImplicitDomain(np.full((3, 3), np.nan), 1.0, 1.0)
    with pytest.raises(GeometryError):
        G.ImplicitDomain(-np.ones((3, 3)), 1.0, 1.0)


def test_domain_from_dict_roundtrip():
    for d in ({"shape": "ball", "center": [0, 0], "R": 1.0},
              {"shape": "exterior_ball", "center": [1, 0], "R": 0.5},
              {"shape": "annulus", "center": [0, 0], "R_in": 1.0, "R_out": 2.0},
              {"shape": "rectangle", "box": [0, 0, 2, 1]},
              {"shape": "convex_polygon", "vertices": [[0, 0], [1, 0], [0, 1]],
               "modulus": {"kind": "lipschitz", "L": 2.0}}):
        dom = G.domain_from_dict(d)
        again = G.domain_from_dict(dom.to_dict())
        x = np.array([0.3, 0.2]) + (np.array([1.2, 0.0]) if d["shape"] == "annulus" else 0)
        assert again.signed_distance(x) == pytest.approx(dom.signed_distance(x))
    with pytest.raises(InputError):
        G.domain_from_dict({"shape": "torus"})
    with pytest.raises(InputError):
        G.domain_from_dict({"shape": "ball"})


def test_classify_regularity():
    sq = G.ConvexPolygon.rectangle(-1, -1, 1, 1)
    assert G.classify_regularity(sq).L == pytest.approx(1.0)
    assert G.classify_regularity(G.Ball((0, 0), 1.0)).kind == "lipschitz"


def test_curvature_condition_is_enforced():
    class Pinched(G.Ball):
        def curvatures(self, z):
            return (10.0,)

    with pytest.raises(CurvatureConditionError):
        G.contact_ball(Pinched((0.0, 0.0), 1.0), (0.5, 0.0))
