import importlib

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pucci_asym.errors import InputError, ParameterError

pucci = importlib.import_module("pucci_asym.pucci")
PucciParams = pucci.PucciParams

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


@st.composite
def sym_and_params(draw, n=None):
    n = n or draw(st.integers(2, 5))
    a = draw(arrays(np.float64, (n, n), elements=finite))
    lam = draw(st.floats(0.05, 5.0))
    ratio = draw(st.floats(1.0, 10.0))
    return 0.5 * (a + a.T), PucciParams(lam, lam * ratio, n)


def scale(x, p):
    return p.Lam * (np.linalg.norm(x) + 1.0)


# ---------------------------------------------------------------- params and matrices


def test_params_validation():
    with pytest.raises(ParameterError):
        PucciParams(2.0, 1.0)
    with pytest.raises(ParameterError):
        PucciParams(0.0, 1.0)
    with pytest.raises(ParameterError):
        PucciParams(1.0, float("inf"))
    with pytest.raises(ParameterError):
        PucciParams(1.0, 2.0, 1)
    assert PucciParams(1, 2).ell("minus") == 1.0
    assert PucciParams(1, 2).ell("plus") == 2.0


def test_bad_sign_and_shapes():
    p = PucciParams(1.0, 2.0)
    with pytest.raises(InputError):
        pucci.pucci(np.eye(2), p, "both")
    with pytest.raises(InputError):
        pucci.pucci_minus(np.eye(3), p)
    with pytest.raises(InputError):
        pucci.pucci_minus(np.array([[np.nan, 0], [0, 1]]), p)
    with pytest.raises(InputError):
        pucci.SymMatrix.from_dense([[1.0, 2.0], [0.0, 1.0]])
    with pytest.raises(InputError):
        pucci.SymMatrix(2, [1.0, 2.0])


def test_symmatrix_roundtrip():
    a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]])
    m = pucci.SymMatrix.from_dense(a)
    assert np.array_equal(m.dense(), a)
    assert np.array_equal((-m).dense(), -a)
    assert np.array_equal(pucci.SymMatrix.identity(3).dense(), np.eye(3))


def test_known_values():
    p = PucciParams(1.0, 3.0)
    x = np.diag([2.0, -1.0])
    assert pucci.pucci_minus(x, p) == pytest.approx(1.0 * 2.0 + 3.0 * -1.0)
    assert pucci.pucci_plus(x, p) == pytest.approx(3.0 * 2.0 + 1.0 * -1.0)
    sx = pucci.SymMatrix.diag([2.0, -1.0])
    assert pucci.pucci_minus(sx, p) == pucci.pucci_minus(x, p)


def test_beta_gamma():
    p = PucciParams(1.0, 2.0)
    b, g = pucci.beta_gamma(np.array([-1.0, 0.0, 3.0]), p)
    assert np.allclose(b, [-2.0, 0.0, 3.0])
    assert np.allclose(g, [-1.0, 0.0, 6.0])


def test_jacobi_matches_numpy():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((50, 5, 5))
    a = a + np.swapaxes(a, 1, 2)
    w, v = pucci.jacobi_eigh(a)
    assert np.allclose(w, np.linalg.eigvalsh(a), atol=1e-12)
    recon = np.einsum("bik,bk,bjk->bij", v, w, v)
    assert np.allclose(recon, a, atol=1e-11)


def test_stack_evaluation():
    rng = np.random.default_rng(2)
    a = rng.standard_normal((10, 3, 3))
    a = a + np.swapaxes(a, 1, 2)
    p = PucciParams(0.5, 2.0, 3)
    vals = pucci.pucci_minus(a, p)
    assert vals.shape == (10,)
    assert np.allclose(vals, [pucci.pucci_minus(x, p) for x in a])


def test_radial_pucci_consistent_with_hessian():
    p = PucciParams(1.0, 2.5, 3)
    xhat = np.array([0.0, 0.6, 0.8])
    for sign in ("minus", "plus"):
        for ur, urr in ((1.0, -2.0), (-0.5, 3.0), (0.2, 0.1)):
            hess = pucci.radial_hessian(ur, urr, 0.7, xhat)
            assert pucci.radial_pucci(ur, urr, 0.7, p, sign) == pytest.approx(pucci.pucci(hess, p, sign))


def test_game_sandwich():
    p = pucci.game_sandwich_params(4.0, 2)
    assert (p.lam, p.Lam) == (0.25, 0.75)
    rng = np.random.default_rng(3)
    for _ in range(100):
        a = rng.standard_normal((2, 2))
        hess = a + a.T
        grad = rng.standard_normal(2)
        val = pucci.game_p_laplacian(grad, hess, 4.0)
        assert pucci.pucci_minus(hess, p) - 1e-9 <= val <= pucci.pucci_plus(hess, p) + 1e-9


# ---------------------------------------------------------------- properties


@settings(max_examples=200, deadline=None)
@given(sym_and_params())
def test_eigenframe_agreement(xp):
    x, p = xp
    assert abs(pucci.pucci_minus(x, p) - pucci.pucci_minus_sup_inf(x, p)) <= 1e-12 * scale(x, p)
    assert abs(pucci.pucci_plus(x, p) - pucci.pucci_plus_sup_inf(x, p)) <= 1e-12 * scale(x, p)


@settings(max_examples=200, deadline=None)
@given(sym_and_params())
def test_duality_and_order(xp):
    x, p = xp
    assert pucci.pucci_minus(x, p) == pytest.approx(-pucci.pucci_plus(-x, p), abs=1e-12 * scale(x, p))
    assert pucci.pucci_minus(x, p) <= pucci.pucci_plus(x, p) + 1e-12 * scale(x, p)


@settings(max_examples=150, deadline=None)
@given(sym_and_params(), st.floats(1e-3, 1e3))
def test_positive_homogeneity(xp, s):
    x, p = xp
    for sign in ("minus", "plus"):
        assert pucci.pucci(s * x, p, sign) == pytest.approx(s * pucci.pucci(x, p, sign),
                                                           abs=1e-12 * s * scale(x, p))


@settings(max_examples=150, deadline=None)
@given(sym_and_params(n=3), st.integers(0, 2 ** 31))
def test_rotation_invariance(xp, seed):
    x, p = xp
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((3, 3)))
    y = q @ x @ q.T
    y = 0.5 * (y + y.T)
    for sign in ("minus", "plus"):
        assert pucci.pucci(y, p, sign) == pytest.approx(pucci.pucci(x, p, sign), abs=1e-11 * scale(x, p))


@settings(max_examples=150, deadline=None)
@given(sym_and_params(n=3), arrays(np.float64, (3, 3), elements=finite))
def test_ellipticity_bracket(xp, b):
    x, p = xp
    y = 0.5 * (b + b.T)
    psd = b @ b.T
    tol = 1e-11 * (scale(x, p) + p.Lam * np.linalg.norm(y) + p.Lam * np.linalg.norm(psd))
    for sign in ("minus", "plus"):
        base = pucci.pucci(x, p, sign)
        inc = pucci.pucci(x + y, p, sign) - base
        assert pucci.pucci_minus(y, p) - tol <= inc <= pucci.pucci_plus(y, p) + tol
        mono = pucci.pucci(x + psd, p, sign) - base
        assert mono >= p.lam * np.trace(psd) - tol
        assert mono <= p.Lam * np.trace(psd) + tol


@settings(max_examples=50, deadline=None)
@given(sym_and_params(n=2))
def test_random_frames_never_beat_eigenframe(xp):
    x, p = xp
    tol = 1e-12 * scale(x, p)
    assert pucci.pucci_minus_sup_inf(x, p, frames=50) == pytest.approx(pucci.pucci_minus(x, p), abs=tol)
    assert pucci.pucci_plus_sup_inf(x, p, frames=50) == pytest.approx(pucci.pucci_plus(x, p), abs=tol)
