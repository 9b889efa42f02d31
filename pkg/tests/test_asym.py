import importlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import integrate, optimize

from pucci_asym import asym, geometry
from pucci_asym.errors import FitError, InputError

pucci = importlib.import_module("pucci_asym.pucci")
P = pucci.PucciParams

samples = arrays(np.float64, st.integers(2, 30), elements=st.floats(-10, 10))


# ---------------------------------------------------------------- q-means


def test_q_mean_examples():
    assert asym.q_mean([0.0, 1.0], q=math.inf) == 0.5
    assert asym.q_mean([0.0, 0.0, 1.0], q=2.0) == pytest.approx(1 / 3)
    # q = 3 on {0, 1, 1}: (mu)^2 = 2 (1 - mu)^2
    assert asym.q_mean([0.0, 1.0, 1.0], q=3.0) == pytest.approx(math.sqrt(2) / (1 + math.sqrt(2)))
    assert asym.q_mean([0.0, 1.0], [1.0, 1.0], q=1.5) == pytest.approx(0.5)


def test_q_mean_matches_direct_minimisation():
    rng = np.random.default_rng(5)
    u = rng.uniform(-2, 3, 40)
    w = rng.uniform(0.1, 1.0, 40)
    for q in (1.3, 2.0, 4.5):
        direct = optimize.minimize_scalar(lambda m: np.sum(w * np.abs(u - m) ** q),
                                          bounds=(u.min(), u.max()), method="bounded",
                                          options={"xatol": 1e-12}).x
        assert asym.q_mean(u, w, q) == pytest.approx(direct, abs=1e-7)


def test_q_mean_validation():
    with pytest.raises(InputError):
        asym.q_mean([1.0, 2.0], q=1.0)
    with pytest.raises(InputError):
        asym.q_mean([], q=2.0)
    with pytest.raises(InputError):
        asym.q_mean([1.0, 2.0], [1.0, -1.0], q=2.0)


@settings(max_examples=100, deadline=None)
@given(samples, st.floats(1.1, 10.0), st.floats(-5, 5), st.floats(0.1, 10))
def test_q_mean_affine_equivariance(u, q, shift, scale):
    m = asym.q_mean(u, q=q)
    assert u.min() - 1e-9 <= m <= u.max() + 1e-9
    tol = 1e-8 * (1 + np.ptp(u)) * scale
    assert asym.q_mean(scale * u + shift, q=q) == pytest.approx(scale * m + shift, abs=tol)
    assert asym.q_mean(-u, q=q) == pytest.approx(-m, abs=1e-8 * (1 + np.ptp(u)))


@settings(max_examples=60, deadline=None)
@given(samples, st.floats(1.1, 10.0))
def test_q_mean_is_a_minimiser(u, q):
    m = asym.q_mean(u, q=q)
    f = lambda x: asym.q_objective(u, np.ones_like(u), q, x)
    d = 1e-6 * (1 + np.ptp(u))
    assert f(m) <= f(m + d) * (1 + 1e-9) and f(m) <= f(m - d) * (1 + 1e-9)


# ---------------------------------------------------------------- constants


def test_constants_closed_forms():
    assert asym.c_constant(2, 2.0) == pytest.approx(math.sqrt(2 / math.pi), rel=1e-14)
    # erfc moment for N = 2, q = 2 against independent quadrature
    ref = integrate.quad(lambda s: math.erfc(s) * math.sqrt(s), 0, 30)[0]
    assert asym.erfc_moment(2, 2.0) == pytest.approx(ref, rel=1e-10)
    assert asym.big_c_constant(2, 2.0) == pytest.approx(8 * ref / math.pi, rel=1e-10)
    # large q: the formula, not 1 (its base behaves like q^-3/2)
    c100 = asym.c_constant(2, 100.0)
    base = 2 ** -1.5 * 2 / (99 ** 1.5 * math.gamma(1.5))
    assert c100 == pytest.approx(base ** (1 / 99), rel=1e-13)
    with pytest.raises(InputError):
        asym.c_constant(2, math.inf)
    with pytest.raises(InputError):
        asym.big_c_constant(0, 2.0)


def test_scaling_exponents_and_prediction():
    assert asym.qmean_scaling_exponent("elliptic", 2, 2.0) == pytest.approx(1.5)
    assert asym.qmean_scaling_exponent("parabolic", 2, 2.0) == pytest.approx(0.75)
    assert asym.predicted_qmean_limit("elliptic", 2, 2.0, 0.5, 1.0) == pytest.approx(
        asym.c_constant(2, 2.0) / math.sqrt(0.5))


# ---------------------------------------------------------------- fits


def test_fit_through_origin_recovers_coefficient():
    s = np.array([2.0 ** -k for k in range(3, 10)])
    y = 0.7 * asym.rate_function("eps_log_eps", s)
    fit = asym.fit_through_origin(asym.rate_function("eps_log_eps", s), y, "eps_log_eps")
    assert fit.coef == pytest.approx(0.7) and fit.r2 == pytest.approx(1.0)
    with pytest.raises(FitError):
        asym.fit_through_origin([1.0, 2.0], [1.0, 2.0])


def test_two_term_fit():
    s = np.array([4.0 ** -k for k in range(2, 8)])
    rho = asym.rate_function("t_log_t", s)
    y = -1.1 * rho + 1.8 * s
    fit = asym.fit_two_term(rho, s, y, "t_log_t")
    assert fit.coef == pytest.approx(-1.1) and fit.extra["linear_coef"] == pytest.approx(1.8)
    assert fit.r2 == pytest.approx(1.0)


def test_fit_power():
    s = np.geomspace(1e-4, 1e-1, 8)
    assert asym.fit_power(s, 3.0 * s ** 1.5).coef == pytest.approx(1.5)


def test_select_model_and_tie():
    s = np.array([2.0 ** -k for k in range(3, 12)])
    y = 0.5 * s
    best, fits = asym.select_model(s, y, ["eps", "eps_log_eps"])
    assert best == "eps"
    best, _ = asym.select_model(s, y, ["eps", "eps"])
    assert best == "tie"


def test_richardson_exact_for_model():
    p = np.array([0.1, 0.05, 0.025])
    lim, err, ex = asym.richardson(p, 2.0 + 3.0 * p, 1.0)
    assert lim == pytest.approx(2.0) and err == pytest.approx(0.0, abs=1e-12)
    lim, _, _ = asym.richardson(p, 1.0 - p ** 0.5, 0.5)
    assert lim == pytest.approx(1.0)


# ---------------------------------------------------------------- regimes


@pytest.mark.parametrize("lam,Lam,want", [(1.0, 2.5, "eps_log_eps"), (1.0, 2.0, "eps_loglog_psi"),
                                          (1.0, 1.5, "eps_log_psi"), (1.0, 4.0, "eps_log_eps")])
def test_detector_agrees_with_table_plus(lam, Lam, want):
    model, info = asym.psi_sensitivity("plus", 3, lam, Lam)
    assert model == want == asym.theorem_rate_model("elliptic", "plus", 3, lam, Lam)


def test_table_minus_and_parabolic():
    assert asym.theorem_rate_model("elliptic", "minus", 2, 1.0, 1.0) == "eps_loglog_psi"
    assert asym.theorem_rate_model("elliptic", "minus", 3, 1.0, 2.0) == "eps_log_psi"
    assert asym.theorem_rate_model("parabolic", "plus", 3, 1.0, 2.0) == "t_log_psi"
    with pytest.raises(InputError):
        asym.theorem_rate_model("hyperbolic", "plus", 3, 1.0, 2.0)


def test_radial_sweep_validation():
    p = P(1.0, 2.0)
    with pytest.raises(InputError):
        asym.varadhan_sweep("elliptic", geometry.Ball((0, 0), 1.0), "minus", [[0, 0]], [0.1, 0.2], p)
    with pytest.raises(InputError):
        asym.varadhan_sweep("elliptic", geometry.ConvexPolygon.rectangle(0, 0, 1, 1), "minus",
                            [[0.5, 0.5]], [0.2, 0.1], p, source="radial")
    with pytest.raises(InputError):
        asym.varadhan_sweep("elliptic", geometry.Ball((0, 0), 1.0), "minus", [[2.0, 0]], [0.2, 0.1], p)


def test_fd_sweep_tracks_radial():
    p = P(1.0, 2.0)
    dom = geometry.Ball((0, 0), 1.0)
    seq = [0.4, 0.3, 0.2]
    a = asym.varadhan_sweep("elliptic", dom, "minus", [[0.0, 0.0]], seq, p, source="fd")
    b = asym.varadhan_sweep("elliptic", dom, "minus", [[0.0, 0.0]], seq, p, source="radial")
    assert np.allclose(a.observed, b.observed, atol=0.01)


def test_ball_weights_cover_disk_area():
    from pucci_asym import fd
    g = fd.Grid(geometry.ConvexPolygon.rectangle(-2, -2, 2, 2), 0.05, reach=1)
    idx, w = asym.ball_weights(g, (0.1, 0.2), 1.0)
    assert w.sum() == pytest.approx(math.pi, rel=2e-3)


def test_worker_count(monkeypatch):
    monkeypatch.setenv("PUCCI_ASYM_THREADS", "3")
    assert asym.worker_count() == 3
    monkeypatch.setenv("PUCCI_ASYM_THREADS", "zero")     # unparsable: fall back to the core count
    assert 1 <= asym.worker_count() <= 8
