import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special as sps

from pucci_asym import special
from pucci_asym.errors import DomainError, InputError, ParameterError
from pucci_asym.special import ProfileParams


def direct_g(s, a, b):
    return integrate.quad(lambda th: math.exp(a * s * math.cos(th)) * math.sin(th) ** b, 0, math.pi,
                          epsabs=0, epsrel=1e-12, limit=200)[0]


def direct_f(s, a, b):
    # exp(-a s cosh) is below 1e-300 of its peak past this angle
    top = math.acosh(1.0 + 700.0 / (a * s))
    return integrate.quad(lambda th: math.exp(-a * s * math.cosh(th) + b * math.log(math.sinh(th))),
                          0, top, epsabs=0, epsrel=1e-12, limit=400)[0]


def test_params_validation():
    with pytest.raises(ParameterError):
        ProfileParams(0.0, 1.0)
    with pytest.raises(ParameterError):
        ProfileParams(1.0, -1.0)


def test_domain_errors():
    pp = ProfileParams(1.0, 1.0)
    with pytest.raises(DomainError):
        special.f_profile(0.0, pp)
    with pytest.raises(DomainError):
        special.g_profile(-1.0, pp)
    with pytest.raises(InputError):
        special.ode_residual_check("h", pp, 1.0)
    with pytest.raises(ParameterError):
        special.f_small_constant(0.5)


def test_g_at_zero_is_sine_integral():
    for b in (-0.5, 0.0, 1.0, 3.0):
        pp = ProfileParams(1.0, b)
        assert special.log_g_profile(0.0, pp) == pytest.approx(special.log_sine_power_integral(b), rel=1e-13)


@pytest.mark.parametrize("a,b,s", [(1.0, 0.3, 0.7), (2.0, 2.5, 3.0), (0.5, -0.5, 10.0), (3.0, 0.0, 0.05)])
def test_against_direct_quadrature(a, b, s):
    pp = ProfileParams(a, b)
    assert special.g_profile(s, pp).value == pytest.approx(direct_g(s, a, b), rel=1e-9)
    assert special.f_profile(s, pp).value == pytest.approx(direct_f(s, a, b), rel=1e-9)


def test_bessel_oracles():
    # b = 0 profiles are pi I_0 and K_0
    s = np.array([0.01, 0.3, 2.0, 30.0])
    pp = ProfileParams(1.0, 0.0)
    assert np.allclose(special.log_g_profile(s, pp), np.log(math.pi * sps.ive(0, s)) + s, rtol=1e-12)
    assert np.allclose(special.log_f_profile(s, pp), np.log(sps.kve(0, s)) - s, rtol=1e-12)


def test_log_form_survives_overflow():
    pp = ProfileParams(1.0, 1.0)
    for s in (800.0, 5000.0):
        assert special.log_g_profile(s, pp) == pytest.approx(s - math.log(s) + math.log1p(-math.exp(-2 * s)))
        assert special.log_f_profile(s, pp) == pytest.approx(-s - math.log(s))


def test_report_fields():
    rep = special.g_profile(1.0, ProfileParams(1.0, 1.0))
    assert rep.value == pytest.approx(2 * math.sinh(1.0))
    assert rep.evaluations > 0 and rep.abs_error_estimate >= 0
    assert 0 < rep.truncation_point <= math.pi


def test_small_constant_sign_matches_quadrature():
    for b in (-0.8, -0.5, -0.2):
        pp = ProfileParams(1.0, b)
        c = special.f_small_constant(b)
        assert c > 0
        assert special.f_profile(1e-20, pp).value == pytest.approx(c, rel=1e-3)


def test_small_branches():
    pp = ProfileParams(2.0, 1.5)
    s = 1e-5
    assert special.f_asymptotic_small(s, pp) == pytest.approx(math.gamma(1.5) * (2 * s) ** -1.5)
    assert special.f_asymptotic_small(s, ProfileParams(2.0, 0.0)) == pytest.approx(-math.log(2 * s))


def test_kernels():
    assert special.gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi))
    assert special.erfc_fn(0.0) == 1.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 6.0), st.floats(-0.9, 4.0), st.floats(0.05, 15.0))
def test_ode_residual_property(a, b, s):
    pp = ProfileParams(a, b)
    assert special.ode_residual_check("g", pp, s) <= 1e-5
    assert special.ode_residual_check("f", pp, s) <= 1e-5


@settings(max_examples=40, deadline=None)
@given(st.floats(0.2, 4.0), st.floats(-0.9, 4.0), st.floats(0.01, 20.0), st.floats(1.01, 2.0))
def test_monotonicity_property(a, b, s, factor):
    # g grows and f decays in sigma
    pp = ProfileParams(a, b)
    assert special.log_g_profile(s * factor, pp) > special.log_g_profile(s, pp)
    assert special.log_f_profile(s * factor, pp) < special.log_f_profile(s, pp)
