import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from fmb import bodies as bd
from fmb import specfun as sf

mpmath.mp.dps = 20


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------


def test_gamma_family_at_one():
    g = sf.gamma_family(1.0)
    assert g.gamma == pytest.approx(1.0, abs=1e-15)
    assert g.ln_gamma == pytest.approx(0.0, abs=1e-15)
    assert g.digamma == pytest.approx(-0.5772156649015329, rel=1e-13)


def test_gamma_half_and_two_and_half():
    assert sf.gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert sf.gamma(2.5) == pytest.approx(1.5 * 0.5 * math.sqrt(math.pi), rel=1e-14)
    assert sf.gamma(2.5) == pytest.approx(1.3293403882, rel=1e-10)


@pytest.mark.parametrize("x", [1e-3, 0.1, 0.7, 1.3, 3.7, 10.5, 57.2, 169.5])
def test_gamma_family_matches_mpmath(x):
    g = sf.gamma_family(x)
    assert g.gamma == pytest.approx(float(mpmath.gamma(x)), rel=1e-12)
    assert g.ln_gamma == pytest.approx(float(mpmath.loggamma(x)), rel=1e-12, abs=1e-14)
    assert g.digamma == pytest.approx(float(mpmath.digamma(x)), rel=1e-12)


@pytest.mark.parametrize("x", [-0.5, -1.3, -2.7, -7.25])
def test_reflection_region_matches_mpmath(x):
    assert sf.gamma(x) == pytest.approx(float(mpmath.gamma(x)), rel=1e-12)
    assert sf.digamma(x) == pytest.approx(float(mpmath.digamma(x)), rel=1e-11)


@pytest.mark.parametrize("x", [0.0, -1.0, -4.0])
def test_poles_raise(x):
    with pytest.raises(sf.PoleError):
        sf.gamma(x)
    with pytest.raises(sf.PoleError):
        sf.digamma(x)


@pytest.mark.parametrize("m,x", [(1, 0.3), (1, 4.5), (2, 1.7), (2, 12.0)])
def test_polygamma_matches_scipy(m, x):
    assert sf.polygamma(m, x) == pytest.approx(float(special.polygamma(m, x)), rel=1e-11)


@settings(max_examples=60, deadline=None)
@given(st.floats(min_value=0.01, max_value=150.0))
def test_gamma_recurrence(x):
    assert sf.gamma(x + 1.0) == pytest.approx(x * sf.gamma(x), rel=1e-12)
    assert sf.digamma(x + 1.0) == pytest.approx(sf.digamma(x) + 1.0 / x, rel=1e-11, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.99))
def test_sine_reflection_product(p):
    lhs = math.sin(math.pi * p / 2.0) * sf.gamma(1.0 - p / 2.0) * sf.gamma(1.0 + p / 2.0)
    assert lhs == pytest.approx(math.pi * p / 2.0, rel=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.floats(min_value=0.01, max_value=1.99).filter(lambda p: abs(p - 1.0) > 1e-3))
def test_gamma_cos_sin_product(p):
    lhs = sf.gamma(1.0 - p) * math.sin(math.pi * p / 2.0) * sf.gamma(p) * math.cos(math.pi * p / 2.0)
    assert lhs == pytest.approx(math.pi / 2.0, rel=1e-10)


def test_gamma_cos_and_sin_continuous_through_poles():
    # Gamma(z) cos(pi z / 2) is finite at z = -1; Gamma(z) sin(pi z / 2) at z = 0
    assert sf.gamma_cos(-1.0) == pytest.approx(float(mpmath.limit(lambda z: mpmath.gamma(z) * mpmath.cos(mpmath.pi * z / 2), -1)), rel=1e-10)
    assert sf.gamma_sin(0.0) == pytest.approx(math.pi / 2.0, rel=1e-14)


def test_harmonic_and_ball_volume():
    assert sf.harmonic(4) == pytest.approx(1 + 1 / 2 + 1 / 3 + 1 / 4, rel=1e-15)
    assert sf.harmonic(0.5) == pytest.approx(2.0 - 2.0 * math.log(2.0), rel=1e-12)
    for n in (1, 2, 3):
        assert sf.unit_ball_volume(n) == pytest.approx(bd.volume(bd.ball(n)), rel=1e-12)


# ---------------------------------------------------------------------------
# Coefficients
# ---------------------------------------------------------------------------


def test_coefficient_examples():
    assert sf.coefficients(2, 2.0).m_p == 1.0
    assert sf.coefficients(2, 1.0).kappa_p == pytest.approx(1.0 / 5.0, rel=1e-14)
    assert sf.coefficients(2, 1.0).lambda_p == pytest.approx(1.0 / (2.0 * math.pi), rel=1e-14)
    assert sf.coefficients(2, 1.5).d_p == pytest.approx(0.7089815, rel=1e-6)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_m_at_dimension_is_one(n):
    assert sf.m_coefficient(n, float(n)) == 1.0


def test_m_general_branch_matches_mpmath():
    for n, p in [(2, 0.5), (2, 2.5), (3, 1.3)]:
        q = p - n
        oracle = -2 / mpmath.pi * mpmath.gamma(q + 1) * mpmath.sin(mpmath.pi * q / 2)
        assert sf.m_coefficient(n, p) == pytest.approx(float(oracle), rel=1e-12)


def test_m_even_offset_branch():
    # p - n = 2k: (2k)! (-1)^k
    assert sf.m_coefficient(2, 4.0) == -2.0
    assert sf.m_coefficient(2, 6.0) == 24.0


def test_not_applicable_markers():
    b = sf.coefficients(2, 1.5)
    assert b.lambda_p is sf.NOT_APPLICABLE
    assert b.kappa_s_p is sf.NOT_APPLICABLE
    assert sf.coefficients(2, 0.5).d_p is sf.NOT_APPLICABLE
    assert not sf.NOT_APPLICABLE


@pytest.mark.parametrize("n", [1, 2, 3])
def test_kappa_continuous_at_zero(n):
    limit = math.exp(-sf.harmonic(2 * n))
    assert sf.kappa(n, 0.0) == pytest.approx(limit, rel=1e-14)
    for p in np.geomspace(1e-9, 1e-5, 5):
        assert sf.kappa(n, p) == pytest.approx(limit, rel=1e-9 + 10 * p)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_lambda_continuous_at_one(n):
    limit = 1.0 / (math.pi * n)
    assert sf.lambda_coefficient(n, 1.0) == pytest.approx(limit, rel=1e-15)
    for eps in np.geomspace(1e-9, 1e-6, 4):
        assert sf.lambda_coefficient(n, 1.0 - eps) == pytest.approx(limit, rel=1e-9 + 50 * eps)


def test_lambda_matches_mpmath():
    n, p = 2, 0.5
    binom = mpmath.binomial(2 * n - p, 2 * n)
    oracle = (binom / (mpmath.gamma(p + 1) * mpmath.cos(mpmath.pi * p / 2))) ** (1 / p)
    assert sf.lambda_coefficient(n, p) == pytest.approx(float(oracle), rel=1e-12)


def test_binom_radial_and_kappa_s_match_mpmath():
    for n, p in [(2, 1.0), (2, 0.5), (3, -0.5), (2, 5.0)]:
        oracle = mpmath.binomial(n + p, n) ** (1 / mpmath.mpf(p))
        assert sf.binom_radial(n, p) == pytest.approx(float(oracle), rel=1e-12)
    assert sf.binom_radial(2, 0.0) == pytest.approx(math.exp(1.5), rel=1e-14)
    for s, p in [(1.0, 2.0), (0.5, -0.5), (2.0, 3.0)]:
        oracle = mpmath.binomial(1 / mpmath.mpf(s) + 1 + p, p) ** (-1 / mpmath.mpf(p))
        assert sf.kappa_s(1, p, s) == pytest.approx(float(oracle), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.floats(min_value=1.001, max_value=1.999))
def test_d_positive_on_unit_interval(p):
    assert sf.d_coefficient(p) > 0.0


# ---------------------------------------------------------------------------
# Bessel functions and Mellin closed forms
# ---------------------------------------------------------------------------


def test_bessel_examples():
    assert sf.bessel_j(1.0, 0.0) == 0.0
    assert sf.bessel_j(0.0, 0.0) == 1.0
    assert sf.bessel_j(1.0, 5.0) == pytest.approx(-0.3275791376, abs=1e-10)


def test_bessel_matches_poisson_integral():
    # J_mu(t) = (t/2)^mu / (sqrt(pi) Gamma(mu + 1/2)) int_{-1}^{1} (1-s^2)^(mu-1/2) cos(ts) ds
    for mu, t in [(0.0, 3.0), (1.0, 5.0), (1.5, 7.5), (2.5, 20.0)]:
        integral = integrate.quad(lambda s: math.cos(t * s), -1.0, 1.0, weight="alg", wvar=(mu - 0.5, mu - 0.5), epsabs=1e-14)[0]
        oracle = (t / 2.0) ** mu / (math.sqrt(math.pi) * math.gamma(mu + 0.5)) * integral
        assert sf.bessel_j(mu, t) == pytest.approx(oracle, abs=1e-12)


@pytest.mark.parametrize("mu", [0.0, 0.5, 1.0, 1.5, 3.2, 20.0])
def test_bessel_absolute_accuracy_up_to_fifty(mu):
    t = np.linspace(0.0, 50.0, 1001)
    assert np.max(np.abs(sf.bessel_j(mu, t) - special.jv(mu, t))) <= 1e-10


@pytest.mark.parametrize("mu", [0.0, 1.0, 2.5])
def test_bessel_envelope_accuracy_large_t(mu):
    t = np.geomspace(50.0, 1e4, 400)
    envelope = np.sqrt(2.0 / (np.pi * t))
    assert np.max(np.abs(sf.bessel_j(mu, t) - special.jv(mu, t)) / envelope) <= 1e-8


def test_bessel_rejects_negative_arguments():
    with pytest.raises(sf.DomainError):
        sf.bessel_j(-1.0, 1.0)
    with pytest.raises(sf.DomainError):
        sf.bessel_j(1.0, -1.0)


def test_bessel_mellin_sq_examples():
    assert sf.bessel_mellin_sq(1.0, -1.0) == pytest.approx(4.0 / (3.0 * math.pi), rel=1e-13)
    assert sf.bessel_mellin_sq(1.0, -1.0) == pytest.approx(0.4244131816, rel=1e-9)
    limit = sf.bessel_mellin_sq(1.0, -1e-9)
    assert math.isfinite(limit)
    assert limit == pytest.approx(sf.bessel_mellin_sq(1.0, -1e-7), rel=1e-6)


def _mellin_oracle(mu, nu):
    # J^2 ~ 1/(pi t) + oscillation; the mean part is integrated analytically on [1, inf)
    f = lambda t: mpmath.besselj(mu, t) ** 2 * t ** (nu - 1)
    osc = lambda t: f(t) - t ** (nu - 2) / mpmath.pi
    head = mpmath.quad(f, [0, 1])
    tail = mpmath.quadosc(osc, [1, mpmath.inf], period=mpmath.pi)
    return float(head + tail + 1 / (mpmath.pi * (1 - nu)))


@pytest.mark.parametrize("mu,nu", [(1.0, -1.0), (1.5, -2.0), (0.5, 0.5), (2.0, -0.5), (3.0, 0.3)])
def test_bessel_mellin_sq_matches_mpmath_quadrature(mu, nu):
    assert sf.bessel_mellin_sq(mu, nu) == pytest.approx(_mellin_oracle(mu, nu), rel=1e-6)


@pytest.mark.parametrize("mu,nu", [(1.0, 1.0), (0.5, -1.0), (0.2, -0.5)])
def test_bessel_mellin_sq_domain(mu, nu):
    with pytest.raises(sf.DomainError):
        sf.bessel_mellin_sq(mu, nu)


def test_dirichlet_sine_examples():
    assert sf.dirichlet_sine(1.0, 1.5) == pytest.approx(math.sqrt(math.pi / 2.0), rel=1e-13)
    assert sf.dirichlet_sine(2.0, 1.5) == pytest.approx(math.sqrt(math.pi) / 2.0, rel=1e-13)
    assert sf.dirichlet_sine(1.0, 2.0 - 1e-9) == pytest.approx(1.0, rel=1e-6)


@pytest.mark.parametrize("a,p", [(0.5, 1.2), (1.0, 1.5), (3.0, 1.8)])
def test_dirichlet_sine_matches_fourier_sine_quadrature(a, p):
    head = integrate.quad(lambda x: math.sin(a * x), 0.0, 1.0, weight="alg", wvar=(p - 2.0, 0.0), epsabs=1e-14)[0]
    tail = mpmath.quadosc(lambda x: x ** (p - 2) * mpmath.sin(a * x), [1, mpmath.inf], omega=a)
    oracle = head + float(tail)
    assert sf.dirichlet_sine(a, p) == pytest.approx(oracle, rel=1e-7)


def test_dirichlet_sine_domain():
    with pytest.raises(sf.DomainError):
        sf.dirichlet_sine(1.0, 0.5)
    with pytest.raises(sf.DomainError):
        sf.dirichlet_sine(-1.0, 1.5)
