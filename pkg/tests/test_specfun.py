import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import central_difference, mixed_err, rel_err
from heunref.errors import ConvergenceError, DomainError, ParameterDomainError
from heunref.specfun import (
    HeunParams,
    carlson_rd,
    carlson_rf,
    ellip_e_complete,
    ellip_f_incomplete,
    ellip_k_complete,
    heun_eval,
    heun_l,
    heun_l_prime,
    heun_series_coeffs,
    hyp2f1,
    hyp2f1_prime,
    hyp2f1_second,
)

K_LEMNISCATE = 1.8540746773013719  # K(1/sqrt 2) from the AGM
E_LEMNISCATE = 1.3506438810476755


def agm_k(k: float) -> float:
    a, b = 1.0, math.sqrt(1.0 - k * k)
    for _ in range(40):
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return math.pi / (2.0 * a)


# -- HeunParams ---------------------------------------------------------------

def test_epsilon_follows_fuchsian_condition():
    p = HeunParams(2, 0.3, 0.7, 1.3, 0.6, 0.9)
    assert p.epsilon == pytest.approx(0.7 + 1.3 + 1 - 0.6 - 0.9)
    with pytest.raises(AttributeError):
        p.epsilon = 0.0  # frozen


@pytest.mark.parametrize("a", [0.0, 1.0])
def test_rejects_confluent_a(a):
    with pytest.raises(ParameterDomainError):
        HeunParams(a, 0, 1, 1, 1, 1)


@pytest.mark.parametrize("gamma", [0.0, -1.0, -3.0])
def test_rejects_nonpositive_integer_gamma(gamma):
    with pytest.raises(ParameterDomainError):
        HeunParams(2, 0, 1, 1, gamma, 1)


def test_rejects_nonfinite():
    with pytest.raises(ParameterDomainError):
        HeunParams(2, math.nan, 1, 1, 1, 1)


def test_radius_and_replace():
    p = HeunParams(-0.4, 0.1, 1, 1, 1, 1)
    assert p.radius == pytest.approx(0.4)
    assert p.replace(q=-0.1).q == -0.1
    assert p.singular_points == {0.0, 1.0, -0.4}


# -- series coefficients ------------------------------------------------------

def test_first_coefficients():
    s = heun_series_coeffs(HeunParams(2, 1, 1, 1, 1, 0), 1)
    assert s.coeffs == (1.0, 0.5)
    assert s.radius == 1.0


def test_zeroth_coefficient_only():
    assert heun_series_coeffs(HeunParams(3, 0.2, 0.5, 0.5, 0.5, 0.5), 0).coeffs == (1.0,)


def test_constant_solution_coefficients():
    s = heun_series_coeffs(HeunParams(2, 0.0, 0.0, 1.7, 0.8, 0.4), 12)
    assert s.coeffs[0] == 1.0
    assert all(c == 0.0 for c in s.coeffs[1:])


def test_negative_order_rejected():
    with pytest.raises(ParameterDomainError):
        heun_series_coeffs(HeunParams(2, 0, 1, 1, 1, 1), -1)


def _ode_residual_coefficients(p: HeunParams, c: list[float]) -> list[float]:
    """Coefficients of x(x-1)(x-a) y'' + K y' + (ab x - q) y for the polynomial c."""
    y = np.polynomial.Polynomial(c)
    A = np.polynomial.Polynomial([0.0, p.a, -(1.0 + p.a), 1.0])
    B = np.polynomial.Polynomial([p.gamma * p.a, -p.gamma * (1 + p.a) - p.delta * p.a - p.epsilon,
                                  p.gamma + p.delta + p.epsilon])
    C = np.polynomial.Polynomial([-p.q, p.alpha * p.beta])
    return list((A * y.deriv(2) + B * y.deriv() + C * y).coef)


@given(
    a=st.sampled_from([2.0, 3.0, -1.5, 0.5, 4.0]),
    q=st.floats(-1, 1),
    alpha=st.floats(0.2, 2.5),
    beta=st.floats(0.2, 2.5),
    gamma=st.floats(0.2, 2.5),
    delta=st.floats(0.2, 2.5),
)
def test_coefficients_resubstitute_into_ode(a, q, alpha, beta, gamma, delta):
    p = HeunParams(a, q, alpha, beta, gamma, delta)
    n = 25
    c = list(heun_series_coeffs(p, n).coeffs)
    res = _ode_residual_coefficients(p, c)
    R = p.radius
    # the orders below the truncation vanish; compare against the size of the terms
    for k in range(n - 1):
        scale = max(abs(c[j]) * R ** (j - k) for j in range(max(0, k - 1), min(n, k + 2) + 1)) * (k + 2) ** 2
        scale *= max(1.0, abs(a), abs(q), alpha * beta, gamma + delta + abs(p.epsilon))
        assert abs(res[k]) * R**k <= 1e-13 * scale * R**k + 1e-300


def test_truncation_bound_is_geometric_tail():
    p = HeunParams(2, 0.3, 0.7, 1.3, 0.6, 0.9)
    s = heun_series_coeffs(p, 40, x=0.5)
    assert 0.0 < s.truncation_bound < 1e-6
    assert heun_series_coeffs(p, 40, x=0.0).truncation_bound == 0.0


# -- H_l ------------------------------------------------------------------------

def test_normalization_at_origin():
    p = HeunParams(2, 1, 1, 1, 1, 0)
    assert heun_l(p, 0.0) == 1.0
    assert heun_l_prime(p, 0.0) == pytest.approx(0.5)


def test_two_term_truncation():
    p = HeunParams(2, 1, 1, 1, 1, 0)
    assert abs(heun_l(p, 0.01) - 1.005) < 1e-4


def test_constant_solution():
    p = HeunParams(2, 0.0, 0.0, 1.7, 0.8, 0.4)
    for x in (-0.5, 0.3, 0.8):
        assert heun_l(p, x) == 1.0
        assert heun_l_prime(p, x) == 0.0


def test_reduces_to_gauss_function():
    # H_l(2, ab; a, b, g, a+b-2g+1; x) = 2F1(a/2, b/2; g; x(2-x))
    al, be, ga = 1.5, 0.5, 1.0
    p = HeunParams(2, al * be, al, be, ga, al + be - 2 * ga + 1)
    x = 0.2
    want = float(mpmath.hyp2f1(0.75, 0.25, 1, 0.36))
    assert rel_err(heun_l(p, x), want) < 1e-12
    t = al * be * (1 - x) / (2 * ga)
    want_d = t * float(mpmath.hyp2f1(1.75, 1.25, 2, 0.36))
    assert rel_err(heun_l_prime(p, x), want_d) < 1e-12


def test_refuses_outside_safe_disk():
    p = HeunParams(2, 0.3, 0.7, 1.3, 0.6, 0.9)
    with pytest.raises(DomainError):
        heun_l(p, 0.95)
    with pytest.raises(DomainError):
        heun_l(HeunParams(0.5, 0, 1, 1, 1, 1), 0.46)


def test_error_estimate_reported():
    hv = heun_eval(HeunParams(3, -0.4, 2.1, 0.3, 1.7, 0.5), 0.8)
    assert hv.error < 1e-12 * max(1.0, abs(hv.value))
    assert hv.terms > 10


def test_small_a_does_not_overflow():
    p = HeunParams(0.05, 0.2, 1.1, 0.9, 0.7, 1.2)
    v = heun_l(p, 0.04)
    assert math.isfinite(v)


def test_series_derivative_matches_finite_difference(rng):
    for _ in range(20):
        p = HeunParams(float(rng.choice([2, 3, -2])), rng.uniform(-1, 1), *rng.uniform(0.2, 2.5, 4))
        x = float(rng.uniform(-0.6, 0.6))
        fd = central_difference(lambda t: heun_l(p, t), x, 1e-3)
        assert mixed_err(heun_l_prime(p, x), fd) < 1e-9


# -- 2F1 --------------------------------------------------------------------------

def test_hyp2f1_examples():
    assert hyp2f1(0.3, 0.7, 1.1, 0.0) == 1.0
    assert rel_err(hyp2f1(1, 1, 2, 0.5), -math.log(0.5) / 0.5) < 1e-14
    assert hyp2f1(-1, 2, 3, 0.25) == pytest.approx(1 - 2 / 3 * 0.25, rel=1e-15)


def test_hyp2f1_prime_examples():
    assert hyp2f1_prime(0.3, 0.7, 1.1, 0.0) == pytest.approx(0.3 * 0.7 / 1.1)
    assert hyp2f1_prime(1, 1, 2, 0.5) == pytest.approx(0.5 * hyp2f1(2, 2, 3, 0.5), rel=1e-15)
    for z in (-3.0, 0.0, 0.7):
        assert hyp2f1_prime(-1, 2, 3, z) == pytest.approx(-2 / 3, rel=1e-14)


def test_hyp2f1_domain_errors():
    with pytest.raises(DomainError):
        hyp2f1(0.5, 0.5, 1.0, 1.0)
    with pytest.raises(DomainError):
        hyp2f1(0.5, 0.5, 1.0, 0.95)
    with pytest.raises(ParameterDomainError):
        hyp2f1(0.5, 0.5, -2.0, 0.2)


@given(
    a=st.floats(-2.5, 2.5),
    b=st.floats(-2.5, 2.5),
    c=st.floats(0.1, 3.0),
    z=st.floats(-5.0, 0.89),
)
def test_hyp2f1_against_mpmath(a, b, c, z):
    want = float(mpmath.hyp2f1(a, b, c, z))
    assert mixed_err(hyp2f1(a, b, c, z), want) < 1e-11


@given(a=st.floats(0.1, 2), b=st.floats(0.1, 2), c=st.floats(0.3, 3), z=st.floats(-2, 0.85))
def test_hyp2f1_symmetric_in_upper_parameters(a, b, c, z):
    assert mixed_err(hyp2f1(a, b, c, z), hyp2f1(b, a, c, z)) < 1e-12


def test_hyp2f1_prime_matches_numerical_derivative():
    for z in np.linspace(-2.0, 0.8, 15):
        fd = central_difference(lambda t: hyp2f1(0.4, 1.3, 1.7, t), float(z), 1e-3)
        assert mixed_err(hyp2f1_prime(0.4, 1.3, 1.7, float(z)), fd) < 1e-6


def test_hyp2f1_second_derivative():
    fd = central_difference(lambda t: hyp2f1_prime(0.4, 1.3, 1.7, t), 0.3, 1e-3)
    assert mixed_err(hyp2f1_second(0.4, 1.3, 1.7, 0.3), fd) < 1e-8


# -- Carlson and Legendre ----------------------------------------------------------

def test_carlson_examples():
    assert carlson_rf(1, 1, 1) == pytest.approx(1.0, rel=1e-15)
    assert carlson_rf(0, 1, 1) == pytest.approx(math.pi / 2, rel=1e-14)
    assert rel_err(carlson_rf(0, 1, 2), K_LEMNISCATE / math.sqrt(2)) < 1e-13


def test_carlson_domain():
    with pytest.raises(DomainError):
        carlson_rf(0, 0, 1)
    with pytest.raises(DomainError):
        carlson_rf(-1, 1, 1)
    with pytest.raises(DomainError):
        carlson_rd(1, 1, 0)


@given(x=st.floats(0, 10), y=st.floats(1e-3, 10), z=st.floats(1e-3, 10))
def test_carlson_against_mpmath(x, y, z):
    assert rel_err(carlson_rf(x, y, z), float(mpmath.elliprf(x, y, z))) < 1e-13
    assert rel_err(carlson_rd(x, y, z), float(mpmath.elliprd(x, y, z))) < 1e-13


@given(x=st.floats(0.01, 5), y=st.floats(0.01, 5), z=st.floats(0.01, 5))
def test_carlson_rf_symmetric(x, y, z):
    v = carlson_rf(x, y, z)
    for perm in ((y, x, z), (z, y, x), (x, z, y)):
        assert rel_err(carlson_rf(*perm), v) < 1e-14


def test_elliptic_examples():
    assert ellip_f_incomplete(0.0, 0.3) == 0.0
    assert ellip_f_incomplete(0.7, 0.0) == pytest.approx(0.7, rel=1e-15)
    assert rel_err(ellip_f_incomplete(math.pi / 2, 1 / math.sqrt(2)), K_LEMNISCATE) < 1e-13
    assert ellip_k_complete(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert ellip_e_complete(0.0) == pytest.approx(math.pi / 2, rel=1e-15)
    assert ellip_e_complete(1.0) == 1.0
    assert rel_err(ellip_k_complete(1 / math.sqrt(2)), agm_k(1 / math.sqrt(2))) < 1e-13
    assert rel_err(ellip_e_complete(1 / math.sqrt(2)), E_LEMNISCATE) < 1e-13


def test_elliptic_domain():
    with pytest.raises(DomainError):
        ellip_k_complete(1.0)
    with pytest.raises(DomainError):
        ellip_e_complete(1.5)
    with pytest.raises(DomainError):
        ellip_f_incomplete(2.0, 0.5)


@given(k=st.floats(0.0, 0.999))
def test_complete_integrals_against_mpmath(k):
    m = k * k
    assert rel_err(ellip_k_complete(k), float(mpmath.ellipk(m))) < 1e-13
    assert rel_err(ellip_e_complete(k), float(mpmath.ellipe(m))) < 1e-13


@given(phi=st.floats(0.0, math.pi / 2), k=st.floats(0.0, 0.99))
def test_incomplete_against_mpmath(phi, k):
    assert mixed_err(ellip_f_incomplete(phi, k), float(mpmath.ellipf(phi, k * k))) < 1e-13


@given(k=st.floats(0.0, 0.999))
def test_complete_equals_incomplete_at_quarter_period(k):
    assert ellip_f_incomplete(math.pi / 2, k) == ellip_k_complete(k)


def test_e_derivative_relation():
    # dE/dk = (E - K)/k under central differences
    for k in (0.2, 0.5, 0.8, 0.95):
        fd = central_difference(ellip_e_complete, k, 1e-4)
        want = (ellip_e_complete(k) - ellip_k_complete(k)) / k
        assert abs(fd - want) <= 1e-6 * max(1.0, abs(want))


def test_series_convergence_cap(monkeypatch):
    import heunref.specfun as sf

    monkeypatch.setattr(sf, "MAX_TERMS", 5)
    with pytest.raises(ConvergenceError) as info:
        sf.heun_eval(HeunParams(2, 0.3, 0.7, 1.3, 0.6, 0.9), 0.8)
    assert info.value.partial is not None
