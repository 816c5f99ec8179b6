import math

import numpy as np
import pytest

from conftest import mixed_err, random_heun_params
from heunref import jet
from heunref.errors import DomainError, PropagationError
from heunref.oracle import (
    OracleSource,
    init_series,
    integrate,
    integrate_heun,
    ode_oracle,
    series_state,
)
from heunref.sources import SeriesSource, check_regular, heun, heun_prime, heun_second
from heunref.specfun import HeunParams, heun_eval, heun_series_coeffs


def test_starter_series_matches_recurrence(rng):
    for _ in range(20):
        p = random_heun_params(rng)
        c = init_series(p, 20)
        ref = heun_series_coeffs(p, 19).coeffs
        for u, v in zip(c, ref):
            assert abs(u - v) <= 1e-12 * max(1.0, abs(v))


def test_starter_refuses_far_points():
    with pytest.raises(DomainError):
        series_state(HeunParams(2, 0, 1, 1, 1, 1), 0.5)


def test_constant_solution_everywhere():
    p = HeunParams(2.0, 0.0, 0.0, 1.3, 0.7, 0.4)
    for y, yp in ode_oracle(p, None, [0.1, 0.5, 0.8]):
        assert y == pytest.approx(1.0, abs=1e-14)
        assert yp == pytest.approx(0.0, abs=1e-13)


def test_matches_series_for_reducible_parameters():
    al, be, ga = 1.3, 0.7, 0.9
    p = HeunParams(2.0, al * be, al, be, ga, al + be - 2 * ga + 1)
    xs = [0.1, 0.3, 0.5, 0.7]
    for x, (y, yp) in zip(xs, ode_oracle(p, None, xs)):
        hv = heun_eval(p, x)
        assert mixed_err(y, hv.value) < 1e-9
        assert mixed_err(yp, hv.deriv) < 1e-9


def test_refuses_to_cross_a_singular_point():
    p = HeunParams(2.0, 0.3, 1, 1, 1, 1)
    with pytest.raises(DomainError):
        ode_oracle(p, None, [0.5, 1.2])
    with pytest.raises(DomainError):
        integrate_heun(p, 0.5, (1.0, 0.0), 1.5)


def test_step_underflow_raises():
    # y' = y^2 blows up at x = 1
    f = lambda x, y, v: (y * y, 0.0)
    with pytest.raises(PropagationError):
        integrate(f, 0.0, (1.0, 0.0), 2.0)


def test_integrator_on_harmonic_oscillator():
    f = lambda x, y, v: (v, -y)
    y, v = integrate(f, 0.0, (0.0, 1.0), 3.0)
    assert y == pytest.approx(math.sin(3.0), abs=1e-10)
    assert v == pytest.approx(math.cos(3.0), abs=1e-10)


def test_oracle_source_beyond_the_disk():
    p = HeunParams(3.0, 0.2, 0.8, -0.3, 0.6, 0.5)
    src = OracleSource(p, (-5.0, -3.6))
    y, yp = src.state(-4.0)
    # one-shot oracle run must agree with the checkpointed query
    (y2, yp2), = ode_oracle(p, None, [-4.0])
    assert mixed_err(y, y2) < 1e-9 and mixed_err(yp, yp2) < 1e-9
    with pytest.raises(DomainError):
        src.state(-2.0)


def test_oracle_source_span_must_be_one_sided():
    with pytest.raises(DomainError):
        OracleSource(HeunParams(3.0, 0.2, 1, 1, 1, 1), (-0.5, 0.5))


def test_lifts_use_the_ode_for_second_derivative():
    p = HeunParams(2.0, 0.4, 1.2, 0.7, 0.8, 1.1)
    src = SeriesSource(p)
    x = 0.4
    y2 = jet.derivative(lambda t: heun_prime(src, t), x)
    assert y2 == pytest.approx(heun_second(src, x))
    y3 = jet.derivative(lambda t: jet.derivative(lambda s: heun_prime(src, s), t), x)
    fd = (heun_second(src, x + 1e-4) - heun_second(src, x - 1e-4)) / 2e-4
    assert mixed_err(float(y3), fd) < 1e-6
    assert jet.derivative(lambda t: heun(src, t), x) == heun_prime(src, x)


def test_second_derivative_refuses_singular_point():
    with pytest.raises(DomainError):
        check_regular(HeunParams(2.0, 0, 1, 1, 1, 1), 0.0)


def test_source_cache_is_bounded():
    src = SeriesSource(HeunParams(2.0, 0.4, 1.2, 0.7, 0.8, 1.1))
    src.cache_size = 8
    for x in np.linspace(-0.5, 0.5, 30):
        src.state(float(x))
    assert len(src._cache) == 8
