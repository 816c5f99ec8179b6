import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from heunref.specfun import HeunParams

settings.register_profile(
    "heunref",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("heunref")


def rel_err(got: float, want: float) -> float:
    return abs(got - want) / max(abs(want), 1e-300)


def mixed_err(got: float, want: float) -> float:
    return abs(got - want) / (1.0 + abs(want))


def random_heun_params(rng: np.random.Generator, a_choices=(2.0, 3.0, 4.0, 5.0, -1.5, 0.5, -3.0, 0.7)) -> HeunParams:
    while True:
        a = float(rng.choice(a_choices))
        vals = rng.uniform(0.2, 2.5, size=4)
        q = float(rng.uniform(-1.0, 1.0))
        gamma = float(vals[2])
        if abs(gamma - round(gamma)) < 0.05 and round(gamma) <= 0:
            continue
        return HeunParams(a, q, float(vals[0]), float(vals[1]), gamma, float(vals[3]))


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def central_difference(f, x: float, h: float = 1e-5) -> float:
    return (f(x - 2 * h) - 8 * f(x - h) + 8 * f(x + h) - f(x + 2 * h)) / (12 * h)


def is_close(a: float, b: float, tol: float) -> bool:
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)


BUILDERS = (
    "constant",
    "elementary",
    "eq2-elliptic",
    "eq2-delta0",
    "eq2-eps0",
    "eq3",
    "eq4-1",
    "eq4-2",
    "conj-negq",
    "conj-e",
    "conj-e-x",
)


def _non_integer(rng, lo, hi):
    while True:
        v = float(rng.uniform(lo, hi))
        if abs(v - round(v)) > 0.05:
            return v


def master_identity_case(rng: np.random.Generator, builder: str, n_points: int = 50):
    """Random (params, HChoice, source, points) for checking the master identity.

    Points stay inside the region where both the Heun solution and h are
    defined and smooth.
    """
    from heunref import lagrange as lg
    from heunref.catalog import longest_gap
    from heunref.oracle import OracleSource
    from heunref.sources import SeriesSource

    a = float(rng.choice((2.0, 3.0, 4.0, 5.0)))
    q = float(rng.uniform(-1.0, 1.0))
    al, be = float(rng.uniform(0.2, 2.5)), float(rng.uniform(0.2, 2.5))
    ga, de = _non_integer(rng, 0.2, 2.5), float(rng.uniform(0.2, 2.5))
    lo, hi = 0.05, 0.8
    if builder == "eq2-elliptic":
        al = float(rng.uniform(0.05, 0.45))
        be, ga, de = 0.5 - al, 0.5, 0.5
    elif builder == "eq2-delta0":
        de = 0.0
    elif builder == "eq2-eps0":
        de = al + be + 1.0 - ga
    elif builder.startswith("eq4"):
        al, be = float(rng.uniform(0.3, 1.2)), float(rng.uniform(-0.5, 0.15))
        ga, de = _non_integer(rng, 0.2, 1.0), float(rng.uniform(0.2, 1.0))
        lo, hi = -1.8 * a, -1.2 * a
    p = HeunParams(a, q, al, be, ga, de)

    if builder == "constant":
        h = lg.build_h_constant(float(rng.uniform(0.5, 2.0)))
    elif builder == "elementary":
        h = lg.build_h_elementary(
            int(rng.integers(0, 4)), float(rng.uniform(-1, 1)), int(rng.integers(0, 4)),
            float(rng.uniform(0.3, 2.0)), str(rng.choice(["sin", "cos", "none"])),
        )
    elif builder.startswith("eq2"):
        h = lg.build_h_eq2(p, builder.split("-")[1])
    elif builder == "eq3":
        _, sing = lg.eq3_h_function(p)
        lo, hi = longest_gap(lo, hi, list(sing) + lg.k_roots(p))
        h = lg.build_h_eq3(p, (lo, hi))
    elif builder.startswith("eq4"):
        h = lg.build_h_eq4(p, int(builder[-1]))
    elif builder == "conj-negq":
        h = lg.build_h_conjugate(p, "negq")
    elif builder == "conj-e":
        h = lg.build_h_conjugate(p, "elliptic_e")
    else:
        h = lg.build_h_conjugate(p, "elliptic_e_x")
    src = OracleSource(p, (lo, hi)) if lo < 0.0 else SeriesSource(p)
    pad = 0.01 * max(1.0, abs(lo), abs(hi))
    xs = [float(x) for x in rng.uniform(lo + pad, hi - pad, n_points)]
    return p, h, src, xs


def master_identity_errors(p, h, src, xs, step: float = 3e-4) -> list[float]:
    """Relative mismatch between d/dx of the Wronskian side and the integrand side."""
    from heunref import lagrange as lg
    from heunref.sources import heun, heun_prime

    cp = lg.CoefficientPair.from_params(p)
    fw = lambda t: lg.weight_f(p, t)
    y = lambda t: heun(src, t)
    yp = lambda t: heun_prime(src, t)
    rhs = lambda t: lg.conway_rhs(fw, h, y, yp, t)
    lhs = [lg.conway_lhs_integrand(cp, fw, h, y, yp, x) for x in xs]
    fd = [central_difference(rhs, x, step * max(1.0, abs(x))) for x in xs]
    scale = max(abs(v) for v in lhs + fd)
    return [abs(u - v) / max(abs(u), abs(v), 1e-6 * scale, 1e-300) for u, v in zip(fd, lhs)]
