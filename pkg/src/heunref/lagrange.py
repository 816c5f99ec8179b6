"""Lagrangian identity machinery for the Heun equation.

For y'' + P y' + Q y = 0 with weight f = exp(int P) and any twice
differentiable h,

    d/dx [ f (y h' - h y') ] = f (h'' + P h' + Q h) y.

This module provides P, Q, the weight f, both sides of that identity and the
trial functions h used by the catalog.  All functions accept jets in place of
real arguments so callers can differentiate them exactly.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Callable, NamedTuple

from heunref import jet
from heunref.errors import (
    BranchError,
    ConstraintError,
    DegenerateParameterError,
    DomainError,
    IntervalError,
    ParameterDomainError,
)
from heunref.jet import apow, value
from heunref.sources import SeriesSource, heun, heun_p, heun_prime, heun_q, heun_second
from heunref.specfun import HeunParams, hyp2f1_defined, is_nonpositive_integer

Fn = Callable[[Any], Any]
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class CoefficientPair:
    p_at: Fn
    q_at: Fn
    singular_points: frozenset = field(default_factory=frozenset)

    @classmethod
    def from_params(cls, p: HeunParams) -> "CoefficientPair":
        return cls(
            p_at=lambda x: heun_p(p, x),
            q_at=lambda x: heun_q(p, x),
            singular_points=frozenset(p.singular_points),
        )

    def check(self, x: Any) -> None:
        if value(x) in self.singular_points:
            raise DomainError(f"x={value(x)!r} is a singular point")

    def dp_at(self, x: float) -> float:
        return jet.derivative(self.p_at, x)

    def dq_at(self, x: float) -> float:
        return jet.derivative(self.q_at, x)


def _power(b, e: float, strict: bool):
    if float(e).is_integer():
        return b ** int(e)
    if strict and value(b) < 0.0:
        raise BranchError(f"negative base {value(b)!r} raised to non-integer power {e!r}")
    return apow(b, e)


def weight_f(p: HeunParams, x, strict: bool = False):
    """x^gamma (x-1)^delta (x-a)^epsilon.

    Integer exponents keep the sign of their base; a non-integer power of a
    negative base is read as |base|^exponent (a constant multiple of the
    complex branch, hence still exp(int P)).  With ``strict`` such a power
    raises ``BranchError`` instead.
    """
    xv = value(x)
    if xv in (0.0, 1.0, p.a):
        raise DomainError(f"weight evaluated at the singular point x={xv!r}")
    return (
        _power(x, p.gamma, strict)
        * _power(x - 1.0, p.delta, strict)
        * _power(x - p.a, p.epsilon, strict)
    )


def _call(g: Any, x):
    return g(x) if callable(g) else g


def second_derivative_via_ode(cp: CoefficientPair, y: Any, yp: Any, x):
    """-P y' - Q y; refuses singular points."""
    cp.check(x)
    return -cp.p_at(x) * _call(yp, x) - cp.q_at(x) * _call(y, x)


class Method(enum.Enum):
    ELEMENTARY = "elementary"
    EQ2 = "eq2"
    EQ3 = "eq3"
    EQ4 = "eq4"
    CONJUGATE = "conjugate"
    CONSTANT = "constant"


@dataclass(frozen=True)
class HChoice:
    h_at: Fn
    h1_at: Fn
    h2_at: Fn
    method_tag: Method
    extra_singularities: frozenset = field(default_factory=frozenset)
    label: str = ""


def conway_lhs_integrand(cp: CoefficientPair, fw: Fn, h: HChoice, y: Any, yp: Any, x):
    cp.check(x)
    bracket = h.h2_at(x) + cp.p_at(x) * h.h1_at(x) + cp.q_at(x) * h.h_at(x)
    return fw(x) * bracket * _call(y, x)


def conway_rhs(fw: Fn, h: HChoice, y: Any, yp: Any, x):
    return fw(x) * (_call(y, x) * h.h1_at(x) - h.h_at(x) * _call(yp, x))


# -- method 1: elementary h -------------------------------------------------

class Branch(enum.Enum):
    SIN = "sin"
    COS = "cos"
    NONE = "none"


def _mono(c: float, n: int, x):
    """c*x**n, with the convention that a zero coefficient kills the term."""
    if c == 0.0:
        return 0.0 * x
    return c * x**n


def build_h_constant(c0: float = 1.0) -> HChoice:
    return HChoice(
        h_at=lambda x: c0 + 0.0 * x,
        h1_at=lambda x: 0.0 * x,
        h2_at=lambda x: 0.0 * x,
        method_tag=Method.CONSTANT,
        label=f"h = {c0!r}",
    )


def build_h_elementary(m: int, rho: float, ell: int, k: float, branch: Branch | str = Branch.NONE) -> HChoice:
    """h = x^m exp(rho x^ell) {sin(k x) | cos(k x) | 1} with closed-form
    first and second derivatives."""
    branch = Branch(branch)
    if m < 0 or ell < 0 or int(m) != m or int(ell) != ell:
        raise ParameterDomainError("m and ell must be nonnegative integers")
    m, ell = int(m), int(ell)

    def parts(x):
        u, u1, u2 = _mono(1.0, m, x), _mono(float(m), m - 1, x), _mono(float(m * (m - 1)), m - 2, x)
        s1 = _mono(rho * ell, ell - 1, x)
        s2 = _mono(rho * ell * (ell - 1), ell - 2, x)
        w = jet.exp(_mono(rho, ell, x)) if rho != 0.0 else 1.0 + 0.0 * x
        w1, w2 = w * s1, w * (s2 + s1 * s1)
        if branch is Branch.SIN:
            t, t1, t2 = jet.sin(k * x), k * jet.cos(k * x), -k * k * jet.sin(k * x)
        elif branch is Branch.COS:
            t, t1, t2 = jet.cos(k * x), -k * jet.sin(k * x), -k * k * jet.cos(k * x)
        else:
            t, t1, t2 = 1.0 + 0.0 * x, 0.0 * x, 0.0 * x
        return (u, u1, u2), (w, w1, w2), (t, t1, t2)

    def h0(x):
        (u, _, _), (w, _, _), (t, _, _) = parts(x)
        return u * w * t

    def h1(x):
        (u, u1, _), (w, w1, _), (t, t1, _) = parts(x)
        return u1 * w * t + u * w1 * t + u * w * t1

    def h2(x):
        (u, u1, u2), (w, w1, w2), (t, t1, t2) = parts(x)
        return (
            u2 * w * t + u * w2 * t + u * w * t2
            + 2.0 * (u1 * w1 * t + u1 * w * t1 + u * w1 * t1)
        )

    return HChoice(h0, h1, h2, Method.ELEMENTARY, label=f"x^{m} exp({rho} x^{ell}) {branch.value}({k} x)")


# -- method 3a: h'' + P h' = 0 -------------------------------------------

class Eq2Variant(enum.Enum):
    ELLIPTIC = "elliptic"
    DELTA0 = "delta0"
    EPS0 = "eps0"


def _near(u: float, v: float) -> bool:
    return abs(u - v) <= ZERO_TOL * max(1.0, abs(v))


def build_h_eq2(p: HeunParams, variant: Eq2Variant | str) -> HChoice:
    variant = Eq2Variant(variant)
    cp = CoefficientPair.from_params(p)
    a = p.a

    if variant is Eq2Variant.ELLIPTIC:
        for name, val in (("gamma", p.gamma), ("delta", p.delta), ("epsilon", p.epsilon)):
            if not _near(val, 0.5):
                raise ConstraintError("EQ2/ELLIPTIC", f"{name} = 1/2", f"got {val!r}")
        if a <= 1.0:
            raise ConstraintError("EQ2/ELLIPTIC", "a > 1", f"got a={a!r}")
        k = 1.0 / math.sqrt(a)
        scale = 2.0 / math.sqrt(a)

        def h0(x):
            return scale * jet.ellip_f(jet.asin(jet.sqrt(x)), k)

        def h1(x):
            return 1.0 / jet.sqrt(x * (1.0 - x) * (a - x))

        label = "(2/sqrt(a)) F(arcsin(sqrt(x)), 1/sqrt(a))"
    else:
        if variant is Eq2Variant.DELTA0:
            if not _near(p.delta, 0.0):
                raise ConstraintError("EQ2/DELTA0", "delta = 0", f"got {p.delta!r}")
            e, scale_z, label = p.epsilon, 1.0 / a, "x^tau 2F1(eps, tau; 1+tau; x/a)"
        else:
            if not _near(p.epsilon, 0.0):
                raise ConstraintError("EQ2/EPS0", "epsilon = 0", f"got {p.epsilon!r}")
            e, scale_z, label = p.delta, 1.0, "x^tau 2F1(delta, tau; 1+tau; x)"
        tau = 1.0 - p.gamma
        if abs(tau) < ZERO_TOL:
            raise DegenerateParameterError("tau = 1 - gamma vanishes; h collapses to a constant")
        if is_nonpositive_integer(1.0 + tau):
            raise DegenerateParameterError("1 + tau is a nonpositive integer")

        def h0(x):
            return apow(x, tau) * jet.hyp2f1(e, tau, 1.0 + tau, scale_z * x)

        def h1(x):
            return tau * apow(x, tau) / x * apow(1.0 - scale_z * x, -e)

    def h2(x):
        return -cp.p_at(x) * h1(x)

    return HChoice(h0, h1, h2, Method.EQ2, label=label)


# -- method 3b: P h' + Q h = 0 -------------------------------------------

class Discriminant(NamedTuple):
    delta: float
    k0: float
    k1: float
    k2: float
    degenerate: bool

    @property
    def sign(self) -> int:
        if self.degenerate:
            return 0
        scale = abs(self.k0 * self.k2) + 0.25 * self.k1 * self.k1
        if abs(self.delta) <= ZERO_TOL * max(scale, 1e-300):
            return 0
        return 1 if self.delta > 0 else -1


def k_coefficients(p: HeunParams) -> tuple[float, float, float]:
    """(k0, k1, k2) with P(x) x (x-1)(x-a) = k2 x^2 + k1 x + k0."""
    k2 = p.alpha + p.beta + 1.0
    k1 = -(p.a * (p.gamma + p.delta) + p.alpha + p.beta + 1.0 - p.delta)
    k0 = p.a * p.gamma
    return k0, k1, k2


def delta_discriminant(p: HeunParams) -> Discriminant:
    k0, k1, k2 = k_coefficients(p)
    return Discriminant(k0 * k2 - 0.25 * k1 * k1, k0, k1, k2, abs(k2) <= ZERO_TOL)


def k_poly(p: HeunParams, x):
    k0, k1, k2 = k_coefficients(p)
    return (k2 * x + k1) * x + k0


def k_roots(p: HeunParams) -> list[float]:
    """Real zeros of K, i.e. the points where P vanishes."""
    k0, k1, k2 = k_coefficients(p)
    if abs(k2) <= ZERO_TOL:
        return [] if abs(k1) <= ZERO_TOL else [-k0 / k1]
    disc = k1 * k1 - 4.0 * k0 * k2
    if disc < 0.0:
        return []
    s = math.sqrt(disc)
    # numerically stable pair
    t = -0.5 * (k1 + math.copysign(s, k1))
    if t == 0.0:
        return [-k1 / (2.0 * k2)]
    return sorted({t / k2, k0 / t})


def eq3_h_function(p: HeunParams) -> tuple[Fn, frozenset]:
    """h = exp(-int (alpha beta x - q)/K) by the sign of the discriminant.

    Returns the jet-aware function and the set of points where it is
    singular.  Powers of quantities that may be negative use |.|, which
    matches the logarithmic antiderivative ln|.|.
    """
    ab, q = p.alpha * p.beta, p.q
    disc = delta_discriminant(p)
    k0, k1, k2 = disc.k0, disc.k1, disc.k2
    roots = frozenset(k_roots(p))

    if disc.degenerate:
        if abs(k1) <= ZERO_TOL:
            if abs(k0) <= ZERO_TOL:
                raise DegenerateParameterError("K vanishes identically")
            # constant K: h = exp(-(ab x^2/2 - q x)/k0)
            return (lambda x: jet.exp(-(0.5 * ab * x * x - q * x) / k0)), roots
        c_lin = ab / k1
        c_log = (q + ab * k0 / k1) / k1
        return (lambda x: jet.exp(-c_lin * x) * apow(k1 * x + k0, c_log)), roots

    s = disc.sign
    lead = -ab / (2.0 * k2)
    num = ab * k1 + 2.0 * q * k2
    if s > 0:
        r = math.sqrt(disc.delta)

        def h(x):
            K = (k2 * x + k1) * x + k0
            return apow(K, lead) * jet.exp(num / (2.0 * k2 * r) * jet.atan((2.0 * k2 * x + k1) / (2.0 * r)))

        return h, roots
    if s == 0:
        x0 = -k1 / (2.0 * k2)
        C = (ab * x0 - q) / k2

        def h(x):
            return apow(x - x0, -ab / k2) * jet.exp(C / (x - x0))

        return h, frozenset({x0})
    r = math.sqrt(-disc.delta)
    ex = num / (4.0 * k2 * r)

    def h(x):
        K = (k2 * x + k1) * x + k0
        u = 2.0 * k2 * x + k1
        return apow(K, lead) * apow((u - 2.0 * r) / (u + 2.0 * r), ex)

    return h, roots


def build_h_eq3(p: HeunParams, interval: tuple[float, float] | None = None) -> HChoice:
    h0, sing = eq3_h_function(p)
    if interval is not None:
        lo, hi = sorted(interval)
        bad = [s for s in sing if lo <= s <= hi]
        if bad:
            raise IntervalError(f"h from P h' + Q h = 0 is singular at {bad} inside [{lo}, {hi}]")
    ab, q = p.alpha * p.beta, p.q

    def R(x):
        return (ab * x - q) / k_poly(p, x)

    def h1(x):
        return -R(x) * h0(x)

    def h2(x):
        k = k_poly(p, x)
        dk = jet.derivative(lambda t: k_poly(p, t), x)
        dR = (ab * k - (ab * x - q) * dk) / (k * k)
        r = R(x)
        return (r * r - dR) * h0(x)

    return HChoice(h0, h1, h2, Method.EQ3, extra_singularities=sing, label="exp(-int Q/P)")


# -- method 3c: h'' + Q h = 0 ---------------------------------------------

class Eq4Data(NamedTuple):
    rho: float
    omega: float
    alpha: tuple[float, float]
    beta: tuple[float, float]
    gamma: tuple[float, float]
    q: tuple[float, float]


def eq4_rho(p: HeunParams) -> float:
    disc = 1.0 - 4.0 * p.alpha * p.beta
    if disc <= 0.0:
        raise ParameterDomainError(f"1 - 4 alpha beta = {disc!r} must be positive for a real rho")
    return math.sqrt(disc)


def eq4_data(p: HeunParams) -> Eq4Data:
    """Parameters of the two transformed Heun functions solving h'' + Q h = 0
    (accessory parameters as obtained by direct substitution)."""
    ab = p.alpha * p.beta
    rho = eq4_rho(p)
    omega = 1.0 - ab
    base = (p.q - ab) / p.a + omega
    a1 = 0.5 * (1.0 + rho)
    a2 = 2.0 * ab / (1.0 + rho)
    return Eq4Data(
        rho=rho,
        omega=omega,
        alpha=(a1, a2),
        beta=(a1 + 1.0, a2 + 1.0),
        gamma=(1.0 + rho, 2.0 * a2),
        q=(base + rho, base - rho),
    )


def eq4_h_function(a: float, alpha_i: float, beta_i: float, gamma_i: float, q_i: float) -> Fn:
    """x -> |x|^(-alpha_i) (x - a) H_l(1/a, q_i; alpha_i, beta_i, gamma_i, 0; 1/x)."""
    src = SeriesSource(HeunParams(1.0 / a, q_i, alpha_i, beta_i, gamma_i, 0.0))

    def h(x):
        return apow(x, -alpha_i) * (x - a) * heun(src, 1.0 / x)

    return h


def q0_h_function(a: float, power: float, A: float, B: float, C: float) -> Fn:
    """x -> (x - a) |x - 1|^(-power) 2F1(A, B; C; (a-1)/(x-1))."""
    if not hyp2f1_defined(A, B, C):
        raise DegenerateParameterError(f"hypergeometric lower parameter {C!r} is a nonpositive integer")

    def h(x):
        return (x - a) * apow(x - 1.0, -power) * jet.hyp2f1(A, B, C, (a - 1.0) / (x - 1.0))

    return h


def build_h_eq4(p: HeunParams, i: int, q_zero: bool = False) -> HChoice:
    """The i-th solution (i = 1, 2) of h'' + Q h = 0, either through the
    transformed Heun function at 1/x or, for q = 0, through 2F1 at
    (a-1)/(x-1).  h' is the exact derivative of the closed form and
    h'' = -Q h."""
    if i not in (1, 2):
        raise ParameterDomainError("i must be 1 or 2")
    cp = CoefficientPair.from_params(p)
    rho = eq4_rho(p)
    if q_zero:
        if p.q != 0.0:
            raise ConstraintError("EQ4/q=0", "q = 0", f"got q={p.q!r}")
        if i == 1:
            A = 0.5 * (3.0 - rho)
            h0 = q0_h_function(p.a, A - 1.0, A, A - 1.0, 2.0 * (A - 1.0))
        else:
            A = 0.5 * (1.0 + rho)
            h0 = q0_h_function(p.a, A, A, A + 1.0, 2.0 * A)
        label = f"q=0 hypergeometric h_{i}"
    else:
        d = eq4_data(p)
        j = i - 1
        h0 = eq4_h_function(p.a, d.alpha[j], d.beta[j], d.gamma[j], d.q[j])
        label = f"transformed Heun h_{i}"

    def h1(x):
        return jet.derivative(h0, x)

    def h2(x):
        return -cp.q_at(x) * h0(x)

    return HChoice(h0, h1, h2, Method.EQ4, label=label)


# -- method 4: conjugate equations -----------------------------------------

class ConjugateKind(enum.Enum):
    NEGQ = "negq"
    ELLIPTIC_E = "elliptic_e"
    ELLIPTIC_E_X = "elliptic_e_x"


def build_h_conjugate(p: HeunParams, kind: ConjugateKind | str) -> HChoice:
    """NEGQ: H_l with q -> -q.  ELLIPTIC_E: E(sqrt(1-x^2)) with derivatives
    from dE/dk = (E-K)/k and the chain rule.  ELLIPTIC_E_X: E(x), which
    solves h'' + h'/x + h/(1-x^2) = 0."""
    kind = ConjugateKind(kind)
    if kind is ConjugateKind.NEGQ:
        src = SeriesSource(p.replace(q=-p.q))
        return HChoice(
            h_at=lambda x: heun(src, x),
            h1_at=lambda x: heun_prime(src, x),
            h2_at=lambda x: heun_second(src, x),
            method_tag=Method.CONJUGATE,
            label="H_l(a, -q; ...)",
        )

    def check(x) -> None:
        xv = value(x)
        if not (0.0 < abs(xv) < 1.0):
            raise DomainError(f"elliptic conjugate solution needs 0 < |x| < 1, got {xv!r}")

    if kind is ConjugateKind.ELLIPTIC_E:
        def h0(x):
            check(x)
            return jet.ellip_e(jet.sqrt(1.0 - x * x))

        def h1(x):
            check(x)
            k = jet.sqrt(1.0 - x * x)
            return (jet.ellip_e(k) - jet.ellip_k(k)) / k * (-x / k)

        def h2(x):
            return jet.derivative(h1, x)

        return HChoice(h0, h1, h2, Method.CONJUGATE, label="E(sqrt(1 - x^2))")

    def e0(x):
        check(x)
        return jet.ellip_e(x)

    def e1(x):
        check(x)
        return (jet.ellip_e(x) - jet.ellip_k(x)) / x

    def e2(x):
        return -e1(x) / x - e0(x) / (1.0 - x * x)

    return HChoice(e0, e1, e2, Method.CONJUGATE, label="E(x)")
