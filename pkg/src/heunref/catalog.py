"""Hand-encoded indefinite-integral identities for Heun and related functions.

Every identity is stored twice over: the ``printed`` variant reproduces the
formula exactly as published (typos included), and further variants carry
candidate corrections, alternative readings of ambiguous notation, or
instantiations under a change of variable.  Nothing is silently repaired;
the verifier decides.

Each variant exposes ``integrand(ns, x)`` and ``antiderivative(ns, x)``.
Antiderivatives are written with jet-aware functions only, so their exact
derivative is available by forward-mode differentiation.

Real powers of possibly negative bases are written |b|^e (``apow``); both
sides of an identity carry the same power prefactors, so the common
rewriting is a constant phase and leaves the identity intact.
"""

from __future__ import annotations

import cmath
import enum
import fnmatch
import math
from dataclasses import dataclass, field
from types import SimpleNamespace
from typing import Any, Callable, Mapping

import numpy as np

from heunref import jet
from heunref.errors import (
    ConstraintError,
    DegenerateParameterError,
    HeunRefError,
    IntervalError,
    ParameterDomainError,
)
from heunref.jet import apow
from heunref.lagrange import (
    eq3_h_function,
    eq4_h_function,
    eq4_rho,
    k_coefficients,
    k_poly,
    k_roots,
    q0_h_function,
    weight_f,
)
from heunref.oracle import OracleSource
from heunref.sources import SeriesSource, heun, heun_p, heun_prime, heun_q
from heunref.specfun import HeunParams, heun_eval, hyp2f1, is_nonpositive_integer

HEUN_KEYS = ("a", "q", "alpha", "beta", "gamma", "delta")
Z_INTERVAL = (0.08, 0.85)
MARGIN = 0.05
MIN_LENGTH = 0.2


class Status(str, enum.Enum):
    KNOWN = "KNOWN"
    CLAIMED_NEW = "CLAIMED_NEW"


class VariantKind(str, enum.Enum):
    PRINTED = "printed"
    CORRECTION = "correction"
    READING = "reading"
    INSTANTIATION = "instantiation"


@dataclass(frozen=True)
class Free:
    """A sampled parameter: a closed interval, a finite set, or integers."""

    name: str
    lo: float
    hi: float
    default: float
    choices: tuple | None = None
    integer: bool = False

    def draw(self, rng: np.random.Generator) -> float:
        if self.choices is not None:
            return float(self.choices[int(rng.integers(len(self.choices)))])
        if self.integer:
            return int(rng.integers(int(self.lo), int(self.hi) + 1))
        return float(rng.uniform(self.lo, self.hi))

    def describe(self) -> str:
        if self.choices is not None:
            return f"{self.name} in {{{', '.join(f'{c:g}' for c in self.choices)}}}"
        kind = "integer " if self.integer else ""
        return f"{self.name} {kind}in [{self.lo:g}, {self.hi:g}]"


Params = dict
NsFn = Callable[[SimpleNamespace, Any], Any]


@dataclass(frozen=True)
class Variant:
    name: str
    kind: VariantKind
    note: str
    integrand: NsFn
    antiderivative: NsFn
    adapt: Callable[[Params], Params] | None = None
    interval: Callable[[SimpleNamespace], tuple[float, float]] | None = None
    setup: Callable[[SimpleNamespace], None] | None = None


@dataclass(frozen=True)
class Identity:
    id: str
    anchor: str
    status: Status
    constraints: str
    free: tuple[Free, ...]
    variants: tuple[Variant, ...]
    derive: Callable[[Params], Params] = lambda d: d
    check: Callable[[Params], None] = lambda d: None
    exclude: Callable[[Params], str | None] = lambda d: None
    interval: Callable[[SimpleNamespace], tuple[float, float]] = lambda ns: Z_INTERVAL
    setup: Callable[[SimpleNamespace], None] = lambda ns: None
    variable: str = "x"
    note: str = ""

    def variant(self, name: str) -> Variant:
        for v in self.variants:
            if v.name == name:
                return v
        raise KeyError(f"{self.id} has no variant {name!r}; known: {[v.name for v in self.variants]}")

    def defaults(self) -> Params:
        return {f.name: f.default for f in self.free}

    def manifest(self) -> dict:
        return {
            "id": self.id,
            "anchor": self.anchor,
            "status_note": self.status.value,
            "constraints": self.constraints,
            "variable": self.variable,
            "free_parameters": [f.describe() for f in self.free],
            "variants": [{"name": v.name, "kind": v.kind.value, "note": v.note} for v in self.variants],
        }


@dataclass(frozen=True)
class ConcreteIdentity:
    id: str
    variant: str
    params: Mapping[str, float]
    interval: tuple[float, float]
    ns: SimpleNamespace = field(repr=False)
    _integrand: NsFn = field(repr=False)
    _antiderivative: NsFn = field(repr=False)
    perturbation: float = 0.0

    def integrand(self, x: float) -> float:
        return float(self._integrand(self.ns, x))

    def antiderivative(self, x):
        r = self._antiderivative(self.ns, x)
        if self.perturbation:
            r = r + self.perturbation * x
        return r

    def derivative(self, x: float) -> float:
        return float(jet.derivative(self.antiderivative, float(x)))

    def perturbed(self, eps: float) -> "ConcreteIdentity":
        return ConcreteIdentity(
            self.id, self.variant, self.params, self.interval, self.ns,
            self._integrand, self._antiderivative, self.perturbation + eps,
        )


# -- shared helpers ---------------------------------------------------------

def heun_params(d: Mapping[str, float]) -> HeunParams:
    return HeunParams(*(float(d[k]) for k in HEUN_KEYS))


def family(p: HeunParams, x, s0: int, s1: int, s2: int):
    """x^(gamma+s0) (x-1)^(delta+s1) (x-a)^(epsilon+s2), positive-base form."""
    return weight_f(p, x) * x**s0 * (x - 1.0) ** s1 * (x - p.a) ** s2


def longest_gap(lo: float, hi: float, points, margin: float = MARGIN, min_len: float = MIN_LENGTH) -> tuple[float, float]:
    """Longest piece of [lo, hi] keeping ``margin`` away from ``points``."""
    cuts = sorted(s for s in points if lo - margin < s < hi + margin)
    pieces, start = [], lo
    for s in cuts:
        pieces.append((start, s - margin))
        start = s + margin
    pieces.append((start, hi))
    best = max(pieces, key=lambda ab: ab[1] - ab[0])
    if best[1] - best[0] < min_len:
        raise IntervalError(f"no interval of length {min_len} in [{lo}, {hi}] avoiding {cuts}")
    return best


def disk_interval(ns: SimpleNamespace) -> tuple[float, float]:
    r = min(1.0, abs(ns.a))
    return longest_gap(0.08, 0.9 * r - MARGIN, ())


def with_y(ns: SimpleNamespace) -> None:
    ns.p = heun_params(vars(ns))
    ns.y = SeriesSource(ns.p)


def H(ns, x):
    return heun(ns.y, x)


def Hp(ns, x):
    return heun_prime(ns.y, x)


def near_int_nonpos(v: float, tol: float = MARGIN) -> bool:
    n = round(v)
    return n <= 0 and abs(v - n) < tol


def _fix(d: Params, key: str, val: float, ident: str, rule: str) -> None:
    if key in d and d[key] is not None and abs(float(d[key]) - val) > 1e-12 * max(1.0, abs(val)):
        raise ConstraintError(ident, rule, f"{key}={d[key]!r} but the rule gives {val!r}")
    d[key] = val


HEUN_FREE = (
    Free("a", 2, 5, 2, choices=(2, 3, 4, 5)),
    Free("q", -1.0, 1.0, 0.3),
    Free("alpha", 0.2, 2.5, 0.7),
    Free("beta", 0.2, 2.5, 1.3),
    Free("gamma", 0.2, 2.5, 0.6),
    Free("delta", 0.2, 2.5, 0.9),
)


def _free(*names_or_free) -> tuple[Free, ...]:
    base = {f.name: f for f in HEUN_FREE}
    out = []
    for item in names_or_free:
        out.append(base[item] if isinstance(item, str) else item)
    return tuple(out)


def _heun_exclude(d: Params) -> str | None:
    if near_int_nonpos(d["gamma"]):
        return "gamma near a nonpositive integer"
    return None


# -- exponential-trigonometric h -------------------------------------------

def _heun2_coeffs(ns, k: float, printed: bool):
    al, be, ga, de, a, q = ns.alpha, ns.beta, ns.gamma, ns.delta, ns.a, ns.q
    m, ell = ns.m, ns.ell
    a2 = al + be + 2 * m + 1
    a0 = a * (ga + 2 * m)
    a1 = (a2 if printed else -a2) + de * (1 - a) - a0
    b4 = -k * k
    b3 = k * k * (a + 1)
    b2 = -a * k * k + al * be + m * (al + be + m)
    b0 = a * m * (m + ga - 1)
    b1 = m * (de * (1 - a) - al - be - m) - b0 - q
    c2 = al + be + ell + 2 * m
    c1 = de + a * (1 - ga - de + (ell + 2 * m if printed else -(ell + 2 * m))) - c2
    c0 = a * (ell + ga + 2 * m - 1)
    return (a0, a1, a2), (b0, b1, b2, b3, b4), (c0, c1, c2)


def _poly(cs, x):
    r = 0.0 * x
    for c in reversed(cs):
        r = r * x + c
    return r


def _heun2_parts(ns, x, printed: bool):
    k, rho, ell, a = ns.k, ns.rho, ns.ell, ns.a
    A, B, C = _heun2_coeffs(ns, k, printed)
    rl = rho * ell * x**ell
    cubic = (x - 1.0) * (x - a)
    p1 = k * _poly(A, x) + 2.0 * k * rl * cubic
    p2 = _poly(B, x) + rl * (_poly(C, x) + rl * cubic)
    return p1, p2


def _heun2(branch: str, printed: bool):
    def integrand(ns, x):
        p1, p2 = _heun2_parts(ns, x, printed)
        kx = ns.k * x
        if branch == "sin":
            F = x * p1 * jet.cos(kx) + p2 * jet.sin(kx)
        else:
            F = p2 * jet.cos(kx) - x * p1 * jet.sin(kx)
        ex = jet.exp(ns.rho * x**ns.ell)
        return family(ns.p, x, ns.m - 2, -1, -1) * ex * F * H(ns, x)

    def anti(ns, x):
        kx = ns.k * x
        qf = (ns.m + ns.rho * ns.ell * x**ns.ell) * H(ns, x) - x * Hp(ns, x)
        if branch == "sin":
            br = qf * jet.sin(kx) + ns.k * x * jet.cos(kx) * H(ns, x)
        else:
            br = qf * jet.cos(kx) - ns.k * x * jet.sin(kx) * H(ns, x)
        ex = jet.exp(ns.rho * x**ns.ell)
        return family(ns.p, x, ns.m - 1, 0, 0) * ex * br

    return integrand, anti


def _heun2_identity(branch: str) -> Identity:
    sign = "+" if branch == "sin" else "-"
    return Identity(
        id=f"ID-HEUN2-{branch.upper()}",
        anchor=(
            f"h = x^m exp(rho x^ell) {branch}(k x): weighted polynomial-trigonometric "
            f"integrand of H_l; antiderivative x^(gamma+m-1)(x-1)^delta(x-a)^eps exp(rho x^ell) "
            f"[q(x) {branch} {sign} k x ... H_l]"
        ),
        status=Status.CLAIMED_NEW,
        constraints="generic Heun parameters; m, ell nonnegative integers; rho, k real",
        free=_free(*HEUN_FREE) + (
            Free("m", 0, 3, 1, integer=True),
            Free("ell", 0, 3, 1, integer=True),
            Free("rho", -1.0, 1.0, 0.5),
            Free("k", 0.3, 2.0, 1.0),
        ),
        variants=(
            Variant("printed", VariantKind.PRINTED, "coefficients a1 and c1 as printed",
                    *_heun2(branch, True)),
            Variant("substituted-coefficients", VariantKind.CORRECTION,
                    "a1 = -a2 + delta(1-a) - a0 and c1 = delta + a(1-gamma-delta-ell-2m) - c2, "
                    "obtained by substituting h into h'' + P h' + Q h",
                    *_heun2(branch, False)),
        ),
        exclude=_heun_exclude,
        interval=disk_interval,
        setup=with_y,
    )


# -- constant h --------------------------------------------------------------

def _f12_integrand(ns, x):
    return family(ns.p, x, -1, -1, -1) * (ns.alpha * ns.beta * x - ns.q) * H(ns, x)


def _f12_anti(ns, x):
    return -family(ns.p, x, 0, 0, 0) * Hp(ns, x)


def _hfe_derive(d: Params) -> Params:
    al = d["alpha"]
    _fix(d, "q", al * (1 - al), "ID-HFE", "q = alpha(1-alpha)")
    _fix(d, "beta", 1 - al, "ID-HFE", "beta = 1-alpha")
    _fix(d, "gamma", 1.0, "ID-HFE", "gamma = 1")
    _fix(d, "delta", 0.0, "ID-HFE", "delta = 0")
    return d


def _hfe_check(d: Params) -> None:
    if d["alpha"] in (0.0, 1.0):
        raise ConstraintError("ID-HFE", "alpha not in {0, 1}", f"alpha={d['alpha']!r}")


def _hfe_integrand(ns, x):
    return H(ns, x)


def _hfe_anti(ns, x):
    return x * (ns.a - x) / (ns.alpha * (1 - ns.alpha)) * Hp(ns, x)


# -- elliptic h ----------------------------------------------------------------

def _hn_derive(d: Params) -> Params:
    _fix(d, "beta", 0.5 - d["alpha"], "ID-HN", "alpha + beta = 1/2")
    _fix(d, "gamma", 0.5, "ID-HN", "gamma = 1/2")
    _fix(d, "delta", 0.5, "ID-HN", "delta = 1/2")
    return d


def _hn_check(d: Params) -> None:
    if d["a"] <= 1.0:
        raise ConstraintError("ID-HN", "a > 1", f"a={d['a']!r}")


def _hn_F(ns, x):
    return jet.ellip_f(jet.asin(jet.sqrt(x)), 1.0 / math.sqrt(ns.a))


def _hn_integrand(ns, x):
    al, q = ns.alpha, ns.q
    r = jet.sqrt(x * (x - 1.0) * (x - ns.a))
    return (al * (1 - 2 * al) * x - 2 * q) / r * _hn_F(ns, x) * H(ns, x)


def _hn_anti(ns, x):
    r = jet.sqrt(x * (x - 1.0) * (x - ns.a))
    return math.sqrt(ns.a) * H(ns, x) - 2.0 * r * _hn_F(ns, x) * Hp(ns, x)


def _laut_check(d: Params) -> None:
    if d["a"] in (0.0, 0.25):
        raise ConstraintError("ID-LAUT", "a not in {0, 1/4}", f"a={d['a']!r}")


def _laut_exclude(d: Params) -> str | None:
    if abs(d["a"]) < 0.03 or abs(d["a"] - 0.25) < 0.03:
        return "a near 0 or 1/4"
    return None


def _laut_psi(z):
    return jet.asin(jet.sqrt(1.0 - jet.sqrt(1.0 - z)))


def _laut_integrand(ns, z):
    a = ns.a
    F = jet.ellip_f(_laut_psi(z), 1.0 / math.sqrt(2.0))
    return apow(z, -0.5) * apow(1.0 - z, -0.25) * F * jet.hyp2f1(a, 0.25 - a, 0.5, z)


def _laut_anti(ns, z):
    a = ns.a
    F = jet.ellip_f(_laut_psi(z), 1.0 / math.sqrt(2.0))
    return (
        math.sqrt(2.0) / (a * (4 * a - 1)) * jet.hyp2f1(a, 0.25 - a, 0.5, z)
        + 2.0 * apow(z, 0.5) * apow(1.0 - z, 0.75) * F * jet.hyp2f1(a + 1, 1.25 - a, 1.5, z)
    )


# -- hypergeometric h from h'' + P h' = 0 -----------------------------------

def _auf_tau_exclude(d: Params) -> str | None:
    tau = 1.0 - d["gamma"]
    if abs(tau) < MARGIN:
        return "tau = 1 - gamma near 0"
    if near_int_nonpos(1.0 + tau):
        return "1 + tau near a nonpositive integer"
    return _heun_exclude(d)


def _auf1_derive(d: Params) -> Params:
    _fix(d, "delta", 0.0, "ID-AUF1", "delta = 0 (so epsilon = alpha + beta + tau)")
    return d


def _auf2_derive(d: Params) -> Params:
    _fix(d, "delta", d["alpha"] + d["beta"] + 1.0 - d["gamma"], "ID-AUF2",
         "epsilon = 0 (so delta = alpha + beta + tau)")
    return d


def _auf1(c_shift_sign: float):
    def integrand(ns, x):
        p, tau, e = ns.p, 1.0 - ns.gamma, ns.p.epsilon
        F = jet.hyp2f1(e, tau, 1 + tau, x / p.a)
        pre = apow(x - p.a, e) / (x - p.a)
        return pre * (p.alpha * p.beta * x - p.q) / (x - 1.0) * F * H(ns, x)

    def anti(ns, x):
        p, tau, e = ns.p, 1.0 - ns.gamma, ns.p.epsilon
        F = jet.hyp2f1(e, tau, 1 + tau, x / p.a)
        F2 = jet.hyp2f1(e + 1, 1 + tau, 2 + c_shift_sign * tau, x / p.a)
        inner = tau * (F + e * x / (p.a * (1 + tau)) * F2) * H(ns, x) - x * F * Hp(ns, x)
        return apow(x - p.a, e) * inner

    return integrand, anti


def _auf2_integrand(ns, x):
    p, tau, d = ns.p, 1.0 - ns.gamma, ns.p.delta
    F = jet.hyp2f1(d, tau, 1 + tau, x)
    pre = apow(x - 1.0, d) / (x - 1.0)
    return pre * (p.alpha * p.beta * x - p.q) / (x - p.a) * F * H(ns, x)


def _auf2_anti(ns, x):
    p, tau, d = ns.p, 1.0 - ns.gamma, ns.p.delta
    F = jet.hyp2f1(d, tau, 1 + tau, x)
    F2 = jet.hyp2f1(d + 1, 1 + tau, 2 + tau, x)
    inner = tau * (F + d * x / (1 + tau) * F2) * H(ns, x) - x * F * Hp(ns, x)
    return apow(x - 1.0, d) * inner


# -- h from P h' + Q h = 0 ----------------------------------------------------

def _hh1_interval(ns) -> tuple[float, float]:
    lo, hi = disk_interval(ns)
    _, sing = eq3_h_function(heun_params(vars(ns)))
    return longest_gap(lo, hi, set(sing) | set(k_roots(heun_params(vars(ns)))))


def _hh1_exclude(d: Params) -> str | None:
    r = _heun_exclude(d)
    if r:
        return r
    p = heun_params(d)
    if abs(k_coefficients(p)[2]) < MARGIN:
        return "leading coefficient of K near 0"
    try:
        _hh1_interval(SimpleNamespace(**d))
    except IntervalError as exc:
        return str(exc)
    return None


def _hh1_setup(ns) -> None:
    with_y(ns)
    ns.h, _ = eq3_h_function(ns.p)


def _hh1_integrand(ns, x):
    p = ns.p
    P = heun_p(p, jet.seed(x))
    Q = heun_q(p, jet.seed(x))
    w = Q.v * P.d - P.v * Q.d
    factor = (Q.v * Q.v + w) / (P.v * P.v)
    return weight_f(p, x) * ns.h(x) * factor * H(ns, x)


def _hh1_anti(ns, x):
    p = ns.p
    return -weight_f(p, x) * ns.h(x) * (heun_q(p, x) / heun_p(p, x) * H(ns, x) + Hp(ns, x))


def _hhh1_consts(ns):
    a, b, c = ns.a, ns.b, ns.c
    rho1 = (1 + 2 * (a + b + 2 * a * b)) / (2 * (1 - c + 2 * (a + b + a * b)))
    rho2 = (1 + 2 * (a + b)) / (2 * c)
    rho3 = 2 * c / (2 * (a + b + a * b) - c + 1)
    omega = 2 * a * b / (1 + 2 * (a + b))
    return rho1, rho2, rho3, omega


def _hhh1_exclude(d: Params) -> str | None:
    a, b, c = d["a"], d["b"], d["c"]
    if abs(1 - c + 2 * (a + b + a * b)) < MARGIN:
        return "1 - c + 2(a+b+ab) near 0"
    try:
        _hhh1_interval(SimpleNamespace(**d))
    except IntervalError as exc:
        return str(exc)
    return None


def _hhh1_interval(ns) -> tuple[float, float]:
    _, rho2, _, _ = _hhh1_consts(ns)
    pts = [1.0 / rho2] if rho2 != 0 else []
    return longest_gap(*Z_INTERVAL, pts)


def _hhh1_integrand(ns, z):
    a, b, c = ns.a, ns.b, ns.c
    rho1, rho2, _, omega = _hhh1_consts(ns)
    u = 1.0 - rho2 * z
    return (
        apow(z, c) * apow(1.0 - z, a + b - c) * (1.0 - rho1 * z)
        * apow(u, -omega) / (u * u) * jet.hyp2f1(a, b, c, z)
    )


def _hhh1_anti(ns, z):
    a, b, c = ns.a, ns.b, ns.c
    _, rho2, rho3, omega = _hhh1_consts(ns)
    u = 1.0 - rho2 * z
    br = jet.hyp2f1(a, b, c, z) / u - jet.hyp2f1(a + 1, b + 1, c + 1, z)
    return rho3 * apow(z, c) * apow(1.0 - z, a + b + 1 - c) * apow(u, -omega) * br


def _hhh1n_consts(ns):
    a, b = ns.a, ns.b
    lam = 2 * (2 * a + 2 * b + 1) / (2 * (2 * a * b + a + b) + 1)
    xi = 2 * a * b / (2 * a + 2 * b + 1)
    return lam, xi


def _hhh1n_exclude(d: Params) -> str | None:
    a, b = d["a"], d["b"]
    if abs(2 * (2 * a * b + a + b) + 1) < MARGIN or abs(2 * a + 2 * b + 1) < MARGIN:
        return "normalising constant near a pole"
    return None


def _hhh1n_integrand(ns, z):
    a, b = ns.a, ns.b
    _, xi = _hhh1n_consts(ns)
    s = a + b + 0.5
    return apow(z, s) * apow(1.0 - z, -1.5 - xi) * jet.hyp2f1(a, b, s, z)


def _hhh1n_anti(ns, z):
    a, b = ns.a, ns.b
    lam, xi = _hhh1n_consts(ns)
    s = a + b + 0.5
    r = jet.sqrt(1.0 - z)
    br = jet.hyp2f1(a, b, s, z) / r - r * jet.hyp2f1(a + 1, b + 1, s + 1, z)
    return lam * apow(z, s) * apow(1.0 - z, -xi) * br


def _hhh1nt_consts(ns):
    b, c = ns.b, ns.c
    bb = b * (2 * b + 1)
    return 2 * c / (bb + c), bb / (bb + c), bb / (2 * c)


def _hhh1nt_exclude(d: Params) -> str | None:
    b, c = d["b"], d["c"]
    if abs(b * (2 * b + 1) + c) < MARGIN:
        return "b(2b+1) + c near 0"
    return None


def _hhh1nt_integrand(ns, z):
    b, c = ns.b, ns.c
    _, p1, p2 = _hhh1nt_consts(ns)
    return (
        apow(z, c) * apow(1.0 - z, -c - 0.5) * (1.0 - p1 * z) * jet.exp(-p2 * z)
        * jet.hyp2f1(-b - 0.5, b, c, z)
    )


def _hhh1nt_anti(ns, z):
    b, c = ns.b, ns.c
    lam1, _, p2 = _hhh1nt_consts(ns)
    br = jet.hyp2f1(-b + 0.5, b + 1, c + 1, z) - jet.hyp2f1(-b - 0.5, b, c, z)
    return lam1 * apow(z, c) * apow(1.0 - z, 0.5 - c) * jet.exp(-p2 * z) * br


# -- h from h'' + Q h = 0 ------------------------------------------------------

HH_FREE = (
    Free("a", 2, 5, 2, choices=(2, 3, 4, 5)),
    Free("q", -1.0, 1.0, 0.3),
    Free("alpha", 0.3, 1.2, 0.7),
    Free("beta", -0.5, 0.15, -0.2),
    Free("gamma", 0.2, 1.0, 0.6),
    Free("delta", 0.2, 1.0, 0.5),
)


def _hh_exclude(d: Params) -> str | None:
    r = _heun_exclude(d)
    if r:
        return r
    ab = d["alpha"] * d["beta"]
    if 1.0 - 4.0 * ab <= 0.0:
        return "1 - 4 alpha beta <= 0"
    rho = math.sqrt(1.0 - 4.0 * ab)
    if abs(1.0 - rho) < 0.1 or near_int_nonpos(1.0 - rho, 0.1):
        return "1 - rho near a nonpositive integer"
    return None


def _hh_check(d: Params) -> None:
    if d["a"] <= 1.0:
        raise ConstraintError("ID-HEUNHH", "a > 1", f"a={d['a']!r}")
    if 1.0 - 4.0 * d["alpha"] * d["beta"] <= 0.0:
        raise ConstraintError("ID-HEUNHH", "1 - 4 alpha beta > 0", "rho must be real")


def _hh_far_interval(ns) -> tuple[float, float]:
    return (-1.8 * ns.a, -1.2 * ns.a)


def _hh_setup(ns) -> None:
    ns.p = heun_params(vars(ns))
    ns.y = OracleSource(ns.p, _hh_far_interval(ns))


def _printed_q2(ab: float, q: float, a: float, rho: float, omega: float, times_ab: bool) -> float:
    tail = ab * (3 * q - a + 1) if times_ab else (3 * q - a + 1)
    num = rho * (rho**2 * (q - ab) - ab * (4 * a * omega + 3) + 3 * q) - 4 * (ab**2 * (a - 3) + tail)
    return num / (a * (1 + rho) ** 3)


def _hh_params(ns, i: int, rule: str):
    ab = ns.alpha * ns.beta
    rho = eq4_rho(ns.p)
    omega = 1.0 - ab
    base = (ns.q - ab) / ns.a + omega
    if i == 1:
        al = 0.5 * (1 + rho)
        qi = base - rho if rule == "printed" else base + rho
        return al, al + 1, 2 * (omega - ab + rho) / (1 + rho), qi
    al = 2 * ab / (1 + rho)
    if rule == "printed":
        qi = _printed_q2(ab, ns.q, ns.a, rho, omega, False)
    elif rule == "times-ab":
        qi = _printed_q2(ab, ns.q, ns.a, rho, omega, True)
    else:
        qi = base - rho
    return al, al + 1, 2 * al, qi


def _hh_variant_setup(i: int, rule: str):
    def setup(ns) -> None:
        ns.h = eq4_h_function(ns.a, *_hh_params(ns, i, rule))

    return setup


def _kh_integrand(ns, x):
    hp = jet.derivative(ns.h, x)
    return family(ns.p, x, -1, -1, -1) * k_poly(ns.p, x) * hp * H(ns, x)


def _kh_anti(ns, x):
    hp = jet.derivative(ns.h, x)
    return family(ns.p, x, 0, 0, 0) * (hp * H(ns, x) - ns.h(x) * Hp(ns, x))


def _hh_identity(i: int) -> Identity:
    if i == 1:
        variants = (
            Variant("printed", VariantKind.PRINTED, "q1 = (q - ab)/a + omega - rho",
                    _kh_integrand, _kh_anti, setup=_hh_variant_setup(1, "printed")),
            Variant("substituted-q1", VariantKind.CORRECTION,
                    "q1 = (q - ab)/a + omega + rho, from substituting h into h'' + Q h = 0",
                    _kh_integrand, _kh_anti, setup=_hh_variant_setup(1, "derived")),
        )
    else:
        variants = (
            Variant("printed", VariantKind.PRINTED,
                    "q2 with the bracket read literally as (3q - a + 1)",
                    _kh_integrand, _kh_anti, setup=_hh_variant_setup(2, "printed")),
            Variant("reading-ab-bracket", VariantKind.READING,
                    "q2 with the bracket read as alpha beta (3q - a + 1)",
                    _kh_integrand, _kh_anti, setup=_hh_variant_setup(2, "times-ab")),
            Variant("substituted-q2", VariantKind.CORRECTION,
                    "q2 = (q - ab)/a + omega - rho, from substituting h into h'' + Q h = 0",
                    _kh_integrand, _kh_anti, setup=_hh_variant_setup(2, "derived")),
        )
    return Identity(
        id=f"ID-HEUNHH-{i}",
        anchor=(
            f"h_{i} = x^(-alpha_{i}) (x-a) H_l(1/a, q_{i}; alpha_{i}, beta_{i}, gamma_{i}, 0; 1/x) "
            "solving h'' + Q h = 0; integrand weight K(x) h_i' H_l"
        ),
        status=Status.CLAIMED_NEW,
        constraints="a > 1, 1 - 4 alpha beta > 0; evaluated for x in (-1.8a, -1.2a) with H_l "
                    "carried there by the ODE oracle",
        free=HH_FREE,
        variants=variants,
        check=_hh_check,
        exclude=_hh_exclude,
        interval=_hh_far_interval,
        setup=_hh_setup,
    )


def _q0_derive(d: Params) -> Params:
    _fix(d, "q", 0.0, "ID-HEUNHH-Q0", "q = 0")
    return d


def _q0_interval(ns) -> tuple[float, float]:
    return (-0.85, -0.08)


def _q0_variant_setup(i: int, rule: str):
    def setup(ns) -> None:
        rho = eq4_rho(ns.p)
        a1 = 0.5 * (3 - rho)
        b1 = a1 - 1
        if i == 1:
            ns.h = q0_h_function(ns.a, b1, a1, b1, 2 * b1)
            return
        a2 = 0.5 * (1 + rho)
        if rule == "printed":
            ns.h = q0_h_function(ns.a, a1, a2, a2 + 1, 2 * a1)
        else:
            ns.h = q0_h_function(ns.a, a2, a2, a2 + 1, 2 * a2)

    return setup


def _q0_identity(i: int) -> Identity:
    if i == 1:
        variants = (
            Variant("printed", VariantKind.PRINTED,
                    "h1 = (x-a)(x-1)^(-b1) 2F1(a1, b1; 2 b1; (a-1)/(x-1))",
                    _kh_integrand, _kh_anti, setup=_q0_variant_setup(1, "printed")),
        )
    else:
        variants = (
            Variant("printed", VariantKind.PRINTED,
                    "h2 = (x-a)(x-1)^(-a1) 2F1(a2, b2; 2 a1; (a-1)/(x-1))",
                    _kh_integrand, _kh_anti, setup=_q0_variant_setup(2, "printed")),
            Variant("substituted-h2", VariantKind.CORRECTION,
                    "h2 = (x-a)(x-1)^(-a2) 2F1(a2, b2; 2 a2; (a-1)/(x-1)), "
                    "the second solution of h'' + Q h = 0 at q = 0",
                    _kh_integrand, _kh_anti, setup=_q0_variant_setup(2, "derived")),
        )
    return Identity(
        id=f"ID-HEUNHH-Q0-{i}",
        anchor=f"q = 0: h_{i} a Gauss hypergeometric function of (a-1)/(x-1); integrand weight K(x) h_i' H_l",
        status=Status.CLAIMED_NEW,
        constraints="q = 0, a > 1, 1 - 4 alpha beta > 0; x in (-0.85, -0.08)",
        free=tuple(f for f in HH_FREE if f.name != "q"),
        variants=variants,
        derive=_q0_derive,
        check=_hh_check,
        exclude=_hh_exclude,
        interval=_q0_interval,
        setup=with_y,
    )


def _degen_derive(d: Params) -> Params:
    _fix(d, "beta", -1.0 - d["alpha"], "ID-HEUNHH-DEGEN", "beta = -1 - alpha")
    return d


def _degen_printed_setup(ns) -> None:
    src = SeriesSource(HeunParams(ns.a, ns.q, ns.alpha, -1.0 - ns.alpha, 0.0, 0.0))
    ns.h = lambda x: heun(src, x)


def _degen_regular_setup(ns) -> None:
    src = SeriesSource(HeunParams(ns.a, ns.q, ns.alpha + 1.0, -ns.alpha, 2.0, 0.0))
    ns.h = lambda x: x * heun(src, x)


def _degen_identity() -> Identity:
    return Identity(
        id="ID-HEUNHH-DEGEN",
        anchor="h'' + Q h = 0 read as a Heun equation with gamma = delta = epsilon = 0; "
               "integrand weight K(x) h' H_l with h' = H_l'(a, q; alpha, -1-alpha, 0, 0; x)",
        status=Status.CLAIMED_NEW,
        constraints="beta = -1 - alpha (so epsilon = -gamma - delta)",
        free=_free("a", "q", "alpha", "gamma", "delta"),
        variants=(
            Variant("printed", VariantKind.PRINTED,
                    "h = H_l(a, q; alpha, -1-alpha, 0, 0; x); undefined because the lower "
                    "parameter gamma = 0 has no origin-analytic normalised solution",
                    _kh_integrand, _kh_anti, setup=_degen_printed_setup),
            Variant("regular-solution", VariantKind.CORRECTION,
                    "h = x H_l(a, q; alpha+1, -alpha, 2, 0; x), the solution analytic at the origin",
                    _kh_integrand, _kh_anti, setup=_degen_regular_setup),
        ),
        derive=_degen_derive,
        exclude=_heun_exclude,
        interval=disk_interval,
        setup=with_y,
    )


# -- conjugate equations --------------------------------------------------------

def _conj_exclude(d: Params) -> str | None:
    if abs(d["q"]) < MARGIN:
        return "q near 0"
    return _heun_exclude(d)


def _conj_check(d: Params) -> None:
    if d["q"] == 0.0:
        raise ConstraintError("ID-CONJ", "q != 0")


def _conj_setup(ns) -> None:
    with_y(ns)
    ns.hq = SeriesSource(ns.p.replace(q=-ns.p.q))


def _conj_integrand(ns, x):
    return family(ns.p, x, -1, -1, -1) * H(ns, x) * heun(ns.hq, x)


def _conj_anti(ns, x):
    w = heun(ns.hq, x) * Hp(ns, x) - heun_prime(ns.hq, x) * H(ns, x)
    return family(ns.p, x, 0, 0, 0) / (2.0 * ns.q) * w


def _elle_derive(d: Params) -> Params:
    _fix(d, "a", 2.0, "ID-ELLE", "a = 2 (keeps the argument of psi inside its series disk)")
    _fix(d, "gamma", 1.0, "ID-ELLE", "gamma = 1")
    _fix(d, "delta", 0.0, "ID-ELLE", "delta = 0")
    _fix(d, "beta", -d["alpha"], "ID-ELLE", "epsilon = 0, so beta = -alpha")
    return d


def _elle_exclude(d: Params) -> str | None:
    if near_int_nonpos(1.0 - 2.0 * d["alpha"]):
        return "1 - 2 alpha near a nonpositive integer"
    return None


def _elle_setup(ns) -> None:
    ns.p = heun_params(vars(ns))
    al, a, q = ns.alpha, ns.a, ns.q
    ns.psi_src = SeriesSource(HeunParams(1.0 - a, al * al * (1.0 - a) - al - q, -al, 1.0 - al, 1.0 - 2.0 * al, 0.0))


def _psi(ns, x):
    return heun(ns.psi_src, (1.0 - ns.a) / (1.0 - x))


def _elle_Q(ns, x):
    al, a, q = ns.alpha, ns.a, ns.q
    return (1 - al * al) * x * x - (a + q + al * al) * x - q


def _elle_integrand(modulus: Callable[[Any], Any]):
    def integrand(ns, x):
        pre = apow(x - 1.0, ns.alpha) / (x - 1.0)
        return pre * _elle_Q(ns, x) / ((x + 1.0) * (x - ns.a)) * jet.ellip_e(modulus(x)) * _psi(ns, x)

    return integrand


def _xprime(x):
    return jet.sqrt(1.0 - x * x)


def _elle_printed_anti(ns, x):
    al = ns.alpha
    k = _xprime(x)
    E, K = jet.ellip_e(k), jet.ellip_k(k)
    psi = _psi(ns, x)
    dpsi = jet.derivative(lambda t: _psi(ns, t), x)
    br = ((1 - al) * x - al) / (x * x - 1.0) * E * psi - x / (x * x - 1.0) * K * psi - E * dpsi
    return x * apow(x - 1.0, al) * br


def _elle_modulus_x_anti(ns, x):
    al = ns.alpha
    E, K = jet.ellip_e(x), jet.ellip_k(x)
    psi = _psi(ns, x)
    dpsi = jet.derivative(lambda t: _psi(ns, t), x)
    pre = apow(x - 1.0, al)
    return pre / (x - 1.0) * (((1 - al) * x - 1.0) * E - (x - 1.0) * K) * psi - x * pre * E * dpsi


def _elle_interval(ns) -> tuple[float, float]:
    return (-0.85, -0.2)


# -- hypergeometric regression and its pull-backs --------------------------

def _prud_integrand_z(ns, z):
    a, b, c = ns.a, ns.b, ns.c
    return apow(z, c - 1) * apow(1.0 - z, a + b - c) * jet.hyp2f1(a, b, c, z)


def _prud_anti_z(ns, z):
    a, b, c = ns.a, ns.b, ns.c
    return apow(z, c) / c * apow(1.0 - z, a + b - c + 1) * jet.hyp2f1(a + 1, b + 1, c + 1, z)


def map_h(x):
    return x * (2.0 - x)


def map_f(x):
    return x / 4.0 * (x - 3.0) ** 2


def map_g(x):
    return -4.0 * x * (x - 1.0) ** 2 * (x - 2.0)


def inv_h(z: float) -> float:
    return 1.0 + math.sqrt(1.0 - z)


def inv_f(z: float) -> float:
    g = (2.0 * cmath.sqrt(z * z - z) + 2.0 * z - 1.0) ** (1.0 / 3.0)
    return (2.0 + 1.0 / g + g).real


def inv_g(z: float) -> float:
    return 1.0 + math.sqrt(2.0 + 2.0 * math.sqrt(1.0 - z)) / 2.0


MAPPINGS = {
    "h": (map_h, inv_h),
    "f": (map_f, inv_f),
    "g": (map_g, inv_g),
}


def _pullback(key: str):
    m, inv = MAPPINGS[key]

    def integrand(ns, x):
        return _prud_integrand_z(ns, m(x)) * jet.derivative(m, x)

    def anti(ns, x):
        return _prud_anti_z(ns, m(x))

    def interval(ns) -> tuple[float, float]:
        lo, hi = sorted((inv(Z_INTERVAL[0]), inv(Z_INTERVAL[1])))
        return (lo, hi)

    return integrand, anti, interval


def _adapt_c(rule: Callable[[Params], float]):
    def adapt(d: Params) -> Params:
        d = dict(d)
        d["c"] = rule(d)
        return d

    return adapt


def _prud_identity() -> Identity:
    hi_, ha_, hint_ = _pullback("h")
    fi_, fa_, fint_ = _pullback("f")
    gi_, ga_, gint_ = _pullback("g")
    return Identity(
        id="ID-PRUDF",
        anchor="int z^(c-1)(1-z)^(a+b-c) 2F1(a,b;c;z) dz = z^c/c (1-z)^(a+b-c+1) 2F1(a+1,b+1;c+1;z)",
        status=Status.KNOWN,
        constraints="c not a nonpositive integer; z in (0, 1)",
        free=(Free("a", 0.1, 1.25, 0.35), Free("b", 0.1, 1.25, 0.65), Free("c", 0.2, 2.5, 0.6)),
        variants=(
            Variant("printed", VariantKind.PRINTED, "hypergeometric variables, z in (0.08, 0.85)",
                    _prud_integrand_z, _prud_anti_z),
            Variant("map-h", VariantKind.INSTANTIATION,
                    "z = x(2-x), x = 1 + sqrt(1-z); a, b, c free (a = alpha/2, b = beta/2, c = gamma)",
                    hi_, ha_, interval=hint_),
            Variant("map-f", VariantKind.INSTANTIATION,
                    "z = x(x-3)^2/4, x = 2 + g + 1/g with g the principal cube root; c = 1/2",
                    fi_, fa_, interval=fint_, adapt=_adapt_c(lambda d: 0.5)),
            Variant("map-g", VariantKind.INSTANTIATION,
                    "z = -4x(x-1)^2(x-2), x = 1 + sqrt(2 + 2 sqrt(1-z))/2; c = a + b + 1/2",
                    gi_, ga_, interval=gint_, adapt=_adapt_c(lambda d: d["a"] + d["b"] + 0.5)),
        ),
        exclude=lambda d: "c near a nonpositive integer" if near_int_nonpos(d["c"]) else None,
        variable="z",
    )


# -- registry -------------------------------------------------------------------

def _build() -> tuple[Identity, ...]:
    auf1_p = _auf1(-1.0)
    auf1_c = _auf1(1.0)
    return (
        _heun2_identity("sin"),
        _heun2_identity("cos"),
        Identity(
            id="ID-F12",
            anchor="h = 1: int x^(gamma-1)(x-1)^(delta-1)(x-a)^(eps-1)(alpha beta x - q) H_l "
                   "= -x^gamma (x-1)^delta (x-a)^eps H_l'",
            status=Status.CLAIMED_NEW,
            constraints="generic Heun parameters",
            free=HEUN_FREE,
            variants=(Variant("printed", VariantKind.PRINTED, "as printed", _f12_integrand, _f12_anti),),
            exclude=_heun_exclude,
            interval=disk_interval,
            setup=with_y,
        ),
        Identity(
            id="ID-HFE",
            anchor="h = 1/(alpha(1-alpha)): int H_l(a, alpha-alpha^2; alpha, 1-alpha, 1, 0; x) dx "
                   "= x(a-x)/(alpha(1-alpha)) H_l'",
            status=Status.CLAIMED_NEW,
            constraints="q = alpha(1-alpha), beta = 1-alpha, gamma = 1, delta = 0, alpha not in {0, 1}",
            free=_free("a", Free("alpha", 0.2, 2.5, 1.0 / 3.0)),
            variants=(Variant("printed", VariantKind.PRINTED, "as printed", _hfe_integrand, _hfe_anti),),
            derive=_hfe_derive,
            check=_hfe_check,
            exclude=lambda d: "alpha near 0 or 1" if min(abs(d["alpha"]), abs(d["alpha"] - 1)) < MARGIN else None,
            interval=disk_interval,
            setup=with_y,
        ),
        Identity(
            id="ID-HN",
            anchor="h = (2/sqrt(a)) F(arcsin sqrt(x), 1/sqrt(a)) solving h'' + P h' = 0 with "
                   "gamma = delta = eps = 1/2",
            status=Status.CLAIMED_NEW,
            constraints="alpha + beta = 1/2, gamma = delta = 1/2 (so epsilon = 1/2), a > 1",
            free=_free("a", "q", Free("alpha", 0.2, 2.5, 0.2)),
            variants=(Variant("printed", VariantKind.PRINTED,
                              "as printed; the first right-hand term sqrt(a) H_l carries no elliptic factor",
                              _hn_integrand, _hn_anti),),
            derive=_hn_derive,
            check=_hn_check,
            interval=disk_interval,
            setup=with_y,
        ),
        Identity(
            id="ID-LAUT",
            anchor="int z^(-1/2)(1-z)^(-1/4) F(psi(z), 1/sqrt 2) 2F1(a, 1/4-a; 1/2; z) dz with "
                   "psi(z) = arcsin sqrt(1 - sqrt(1-z))",
            status=Status.CLAIMED_NEW,
            constraints="a not in {0, 1/4}",
            free=(Free("a", 0.1, 1.25, 0.3),),
            variants=(Variant("printed", VariantKind.PRINTED, "as printed", _laut_integrand, _laut_anti),),
            check=_laut_check,
            exclude=_laut_exclude,
            variable="z",
        ),
        Identity(
            id="ID-AUF1",
            anchor="delta = 0: h = x^tau 2F1(eps, tau; 1+tau; x/a), tau = 1 - gamma",
            status=Status.CLAIMED_NEW,
            constraints="delta = 0, epsilon = alpha + beta + tau, tau = 1 - gamma != 0",
            free=_free("a", "q", "alpha", "beta", "gamma"),
            variants=(
                Variant("printed", VariantKind.PRINTED,
                        "third hypergeometric parameter '2+-tau' read as 2 - tau", *auf1_p),
                Variant("reading-2-plus-tau", VariantKind.READING,
                        "third hypergeometric parameter read as 2 + tau", *auf1_c),
            ),
            derive=_auf1_derive,
            exclude=_auf_tau_exclude,
            interval=disk_interval,
            setup=with_y,
        ),
        Identity(
            id="ID-AUF2",
            anchor="epsilon = 0: h = x^tau 2F1(delta, tau; 1+tau; x), tau = 1 - gamma",
            status=Status.CLAIMED_NEW,
            constraints="epsilon = 0, delta = alpha + beta + tau, tau = 1 - gamma != 0",
            free=_free("a", "q", "alpha", "beta", Free("gamma", 0.2, 2.5, 0.6)),
            variants=(Variant("printed", VariantKind.PRINTED, "as printed", _auf2_integrand, _auf2_anti),),
            derive=_auf2_derive,
            exclude=_auf_tau_exclude,
            interval=disk_interval,
            setup=with_y,
        ),
        Identity(
            id="ID-HH1",
            anchor="h = exp(-int Q/P): integrand factor (Q^2 + W(Q,P))/P^2, right-hand factor Q/P",
            status=Status.CLAIMED_NEW,
            constraints="alpha + beta + 1 != 0; zeros of K (and x0 when Delta = 0) outside the interval",
            free=HEUN_FREE,
            variants=(Variant("printed", VariantKind.PRINTED, "h from the three-branch closed form",
                              _hh1_integrand, _hh1_anti),),
            exclude=_hh1_exclude,
            interval=_hh1_interval,
            setup=_hh1_setup,
        ),
        Identity(
            id="ID-HHH1",
            anchor="int z^c (1-z)^(a+b-c)(1-rho1 z)(1-rho2 z)^(-2-omega) 2F1(a,b;c;z) dz",
            status=Status.CLAIMED_NEW,
            constraints="1 - c + 2(a+b+ab) != 0; 1 - rho2 z != 0 on the interval",
            free=(Free("a", 0.1, 1.25, 0.35), Free("b", 0.1, 1.25, 0.65), Free("c", 0.2, 2.5, 0.6)),
            variants=(Variant("printed", VariantKind.PRINTED, "as printed", _hhh1_integrand, _hhh1_anti),),
            exclude=_hhh1_exclude,
            interval=_hhh1_interval,
            variable="z",
        ),
        Identity(
            id="ID-HHH1N",
            anchor="int z^(a+b+1/2)(1-z)^(-3/2-xi) 2F1(a,b;a+b+1/2;z) dz (discriminant zero case)",
            status=Status.KNOWN,
            constraints="2(2ab+a+b)+1 != 0",
            free=(Free("a", 0.1, 1.25, 0.35), Free("b", 0.1, 1.25, 0.65)),
            variants=(Variant("printed", VariantKind.PRINTED, "as printed", _hhh1n_integrand, _hhh1n_anti),),
            exclude=_hhh1n_exclude,
            variable="z",
        ),
        Identity(
            id="ID-HHH1NT",
            anchor="int z^c (1-z)^(-c-1/2)(1-p1 z) exp(-p2 z) 2F1(-b-1/2, b; c; z) dz",
            status=Status.CLAIMED_NEW,
            constraints="b(2b+1) + c != 0",
            free=(Free("b", 0.1, 1.25, 0.65), Free("c", 0.2, 2.5, 0.6)),
            variants=(Variant("printed", VariantKind.PRINTED, "as printed", _hhh1nt_integrand, _hhh1nt_anti),),
            exclude=_hhh1nt_exclude,
            variable="z",
        ),
        _hh_identity(1),
        _hh_identity(2),
        _q0_identity(1),
        _q0_identity(2),
        _degen_identity(),
        Identity(
            id="ID-CONJ",
            anchor="conjugate pair q, -q: int x^(gamma-1)(x-1)^(delta-1)(x-a)^(eps-1) "
                   "H_l(q) H_l(-q) = f W(H_l(-q), H_l(q))/(2q)",
            status=Status.CLAIMED_NEW,
            constraints="q != 0",
            free=HEUN_FREE,
            variants=(Variant("printed", VariantKind.PRINTED, "as printed", _conj_integrand, _conj_anti),),
            check=_conj_check,
            exclude=_conj_exclude,
            interval=disk_interval,
            setup=_conj_setup,
        ),
        Identity(
            id="ID-ELLE",
            anchor="gamma = 1, delta = eps = 0: y = (x-1)^alpha psi(x) against a solution of "
                   "h'' + h'/x + h/(1-x^2) = 0 built from complete elliptic integrals",
            status=Status.CLAIMED_NEW,
            constraints="gamma = 1, delta = 0, beta = -alpha (epsilon = 0), a = 2; x in (-0.85, -0.2)",
            free=(Free("q", -1.0, 1.0, 0.3), Free("alpha", 0.2, 2.5, 0.7)),
            variants=(
                Variant("printed", VariantKind.PRINTED,
                        "h = E(x') with x' = sqrt(1-x^2)",
                        _elle_integrand(_xprime), _elle_printed_anti),
                Variant("modulus-x", VariantKind.CORRECTION,
                        "h = E(x), which solves h'' + h'/x + h/(1-x^2) = 0; right-hand side "
                        "rebuilt from f (h' y - h y')",
                        _elle_integrand(lambda x: x), _elle_modulus_x_anti),
            ),
            derive=_elle_derive,
            exclude=_elle_exclude,
            interval=_elle_interval,
            setup=_elle_setup,
        ),
        _prud_identity(),
    )


_CATALOG: tuple[Identity, ...] | None = None


def catalog() -> tuple[Identity, ...]:
    global _CATALOG
    if _CATALOG is None:
        _CATALOG = _build()
    return _CATALOG


def get(identity_id: str) -> Identity:
    for ident in catalog():
        if ident.id == identity_id:
            return ident
    raise KeyError(f"unknown identity {identity_id!r}")


def select(patterns: list[str] | None) -> list[Identity]:
    if not patterns:
        return list(catalog())
    return [i for i in catalog() if any(fnmatch.fnmatchcase(i.id, pat) for pat in patterns)]


def manifest() -> list[dict]:
    return [i.manifest() for i in catalog()]


def resolve_params(ident: Identity, params: Mapping[str, float] | None = None) -> Params:
    """Fill defaults, apply the derivation rules and check the constraints."""
    d: Params = ident.defaults()
    if params:
        unknown = set(params) - set(d) - set(HEUN_KEYS) - {"a", "b", "c"}
        if unknown:
            raise ParameterDomainError(f"{ident.id}: unknown parameters {sorted(unknown)}")
        d.update({k: float(v) for k, v in params.items()})
    for f in ident.free:
        if f.integer:
            d[f.name] = int(d[f.name])
    d = ident.derive(dict(d))
    ident.check(d)
    return d


def instantiate(
    identity_id: str | Identity,
    params: Mapping[str, float] | None = None,
    variant: str = "printed",
) -> ConcreteIdentity:
    ident = identity_id if isinstance(identity_id, Identity) else get(identity_id)
    var = ident.variant(variant)
    d = resolve_params(ident, params)
    if var.adapt is not None:
        d = var.adapt(d)
    ns = SimpleNamespace(**d)
    ident.setup(ns)
    if var.setup is not None:
        var.setup(ns)
    lo, hi = (var.interval or ident.interval)(ns)
    return ConcreteIdentity(
        id=ident.id,
        variant=var.name,
        params=dict(d),
        interval=(float(lo), float(hi)),
        ns=ns,
        _integrand=var.integrand,
        _antiderivative=var.antiderivative,
    )


# -- reductions of special Heun functions to 2F1 ------------------------------

class Reduction(str, enum.Enum):
    L1 = "L1"
    L2 = "L2"
    L3 = "L3"


def reduction_params(case: Reduction | str, alpha: float, beta: float, gamma: float | None = None) -> HeunParams:
    case = Reduction(case)
    ab = alpha * beta
    if case is Reduction.L1:
        if gamma is None:
            raise ParameterDomainError("L1 needs gamma")
        return HeunParams(2.0, ab, alpha, beta, gamma, alpha + beta - 2.0 * gamma + 1.0)
    if case is Reduction.L2:
        return HeunParams(4.0, ab, alpha, beta, 0.5, 2.0 * (alpha + beta) / 3.0)
    return HeunParams(2.0, ab, alpha, beta, (alpha + beta + 2.0) / 4.0, (alpha + beta) / 2.0)


def _check_reduction(case: Reduction, p: HeunParams) -> None:
    ref = reduction_params(case, p.alpha, p.beta, p.gamma)
    for k in HEUN_KEYS:
        u, v = getattr(p, k), getattr(ref, k)
        if abs(u - v) > 1e-12 * max(1.0, abs(v)):
            raise ConstraintError(f"reduction {case.value}", f"{k} = {v!r}", f"got {u!r}")


def _reduction_hyp(case: Reduction, p: HeunParams, x: float, shift: int) -> float:
    al, be = p.alpha, p.beta
    if case is Reduction.L1:
        return hyp2f1(al / 2 + shift, be / 2 + shift, p.gamma + shift, map_h(x))
    if case is Reduction.L2:
        return hyp2f1(al / 3 + shift, be / 3 + shift, 0.5 + shift, map_f(x))
    return hyp2f1(al / 4 + shift, be / 4 + shift, (al + be + 2) / 4 + shift, map_g(x))


def reduce_to_2f1(case: Reduction | str, p: HeunParams, x: float) -> tuple[float, float]:
    """(H_l(x), 2F1 at the mapped argument) for a specialised parameter set."""
    case = Reduction(case)
    _check_reduction(case, p)
    return heun_eval(p, x).value, _reduction_hyp(case, p, x, 0)


def reduction_prefactor(case: Reduction | str, p: HeunParams, x: float) -> float:
    case = Reduction(case)
    al, be, ga = p.alpha, p.beta, p.gamma
    t = al * be * (1 - x) / (2 * ga)
    if case is Reduction.L1:
        return t
    if case is Reduction.L2:
        return ga * t * (3 - x) / 3
    kappa = 2 * al * be / (al + be + 2)
    return kappa * (1 - x) * (2 * x * x - 4 * x + 1)


def reduce_derivative(case: Reduction | str, p: HeunParams, x: float) -> tuple[float, float]:
    """(H_l'(x), prefactor(x) * shifted 2F1 at the mapped argument)."""
    case = Reduction(case)
    _check_reduction(case, p)
    return heun_eval(p, x).deriv, reduction_prefactor(case, p, x) * _reduction_hyp(case, p, x, 1)


__all__ = [
    "ConcreteIdentity",
    "Free",
    "Identity",
    "Reduction",
    "Status",
    "Variant",
    "VariantKind",
    "catalog",
    "get",
    "instantiate",
    "manifest",
    "reduce_derivative",
    "reduce_to_2f1",
    "reduction_params",
    "resolve_params",
    "select",
]
