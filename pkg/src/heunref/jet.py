"""Forward-mode dual numbers that nest.

A ``Jet(v, d)`` carries a value and its derivative with respect to one
independent variable.  Components may themselves be jets, so seeding
``Jet(Jet(x, 1), 1)`` propagates second derivatives.  Every seed gets a
fresh, increasing ``tag``; binary operations defer to the operand with the
newer tag, so a jet from an enclosing derivative is a constant to the inner
one even when the inner derivative is seeded at a plain float.

The special-function lifts below differentiate through the kernels in
``specfun`` using known derivative relations, never finite differences.
"""

from __future__ import annotations

import itertools
import math
from typing import Any, Callable

from heunref import specfun
from heunref.errors import DomainError

Number = Any  # float or Jet


class Jet:
    __slots__ = ("v", "d", "tag")
    __array_priority__ = 100

    def __init__(self, v: Number, d: Number = 0.0, tag: int | None = None) -> None:
        self.v = v
        self.d = d
        self.tag = next(_TAGS) if tag is None else tag

    def __repr__(self) -> str:
        return f"Jet({self.v!r}, {self.d!r}, tag={self.tag})"

    # -- arithmetic ---------------------------------------------------
    def _outer(self, o: Any) -> bool:
        return isinstance(o, Jet) and o.tag > self.tag

    def _same(self, o: Any) -> bool:
        return isinstance(o, Jet) and o.tag == self.tag

    def __add__(self, o):
        if self._outer(o):
            return o.__radd__(self)
        if self._same(o):
            return Jet(self.v + o.v, self.d + o.d, self.tag)
        return Jet(self.v + o, self.d, self.tag)

    def __radd__(self, o):
        return Jet(o + self.v, self.d, self.tag)

    def __sub__(self, o):
        if self._outer(o):
            return o.__rsub__(self)
        if self._same(o):
            return Jet(self.v - o.v, self.d - o.d, self.tag)
        return Jet(self.v - o, self.d, self.tag)

    def __rsub__(self, o):
        return Jet(o - self.v, -self.d, self.tag)

    def __neg__(self):
        return Jet(-self.v, -self.d, self.tag)

    def __pos__(self):
        return self

    def __mul__(self, o):
        if self._outer(o):
            return o.__rmul__(self)
        if self._same(o):
            return Jet(self.v * o.v, self.d * o.v + self.v * o.d, self.tag)
        return Jet(self.v * o, self.d * o, self.tag)

    def __rmul__(self, o):
        return Jet(o * self.v, o * self.d, self.tag)

    def __truediv__(self, o):
        if self._outer(o):
            return o.__rtruediv__(self)
        if self._same(o):
            r = self.v / o.v
            return Jet(r, (self.d - r * o.d) / o.v, self.tag)
        return Jet(self.v / o, self.d / o, self.tag)

    def __rtruediv__(self, o):
        r = o / self.v
        return Jet(r, -r * self.d / self.v, self.tag)

    def __pow__(self, e):
        if isinstance(e, Jet):
            return exp(e * log(self))
        if isinstance(e, int) or (isinstance(e, float) and e.is_integer() and abs(e) < 64):
            n = int(e)
            if n == 0:
                return Jet(1.0 + 0.0 * self.v, 0.0 * self.d, self.tag)
            if n > 0:
                return Jet(self.v**n, n * self.v ** (n - 1) * self.d, self.tag)
            return 1.0 / self ** (-n)
        return Jet(self.v**e, e * self.v ** (e - 1) * self.d, self.tag)

    def __rpow__(self, base):
        return exp(self * math.log(base))

    # comparisons look only at the value, used for branch decisions
    def __lt__(self, o):
        return value(self) < value(o)

    def __gt__(self, o):
        return value(self) > value(o)

    def __le__(self, o):
        return value(self) <= value(o)

    def __ge__(self, o):
        return value(self) >= value(o)

    def __float__(self) -> float:
        return float(value(self))

    def __abs__(self):
        return self if value(self) >= 0 else -self


_TAGS = itertools.count(1)


def tag(x: Any) -> int:
    return x.tag if isinstance(x, Jet) else 0


def value(x: Any) -> float:
    """Strip every jet layer and return the underlying real value."""
    while isinstance(x, Jet):
        x = x.v
    return x


def seed(x: Number) -> Jet:
    """A jet for the independent variable sitting one level above ``x``."""
    return Jet(x, 1.0)


def derivative(fn: Callable[[Number], Number], x: Number) -> Number:
    """d fn / dx at ``x`` (``x`` may itself be a jet)."""
    s = seed(x)
    r = fn(s)
    return r.d if isinstance(r, Jet) and r.tag == s.tag else 0.0 * x


def value_and_derivative(fn: Callable[[Number], Number], x: float) -> tuple[float, float]:
    s = seed(x)
    r = fn(s)
    if isinstance(r, Jet) and r.tag == s.tag:
        return float(r.v), float(r.d)
    return float(r), 0.0


# -- elementary functions ----------------------------------------------

def _lift(f: Callable[[float], float], df: Callable[[Number], Number]) -> Callable[[Number], Number]:
    def g(x):
        if isinstance(x, Jet):
            return Jet(g(x.v), df(x.v) * x.d, x.tag)
        return f(x)

    g.__name__ = f.__name__
    return g


def exp(x):
    if isinstance(x, Jet):
        e = exp(x.v)
        return Jet(e, e * x.d, x.tag)
    return math.exp(x)


sqrt = _lift(math.sqrt, lambda v: 0.5 / sqrt(v))
log = _lift(math.log, lambda v: 1.0 / v)
sin = _lift(math.sin, lambda v: cos(v))
cos = _lift(math.cos, lambda v: -sin(v))
atan = _lift(math.atan, lambda v: 1.0 / (1.0 + v * v))
asin = _lift(math.asin, lambda v: 1.0 / sqrt(1.0 - v * v))


def apow(b, e: float):
    """|b|**e with derivative e*|b|**e/b, the real branch used for every
    non-integer power of a possibly negative base."""
    if isinstance(b, Jet):
        p = apow(b.v, e)
        return Jet(p, e * p / b.v * b.d, b.tag)
    if b == 0.0:
        raise DomainError("power of a vanishing base")
    return abs(b) ** e


def sign(x) -> float:
    return math.copysign(1.0, value(x))


# -- special-function lifts -------------------------------------------

def hyp2f1(a: float, b: float, c: float, z):
    if isinstance(z, Jet):
        return Jet(hyp2f1(a, b, c, z.v), (a * b / c) * hyp2f1(a + 1, b + 1, c + 1, z.v) * z.d, z.tag)
    return specfun.hyp2f1(a, b, c, z)


def ellip_f(phi, k: float):
    """F(phi, k) as a function of the amplitude only."""
    if isinstance(phi, Jet):
        s = sin(phi.v)
        return Jet(ellip_f(phi.v, k), phi.d / sqrt(1.0 - k * k * s * s), phi.tag)
    return specfun.ellip_f_incomplete(phi, k)


def ellip_e(k):
    """Complete E(k), even in k; dE/dk = (E - K)/k."""
    if isinstance(k, Jet):
        kv = k.v
        if value(kv) == 0.0:
            return Jet(ellip_e(kv), -0.25 * math.pi * kv * k.d, k.tag)
        return Jet(ellip_e(kv), (ellip_e(kv) - ellip_k(kv)) / kv * k.d, k.tag)
    return specfun.ellip_e_complete(abs(k))


def ellip_k(k):
    """Complete K(k), even in k; dK/dk = E/(k(1-k^2)) - K/k."""
    if isinstance(k, Jet):
        kv = k.v
        if value(kv) == 0.0:
            return Jet(ellip_k(kv), 0.25 * math.pi * kv * k.d, k.tag)
        dk = ellip_e(kv) / (kv * (1.0 - kv * kv)) - ellip_k(kv) / kv
        return Jet(ellip_k(kv), dk * k.d, k.tag)
    return specfun.ellip_k_complete(abs(k))
