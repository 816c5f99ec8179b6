"""Evaluation back-ends for a particular Heun solution y(x) and jet lifts.

A source knows (y, y') at real points.  The lifts ``heun`` and ``heun_prime``
turn a source into jet-aware functions; y'' is obtained from the Heun
equation itself, so derivatives of any order stay exact.
"""

from __future__ import annotations

import threading
from collections import OrderedDict

from heunref.errors import DomainError
from heunref.jet import Jet, value
from heunref.specfun import HeunParams, heun_eval


def heun_p(p: HeunParams, x):
    return p.gamma / x + p.delta / (x - 1.0) + p.epsilon / (x - p.a)


def heun_q(p: HeunParams, x):
    return (p.alpha * p.beta * x - p.q) / (x * (x - 1.0) * (x - p.a))


def check_regular(p: HeunParams, x, what: str = "point") -> None:
    xv = value(x)
    for s in (0.0, 1.0, p.a):
        if xv == s:
            raise DomainError(f"{what} x={xv!r} is a singular point of the Heun equation")


class HeunSource:
    """Base class; subclasses implement ``_state(x) -> (y, y')``."""

    cache_size = 4096

    def __init__(self, params: HeunParams) -> None:
        self.params = params
        self._cache: OrderedDict[float, tuple[float, float]] = OrderedDict()
        self._lock = threading.Lock()

    def state(self, x: float) -> tuple[float, float]:
        x = float(x)
        with self._lock:
            hit = self._cache.get(x)
            if hit is not None:
                self._cache.move_to_end(x)
                return hit
        st = self._state(x)
        with self._lock:
            self._cache[x] = st
            if len(self._cache) > self.cache_size:
                self._cache.popitem(last=False)
        return st

    def _state(self, x: float) -> tuple[float, float]:  # pragma: no cover - abstract
        raise NotImplementedError


class SeriesSource(HeunSource):
    """H_l(a, q; alpha, beta, gamma, delta; x) from the origin series."""

    def _state(self, x: float) -> tuple[float, float]:
        hv = heun_eval(self.params, x)
        return hv.value, hv.deriv


def heun(src: HeunSource, x):
    if isinstance(x, Jet):
        return Jet(heun(src, x.v), heun_prime(src, x.v) * x.d, x.tag)
    return src.state(x)[0]


def heun_prime(src: HeunSource, x):
    if isinstance(x, Jet):
        return Jet(heun_prime(src, x.v), heun_second(src, x.v) * x.d, x.tag)
    return src.state(x)[1]


def heun_second(src: HeunSource, x):
    """y'' = -P y' - Q y for the source's own parameters."""
    p = src.params
    check_regular(p, x)
    return -heun_p(p, x) * heun_prime(src, x) - heun_q(p, x) * heun(src, x)
