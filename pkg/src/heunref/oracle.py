"""Independent ODE-integrator oracle for Heun solutions.

Initial data near the origin come from a short power series built by
polynomial convolution (not the production recurrence); the solution is then
carried by an embedded Dormand-Prince 5(4) integrator.
"""

from __future__ import annotations

import bisect
import math
import threading
from typing import Callable, Sequence

from heunref.errors import DomainError, PropagationError
from heunref.sources import HeunSource
from heunref.specfun import HeunParams

RTOL = 1e-11
ATOL = 1e-14
INIT_TERMS = 30

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _poly_mul(u: Sequence[float], v: Sequence[float], n: int) -> list[float]:
    out = [0.0] * n
    for i, ui in enumerate(u):
        if ui == 0.0:
            continue
        for j, vj in enumerate(v):
            if i + j < n:
                out[i + j] += ui * vj
    return out


def init_series(p: HeunParams, terms: int = INIT_TERMS) -> list[float]:
    """Coefficients c_0..c_{terms-1} from A y'' + B y' + C y = 0 with
    A = x(x-1)(x-a), B = A*P, C = alpha*beta*x - q, solved by matching
    powers of x one at a time."""
    a, g, d, e = p.a, p.gamma, p.delta, p.epsilon
    A = [0.0, a, -(1.0 + a), 1.0]
    B = [g * a, -g * (1.0 + a) - d * a - e, g + d + e]
    C = [-p.q, p.alpha * p.beta]
    c = [1.0] + [0.0] * (terms - 1)
    for n in range(terms - 1):
        # coefficient of x^n with c_{n+1} still zero, then solve for it
        d1 = [(k + 1) * c[k + 1] for k in range(terms - 1)] + [0.0]
        d2 = [(k + 2) * (k + 1) * c[k + 2] for k in range(terms - 2)] + [0.0, 0.0]
        r = (_poly_mul(A, d2, n + 1)[n] + _poly_mul(B, d1, n + 1)[n] + _poly_mul(C, c, n + 1)[n])
        lead = a * (n + 1) * n + g * a * (n + 1)
        c[n + 1] = -r / lead
    return c


def series_state(p: HeunParams, x: float, terms: int = INIT_TERMS) -> tuple[float, float, float]:
    """(y, y', tail) from the convolution series; only for small |x|."""
    if abs(x) > 0.1 * p.radius:
        raise DomainError(f"initial point {x} too far from the origin for the starter series")
    c = init_series(p, terms)
    y = math.fsum(ck * x**k for k, ck in enumerate(c))
    yp = math.fsum(k * ck * x ** (k - 1) for k, ck in enumerate(c) if k)
    tail = abs(c[-1] * x ** (terms - 1))
    return y, yp, tail


def _rhs(p: HeunParams) -> Callable[[float, float, float], tuple[float, float]]:
    a, g, d, e, ab, q = p.a, p.gamma, p.delta, p.epsilon, p.alpha * p.beta, p.q

    def f(x: float, y: float, yp: float) -> tuple[float, float]:
        P = g / x + d / (x - 1.0) + e / (x - a)
        Q = (ab * x - q) / (x * (x - 1.0) * (x - a))
        return yp, -P * yp - Q * y

    return f


def _crosses(lo: float, hi: float, points: Sequence[float]) -> float | None:
    lo, hi = min(lo, hi), max(lo, hi)
    for s in points:
        if lo <= s <= hi:
            return s
    return None


def integrate(
    f: Callable[[float, float, float], tuple[float, float]],
    x0: float,
    state: tuple[float, float],
    x1: float,
    rtol: float = RTOL,
    atol: float = ATOL,
    record: list | None = None,
) -> tuple[float, float]:
    """Carry (y, y') from x0 to x1 with adaptive DP5(4) steps."""
    y, v = state
    if x1 == x0:
        return y, v
    direction = 1.0 if x1 > x0 else -1.0
    h = direction * min(abs(x1 - x0), 1e-3 * max(1.0, abs(x0)))
    x = x0
    k1 = f(x, y, v)
    while direction * (x1 - x) > 0.0:
        if direction * (x + h - x1) > 0.0:
            h = x1 - x
        ks = [k1]
        for i in range(1, 7):
            yi = y + h * sum(aij * kj[0] for aij, kj in zip(_A[i], ks))
            vi = v + h * sum(aij * kj[1] for aij, kj in zip(_A[i], ks))
            ks.append(f(x + _C[i] * h, yi, vi))
        yn = y + h * sum(b * k[0] for b, k in zip(_B5, ks))
        vn = v + h * sum(b * k[1] for b, k in zip(_B5, ks))
        ey = h * sum(c * k[0] for c, k in zip(_E, ks))
        ev = h * sum(c * k[1] for c, k in zip(_E, ks))
        sy = atol + rtol * max(abs(y), abs(yn))
        sv = atol + rtol * max(abs(v), abs(vn))
        err = math.sqrt(0.5 * ((ey / sy) ** 2 + (ev / sv) ** 2))
        if err <= 1.0:
            x = x1 if h == x1 - x else x + h
            y, v = yn, vn
            k1 = ks[6]
            if record is not None:
                record.append((x, y, v))
            fac = 5.0 if err == 0.0 else min(5.0, 0.9 * err ** -0.2)
        else:
            fac = max(0.2, 0.9 * err ** -0.2)
        h *= fac
        if abs(h) < 1e-14 * max(1.0, abs(x)):
            raise PropagationError(f"step size underflow near x={x!r}")
        if not (math.isfinite(y) and math.isfinite(v)):
            raise PropagationError(f"solution blew up near x={x!r}")
    return y, v


def integrate_heun(
    p: HeunParams, x0: float, state: tuple[float, float], x1: float, rtol: float = RTOL
) -> tuple[float, float]:
    """Propagate arbitrary initial data of the Heun equation from x0 to x1."""
    s = _crosses(x0, x1, (0.0, 1.0, p.a))
    if s is not None:
        raise DomainError(f"path from {x0} to {x1} meets the singular point {s}")
    return integrate(_rhs(p), x0, state, x1, rtol=rtol)


def _start_point(p: HeunParams, toward: float, x_start: float | None) -> float:
    if x_start is not None:
        return x_start
    return math.copysign(0.02 * p.radius, toward if toward != 0.0 else 1.0)


def ode_oracle(p: HeunParams, x_start: float | None, xs: Sequence[float]) -> list[tuple[float, float]]:
    """(y, y') of the origin-regular solution at each x in ``xs``.

    The solution is started at ``x_start`` (default: 2% of the series radius
    on the side of the first target) and carried through the targets in the
    given order.
    """
    xs = [float(x) for x in xs]
    if not xs:
        return []
    x0 = _start_point(p, xs[0], x_start)
    y, yp, _ = series_state(p, x0)
    f = _rhs(p)
    out = []
    cur = x0
    for x in xs:
        s = _crosses(cur, x, (0.0, 1.0, p.a))
        if s is not None:
            raise DomainError(f"oracle path from {cur} to {x} meets the singular point {s}")
        y, yp = integrate(f, cur, (y, yp), x)
        cur = x
        out.append((y, yp))
    return out


class OracleSource(HeunSource):
    """Origin-regular Heun solution carried by the ODE oracle.

    The first query sweeps from the starter point to the far end of
    ``span``, recording the accepted steps; later queries integrate from the
    nearest recorded state.
    """

    def __init__(self, params: HeunParams, span: tuple[float, float]) -> None:
        super().__init__(params)
        lo, hi = sorted(span)
        if lo < 0.0 < hi:
            raise DomainError("oracle span must lie on one side of the origin")
        self.span = (lo, hi)
        self._f = _rhs(params)
        self._xs: list[float] = []
        self._states: list[tuple[float, float]] = []
        self._build_lock = threading.Lock()

    def _build(self) -> None:
        with self._build_lock:
            if self._xs:
                return
            p = self.params
            lo, hi = self.span
            far = hi if hi > 0.0 else lo
            x0 = _start_point(p, far, None)
            s = _crosses(x0, far, (0.0, 1.0, p.a))
            if s is not None:
                raise DomainError(f"oracle span reaches the singular point {s}")
            y, yp, _ = series_state(p, x0)
            rec: list = [(x0, y, yp)]
            integrate(self._f, x0, (y, yp), far, record=rec)
            rec.sort()
            self._xs = [r[0] for r in rec]
            self._states = [(r[1], r[2]) for r in rec]

    def _state(self, x: float) -> tuple[float, float]:
        lo, hi = self.span
        if not (lo <= x <= hi):
            raise DomainError(f"x={x} outside the oracle span {self.span}")
        self._build()
        i = bisect.bisect_left(self._xs, x)
        cands = [j for j in (i - 1, i) if 0 <= j < len(self._xs)]
        j = min(cands, key=lambda k: abs(self._xs[k] - x))
        return integrate(self._f, self._xs[j], self._states[j], x)
