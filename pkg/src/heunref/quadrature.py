"""Adaptive Gauss-Kronrod (7, 15) quadrature with recursive bisection."""

from __future__ import annotations

import math
from typing import Callable, NamedTuple

from heunref.errors import ConvergenceError

MAX_DEPTH = 50

# 15-point Kronrod abscissae (nonnegative half) and weights, with the
# embedded 7-point Gauss weights for the odd-indexed nodes.
_XK = (
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
)
_WK = (
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
)
_WG = (
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
)


class QuadResult(NamedTuple):
    value: float
    error: float
    evaluations: int


def gk15(f: Callable[[float], float], lo: float, hi: float) -> tuple[float, float]:
    """Kronrod estimate and |Kronrod - Gauss| on one panel."""
    c = 0.5 * (lo + hi)
    h = 0.5 * (hi - lo)
    fc = f(c)
    k = [_WK[7] * fc]
    g = [_WG[3] * fc]
    for j in range(7):
        dx = h * _XK[j]
        s = f(c - dx) + f(c + dx)
        k.append(_WK[j] * s)
        if j % 2 == 1:
            g.append(_WG[j // 2] * s)
    vk = math.fsum(k) * h
    vg = math.fsum(g) * h
    return vk, abs(vk - vg)


def quad_adaptive(f: Callable[[float], float], lo: float, hi: float, tol: float = 1e-10) -> QuadResult:
    """Integrate f over [lo, hi].

    Panels are bisected until each local error estimate is below its share
    of tol*(1 + |I|), where I is the running whole-interval estimate.
    Bisection deeper than ``MAX_DEPTH`` raises ``ConvergenceError`` carrying
    the partial sum.
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    if lo == hi:
        return QuadResult(0.0, 0.0, 0)
    if hi < lo:
        r = quad_adaptive(f, hi, lo, tol)
        return QuadResult(-r.value, r.error, r.evaluations)
    width = hi - lo
    whole, err0 = gk15(f, lo, hi)
    evals = 15
    accepted_v: list[float] = []
    accepted_e: list[float] = []
    stack = [(lo, hi, whole, err0, 0)]
    scale = 1.0 + abs(whole)
    while stack:
        a, b, v, e, depth = stack.pop()
        if e <= tol * scale * (b - a) / width:
            accepted_v.append(v)
            accepted_e.append(e)
            continue
        if depth >= MAX_DEPTH:
            partial = math.fsum(accepted_v) + v + math.fsum(s[2] for s in stack)
            raise ConvergenceError(
                f"subdivision depth exceeded {MAX_DEPTH} near [{a}, {b}]",
                partial=partial,
                error=e,
            )
        m = 0.5 * (a + b)
        v1, e1 = gk15(f, a, m)
        v2, e2 = gk15(f, m, b)
        evals += 30
        stack.append((m, b, v2, e2, depth + 1))
        stack.append((a, m, v1, e1, depth + 1))
        scale = max(scale, 1.0 + abs(math.fsum(accepted_v) + math.fsum(s[2] for s in stack)))
    return QuadResult(math.fsum(accepted_v), math.fsum(accepted_e), evals)
