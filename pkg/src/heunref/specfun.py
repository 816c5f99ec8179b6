"""Numerical kernels: local Heun function, Gauss 2F1 and elliptic integrals.

Everything here is real double precision.  Series are summed with
``math.fsum`` and refuse to evaluate outside the region where their
truncation rule is trustworthy; nothing is silently extrapolated.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache
from typing import NamedTuple

from .errors import ConvergenceError, DomainError, ParameterDomainError

EPS = 2.220446049250313e-16
HALF_PI = 0.5 * math.pi

# evaluation disk of the origin series, as a fraction of its radius
SAFE_FRACTION = 0.9
# adaptive truncation: |term| < STOP_REL * |sum| for STOP_RUN consecutive terms
STOP_REL = 1e-17
STOP_RUN = 3
MAX_TERMS = 10000
HYP_MAX_TERMS = 20000


def is_nonpositive_integer(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def hyp2f1_defined(a: float, b: float, c: float) -> bool:
    """False when c = -N hits a pole, unless an upper parameter -m with
    m < N ends the series first (the polynomial convention)."""
    if not is_nonpositive_integer(c):
        return True
    return any(is_nonpositive_integer(u) and u > c for u in (a, b))


# ---------------------------------------------------------------------------
# Heun
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HeunParams:
    """Parameters (a, q; alpha, beta, gamma, delta) of the general Heun equation.

    ``epsilon`` is not an input: it always equals alpha + beta + 1 - gamma - delta.
    Construction fails for ``a`` in {0, 1} or ``gamma`` a nonpositive integer,
    the two cases in which the normalized origin series does not exist.
    """

    a: float
    q: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    epsilon: float = field(init=False)

    def __post_init__(self):
        for name in ("a", "q", "alpha", "beta", "gamma", "delta"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise ParameterDomainError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        if self.a == 0.0 or self.a == 1.0:
            raise ParameterDomainError(f"a must not be 0 or 1, got {self.a}")
        if is_nonpositive_integer(self.gamma):
            raise ParameterDomainError(
                f"gamma must not be zero or a negative integer, got {self.gamma}"
            )
        object.__setattr__(
            self, "epsilon", self.alpha + self.beta + 1.0 - self.gamma - self.delta
        )

    @property
    def radius(self) -> float:
        """Convergence radius of the origin series."""
        return min(1.0, abs(self.a))

    @property
    def singular_points(self) -> frozenset[float]:
        return frozenset({0.0, 1.0, self.a})

    def replace(self, **changes) -> "HeunParams":
        kw = dict(
            a=self.a, q=self.q, alpha=self.alpha, beta=self.beta,
            gamma=self.gamma, delta=self.delta,
        )
        kw.update(changes)
        return HeunParams(**kw)

    def as_dict(self) -> dict:
        return {
            "a": self.a, "q": self.q, "alpha": self.alpha, "beta": self.beta,
            "gamma": self.gamma, "delta": self.delta, "epsilon": self.epsilon,
        }


@dataclass(frozen=True)
class SeriesExpansion:
    coeffs: tuple[float, ...]
    radius: float
    truncation_bound: float


class HeunValue(NamedTuple):
    value: float
    deriv: float
    error: float
    terms: int


class _ScaledCoefficients:
    """Lazily grown coefficients d_k = c_k * R**k of the origin series.

    Scaling by the radius R keeps d_k of order one even when |a| is small,
    where the raw c_k grow like |a|**-k and would overflow.
    """

    def __init__(self, p: HeunParams):
        self.p = p
        self.R = p.radius
        self.d = [1.0, p.q / (p.a * p.gamma) * self.R]
        self._lock = threading.Lock()

    def upto(self, n: int) -> list[float]:
        if len(self.d) > n:
            return self.d
        with self._lock:
            p, R, d = self.p, self.R, self.d
            ap1 = 1.0 + p.a
            aden = p.a * p.delta + p.epsilon
            while len(d) <= n:
                j = len(d) - 1
                diag = j * ((j - 1 + p.gamma) * ap1 + aden) + p.q
                low = (j - 1 + p.alpha) * (j - 1 + p.beta)
                d.append(R * (diag * d[j] - low * R * d[j - 1]) / (p.a * (j + 1) * (j + p.gamma)))
        return self.d


@lru_cache(maxsize=512)
def _coefficients(p: HeunParams) -> _ScaledCoefficients:
    return _ScaledCoefficients(p)


def heun_series_coeffs(p: HeunParams, n: int, x: float = 0.0) -> SeriesExpansion:
    """Coefficients c_0..c_n of the origin series of H_l(a, q; alpha, beta, gamma, delta; x).

    ``truncation_bound`` estimates the neglected tail sum_{k>n} |c_k x^k| at ``x``
    from a geometric continuation of the last retained term.
    """
    if n < 0:
        raise ParameterDomainError(f"n must be nonnegative, got {n}")
    R = p.radius
    d = _coefficients(p).upto(max(n, 1))
    coeffs = tuple(d[k] / R**k for k in range(n + 1))
    r = abs(x) / R
    if r == 0.0:
        bound = 0.0
    elif r >= 1.0:
        bound = math.inf
    else:
        bound = abs(d[n]) * r**n * r / (1.0 - r)
    return SeriesExpansion(coeffs=coeffs, radius=R, truncation_bound=bound)


def _check_disk(p: HeunParams, x: float) -> float:
    x = float(x)
    R = p.radius
    if not math.isfinite(x) or abs(x) > SAFE_FRACTION * R:
        raise DomainError(
            f"|x|={abs(x):.6g} outside the evaluation disk {SAFE_FRACTION}*min(1,|a|)="
            f"{SAFE_FRACTION * R:.6g}"
        )
    return x


def heun_eval(p: HeunParams, x: float) -> HeunValue:
    """H_l and H_l' at ``x`` plus an absolute error estimate for the value."""
    x = _check_disk(p, x)
    cache = _coefficients(p)
    R = cache.R
    u = x / R
    kmin = int(2 * max(abs(p.alpha), abs(p.beta), abs(p.gamma), abs(p.delta), abs(p.q))) + 4
    vals = [1.0]
    ders = []
    run = 0
    s_val = 1.0
    s_der = 0.0
    upow = 1.0  # u**(k-1)
    k = 1
    d = cache.upto(64)
    while True:
        if k >= len(d):
            d = cache.upto(2 * len(d))
        dk = d[k]
        dt = k * dk * upow
        upow *= u
        t = dk * upow
        vals.append(t)
        ders.append(dt)
        s_val += t
        s_der += dt
        if k > kmin:
            scale = max(abs(s_val), abs(s_der), 1e-300)
            if abs(t) <= STOP_REL * scale and abs(dt) <= STOP_REL * scale:
                run += 1
                if run >= STOP_RUN:
                    break
            else:
                run = 0
        k += 1
        if k > MAX_TERMS:
            raise ConvergenceError(
                f"Heun series did not reach the truncation rule within {MAX_TERMS} terms",
                partial=math.fsum(vals),
            )
    value = math.fsum(vals)
    deriv = math.fsum(ders) / R
    r = abs(u)
    tail = abs(vals[-1]) * r / (1.0 - r) if r else 0.0
    roundoff = 100.0 * EPS * math.fsum(abs(v) for v in vals)
    return HeunValue(value, deriv, max(tail, roundoff), k + 1)


def heun_l(p: HeunParams, x: float) -> float:
    """Local Heun function H_l(a, q; alpha, beta, gamma, delta; x), normalized H_l(0) = 1."""
    return heun_eval(p, x).value


def heun_l_prime(p: HeunParams, x: float) -> float:
    """Derivative of :func:`heun_l` by the term-wise differentiated series."""
    return heun_eval(p, x).deriv


# ---------------------------------------------------------------------------
# Gauss hypergeometric
# ---------------------------------------------------------------------------


def _hyp_series(a: float, b: float, c: float, z: float) -> float:
    terms = [1.0]
    t = 1.0
    run = 0
    nmin = int(max(abs(a), abs(b), abs(c))) + 3
    n = 0
    while True:
        t *= (a + n) * (b + n) / ((c + n) * (n + 1)) * z
        n += 1
        if t == 0.0:
            break
        terms.append(t)
        if n > nmin:
            if abs(t) <= STOP_REL * abs(math.fsum(terms)):
                run += 1
                if run >= STOP_RUN:
                    break
            else:
                run = 0
        if n > HYP_MAX_TERMS:
            raise ConvergenceError(
                f"2F1({a},{b};{c};{z}) series did not converge", partial=math.fsum(terms)
            )
    return math.fsum(terms)


def _hyp_positive(a: float, b: float, c: float, z: float) -> float:
    # 0.5 < z < 1: sum whichever of the two Euler-related series decays faster
    if c < a + b and not (is_nonpositive_integer(a) or is_nonpositive_integer(b)):
        return (1.0 - z) ** (c - a - b) * _hyp_series(c - a, c - b, c, z)
    return _hyp_series(a, b, c, z)


def hyp2f1(a: float, b: float, c: float, z: float) -> float:
    """Gauss hypergeometric function 2F1(a, b; c; z) for real z < 0.9.

    Direct series for |z| <= 0.5, Pfaff transformation for z < -0.5 and the
    Euler transformation (when it speeds convergence) for 0.5 < z < 0.9.
    Terminating (polynomial) cases are summed directly for any z < 1.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    if not hyp2f1_defined(a, b, c):
        raise ParameterDomainError(f"c must not be zero or a negative integer, got {c}")
    if not math.isfinite(z) or z >= 1.0:
        raise DomainError(f"2F1 requires z < 1, got {z}")
    if z == 0.0:
        return 1.0
    if is_nonpositive_integer(a) or is_nonpositive_integer(b):
        return _hyp_series(a, b, c, z)
    if abs(z) <= 0.5:
        return _hyp_series(a, b, c, z)
    if z < -0.5:
        w = z / (z - 1.0)
        inner = _hyp_series(a, c - b, c, w) if w <= 0.5 else _hyp_positive(a, c - b, c, w)
        return (1.0 - z) ** (-a) * inner
    if z < SAFE_FRACTION:
        return _hyp_positive(a, b, c, z)
    raise DomainError(f"2F1 evaluation refused for z={z} in [0.9, 1)")


def hyp2f1_prime(a: float, b: float, c: float, z: float) -> float:
    """d/dz 2F1(a, b; c; z) = (ab/c) 2F1(a+1, b+1; c+1; z)."""
    if not hyp2f1_defined(a, b, c):
        raise ParameterDomainError(f"c must not be zero or a negative integer, got {c}")
    ab = a * b
    if ab == 0.0:
        if not math.isfinite(z) or z >= 1.0:
            raise DomainError(f"2F1 requires z < 1, got {z}")
        return 0.0
    return ab / c * hyp2f1(a + 1.0, b + 1.0, c + 1.0, z)


def hyp2f1_second(a: float, b: float, c: float, z: float) -> float:
    """Second z-derivative of 2F1(a, b; c; z)."""
    ab = a * b
    if ab == 0.0:
        return 0.0
    return ab / c * hyp2f1_prime(a + 1.0, b + 1.0, c + 1.0, z)


# ---------------------------------------------------------------------------
# Carlson forms and Legendre elliptic integrals
# ---------------------------------------------------------------------------

_RF_SCALE = (3.0 * EPS) ** (-1.0 / 6.0)
_RD_SCALE = (EPS / 4.0) ** (-1.0 / 6.0)


def carlson_rf(x: float, y: float, z: float) -> float:
    """Symmetric integral R_F(x, y, z) by Carlson's duplication algorithm."""
    x, y, z = float(x), float(y), float(z)
    if min(x, y, z) < 0.0:
        raise DomainError(f"R_F arguments must be nonnegative, got {(x, y, z)}")
    if (x == 0.0) + (y == 0.0) + (z == 0.0) > 1:
        raise DomainError("R_F is infinite when more than one argument is zero")
    x0, y0 = x, y
    a0 = (x + y + z) / 3.0
    q = _RF_SCALE * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a = a0
    scale = 1.0
    for _ in range(200):
        if q * scale < abs(a):
            break
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    else:  # pragma: no cover - duplication converges geometrically
        raise ConvergenceError("R_F duplication did not converge")
    X = scale * (a0 - x0) / a
    Y = scale * (a0 - y0) / a
    Z = -(X + Y)
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    return (1.0 - e2 / 10.0 + e3 / 14.0 + e2 * e2 / 24.0 - 3.0 * e2 * e3 / 44.0) / math.sqrt(a)


def carlson_rd(x: float, y: float, z: float) -> float:
    """Carlson's R_D(x, y, z), symmetric in x and y."""
    x, y, z = float(x), float(y), float(z)
    if min(x, y) < 0.0 or z <= 0.0 or x + y == 0.0:
        raise DomainError(f"R_D needs x, y >= 0 (not both zero) and z > 0, got {(x, y, z)}")
    x0, y0 = x, y
    a0 = (x + y + 3.0 * z) / 5.0
    q = _RD_SCALE * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a = a0
    scale = 1.0
    acc = []
    for _ in range(200):
        if q * scale < abs(a):
            break
        sx, sy, sz = math.sqrt(x), math.sqrt(y), math.sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        acc.append(scale / (sz * (z + lam)))
        x = 0.25 * (x + lam)
        y = 0.25 * (y + lam)
        z = 0.25 * (z + lam)
        a = 0.25 * (a + lam)
        scale *= 0.25
    else:  # pragma: no cover
        raise ConvergenceError("R_D duplication did not converge")
    X = scale * (a0 - x0) / a
    Y = scale * (a0 - y0) / a
    Z = -(X + Y) / 3.0
    xy = X * Y
    zz = Z * Z
    e2 = xy - 6.0 * zz
    e3 = (3.0 * xy - 8.0 * zz) * Z
    e4 = 3.0 * (xy - zz) * zz
    e5 = xy * zz * Z
    poly = (
        1.0 - 3.0 * e2 / 14.0 + e3 / 6.0 + 9.0 * e2 * e2 / 88.0
        - 3.0 * e4 / 22.0 - 9.0 * e2 * e3 / 52.0 + 3.0 * e5 / 26.0
    )
    return scale * poly / (a * math.sqrt(a)) + 3.0 * math.fsum(acc)


def _check_modulus(k: float, allow_one: bool) -> float:
    k = float(k)
    ok = 0.0 <= k <= 1.0 if allow_one else 0.0 <= k < 1.0
    if not ok:
        raise DomainError(f"modulus k={k} outside {'[0, 1]' if allow_one else '[0, 1)'}")
    return k


def _legendre_f(s: float, c2: float, k: float) -> float:
    return s * carlson_rf(c2, 1.0 - k * k * (s * s), 1.0)


def ellip_f_incomplete(phi: float, k: float) -> float:
    """Incomplete elliptic integral of the first kind F(phi, k), phi in [0, pi/2]."""
    phi = float(phi)
    if not 0.0 <= phi <= HALF_PI:
        raise DomainError(f"phi={phi} outside [0, pi/2]")
    k = _check_modulus(k, allow_one=False)
    if phi == 0.0:
        return 0.0
    # cos(phi)**2 as sin(pi/2 - phi)**2: exact zero at phi = pi/2
    c = math.sin(HALF_PI - phi)
    return _legendre_f(math.sin(phi), c * c, k)


def ellip_k_complete(k: float) -> float:
    """Complete elliptic integral K(k) = F(pi/2, k)."""
    k = _check_modulus(k, allow_one=False)
    return _legendre_f(1.0, 0.0, k)


def ellip_e_complete(k: float) -> float:
    """Complete elliptic integral of the second kind E(k), k in [0, 1]."""
    k = _check_modulus(k, allow_one=True)
    if k == 1.0:
        return 1.0
    y = 1.0 - k * k
    return carlson_rf(0.0, y, 1.0) - k * k / 3.0 * carlson_rd(0.0, y, 1.0)
