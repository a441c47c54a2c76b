"""Student's t distribution: CDF, two-sided tail probability and quantile.

The CDF goes through the regularized incomplete beta function, evaluated
with a modified Lentz continued fraction. The quantile uses closed forms for
one and two degrees of freedom and a bracketed Newton iteration otherwise.
"""
from __future__ import annotations

import math
from functools import lru_cache
from statistics import NormalDist

from .errors import DomainError

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 500


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = _TINY if abs(d) < _TINY else d
        c = 1.0 + aa / c
        c = _TINY if abs(c) < _TINY else c
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta failed to converge (a={a}, b={b}, x={x})")


def betainc(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function I_x(a, b)."""
    if a <= 0 or b <= 0:
        raise DomainError("betainc needs a, b > 0")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"betainc needs 0 <= x <= 1, got {x}")
    if x == 0.0 or x == 1.0:
        return x
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _check_df(df: float) -> float:
    if not math.isfinite(df) or df < 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {df!r}")
    return float(df)


def pdf(x: float, df: float) -> float:
    df = _check_df(df)
    log_norm = math.lgamma((df + 1) / 2) - math.lgamma(df / 2) - 0.5 * math.log(df * math.pi)
    return math.exp(log_norm - (df + 1) / 2 * math.log1p(x * x / df))


def two_sided_p(t_stat: float, df: float) -> float:
    """P(|T| >= |t_stat|), computed without cancellation in the far tail."""
    df = _check_df(df)
    if math.isnan(t_stat):
        raise DomainError("t statistic is NaN")
    if math.isinf(t_stat):
        return 0.0
    return betainc(df / 2.0, 0.5, df / (df + t_stat * t_stat))


def cdf(x: float, df: float) -> float:
    if math.isnan(x):
        raise DomainError("x is NaN")
    tail = 0.5 * two_sided_p(x, df)
    return 1.0 - tail if x > 0 else tail


def sf(x: float, df: float) -> float:
    return cdf(-x, df)


@lru_cache(maxsize=4096)
def quantile(p: float, df: float) -> float:
    """Inverse CDF of Student's t."""
    df = _check_df(df)
    if not 0.0 < p < 1.0:
        raise DomainError(f"probability must be in (0, 1), got {p!r}")
    if p == 0.5:
        return 0.0
    # work with the smaller tail mass so tiny lower-tail p keep their digits
    if p < 0.5:
        return -_upper_quantile(p, df)
    return _upper_quantile(1.0 - p, df)


def _upper_quantile(q: float, df: float) -> float:
    """The x > 0 with sf(x) = q, for 0 < q < 0.5."""
    if df == 1:
        return 1.0 / math.tan(math.pi * q)
    if df == 2:
        return (1.0 - 2.0 * q) / math.sqrt(2.0 * q * (1.0 - q))
    # Cornish-Fisher start from the normal quantile.
    z = -NormalDist().inv_cdf(q)
    g1 = (z ** 3 + z) / 4
    g2 = (5 * z ** 5 + 16 * z ** 3 + 3 * z) / 96
    x = max(z + g1 / df + g2 / df ** 2, 1e-8)
    lo, hi = 0.0, max(2.0 * x, 1.0)
    while sf(hi, df) > q:
        lo, hi = hi, hi * 2.0
    for _ in range(200):
        if not lo < x < hi:
            x = 0.5 * (lo + hi)
        err = sf(x, df) - q  # decreasing in x
        if err > 0:
            lo = x
        else:
            hi = x
        density = pdf(x, df)
        if density == 0.0:  # far enough out that the density underflows; bisect
            x = 0.5 * (lo + hi)
            continue
        step = err / density
        x_new = x + step
        if abs(step) <= 1e-15 * max(1.0, abs(x)) or hi - lo <= 1e-15 * hi:
            return x_new if lo <= x_new <= hi else x
        x = x_new
    return x
