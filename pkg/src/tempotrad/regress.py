"""Simple linear regression with t-based inference, Pearson correlation,
and the incomplete beta/gamma functions behind the p-values."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import DomainError

_EPS = 1e-16
_TINY = 1e-300
_MAX_TERMS = 10_000


def _beta_cf(x: float, a: float, b: float) -> float:
    """Continued fraction for I_x(a, b), modified Lentz evaluation."""
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    d = 1.0 / (d if abs(d) > _TINY else _TINY)
    h = d
    for m in range(1, _MAX_TERMS):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = 1.0 + aa / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (x={x}, a={a}, b={b})")


def betainc(a: float, b: float, x: float, x_complement: float | None = None) -> float:
    """Regularized incomplete beta I_x(a, b).

    ``x_complement`` may carry 1 - x computed without cancellation.
    """
    if a <= 0 or b <= 0:
        raise DomainError("betainc needs a > 0 and b > 0")
    y = 1.0 - x if x_complement is None else x_complement
    if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
        raise DomainError(f"betainc argument outside [0, 1]: {x}")
    if x == 0.0:
        return 0.0
    if y == 0.0:
        return 1.0
    log_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b) + a * math.log(x) + b * math.log(y)
    )
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _beta_cf(x, a, b) / a
    return 1.0 - front * _beta_cf(y, b, a) / b


def _t_tail(t: float, df: float) -> float:
    """P(T > |t|) for Student's t with ``df`` degrees of freedom."""
    if df < 1:
        raise DomainError(f"df must be >= 1, got {df}")
    if t == 0:
        return 0.5
    t2 = t * t
    return 0.5 * betainc(df / 2.0, 0.5, df / (df + t2), t2 / (df + t2))


def t_cdf(t: float, df: float) -> float:
    """Student's t cumulative distribution function."""
    tail = _t_tail(t, df)
    return tail if t < 0 else 1.0 - tail


def p_two_tailed(t: float, df: float) -> float:
    """Two-sided p-value, 2 * (1 - t_cdf(|t|, df))."""
    return min(1.0, 2.0 * _t_tail(t, df))


def gammainc_upper(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x)."""
    if a <= 0:
        raise DomainError("gammainc_upper needs a > 0")
    if x < 0:
        raise DomainError("gammainc_upper needs x >= 0")
    if x == 0:
        return 1.0
    log_front = a * math.log(x) - x - math.lgamma(a)
    if x < a + 1.0:
        # series for the lower function P(a, x)
        term = total = 1.0 / a
        ap = a
        for _ in range(_MAX_TERMS):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * _EPS:
                return 1.0 - total * math.exp(log_front)
        raise ArithmeticError("incomplete gamma series did not converge")
    # continued fraction for Q(a, x), modified Lentz
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_TERMS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        d = 1.0 / (d if abs(d) > _TINY else _TINY)
        c = b + an / c
        c = c if abs(c) > _TINY else _TINY
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(log_front) * h
    raise ArithmeticError("incomplete gamma continued fraction did not converge")


def chi2_sf(x: float, df: int) -> float:
    """Upper tail probability of the chi-square distribution."""
    if df < 1:
        raise DomainError(f"df must be >= 1, got {df}")
    return gammainc_upper(df / 2.0, max(x, 0.0) / 2.0)


@dataclass(frozen=True)
class RegressionFit:
    n: int
    slope: float
    intercept: float
    r_squared: float
    slope_se: float
    t_stat: float | None
    df: int
    p_two_tailed: float
    degenerate: bool


def ols_fit(x, y) -> RegressionFit:
    """Least-squares line of y on x with slope standard error and t-test.

    Fits with n < 3, zero residual, or constant y come back flagged
    ``degenerate`` with ``t_stat = None`` and p = 1.
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise DomainError("x and y must be 1-D series of equal length")
    n = xs.size
    if n < 2:
        raise DomainError("ols_fit needs at least two points")
    dx = xs - xs.mean()
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise DomainError("all x values are equal")
    y_bar = ys.mean()
    dy = ys - y_bar
    sxy = float(np.dot(dx, dy))
    ss_tot = float(np.dot(dy, dy))
    slope = sxy / sxx
    intercept = float(y_bar - slope * xs.mean())
    resid = dy - slope * dx
    ss_res = float(np.dot(resid, resid))

    scale = float(np.max(np.abs(ys)))
    flat_y = ss_tot <= n * (1e-14 * scale) ** 2
    if flat_y:
        r2 = 0.0
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    exact = flat_y or ss_res <= 1e-24 * ss_tot
    if n < 3 or exact:
        return RegressionFit(n, slope, intercept, r2, 0.0, None, n - 2, 1.0, True)
    se = math.sqrt(ss_res / (n - 2) / sxx)
    t = slope / se
    return RegressionFit(n, slope, intercept, r2, se, t, n - 2, p_two_tailed(t, n - 2), False)


def pearson_r(a, b) -> float:
    xa = np.asarray(a, dtype=float)
    xb = np.asarray(b, dtype=float)
    if xa.shape != xb.shape or xa.ndim != 1:
        raise DomainError("series must be 1-D and of equal length")
    if xa.size < 2:
        raise DomainError("pearson_r needs at least two pairs")
    da = xa - xa.mean()
    db = xb - xb.mean()
    saa = float(np.dot(da, da))
    sbb = float(np.dot(db, db))
    n = xa.size
    if saa <= n * (1e-14 * np.max(np.abs(xa))) ** 2 or sbb <= n * (1e-14 * np.max(np.abs(xb))) ** 2:
        raise DomainError("pearson_r is undefined for a constant series")
    r = float(np.dot(da, db)) / math.sqrt(saa * sbb)
    return min(1.0, max(-1.0, r))
