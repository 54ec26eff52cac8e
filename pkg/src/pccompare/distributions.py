"""Special functions and distribution functions used to turn statistics into p-values.

Incomplete beta and gamma functions are evaluated with modified Lentz continued
fractions (and a power series for the lower incomplete gamma). Every CDF has a
companion survival function computed from the complementary integral, so small
upper-tail p-values keep full relative precision instead of being formed as
``1 - cdf``.
"""

from __future__ import annotations

import math

from .errors import DomainError

__all__ = [
    "ln_gamma",
    "reg_inc_beta",
    "reg_inc_gamma_lower",
    "reg_inc_gamma_upper",
    "normal_cdf",
    "normal_sf",
    "normal_ppf",
    "t_cdf",
    "t_sf",
    "f_cdf",
    "f_sf",
    "chisq_cdf",
    "chisq_sf",
]

_EPS = 1e-16
_TINY = 1e-300
_MAX_ITER = 100_000


def ln_gamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0 or math.isinf(x):
        raise DomainError(f"ln_gamma requires a finite x > 0, got {x!r}")
    # CPython's lgamma is a Lanczos approximation with careful summation.
    return math.lgamma(x)


def _ln_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def _betacf(a: float, b: float, x: float) -> float:
    # Continued fraction for I_x(a, b) / prefactor, modified Lentz.
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
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
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction did not converge (a={a}, b={b}, x={x})")


def _ibeta_pair(a: float, b: float, x: float, y: float) -> tuple[float, float]:
    """Return ``(I_x(a,b), 1 - I_x(a,b))`` with ``y = 1 - x`` given exactly."""
    a, b, x, y = float(a), float(b), float(x), float(y)
    if x <= 0.0:
        return 0.0, 1.0
    if y <= 0.0:
        return 1.0, 0.0
    log_front = a * math.log(x) + b * math.log(y) - _ln_beta(a, b)
    if x < (a + 1.0) / (a + b + 2.0):
        lower = math.exp(log_front) * _betacf(a, b, x) / a
        return lower, 1.0 - lower
    upper = math.exp(log_front) * _betacf(b, a, y) / b
    return 1.0 - upper, upper


def _check_beta_args(a: float, b: float, x: float) -> None:
    if not (a > 0 and b > 0):
        raise DomainError(f"reg_inc_beta requires a > 0 and b > 0, got a={a!r}, b={b!r}")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"reg_inc_beta requires 0 <= x <= 1, got {x!r}")


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta function ``I_x(a, b)``."""
    _check_beta_args(a, b, x)
    lower, _ = _ibeta_pair(a, b, x, 1.0 - x)
    return min(1.0, max(0.0, lower))


def _gamma_series(s: float, x: float) -> float:
    # P(s, x) by its power series; converges quickly for x < s + 1.
    term = 1.0 / s
    total = term
    ap = s
    for _ in range(_MAX_ITER):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * _EPS:
            return total * math.exp(-x + s * math.log(x) - math.lgamma(s))
    raise ArithmeticError(f"incomplete gamma series did not converge (s={s}, x={x})")


def _gamma_cf(s: float, x: float) -> float:
    # Q(s, x) by continued fraction (modified Lentz); for x >= s + 1.
    b = x + 1.0 - s
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, _MAX_ITER + 1):
        an = -i * (i - s)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _EPS:
            return math.exp(-x + s * math.log(x) - math.lgamma(s)) * h
    raise ArithmeticError(f"incomplete gamma continued fraction did not converge (s={s}, x={x})")


def _igamma_pair(s: float, x: float) -> tuple[float, float]:
    s, x = float(s), float(x)
    if not s > 0:
        raise DomainError(f"incomplete gamma requires s > 0, got {s!r}")
    if not x >= 0:
        raise DomainError(f"incomplete gamma requires x >= 0, got {x!r}")
    if x == 0.0:
        return 0.0, 1.0
    if math.isinf(x):
        return 1.0, 0.0
    if x < s + 1.0:
        p = min(1.0, _gamma_series(s, x))
        return p, 1.0 - p
    q = min(1.0, _gamma_cf(s, x))
    return 1.0 - q, q


def reg_inc_gamma_lower(s: float, x: float) -> float:
    """Regularized lower incomplete gamma ``P(s, x)``."""
    return _igamma_pair(s, x)[0]


def reg_inc_gamma_upper(s: float, x: float) -> float:
    """Regularized upper incomplete gamma ``Q(s, x) = 1 - P(s, x)``."""
    return _igamma_pair(s, x)[1]


def normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-float(z) / math.sqrt(2.0))


def normal_sf(z: float) -> float:
    return 0.5 * math.erfc(float(z) / math.sqrt(2.0))


# Wichura (1988), algorithm AS 241 (PPND16).
_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4, 2.5090809287301226727e3)
_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
      2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
      5.2264952788528545610e3)
_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
      3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4)
_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
      1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
      1.05075007164441684324e-9)
_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7)
_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
      7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
      2.04426310338993978564e-15)


def _poly(coefs: tuple[float, ...], x: float) -> float:
    acc = 0.0
    for c in reversed(coefs):
        acc = acc * x + c
    return acc


def normal_ppf(p: float) -> float:
    """Standard normal quantile (inverse CDF)."""
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"normal_ppf requires 0 <= p <= 1, got {p!r}")
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly(_A, r) / _poly(_B, r)
    r = p if q < 0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        val = _poly(_C, r) / _poly(_D, r)
    else:
        r -= 5.0
        val = _poly(_E, r) / _poly(_F, r)
    return -val if q < 0 else val


def _t_tails(t: float, df: float) -> tuple[float, float]:
    if not df > 0:
        raise DomainError(f"t distribution requires df > 0, got {df!r}")
    if math.isinf(t):
        return (1.0, 0.0) if t > 0 else (0.0, 1.0)
    t2 = t * t
    # one-sided tail beyond |t| is I_{df/(df+t^2)}(df/2, 1/2) / 2
    x = df / (df + t2)
    y = t2 / (df + t2)
    tail, _ = _ibeta_pair(df / 2.0, 0.5, x, y)
    tail *= 0.5
    if t > 0:
        return 1.0 - tail, tail
    return tail, 1.0 - tail


def t_cdf(t: float, df: float) -> float:
    """Student-t CDF."""
    return _t_tails(t, df)[0]


def t_sf(t: float, df: float) -> float:
    return _t_tails(t, df)[1]


def _f_tails(f: float, df1: float, df2: float) -> tuple[float, float]:
    if not (df1 > 0 and df2 > 0):
        raise DomainError(f"F distribution requires df1, df2 > 0, got {df1!r}, {df2!r}")
    if not f >= 0:
        raise DomainError(f"F distribution requires f >= 0, got {f!r}")
    if math.isinf(f):
        return 1.0, 0.0
    denom = df1 * f + df2
    return _ibeta_pair(df1 / 2.0, df2 / 2.0, df1 * f / denom, df2 / denom)


def f_cdf(f: float, df1: float, df2: float) -> float:
    """Fisher F CDF."""
    return _f_tails(f, df1, df2)[0]


def f_sf(f: float, df1: float, df2: float) -> float:
    return _f_tails(f, df1, df2)[1]


def _chisq_tails(x: float, df: float) -> tuple[float, float]:
    if not df > 0:
        raise DomainError(f"chi-squared requires df > 0, got {df!r}")
    if not x >= 0:
        raise DomainError(f"chi-squared requires x >= 0, got {x!r}")
    return _igamma_pair(df / 2.0, x / 2.0)


def chisq_cdf(x: float, df: float) -> float:
    """Chi-squared CDF, ``P(df/2, x/2)``."""
    return _chisq_tails(x, df)[0]


def chisq_sf(x: float, df: float) -> float:
    return _chisq_tails(x, df)[1]
