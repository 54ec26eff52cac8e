"""Checks of the normality and homogeneity assumptions behind the parametric tests."""

from __future__ import annotations

import math
from collections.abc import Hashable, Sequence
from dataclasses import dataclass

import numpy as np

from . import distributions as dist
from .errors import DegenerateDataError, DomainError
from .pca import GroupFactor
from .stattests import NotApplicable, PValue

_SMALL = 1e-19
_SINGULAR_RCOND = 1e-12

# polynomial coefficients, lowest order first
_C1 = (0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056)
_C2 = (0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633)
_C3 = (0.544, -0.39978, 0.025054, -6.714e-4)
_C4 = (1.3822, -0.77857, 0.062767, -0.0020322)
_C5 = (-1.5861, -0.31082, -0.083751, 0.0038915)
_C6 = (-0.4803, -0.082676, 0.0030302)
_G = (-2.273, 0.459)


def _poly(coefs: Sequence[float], x: float) -> float:
    acc = 0.0
    for c in reversed(coefs):
        acc = acc * x + c
    return acc


@dataclass(frozen=True)
class AssumptionTest:
    statistic: float
    p: PValue
    df: tuple[float, ...] = ()


def _sorted_sample(x, what: str, lo: int, hi: int) -> np.ndarray:
    arr = np.sort(np.asarray(x, dtype=float).ravel())
    if not lo <= arr.size <= hi:
        raise DomainError(f"{what} needs {lo} <= n <= {hi}, got n = {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} received non-finite values")
    return arr


def _sw_coefficients(n: int) -> np.ndarray:
    """Antisymmetric coefficient vector (length n) for the W statistic."""
    half = n // 2
    a = np.zeros(half)
    if n == 3:
        a[0] = math.sqrt(0.5)
    else:
        m = np.array([dist.normal_ppf((i - 0.375) / (n + 0.25)) for i in range(1, half + 1)])
        summ2 = 2.0 * float(np.sum(m**2))
        ssumm2 = math.sqrt(summ2)
        rsn = 1.0 / math.sqrt(n)
        a1 = _poly(_C1, rsn) - m[0] / ssumm2
        if n > 5:
            a2 = -m[1] / ssumm2 + _poly(_C2, rsn)
            fac = math.sqrt((summ2 - 2.0 * m[0] ** 2 - 2.0 * m[1] ** 2) / (1.0 - 2.0 * a1**2 - 2.0 * a2**2))
            a[1] = a2
            start = 2
        else:
            fac = math.sqrt((summ2 - 2.0 * m[0] ** 2) / (1.0 - 2.0 * a1**2))
            start = 1
        a[0] = a1
        a[start:] = -m[start:] / fac
    full = np.zeros(n)
    full[:half] = -a
    full[n - half :] = a[::-1]
    return full


def _shapiro_w(x: np.ndarray) -> tuple[float, float]:
    """Return ``(W, 1 - W)`` for sorted ``x``, with 1 - W computed directly."""
    n = x.size
    rng = x[-1] - x[0]
    if rng < _SMALL:
        raise DegenerateDataError("Shapiro-Wilk: sample has zero range")
    coef = _sw_coefficients(n)
    asa = coef - coef.mean()
    xsx = x / rng
    xsx = xsx - xsx.mean()
    ssa = float(np.dot(asa, asa))
    ssx = float(np.dot(xsx, xsx))
    sax = float(np.dot(asa, xsx))
    root = math.sqrt(ssa * ssx)
    w1 = (root - sax) * (root + sax) / (ssa * ssx)
    return 1.0 - w1, w1


def shapiro_wilk(x) -> AssumptionTest:
    """Shapiro-Wilk normality test (Royston's approximation, 3 <= n <= 5000)."""
    x = _sorted_sample(x, "Shapiro-Wilk", 3, 5000)
    n = x.size
    w, w1 = _shapiro_w(x)
    if n == 3:
        p = 6.0 / math.pi * (math.asin(math.sqrt(w)) - math.pi / 3.0)
        return AssumptionTest(w, min(1.0, max(0.0, p)))
    y = math.log(w1)
    if n <= 11:
        gamma = _poly(_G, n)
        if y >= gamma:
            return AssumptionTest(w, 1e-99)
        y = -math.log(gamma - y)
        mu = _poly(_C3, n)
        sigma = math.exp(_poly(_C4, n))
    else:
        ln = math.log(n)
        mu = _poly(_C5, ln)
        sigma = math.exp(_poly(_C6, ln))
    return AssumptionTest(w, dist.normal_sf((y - mu) / sigma))


def shapiro_francia_w(x) -> float:
    """Shapiro-Francia W': squared correlation of the sorted sample with normal scores."""
    x = _sorted_sample(x, "Shapiro-Francia", 5, 5000)
    n = x.size
    scores = np.array([dist.normal_ppf((i - 0.375) / (n + 0.25)) for i in range(1, n + 1)])
    if x[-1] - x[0] < _SMALL:
        raise DegenerateDataError("Shapiro-Francia: sample has zero range")
    r = np.corrcoef(x, scores)[0, 1]
    return float(r * r)


def _moment_kurtosis(x: np.ndarray) -> float:
    d = x - x.mean()
    return x.size * float(np.sum(d**4)) / float(np.sum(d**2)) ** 2


def royston_w(x) -> float:
    """Normality statistic per column: Shapiro-Francia for leptokurtic samples, else Shapiro-Wilk."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size >= 5 and _moment_kurtosis(x) > 3:
        return shapiro_francia_w(x)
    return shapiro_wilk(x).statistic


def royston_z(w: float, n: int) -> float:
    """Normalizing transform of a W statistic (log-normal approximation)."""
    ln = math.log(n)
    mu = _poly(_C5, ln)
    sigma = math.exp(_poly(_C6, ln))
    return (math.log1p(-w) - mu) / sigma


def royston(x) -> AssumptionTest:
    """Royston's H test of multivariate normality for one group (rows are observations).

    Each column's W is mapped to a normal deviate, squared normal quantiles are
    summed, and the equivalent degrees of freedom shrink with the average
    column correlation.
    """
    data = np.asarray(x, dtype=float)
    if data.ndim == 1:
        data = data.reshape(-1, 1)
    n, q = data.shape
    if not 3 <= n <= 2000:
        raise DomainError(f"Royston test needs 3 <= n <= 2000, got n = {n}")
    z = np.array([royston_z(royston_w(data[:, j]), n) for j in range(q)])
    psi = np.array([dist.normal_ppf(dist.normal_cdf(-zj) / 2.0) ** 2 for zj in z])
    if q == 1:
        e = 1.0
    else:
        u = 0.715
        ln = math.log(n)
        v = 0.21364 + 0.015124 * ln**2 - 0.0018034 * ln**3
        corr = np.clip(np.corrcoef(data, rowvar=False), -1.0, 1.0)
        nc = corr**5 * (1.0 - u * (1.0 - corr) ** u / v)
        mean_c = (nc.sum() - q) / (q * q - q)
        e = q / (1.0 + (q - 1.0) * mean_c)
    h = e * float(psi.sum()) / q
    return AssumptionTest(h, dist.chisq_sf(h, e), (e,))


def bartlett(groups: Sequence) -> AssumptionTest:
    """Bartlett's test for equal variances across groups."""
    samples = [np.asarray(g, dtype=float).ravel() for g in groups]
    if len(samples) < 2:
        raise DomainError("Bartlett test needs at least two groups")
    if any(s.size < 2 for s in samples):
        raise DomainError("Bartlett test needs at least 2 observations per group")
    k = len(samples)
    dfs = np.array([s.size - 1.0 for s in samples])
    variances = np.array([s.var(ddof=1) for s in samples])
    df = (k - 1.0,)
    if np.all(variances == 0):
        return AssumptionTest(math.nan, NotApplicable("all groups have zero variance"), df)
    if np.any(variances == 0):
        return AssumptionTest(math.inf, 0.0, df)
    total = dfs.sum()
    pooled = float(np.sum(dfs * variances) / total)
    num = total * math.log(pooled) - float(np.sum(dfs * np.log(variances)))
    corr = 1.0 + (float(np.sum(1.0 / dfs)) - 1.0 / total) / (3.0 * (k - 1))
    k2 = max(0.0, num / corr)
    return AssumptionTest(k2, dist.chisq_sf(k2, df[0]), df)


def _logdet(cov: np.ndarray) -> float | None:
    d = np.sqrt(np.diag(cov))
    if np.any(d == 0):
        return None
    scaled = cov / np.outer(d, d)
    if 1.0 / np.linalg.cond(scaled) < _SINGULAR_RCOND:
        return None
    sign, logdet = np.linalg.slogdet(cov)
    return float(logdet) if sign > 0 else None


def box_m(groups: Sequence) -> AssumptionTest:
    """Box's M test for equal covariance matrices (chi-squared approximation)."""
    mats = [np.asarray(g, dtype=float) for g in groups]
    mats = [m.reshape(-1, 1) if m.ndim == 1 else m for m in mats]
    if len(mats) < 2:
        raise DomainError("Box's M needs at least two groups")
    q = mats[0].shape[1]
    if any(m.shape[1] != q for m in mats):
        raise DomainError("Box's M groups must share the same number of columns")
    g = len(mats)
    dfs = np.array([m.shape[0] - 1.0 for m in mats])
    df = (q * (q + 1) * (g - 1) / 2.0,)
    if np.any(dfs + 1 <= q):
        return AssumptionTest(math.nan, NotApplicable("a group has no more observations than dimensions"), df)
    covs = [np.atleast_2d(np.cov(m, rowvar=False)) for m in mats]
    logdets = [_logdet(c) for c in covs]
    total = dfs.sum()
    pooled_logdet = _logdet(sum(d * c for d, c in zip(dfs, covs)) / total)
    if pooled_logdet is None or any(ld is None for ld in logdets):
        return AssumptionTest(math.nan, NotApplicable("singular covariance matrix"), df)
    m_stat = total * pooled_logdet - sum(d * ld for d, ld in zip(dfs, logdets))
    c = (2.0 * q * q + 3.0 * q - 1.0) / (6.0 * (q + 1.0) * (g - 1.0)) * (float(np.sum(1.0 / dfs)) - 1.0 / total)
    chi = max(0.0, float(m_stat * (1.0 - c)))
    return AssumptionTest(chi, dist.chisq_sf(chi, df[0]), df)


@dataclass(frozen=True)
class ManovaAssumptions:
    npcs: int
    royston: tuple[PValue, ...]
    box_m: PValue


@dataclass(frozen=True)
class UnivariateAssumptions:
    pc: int
    shapiro_wilk: tuple[PValue, ...]
    bartlett: PValue


@dataclass(frozen=True)
class AssumptionsReport:
    levels: tuple[Hashable, ...]
    manova: tuple[ManovaAssumptions, ...]
    univariate: tuple[UnivariateAssumptions, ...]
    parametric_name: str = "T-test"


def _guarded(fn, *args) -> PValue:
    try:
        return fn(*args).p
    except (DegenerateDataError, DomainError) as exc:
        return NotApplicable(str(exc))


def assumptions_for(cmp) -> AssumptionsReport:
    """Run every assumption check for a comparison result.

    ``cmp`` needs ``projection.scores``, ``groups`` and ``npcs``.
    """
    scores = cmp.projection.scores
    groups: GroupFactor = cmp.groups
    masks = groups.masks()
    manova = []
    for q in cmp.npcs:
        sub = scores[:, :q]
        roy = tuple(_guarded(royston, sub[mask]) for mask in masks)
        manova.append(ManovaAssumptions(q, roy, _guarded(box_m, [sub[mask] for mask in masks])))
    uni = []
    for j in range(scores.shape[1]):
        col = scores[:, j]
        sw = tuple(_guarded(shapiro_wilk, col[mask]) for mask in masks)
        uni.append(UnivariateAssumptions(j + 1, sw, _guarded(bartlett, [col[mask] for mask in masks])))
    name = "T-test" if len(groups.levels) == 2 else "ANOVA"
    return AssumptionsReport(groups.levels, tuple(manova), tuple(uni), name)
