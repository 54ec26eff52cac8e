"""Hypothesis tests comparing groups of PC scores, and the weighted Bonferroni adjustment."""

from __future__ import annotations

import enum
import math
from collections.abc import Sequence
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import distributions as dist
from .errors import DegenerateDataError, DomainError
from .pca import GroupFactor

EXACT_MW_MAX_N = 50
_SINGULAR_RCOND = 1e-12


class NotApplicable:
    """Marker for a test that cannot be computed on the given data.

    All instances compare equal; ``reason`` is a diagnostic only.
    """

    __slots__ = ("reason",)

    def __init__(self, reason: str = "") -> None:
        self.reason = reason

    def __eq__(self, other: object) -> bool:
        return isinstance(other, NotApplicable)

    def __hash__(self) -> int:
        return hash(NotApplicable)

    def __float__(self) -> float:
        return math.nan

    def __repr__(self) -> str:
        return f"NotApplicable({self.reason!r})" if self.reason else "NA"


NA = NotApplicable()

PValue = float | NotApplicable


def is_na(p: object) -> bool:
    return isinstance(p, NotApplicable)


class TestMethod(enum.Enum):
    TTEST = "t-test"
    MANN_WHITNEY = "Mann-Whitney U test"
    ANOVA = "ANOVA"
    KRUSKAL_WALLIS = "Kruskal-Wallis test"
    MANOVA_PILLAI = "MANOVA (Pillai)"

    __test__ = False


@dataclass(frozen=True)
class TestResult:
    statistic: float
    p: PValue
    df: tuple[float, ...]
    method: TestMethod

    __test__ = False


def _sample(x: Sequence[float] | np.ndarray, min_n: int, what: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float).ravel()
    if arr.size < min_n:
        raise DomainError(f"{what} needs at least {min_n} values per sample, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} received non-finite values")
    return arr


def _clip(p: float) -> float:
    return min(1.0, max(0.0, p))


def t_test_two_sample(x, y, equal_var: bool = True) -> TestResult:
    """Two-sided two-sample t-test.

    The pooled-variance form is the default; ``equal_var=False`` gives Welch's
    test with Welch-Satterthwaite degrees of freedom.
    """
    x = _sample(x, 2, "t-test")
    y = _sample(y, 2, "t-test")
    nx, ny = x.size, y.size
    vx, vy = float(x.var(ddof=1)), float(y.var(ddof=1))
    diff = float(x.mean() - y.mean())
    if equal_var:
        df = nx + ny - 2.0
        pooled = ((nx - 1) * vx + (ny - 1) * vy) / df
        se2 = pooled * (1.0 / nx + 1.0 / ny)
    else:
        a, b = vx / nx, vy / ny
        se2 = a + b
        df = se2**2 / (a**2 / (nx - 1) + b**2 / (ny - 1)) if se2 > 0 else nx + ny - 2.0
    if se2 == 0:
        if diff == 0:
            return TestResult(0.0, 1.0, (df,), TestMethod.TTEST)
        raise DegenerateDataError("t-test: both samples are constant with different means")
    t = diff / math.sqrt(se2)
    p = _clip(2.0 * dist.t_sf(abs(t), df))
    return TestResult(t, p, (df,), TestMethod.TTEST)


def _midranks(values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Midranks (1-based) of ``values`` and the sizes of each tie block."""
    order = np.argsort(values, kind="mergesort")
    sorted_vals = values[order]
    ranks = np.empty(values.size, dtype=float)
    ties = []
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        ties.append(j - i + 1)
        i = j + 1
    return ranks, np.array(ties, dtype=float)


@lru_cache(maxsize=256)
def _u_counts(nx: int, ny: int) -> tuple[int, ...]:
    # counts[u] = number of labelings with Mann-Whitney statistic u
    # recurrence on the largest value: it belongs to x (adds ny) or to y (adds 0)
    if nx == 0 or ny == 0:
        return (1,)
    with_x = _u_counts(nx - 1, ny)
    with_y = _u_counts(nx, ny - 1)
    out = [0] * (nx * ny + 1)
    for u, c in enumerate(with_x):
        out[u + ny] += c
    for u, c in enumerate(with_y):
        out[u] += c
    return tuple(out)


def mann_whitney_exact_p(u: float, nx: int, ny: int) -> float:
    """Two-sided exact p-value: ``2 * P(U <= min(u, nx*ny - u))`` capped at 1."""
    counts = _u_counts(nx, ny)
    lo = min(u, nx * ny - u)
    tail = sum(counts[: int(math.floor(lo + 1e-9)) + 1])
    return min(1.0, 2.0 * tail / math.comb(nx + ny, nx))


def mann_whitney_u(x, y, exact: bool | None = None) -> TestResult:
    """Two-sided Mann-Whitney U test (statistic is U of ``x``).

    Exact when ``nx + ny <= 50`` and there are no ties, unless ``exact`` forces
    a choice; otherwise the tie-corrected normal approximation with a 0.5
    continuity correction.
    """
    x = _sample(x, 1, "Mann-Whitney")
    y = _sample(y, 1, "Mann-Whitney")
    nx, ny = x.size, y.size
    ranks, ties = _midranks(np.concatenate([x, y]))
    u = float(ranks[:nx].sum() - nx * (nx + 1) / 2.0)
    has_ties = bool(np.any(ties > 1))
    if exact is None:
        exact = nx + ny <= EXACT_MW_MAX_N and not has_ties
    if exact and not has_ties:
        return TestResult(u, mann_whitney_exact_p(u, nx, ny), (), TestMethod.MANN_WHITNEY)
    n = nx + ny
    mu = nx * ny / 2.0
    sigma2 = nx * ny / 12.0 * ((n + 1) - np.sum(ties**3 - ties) / (n * (n - 1)))
    if sigma2 <= 0:
        return TestResult(u, 1.0, (), TestMethod.MANN_WHITNEY)
    z = u - mu
    z = (z - math.copysign(0.5, z) if z != 0 else 0.0) / math.sqrt(sigma2)
    p = _clip(2.0 * min(dist.normal_cdf(z), dist.normal_sf(z)))
    return TestResult(u, p, (), TestMethod.MANN_WHITNEY)


def _groups(groups: Sequence, min_n: int, what: str) -> list[np.ndarray]:
    out = [_sample(g, min_n, what) for g in groups]
    if len(out) < 2:
        raise DomainError(f"{what} needs at least two groups")
    return out


def anova_oneway(groups: Sequence) -> TestResult:
    samples = _groups(groups, 2, "ANOVA")
    g = len(samples)
    n = sum(s.size for s in samples)
    if n <= g:
        raise DomainError("ANOVA needs more observations than groups")
    grand = np.concatenate(samples).mean()
    ssb = float(sum(s.size * (s.mean() - grand) ** 2 for s in samples))
    ssw = float(sum(np.sum((s - s.mean()) ** 2) for s in samples))
    df = (g - 1.0, n - g * 1.0)
    if ssw == 0:
        if ssb == 0:
            return TestResult(math.nan, 1.0, df, TestMethod.ANOVA)
        return TestResult(math.inf, 0.0, df, TestMethod.ANOVA)
    f = (ssb / df[0]) / (ssw / df[1])
    return TestResult(f, _clip(dist.f_sf(f, *df)), df, TestMethod.ANOVA)


def kruskal_wallis(groups: Sequence) -> TestResult:
    samples = _groups(groups, 1, "Kruskal-Wallis")
    g = len(samples)
    sizes = np.array([s.size for s in samples])
    n = int(sizes.sum())
    if n < 3:
        raise DomainError("Kruskal-Wallis needs at least 3 observations")
    ranks, ties = _midranks(np.concatenate(samples))
    bounds = np.cumsum(sizes)[:-1]
    rank_sums = np.array([r.sum() for r in np.split(ranks, bounds)])
    h = 12.0 / (n * (n + 1)) * np.sum(rank_sums**2 / sizes) - 3.0 * (n + 1)
    correction = 1.0 - np.sum(ties**3 - ties) / (n**3 - n)
    df = (g - 1.0,)
    if correction <= 0:
        return TestResult(math.nan, NotApplicable("all observations tied"), df, TestMethod.KRUSKAL_WALLIS)
    h = max(0.0, float(h / correction))
    return TestResult(h, _clip(dist.chisq_sf(h, df[0])), df, TestMethod.KRUSKAL_WALLIS)


def _sscp(scores: np.ndarray, factor: GroupFactor) -> tuple[np.ndarray, np.ndarray]:
    grand = scores.mean(axis=0)
    q = scores.shape[1]
    between = np.zeros((q, q))
    within = np.zeros((q, q))
    for mask in factor.masks():
        block = scores[mask]
        d = block.mean(axis=0) - grand
        between += block.shape[0] * np.outer(d, d)
        c = block - block.mean(axis=0)
        within += c.T @ c
    return between, within


def manova_pillai(scores, groups: GroupFactor) -> TestResult:
    """One-way MANOVA with Pillai's trace and its F approximation."""
    y = np.asarray(scores, dtype=float)
    if y.ndim == 1:
        y = y.reshape(-1, 1)
    n, q = y.shape
    groups.validate(n)
    g = len(groups.levels)
    method = TestMethod.MANOVA_PILLAI
    if q < 2:
        return TestResult(math.nan, NotApplicable("MANOVA needs at least 2 dimensions"), (), method)
    s = min(q, g - 1)
    m = (abs(q - g + 1) - 1) / 2.0
    nn = (n - g - q - 1) / 2.0
    df1 = s * (2 * m + s + 1)
    df2 = s * (2 * nn + s + 1)
    if df2 <= 0:
        reason = f"too few residual degrees of freedom ({n} observations, {g} groups, {q} dimensions)"
        return TestResult(math.nan, NotApplicable(reason), (df1, df2), method)
    between, within = _sscp(y, groups)
    d = np.sqrt(np.diag(within))
    if np.any(d == 0) or 1.0 / np.linalg.cond(within / np.outer(d, d)) < _SINGULAR_RCOND:
        return TestResult(math.nan, NotApplicable("within-groups SSCP matrix is singular"), (df1, df2), method)
    v = float(np.trace(np.linalg.solve(between + within, between)))
    v = min(max(v, 0.0), float(s))
    if v >= s:
        return TestResult(math.inf, 0.0, (df1, df2), method)
    f = ((2 * nn + s + 1) / (2 * m + s + 1)) * v / (s - v)
    return TestResult(f, _clip(dist.f_sf(f, df1, df2)), (df1, df2), method)


@dataclass(frozen=True)
class WeightedPValues:
    raw: tuple[PValue, ...]
    weights: tuple[float, ...]
    adjusted: tuple[PValue, ...]


def weighted_bonferroni(raw: Sequence[PValue], weights: Sequence[float]) -> WeightedPValues:
    """Divide each p-value by its weight and cap at 1; NotApplicable passes through."""
    if len(raw) != len(weights):
        raise DomainError(f"{len(raw)} p-values but {len(weights)} weights")
    w = [float(v) for v in weights]
    if any(not v > 0 for v in w):
        raise DomainError("weighted Bonferroni weights must be strictly positive")
    adjusted = tuple(p if is_na(p) else min(1.0, p / wi) for p, wi in zip(raw, w))
    return WeightedPValues(tuple(raw), tuple(w), adjusted)
