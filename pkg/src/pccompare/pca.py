"""Principal component projection of observation matrices."""

from __future__ import annotations

from collections.abc import Hashable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateDataError, DomainError

EIG_CUTOFF = 1e-12


@dataclass(frozen=True)
class OutputMatrix:
    """An n x m matrix of observations (rows) by variables (columns)."""

    data: np.ndarray
    name: str = ""

    def __post_init__(self) -> None:
        arr = np.array(self.data, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise DomainError(f"output '{self.name}' must be a 2-D matrix, got {arr.ndim} dimensions")
        if arr.shape[0] < 2 or arr.shape[1] < 1:
            raise DomainError(f"output '{self.name}' needs n >= 2 and m >= 1, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise DomainError(f"output '{self.name}' contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class GroupFactor:
    """Group label per observation; ``levels`` fixes the level order."""

    labels: tuple[Hashable, ...]
    levels: tuple[Hashable, ...] = ()

    def __post_init__(self) -> None:
        labels = tuple(self.labels)
        levels = tuple(self.levels) if self.levels else tuple(dict.fromkeys(labels))
        if len(set(levels)) != len(levels):
            raise DomainError("group levels must be distinct")
        unknown = set(labels) - set(levels)
        if unknown:
            raise DomainError(f"labels not among the levels: {sorted(map(str, unknown))}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "levels", levels)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int], names: Sequence[Hashable] | None = None) -> GroupFactor:
        """Contiguous blocks of rows, e.g. ``from_sizes([10, 10])`` gives A x10, B x10."""
        if names is None:
            names = [_level_name(i) for i in range(len(sizes))]
        if len(names) != len(sizes):
            raise DomainError("one level name per block size is required")
        labels: list[Hashable] = []
        for name, size in zip(names, sizes):
            if size < 1:
                raise DomainError(f"block sizes must be positive, got {size}")
            labels.extend([name] * size)
        return cls(tuple(labels), tuple(names))

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def codes(self) -> np.ndarray:
        index = {lvl: i for i, lvl in enumerate(self.levels)}
        return np.array([index[lab] for lab in self.labels], dtype=int)

    @property
    def sizes(self) -> tuple[int, ...]:
        counts = np.bincount(self.codes, minlength=len(self.levels))
        return tuple(int(c) for c in counts)

    def masks(self) -> list[np.ndarray]:
        codes = self.codes
        return [codes == i for i in range(len(self.levels))]

    def validate(self, n: int, min_size: int = 2) -> None:
        if len(self.labels) != n:
            raise DomainError(f"group factor has {len(self.labels)} labels for {n} observations")
        if len(self.levels) < 2:
            raise DomainError("at least two groups are required")
        small = [str(lvl) for lvl, size in zip(self.levels, self.sizes) if size < min_size]
        if small:
            raise DomainError(f"every group needs at least {min_size} observations: {', '.join(small)}")


def _level_name(i: int) -> str:
    name = ""
    i += 1
    while i:
        i, rem = divmod(i - 1, 26)
        name = chr(ord("A") + rem) + name
    return name


@dataclass(frozen=True)
class PcaProjection:
    scores: np.ndarray
    eigenvalues: np.ndarray
    loadings: np.ndarray = field(repr=False)
    varexp: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "varexp", explained_variance(self.eigenvalues))
        for arr in (self.scores, self.eigenvalues, self.loadings, self.varexp):
            arr.setflags(write=False)

    @property
    def r(self) -> int:
        return self.eigenvalues.shape[0]


def pca(x: OutputMatrix | np.ndarray) -> PcaProjection:
    """Project the column-centered data onto its principal components.

    Scores are ``U * S`` from the thin SVD of the centered matrix, eigenvalues
    ``S**2 / (n - 1)``. Each score column is flipped so that its entry of
    largest magnitude is positive (the first such entry on exact ties).
    """
    data = x.data if isinstance(x, OutputMatrix) else OutputMatrix(x).data
    n, m = data.shape
    if np.all(np.ptp(data, axis=0) == 0):
        raise DegenerateDataError("all observations are identical; total variance is zero")
    centered = data - data.mean(axis=0)
    u, s, vt = np.linalg.svd(centered, full_matrices=False)
    r = min(n - 1, m)
    eig = s[:r] ** 2 / (n - 1)
    keep = int(np.count_nonzero(eig >= EIG_CUTOFF * eig[0]))
    scores = u[:, :keep] * s[:keep]
    loadings = vt[:keep].T.copy()
    pivot = np.argmax(np.abs(scores), axis=0)
    signs = np.where(scores[pivot, np.arange(keep)] < 0, -1.0, 1.0)
    return PcaProjection(scores * signs, eig[:keep].copy(), loadings * signs)


def explained_variance(eigenvalues: np.ndarray) -> np.ndarray:
    eig = np.asarray(eigenvalues, dtype=float)
    total = eig.sum()
    if not total > 0:
        raise DegenerateDataError("eigenvalues sum to zero; explained variance undefined")
    return eig / total


def select_npcs(p: PcaProjection | np.ndarray, ve: float) -> int:
    """Smallest number of leading components whose explained variance reaches ``ve``."""
    if not 0 < ve <= 1:
        raise DomainError(f"variance fraction must lie in (0, 1], got {ve!r}")
    varexp = p.varexp if isinstance(p, PcaProjection) else np.asarray(p, dtype=float)
    cum = np.cumsum(varexp)
    # tolerance so that ve = 1 is met despite round-off in the cumulative sum
    q = int(np.searchsorted(cum, ve - 1e-12, side="left")) + 1
    return min(q, varexp.shape[0])
