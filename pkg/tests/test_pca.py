import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from pccompare import GroupFactor, OutputMatrix, explained_variance, pca, select_npcs
from pccompare.errors import DegenerateDataError, DomainError


def eigh_oracle(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (descending) and projected scores from the sample covariance."""
    c = x - x.mean(axis=0)
    w, v = np.linalg.eigh(np.cov(c, rowvar=False, ddof=1).reshape(x.shape[1], x.shape[1]))
    order = np.argsort(w)[::-1]
    return w[order], c @ v[:, order]


def match_signs(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    signs = np.sign(np.sum(a * b, axis=0))
    signs[signs == 0] = 1
    return b * signs


class TestOutputMatrix:
    def test_coerces_and_freezes(self):
        om = OutputMatrix([[1, 2], [3, 4], [5, 7]], "x")
        assert om.data.dtype == float
        assert (om.n, om.m) == (3, 2)
        with pytest.raises(ValueError):
            om.data[0, 0] = 9.0

    def test_vector_is_a_column(self):
        assert OutputMatrix([1.0, 2.0, 4.0]).data.shape == (3, 1)

    @pytest.mark.parametrize("bad", [[[1.0, 2.0]], [[1.0, np.nan], [2.0, 3.0]], np.zeros((2, 2, 2))])
    def test_rejects(self, bad):
        with pytest.raises(DomainError):
            OutputMatrix(bad)


class TestGroupFactor:
    def test_from_sizes(self):
        g = GroupFactor.from_sizes([2, 3])
        assert g.labels == ("A", "A", "B", "B", "B")
        assert g.levels == ("A", "B")
        assert g.sizes == (2, 3)
        assert g.codes.tolist() == [0, 0, 1, 1, 1]

    def test_level_order_from_first_appearance(self):
        g = GroupFactor(("y", "x", "y", "x"))
        assert g.levels == ("y", "x")
        assert [m.tolist() for m in g.masks()] == [[True, False, True, False], [False, True, False, True]]

    def test_validate(self):
        g = GroupFactor.from_sizes([1, 3])
        with pytest.raises(DomainError, match="at least 2"):
            g.validate(4)
        with pytest.raises(DomainError, match="labels"):
            GroupFactor.from_sizes([2, 2]).validate(5)
        with pytest.raises(DomainError):
            GroupFactor(("a", "b"), ("a",))


class TestPca:
    def test_two_points_in_the_plane(self):
        p = pca(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert p.r == 1
        assert p.eigenvalues[0] == pytest.approx(12.5)
        assert np.abs(p.scores[:, 0]) == pytest.approx([2.5, 2.5])
        assert np.abs(p.loadings[:, 0]) == pytest.approx([0.6, 0.8])
        assert p.varexp.tolist() == [1.0]

    def test_degenerate(self):
        with pytest.raises(DegenerateDataError):
            pca(np.ones((5, 3)))

    def test_sign_convention(self, rng):
        p = pca(rng.normal(size=(9, 6)))
        idx = np.argmax(np.abs(p.scores), axis=0)
        assert np.all(p.scores[idx, np.arange(p.r)] > 0)

    def test_rank_deficient_truncation(self, rng):
        base = rng.normal(size=(8, 2))
        x = np.column_stack([base, base @ [1.0, -2.0], 3 * base[:, 0]])
        p = pca(x)
        assert p.r == 2

    def test_rank_bound(self, rng):
        assert pca(rng.normal(size=(4, 10))).r == 3
        assert pca(rng.normal(size=(10, 3))).r == 3

    def test_eigh_oracle(self, rng):
        for _ in range(20):
            n, m = rng.integers(2, 11), rng.integers(1, 9)
            x = rng.normal(size=(n, m)) * rng.uniform(0.1, 10, size=m)
            p = pca(x)
            w, s = eigh_oracle(x)
            assert p.eigenvalues == pytest.approx(w[: p.r], rel=1e-9)
            assert p.scores == pytest.approx(match_signs(p.scores, s[:, : p.r]), abs=1e-9)

    def test_reconstruction(self, rng):
        x = rng.normal(size=(7, 5))
        p = pca(x)
        assert p.scores @ p.loadings.T == pytest.approx(x - x.mean(axis=0), abs=1e-12)

    def test_loadings_orthonormal(self, rng):
        p = pca(rng.normal(size=(12, 6)))
        assert p.loadings.T @ p.loadings == pytest.approx(np.eye(p.r), abs=1e-12)

    def test_sunspots_pc1_varexp(self, sunspots):
        assert pca(sunspots).varexp[0] == pytest.approx(0.41667, abs=5e-6)


class TestSelectNpcs:
    @pytest.mark.parametrize("ve,q", [(0.1, 1), (0.5, 1), (0.5000001, 2), (0.8, 2), (0.9, 3), (1.0, 4)])
    def test_examples(self, ve, q):
        assert select_npcs(np.array([0.5, 0.3, 0.15, 0.05]), ve) == q

    def test_full_variance_with_roundoff(self):
        v = explained_variance(np.array([0.7, 0.2, 0.1]))
        assert select_npcs(v, 1.0) == 3

    @pytest.mark.parametrize("ve", [0.0, -0.1, 1.01])
    def test_domain(self, ve):
        with pytest.raises(DomainError):
            select_npcs(np.array([1.0]), ve)

    def test_sunspots(self, sunspots):
        assert select_npcs(pca(sunspots), 0.85) == 9


class TestExplainedVariance:
    def test_zero_total(self):
        with pytest.raises(DegenerateDataError):
            explained_variance(np.zeros(3))


matrices = hnp.arrays(
    np.float64,
    st.tuples(st.integers(3, 10), st.integers(1, 8)),
    elements=st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False),
).filter(lambda a: np.ptp(a, axis=0).max() > 1e-3)


class TestProperties:
    @settings(max_examples=80, deadline=None)
    @given(x=matrices)
    def test_varexp_sums_to_one_and_descends(self, x):
        p = pca(x)
        assert p.varexp.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(np.diff(p.eigenvalues) <= 1e-9 * p.eigenvalues[0])
        assert p.r <= min(x.shape[0] - 1, x.shape[1])

    @settings(max_examples=60, deadline=None)
    @given(x=matrices, shift=st.floats(-1e3, 1e3), scale=st.floats(1e-2, 1e2))
    def test_shift_and_scale(self, x, shift, scale):
        p, q = pca(x), pca(scale * x + shift)
        assert q.varexp == pytest.approx(p.varexp, abs=1e-8)
        big = p.eigenvalues > 1e-6 * p.eigenvalues[0]
        assert q.eigenvalues[big] == pytest.approx(scale**2 * p.eigenvalues[big], rel=1e-7)
