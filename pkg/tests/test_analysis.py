import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from artspace import analysis as an
from synthdata import gaussian_classes, planted_pair

SQUARE = np.array([[0, 0], [1, 0], [0, 1], [1, 1]], float)


def two_clusters(offset=10.0):
    x = np.vstack([SQUARE, SQUARE + [offset, 0]])
    return x, np.array([0] * 4 + [1] * 4)


class TestStandardize:
    def test_hand_values(self):
        z, flags = an.standardize(np.array([[1.0], [2.0], [3.0]]))
        assert np.allclose(z.ravel(), [-1.2247, 0, 1.2247], atol=1e-4)
        assert not flags.any()

    def test_constant_column(self):
        z, flags = an.standardize(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]]))
        assert flags.tolist() == [True, False]
        assert np.all(z[:, 0] == 0)

    @settings(max_examples=50, deadline=None)
    @given(arrays(np.float64, (10, 4), elements=st.floats(-1e3, 1e3)))
    def test_idempotent(self, x):
        once, _ = an.standardize(x)
        twice, _ = an.standardize(once)
        assert np.allclose(once, twice, atol=1e-9)


class TestScatter:
    def test_two_cluster_hand_values(self):
        st_ = an.scatter_stats(*two_clusters())
        assert np.array_equal(st_.within, np.diag([2.0, 2.0]))
        assert np.array_equal(st_.between, np.diag([200.0, 0.0]))
        assert abs(an.alpha(st_) - 100.0) <= 1e-9

    def test_single_class(self):
        x = np.random.default_rng(0).normal(size=(10, 3))
        st_ = an.scatter_stats(x, np.zeros(10))
        assert np.all(st_.between == 0)
        assert an.alpha(st_) == 0.0

    def test_duplication_doubles(self):
        x, y = two_clusters()
        x = x + np.random.default_rng(1).normal(0, 0.3, x.shape)
        one = an.scatter_stats(x, y)
        two = an.scatter_stats(np.vstack([x, x]), np.concatenate([y, y]))
        assert np.allclose(two.within, 2 * one.within, rtol=1e-12)
        assert np.allclose(two.between, 2 * one.between, rtol=1e-12)

    def test_halving_offset_quarters_alpha(self):
        a10 = an.alpha(an.scatter_stats(*two_clusters(10.0)))
        a5 = an.alpha(an.scatter_stats(*two_clusters(5.0)))
        assert a5 == pytest.approx(a10 / 4, rel=1e-12)

    def test_within_is_sum_of_class_scatter(self):
        x, y = gaussian_classes(np.random.default_rng(2), classes=5, dims=4)
        st_ = an.scatter_stats(x, y)
        assert np.array_equal(st_.within, sum(st_.class_scatter[1:], st_.class_scatter[0]))
        for m in (st_.within, st_.between):
            assert np.allclose(m, m.T)
            assert np.linalg.eigvalsh(m).min() >= -1e-9 * np.abs(m).max()

    def test_subset(self):
        x, y = gaussian_classes(np.random.default_rng(3), classes=4, dims=5)
        full = an.scatter_stats(x, y)
        sub = an.scatter_stats(x, y, subset=[1, 3])
        assert np.array_equal(sub.within, full.within[np.ix_([1, 3], [1, 3])])
        with pytest.raises(ValueError):
            an.scatter_stats(x, y, subset=[])

    def test_zero_within_is_degenerate(self):
        x = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
        with pytest.raises(an.DegenerateDataError):
            an.alpha(an.scatter_stats(x, np.array([0, 0, 1, 1])))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_decomposition_identity(self, seed):
        rng = np.random.default_rng(seed)
        x = rng.normal(size=(30, 4)) * rng.uniform(0.1, 10, 4)
        y = rng.integers(0, 4, 30)
        st_ = an.scatter_stats(x, y)
        dev = x - x.mean(axis=0)
        total = np.trace(dev.T @ dev)
        assert np.trace(st_.within) + np.trace(st_.between) == pytest.approx(total, rel=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_alpha_affine_invariant(self, seed):
        rng = np.random.default_rng(seed)
        x, y = gaussian_classes(rng, classes=4, per_class=10, dims=2, separation=3.0)
        A = rng.normal(size=(2, 2))
        if abs(np.linalg.det(A)) < 0.2:
            A += 2 * np.eye(2)
        b = rng.normal(0, 50, 2)
        a1 = an.alpha(an.scatter_stats(x, y))
        a2 = an.alpha(an.scatter_stats(x @ A.T + b, y))
        assert a2 == pytest.approx(a1, rel=1e-4)


class TestPairs:
    def test_pair_table_matches_direct_alpha(self):
        x, y = gaussian_classes(np.random.default_rng(4), classes=5, dims=5, separation=2.0)
        table = an.pair_alphas(x, y)
        for a, b in [(0, 1), (0, 4), (2, 3)]:
            assert table[a, b] == pytest.approx(an.alpha(an.scatter_stats(x, y, [a, b])), rel=1e-9)
            assert table[a, b] == table[b, a]
        assert np.isnan(np.diag(table)).all()

    def test_planted_pair_first(self):
        x, y = planted_pair(np.random.default_rng(5), pair=(3, 7), dims=20)
        ranked = an.rank_pairs(x, y)
        assert ranked[0][:2] == (3, 7)

    def test_sort_postcondition(self):
        x, y = gaussian_classes(np.random.default_rng(6), classes=4, dims=6, separation=1.0)
        ranked = an.rank_pairs(x, y)
        assert sorted((a, b) for a, b, _ in ranked) == [(a, b) for a in range(6) for b in range(a + 1, 6)]
        scores = [s for _, _, s in ranked]
        assert all(s1 >= s2 for s1, s2 in zip(scores, scores[1:]))

    def test_ties_by_index(self):
        x = np.tile(np.array([[0.0], [1.0], [0.5], [3.0], [4.0], [3.5]]), (1, 3))
        x += np.array([0.0, 1e3, -1e3])
        ranked = an.rank_pairs(x, np.array([0, 0, 0, 1, 1, 1]))
        # identical standardized columns: the pair sub-block of S_w is singular
        assert [r[:2] for r in ranked] == [(0, 1), (0, 2), (1, 2)]

    def test_names(self):
        x, y = planted_pair(np.random.default_rng(7), pair=(0, 2), dims=4)
        ranked = an.rank_pairs(x, y, names=["a", "b", "c", "d"])
        assert ranked[0][:2] == ("a", "c")

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_rescaling_keeps_argmax(self, seed):
        rng = np.random.default_rng(seed)
        x, y = gaussian_classes(rng, classes=4, per_class=8, dims=5, separation=2.0)
        scale = np.exp(rng.uniform(-4, 4, 5))
        assert an.rank_pairs(x, y)[0][:2] == an.rank_pairs(x * scale, y)[0][:2]

    def test_needs_two_features(self):
        with pytest.raises(ValueError):
            an.rank_pairs(np.ones((4, 1)), np.array([0, 0, 1, 1]))


class TestLda:
    def test_two_class_direction(self):
        rng = np.random.default_rng(8)
        cov = np.diag([1.0, 4.0, 0.5, 2.0, 1.0])
        delta = np.array([3.0, 1.0, -2.0, 0.5, 1.0])
        x = np.vstack([rng.multivariate_normal(np.zeros(5), cov, 500),
                       rng.multivariate_normal(delta, cov, 500)])
        y = np.repeat([0, 1], 500)
        with pytest.warns(UserWarning, match="positive discriminant"):
            model = an.lda_fit(x, y, dims=2)
        st_ = an.scatter_stats(x, y)
        ref = np.linalg.solve(st_.within, st_.class_means[1] - st_.class_means[0])
        cos = abs(model.basis[:, 0] @ ref) / np.linalg.norm(ref)
        assert cos >= 0.99
        truth = np.linalg.solve(cov, delta)
        assert abs(model.basis[:, 0] @ truth) / np.linalg.norm(truth) >= 0.99

    def test_basis_properties(self):
        x, y = gaussian_classes(np.random.default_rng(9), classes=6, dims=5)
        m = an.lda_fit(x, y)
        assert m.basis.shape == (5, 2)
        assert np.allclose(np.linalg.norm(m.basis, axis=0), 1.0)
        assert np.linalg.matrix_rank(m.basis) == 2
        assert m.eigenvalues[0] >= m.eigenvalues[1] > 0
        for j in range(2):
            assert m.basis[np.argmax(np.abs(m.basis[:, j])), j] > 0

    def test_white_2d_keeps_order(self):
        rng = np.random.default_rng(10)
        means = np.array([[0, 0], [5, 0], [10, 0]], float)
        y = np.repeat([0, 1, 2], 30)
        x = means[y] + rng.normal(0, 1, (90, 2))
        m = an.lda_fit(x, y)
        order = np.argsort(m.centroids[:, 0])
        assert order.tolist() in ([0, 1, 2], [2, 1, 0])

    def test_centroid_maps_to_own_class(self):
        x, y = gaussian_classes(np.random.default_rng(11), classes=5, dims=4)
        m = an.lda_fit(x, y)
        st_ = an.scatter_stats(x, y)
        assert an.lda_classify(m, st_.class_means).tolist() == list(range(5))
        assert an.lda_classify(m, st_.class_means[3]) == 3

    def test_tie_goes_to_lower_class(self):
        centroids = np.array([[100, 100], [-100, 100], [0, 0], [100, -100], [-100, -100], [4, 0]], float)
        m = an.LdaProjection(np.eye(2), np.array([2.0, 1.0]), np.arange(6), centroids, np.ones(2))
        assert an.lda_classify(m, np.array([2.0, 0.0])) == 2

    def test_linear_map_invariance(self):
        rng = np.random.default_rng(12)
        x, y = gaussian_classes(rng, classes=6, per_class=20, dims=4, separation=2.0)
        test_x, _ = gaussian_classes(rng, classes=6, per_class=20, dims=4, separation=2.0)
        A = rng.normal(size=(4, 4)) + 3 * np.eye(4)
        p1 = an.lda_classify(an.lda_fit(x, y), test_x)
        p2 = an.lda_classify(an.lda_fit(x @ A.T, y), test_x @ A.T)
        assert np.array_equal(p1, p2)


class TestCrossValidate:
    def test_benchmark(self):
        x, y = gaussian_classes(np.random.default_rng(13))
        cm = an.cross_validate(x, y, repetitions=100, seed=0)
        assert cm.matrix.shape == (12, 12)
        assert np.allclose(cm.matrix.sum(axis=1), 10.0, atol=1e-9)
        assert np.diag(cm.matrix).mean() >= 9.5
        assert cm.accuracy >= 0.95

    def test_deterministic(self):
        x, y = gaussian_classes(np.random.default_rng(14), classes=4, dims=3, separation=1.5)
        a = an.cross_validate(x, y, repetitions=20, seed=42)
        b = an.cross_validate(x, y, repetitions=20, seed=42)
        c = an.cross_validate(x, y, repetitions=20, seed=43)
        assert a.matrix.tobytes() == b.matrix.tobytes()
        assert not np.array_equal(a.matrix, c.matrix)

    def test_uneven_classes(self):
        rng = np.random.default_rng(15)
        x = rng.normal(size=(25, 3))
        y = np.array([0] * 7 + [1] * 8 + [2] * 10)
        cm = an.cross_validate(x, y, repetitions=5)
        assert np.allclose(cm.matrix.sum(axis=1), [4, 4, 5])

    def test_too_small_class(self):
        x = np.random.default_rng(16).normal(size=(7, 2))
        with pytest.raises(ValueError, match="fewer than 2"):
            an.cross_validate(x, np.array([0, 0, 0, 1, 1, 1, 2]), repetitions=1)

    def test_split_sizes(self):
        rng = np.random.default_rng(0)
        train, test = an.split_class(np.arange(20), rng)
        assert len(train) == len(test) == 10
        assert sorted(np.concatenate([train, test]).tolist()) == list(range(20))


def test_feature_matrix_validation():
    with pytest.raises(ValueError):
        an.FeatureMatrix(np.array([[np.nan, 1.0]]), np.array([0]))
    fm = an.FeatureMatrix(np.zeros((3, 2)), np.array(["a", "b", "a"]))
    assert fm.class_counts == {"a": 2, "b": 1}
