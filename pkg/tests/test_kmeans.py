"""Hand-rolled k-means++ / Lloyd clustering used by every method."""

import numpy as np
import pytest

from regionate import adjusted_rand, kmeans

from .oracles import exhaustive_best_bisection, naive_ssw


def blobs(rng, centers, per=8, noise=0.05):
    pts = []
    for c in centers:
        pts.append(np.asarray(c) + noise * rng.standard_normal((per, len(c))))
    return np.vstack(pts)


class TestKMeansBasics:
    def test_k_equals_n_gives_zero_inertia(self):
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((6, 2))
        res = kmeans(pts, 6, seed=1)
        assert res.inertia == 0.0
        assert sorted(res.labels.tolist()) == list(range(6))

    def test_k_one_is_total_scatter(self):
        rng = np.random.default_rng(1)
        pts = rng.standard_normal((20, 3))
        res = kmeans(pts, 1, seed=0)
        assert res.labels.tolist() == [0] * 20
        np.testing.assert_allclose(res.inertia, naive_ssw(pts, res.labels),
                                   atol=1e-9)

    def test_k_bounds(self):
        pts = np.zeros((4, 2))
        with pytest.raises(ValueError, match="k must satisfy"):
            kmeans(pts, 0)
        with pytest.raises(ValueError, match="k must satisfy"):
            kmeans(pts, 5)

    def test_labels_are_compact_zero_based(self):
        rng = np.random.default_rng(2)
        pts = blobs(rng, [(0, 0), (5, 5), (10, 0)])
        res = kmeans(pts, 3, seed=0)
        assert set(res.labels.tolist()) == {0, 1, 2}

    def test_inertia_consistent_with_labels(self):
        rng = np.random.default_rng(3)
        pts = rng.standard_normal((30, 4))
        res = kmeans(pts, 4, seed=7)
        # inertia must equal the SSW of the returned labeling's centroids
        # (Lloyd terminates at a fixed point, where centers are centroids)
        np.testing.assert_allclose(res.inertia, naive_ssw(pts, res.labels),
                                   atol=1e-9)


class TestRecovery:
    def test_separated_blobs_recovered(self):
        rng = np.random.default_rng(4)
        pts = blobs(rng, [(0, 0), (8, 8)], per=10, noise=0.3)
        truth = np.repeat([0, 1], 10)
        res = kmeans(pts, 2, seed=0)
        assert adjusted_rand(res.labels, truth) == 1.0

    def test_matches_exhaustive_bisection_on_blobs(self):
        rng = np.random.default_rng(5)
        for trial in range(5):
            pts = blobs(rng, [(0, 0), (6, 1)], per=5, noise=0.4)
            best_ssw, best_labels = exhaustive_best_bisection(pts)
            res = kmeans(pts, 2, seed=trial)
            np.testing.assert_allclose(res.inertia, best_ssw, atol=1e-9)
            assert adjusted_rand(res.labels, best_labels) == 1.0

    def test_matches_exhaustive_bisection_on_small_random(self):
        rng = np.random.default_rng(6)
        for trial in range(5):
            pts = rng.standard_normal((10, 2))
            best_ssw, _ = exhaustive_best_bisection(pts)
            res = kmeans(pts, 2, seed=trial, n_restarts=40)
            np.testing.assert_allclose(res.inertia, best_ssw, atol=1e-9)


class TestDeterminismAndRepair:
    def test_same_seed_same_labels(self):
        rng = np.random.default_rng(7)
        pts = rng.standard_normal((40, 3))
        a = kmeans(pts, 5, seed=11)
        b = kmeans(pts, 5, seed=11)
        np.testing.assert_array_equal(a.labels, b.labels)
        assert a.inertia == b.inertia

    def test_more_restarts_never_worse(self):
        rng = np.random.default_rng(8)
        pts = rng.standard_normal((50, 2))
        one = kmeans(pts, 6, seed=0, n_restarts=1)
        many = kmeans(pts, 6, seed=0, n_restarts=25)
        assert many.inertia <= one.inertia + 1e-12

    def test_duplicate_points_fill_all_clusters(self):
        # six points at only two distinct positions still must yield
        # three nonempty clusters (empty-cluster repair)
        pts = np.array([[0.0], [0.0], [0.0], [1.0], [1.0], [1.0]])
        res = kmeans(pts, 3, seed=0)
        assert len(set(res.labels.tolist())) == 3

    def test_single_distinct_point_many_clusters(self):
        pts = np.zeros((5, 2))
        res = kmeans(pts, 3, seed=0)
        assert res.inertia == 0.0
        assert len(set(res.labels.tolist())) == 3
