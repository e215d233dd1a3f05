"""Generalized eigenproblem L r = lambda D r and its embedding contract."""

import numpy as np
import pytest

from regionate import (MethodConfig, NumericalError, adjusted_rand, delineate,
                       fix_signs, laplacian, spectral_embedding,
                       support_components)
from regionate.affinity import LaplacianPair

from .conftest import reduced_dataset
from .oracles import jacobi_eigh, random_connected_graph


def random_affinity(rng, n, p_zero=0.0):
    """Random symmetric nonnegative affinity with unit diagonal."""
    s = rng.uniform(0.05, 1.0, size=(n, n))
    if p_zero:
        mask = rng.random((n, n)) < p_zero
        s[mask] = 0.0
    s = (s + s.T) / 2.0
    np.fill_diagonal(s, 1.0)
    return s


def check_residuals(lap, emb, scale=1e-8):
    l_norm = np.linalg.norm(lap.matrix)
    for j in range(emb.vectors.shape[1]):
        r = emb.vectors[:, j]
        resid = lap.matrix @ r - emb.eigenvalues[j] * (lap.degrees * r)
        assert np.linalg.norm(resid) <= scale * max(l_norm, 1.0)


class TestSpectralEmbedding:
    def test_trivial_eigenpair_on_connected_affinity(self):
        rng = np.random.default_rng(0)
        s = random_affinity(rng, 12)
        lap = laplacian(s)
        emb = spectral_embedding(lap, 3)
        assert abs(emb.eigenvalues[0]) <= 1e-10
        col = emb.vectors[:, 0]
        assert np.ptp(col / col[0]) <= 1e-8  # constant up to scale
        check_residuals(lap, emb)

    def test_two_components_give_double_zero(self):
        rng = np.random.default_rng(1)
        a = random_affinity(rng, 5)
        b = random_affinity(rng, 7)
        s = np.zeros((12, 12))
        s[:5, :5] = a
        s[5:, 5:] = b
        lap = laplacian(s)
        emb = spectral_embedding(lap, 4)
        assert abs(emb.eigenvalues[0]) <= 1e-8
        assert abs(emb.eigenvalues[1]) <= 1e-8
        assert emb.eigenvalues[2] > 1e-6
        check_residuals(lap, emb)

    def test_matches_jacobi_oracle_on_8x8(self):
        rng = np.random.default_rng(2)
        s = random_affinity(rng, 8)
        lap = laplacian(s)
        emb = spectral_embedding(lap, 8)
        inv_sqrt = 1.0 / np.sqrt(lap.degrees)
        sym = lap.matrix * inv_sqrt[:, None] * inv_sqrt[None, :]
        oracle_vals, _ = jacobi_eigh((sym + sym.T) / 2.0)
        np.testing.assert_allclose(emb.eigenvalues, oracle_vals, atol=1e-8)

    def test_columns_are_d_orthonormal(self):
        rng = np.random.default_rng(3)
        s = random_affinity(rng, 15)
        lap = laplacian(s)
        emb = spectral_embedding(lap, 6)
        gram = emb.vectors.T @ (lap.degrees[:, None] * emb.vectors)
        np.testing.assert_allclose(gram, np.eye(6), atol=1e-9)

    def test_eigenvalues_ascending_within_spectrum_bound(self):
        rng = np.random.default_rng(4)
        for _ in range(10):
            n = int(rng.integers(3, 30))
            s = random_affinity(rng, n, p_zero=0.3)
            if len(support_components(s)) > n:  # pragma: no cover
                continue
            lap = laplacian(s)
            emb = spectral_embedding(lap, n)
            vals = emb.eigenvalues
            assert (np.diff(vals) >= -1e-12).all()
            assert vals.min() >= -1e-8
            assert vals.max() <= 2.0 + 1e-8

    def test_zero_eigenvalue_count_matches_components(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            sizes = rng.integers(2, 6, size=int(rng.integers(1, 4)))
            n = int(sizes.sum())
            s = np.zeros((n, n))
            start = 0
            for size in sizes:
                s[start : start + size, start : start + size] = random_affinity(
                    rng, int(size)
                )
                start += size
            emb = spectral_embedding(laplacian(s), n)
            n_zero = int((np.abs(emb.eigenvalues) <= 1e-8).sum())
            assert n_zero == len(sizes) == len(support_components(s))

    def test_sign_convention(self):
        rng = np.random.default_rng(6)
        s = random_affinity(rng, 9)
        emb = spectral_embedding(laplacian(s), 5)
        for j in range(5):
            col = emb.vectors[:, j]
            assert col[np.argmax(np.abs(col))] > 0

    def test_fix_signs_flips_only_negative_peaks(self):
        v = np.array([[1.0, -2.0], [0.5, 1.0]])
        out = fix_signs(v)
        np.testing.assert_array_equal(out, [[1.0, 2.0], [0.5, -1.0]])

    def test_k_bounds(self):
        lap = laplacian(np.ones((3, 3)))
        with pytest.raises(ValueError, match="k must satisfy"):
            spectral_embedding(lap, 4)
        with pytest.raises(ValueError, match="k must satisfy"):
            spectral_embedding(lap, 0)

    def test_zero_degree_raises(self):
        lap = LaplacianPair(np.zeros((2, 2)), np.array([1.0, 0.0]))
        with pytest.raises(NumericalError, match="nonpositive degree"):
            spectral_embedding(lap, 1)

    def test_generalized_eigs_is_the_same_operation(self):
        import regionate

        assert regionate.generalized_eigs is spectral_embedding


class TestPermutationEquivariance:
    def test_labels_match_up_to_permutation(self):
        rng = np.random.default_rng(7)
        n = 24
        values = rng.standard_normal((n, 3))
        edges = random_connected_graph(rng, n)
        ds = reduced_dataset(values, edges)
        cfg = MethodConfig(method="ssc", k=3, delta=2, seed=0)
        base = delineate(ds, cfg)

        perm = rng.permutation(n)
        inv = np.argsort(perm)
        p_edges = [(int(inv[u]), int(inv[v])) for u, v in edges]
        p_ds = reduced_dataset(values[perm], p_edges)
        permuted = delineate(p_ds, cfg)
        # unit i of the base run is row inv[i] of the permuted run
        assert adjusted_rand(base.labels, permuted.labels[inv]) == 1.0
