"""Feature similarity, spatial combination, and graph Laplacians.

Feature similarity is the Gaussian RBF kernel on Euclidean feature
distance, ``S_ij = exp(-||x_i - x_j||^2 / (2 sigma^2))``, with unit
diagonal. A spatial constraint kernel modulates it either multiplicatively
(Hadamard product, used by the truncated and binarized variants) or as a
convex combination ``(1 - delta) * S + delta * C`` with the raw adjacency
matrix.

The Laplacian is unnormalized, ``L = diag(d) - W`` with degrees
``d_i = sum_j W_ij`` taken over the full row, diagonal included. The
number of (numerically) zero eigenvalues of L equals the number of
connected components of the support of W's off-diagonal entries.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .errors import NumericalError
from .graph import ConstraintGraph

_SUPPORT_TOL = 1e-12


def median_bandwidth(values, max_pairs: int = 1000) -> float:
    """Median pairwise Euclidean distance, the default RBF bandwidth.

    Uses every pair when there are at most ``max_pairs`` of them,
    otherwise a fixed-seed sample of ``max_pairs`` pairs, so the
    heuristic stays deterministic on large inputs. Falls back to the
    mean positive distance when the median is zero, and to 1.0 when all
    points coincide.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[0]
    n_pairs = n * (n - 1) // 2
    if n_pairs <= max_pairs:
        dists = pdist(values)
    else:
        rng = np.random.default_rng(0)
        i = rng.integers(0, n, size=max_pairs)
        j = rng.integers(0, n - 1, size=max_pairs)
        j = np.where(j >= i, j + 1, j)  # j != i, uniform over the rest
        dists = np.linalg.norm(values[i] - values[j], axis=1)
    med = float(np.median(dists))
    if med > 0:
        return med
    positive = dists[dists > 0]
    if positive.size:
        return float(positive.mean())
    return 1.0


def rbf_similarity(values, sigma: float) -> np.ndarray:
    """Gaussian feature similarity with exact unit diagonal."""
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    values = np.asarray(values, dtype=float)
    sq = squareform(pdist(values, "sqeuclidean"))
    s = np.exp(-sq / (2.0 * sigma * sigma))
    np.fill_diagonal(s, 1.0)
    return s


def combine_hadamard(feature_sim: np.ndarray, kernel_matrix: np.ndarray) -> np.ndarray:
    """Elementwise product of feature similarity and constraint kernel."""
    s = np.asarray(feature_sim, dtype=float)
    k = np.asarray(kernel_matrix, dtype=float)
    if s.shape != k.shape:
        raise ValueError(f"shape mismatch: {s.shape} vs {k.shape}")
    return s * k


def combine_weighted(feature_sim: np.ndarray, adjacency: np.ndarray,
                     delta: float) -> np.ndarray:
    """Convex combination ``(1 - delta) * S + delta * C``.

    At delta=0 this is the pure feature similarity; at delta=1 it is the
    adjacency matrix itself and the result depends only on the graph.
    """
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    s = np.asarray(feature_sim, dtype=float)
    c = np.asarray(adjacency, dtype=float)
    if s.shape != c.shape:
        raise ValueError(f"shape mismatch: {s.shape} vs {c.shape}")
    return (1.0 - delta) * s + delta * c


@dataclass(frozen=True)
class LaplacianPair:
    """Unnormalized Laplacian together with the degree vector it came from."""

    matrix: np.ndarray
    degrees: np.ndarray


def laplacian(weights: np.ndarray) -> LaplacianPair:
    """L = diag(d) - W with d the full row sums (diagonal included).

    A zero degree means some unit has no weight to anything, itself
    included; downstream normalization would divide by it, so it is an
    error here.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("weight matrix must be square")
    if not np.allclose(w, w.T, atol=1e-10):
        raise NumericalError("weight matrix is not symmetric")
    if w.min() < -1e-12:
        raise NumericalError("weight matrix has negative entries")
    d = w.sum(axis=1)
    if d.min() <= _SUPPORT_TOL:
        bad = int(np.argmin(d))
        raise NumericalError(
            f"isolated unit under combined affinity: unit {bad} has zero degree"
        )
    lap = np.diag(d) - w
    return LaplacianPair(lap, d)


def support_components(weights: np.ndarray, tol: float = _SUPPORT_TOL):
    """Connected components of the off-diagonal support of W."""
    w = np.asarray(weights, dtype=float)
    n = w.shape[0]
    mask = np.triu(w > tol, k=1)
    iu, ju = np.nonzero(mask)
    graph = ConstraintGraph(n, list(zip(iu.tolist(), ju.tolist())))
    return graph.components()
