"""Partitional region delineation: spectral embedding + k-means.

Three methods share one pipeline and differ only in how the spatial
constraint enters the affinity:

* ``ssc``   Hadamard product with the truncated exponential kernel
            (delta = neighborhood radius in hops).
* ``bssc``  Hadamard product with the binarized kernel (0/1 reachability
            within delta hops).
* ``scm``   Convex combination ``(1 - delta) * S + delta * C`` with the
            raw adjacency, delta in [0, 1].

The embedding keeps the k smallest generalized eigenvectors (including
the trivial one) and k-means runs on its rows. k-means is implemented
here rather than borrowed so that seeding, tie-breaking, and
empty-cluster repair are pinned down exactly: k-means++ seeding from
``numpy.random.default_rng(seed)`` (PCG64), ties in assignment go to the
lowest center index, emptied clusters are re-seeded with distinct points
farthest from their assigned centers (taken only from clusters that keep
at least one member), and the best of ``n_restarts`` runs by
(inertia, restart order) wins.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from . import graph as graphmod
from .affinity import (combine_hadamard, combine_weighted, laplacian,
                       median_bandwidth, rbf_similarity, support_components)
from .data import Dataset, STAGE_RAW
from .embedding import SpectralEmbedding, spectral_embedding
from .errors import DegenerateAffinityWarning
from .preprocess import preprocess as preprocess_dataset
from ._validation import as_feature_array, as_graph, check_k

METHODS = ("ssc", "bssc", "scm")


@dataclass(frozen=True)
class MethodConfig:
    """Validated bundle of delineation settings.

    ``delta`` is a hop radius (integer >= 1) for ssc/bssc and a mixing
    weight in [0, 1] for scm. ``sigma`` is an RBF bandwidth or the
    string ``"median"`` for the median-distance heuristic.
    """

    method: str = "ssc"
    k: int = 2
    delta: float = 1
    sigma: object = "median"
    seed: int = 0
    n_restarts: int = 10
    variance_target: float = 0.85

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.method in ("ssc", "bssc"):
            if self.delta != int(self.delta) or self.delta < 1:
                raise ValueError(
                    f"{self.method} needs an integer delta (hop radius) >= 1, "
                    f"got {self.delta}"
                )
            object.__setattr__(self, "delta", int(self.delta))
        else:
            if not 0.0 <= self.delta <= 1.0:
                raise ValueError(f"scm needs delta in [0, 1], got {self.delta}")
            object.__setattr__(self, "delta", float(self.delta))
        if self.sigma != "median" and not (
            isinstance(self.sigma, (int, float)) and self.sigma > 0
        ):
            raise ValueError(f"sigma must be positive or 'median', got {self.sigma!r}")
        if self.n_restarts < 1:
            raise ValueError("n_restarts must be >= 1")


@dataclass(frozen=True)
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    inertia: float
    n_iter: int


def _plus_plus_seed(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    chosen = np.zeros(n, dtype=bool)
    first = int(rng.integers(n))
    centers[0] = points[first]
    chosen[first] = True
    d2 = ((points - centers[0]) ** 2).sum(axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            probs = d2 / total
        else:
            # all remaining points coincide with a center
            probs = (~chosen) / (~chosen).sum()
        idx = int(rng.choice(n, p=probs))
        centers[j] = points[idx]
        chosen[idx] = True
        d2 = np.minimum(d2, ((points - centers[j]) ** 2).sum(axis=1))
    return centers


def _assign(points, centers):
    d2 = ((points[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)  # ties go to the lowest center index
    return labels, d2


def _lloyd(points, k, rng, max_iter):
    centers = _plus_plus_seed(points, k, rng)
    labels = np.full(points.shape[0], -1)
    inertia = np.inf
    for it in range(1, max_iter + 1):
        new_labels, d2 = _assign(points, centers)
        point_d2 = d2[np.arange(points.shape[0]), new_labels]
        counts = np.bincount(new_labels, minlength=k)
        empties = np.flatnonzero(counts == 0)
        if empties.size:
            # revive each emptied cluster with a distinct far point, taken
            # from a cluster that can spare one (never a singleton); with
            # n >= k such a donor always exists
            order = np.argsort(-point_d2, kind="stable")
            pos = 0
            for j in empties:
                while counts[new_labels[order[pos]]] <= 1:
                    pos += 1
                far = int(order[pos])
                pos += 1
                counts[new_labels[far]] -= 1
                counts[j] += 1
                centers[j] = points[far]
                new_labels[far] = j
                point_d2[far] = 0.0
        inertia = float(point_d2.sum())
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            centers[j] = points[labels == j].mean(axis=0)
    return KMeansResult(labels, centers, inertia, it)


def kmeans(points, k: int, seed: int = 0, n_restarts: int = 10,
           max_iter: int = 300) -> KMeansResult:
    """Best of ``n_restarts`` Lloyd runs with k-means++ seeding.

    A later restart replaces the incumbent only if its inertia is
    strictly lower, so results are reproducible for a fixed seed.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be 2-D")
    n = points.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(n_restarts):
        result = _lloyd(points, k, rng, max_iter)
        if best is None or result.inertia < best.inertia:
            best = result
    return best


@dataclass(frozen=True)
class DelineationResult:
    """Labels plus the diagnostics the pipeline produced along the way."""

    labels: np.ndarray
    embedding: SpectralEmbedding
    config: MethodConfig
    sigma: float
    inertia: float


def ensure_dataset(X, graph=None) -> Dataset:
    """Accept a Dataset as is, or wrap (features, graph) into one."""
    if isinstance(X, Dataset):
        return X
    from .data import FeatureMatrix

    values = as_feature_array(X)
    g = as_graph(graph, values.shape[0])
    ids = tuple(str(i) for i in range(values.shape[0]))
    return Dataset(ids, FeatureMatrix(values), g)


def bypass_preprocessing(dataset: Dataset) -> Dataset:
    """Mark raw features as already reduced so the pipeline uses them as is."""
    from .data import FeatureMatrix, STAGE_REDUCED

    if dataset.features.stage != STAGE_RAW:
        return dataset
    return dataset.with_features(
        FeatureMatrix(dataset.features.values, stage=STAGE_REDUCED,
                      names=dataset.features.names)
    )


def resolve_sigma(values, sigma) -> float:
    if sigma == "median":
        return median_bandwidth(values)
    return float(sigma)


def combined_affinity(values, graph, config: MethodConfig) -> tuple[np.ndarray, float]:
    """(combined affinity matrix, resolved sigma) for a method config."""
    sigma = resolve_sigma(values, config.sigma)
    sim = rbf_similarity(values, sigma)
    if config.method == "ssc":
        kern = graphmod.truncated_exponential_kernel(graph, config.delta)
        total = combine_hadamard(sim, kern.matrix)
    elif config.method == "bssc":
        kern = graphmod.binarized_kernel(graph, config.delta)
        total = combine_hadamard(sim, kern.matrix)
    else:
        total = combine_weighted(sim, graph.adjacency_matrix(), config.delta)
    return total, sigma


def delineate(dataset: Dataset, config: MethodConfig) -> DelineationResult:
    """Run the full pipeline on a dataset.

    Raw features are preprocessed (standardize + PCA at the config's
    variance target) first; already-reduced features pass through as is.
    Warns DegenerateAffinityWarning when the combined affinity splits
    into more connected components than there are clusters to find: the
    Laplacian then has more than k near-zero eigenvalues and the
    embedding separates components before it separates features.
    """
    if dataset.features.stage == STAGE_RAW:
        dataset = preprocess_dataset(dataset, config.variance_target)
    values = dataset.features.values
    check_k(config.k, values.shape[0])
    total, sigma = combined_affinity(values, dataset.graph, config)
    parts = support_components(total)
    if len(parts) > config.k:
        warnings.warn(
            f"combined affinity support has {len(parts)} components for "
            f"k={config.k} regions",
            DegenerateAffinityWarning,
            stacklevel=2,
        )
    emb = spectral_embedding(laplacian(total), config.k)
    km = kmeans(emb.vectors, config.k, seed=config.seed,
                n_restarts=config.n_restarts)
    return DelineationResult(km.labels, emb, config, sigma, km.inertia)


class SpectralRegions(BaseEstimator, ClusterMixin):
    """Spatially constrained spectral clustering, estimator flavor.

    Fit either on a Dataset (its graph is used) or on a feature array
    with the must-link graph passed as the ``graph`` parameter (a
    ConstraintGraph, an (n, n) 0/1 matrix, or an (m, 2) edge list).

    Parameters mirror MethodConfig; ``preprocess=False`` feeds features
    to the affinity as given instead of standardizing + reducing first.

    Attributes
    ----------
    labels_ : ndarray of shape (n,)
        Region label per unit, values 0..k-1.
    embedding_ : ndarray of shape (n, k)
        Generalized eigenvector coordinates fed to k-means.
    eigenvalues_ : ndarray of shape (k,)
    sigma_ : float
        The RBF bandwidth actually used.
    inertia_ : float
    """

    def __init__(self, k: int = 2, method: str = "ssc", delta=1,
                 sigma="median", seed: int = 0, n_restarts: int = 10,
                 variance_target: float = 0.85, preprocess: bool = True,
                 graph=None):
        self.k = k
        self.method = method
        self.delta = delta
        self.sigma = sigma
        self.seed = seed
        self.n_restarts = n_restarts
        self.variance_target = variance_target
        self.preprocess = preprocess
        self.graph = graph

    def _config(self):
        return MethodConfig(method=self.method, k=self.k, delta=self.delta,
                            sigma=self.sigma, seed=self.seed,
                            n_restarts=self.n_restarts,
                            variance_target=self.variance_target)

    def fit(self, X, y=None):
        config = self._config()
        dataset = ensure_dataset(X, self.graph)
        if not self.preprocess:
            dataset = bypass_preprocessing(dataset)
        result = delineate(dataset, config)
        self.n_features_in_ = dataset.features.n_features
        self.labels_ = result.labels
        self.embedding_ = result.embedding.vectors
        self.eigenvalues_ = result.embedding.eigenvalues
        self.sigma_ = result.sigma
        self.inertia_ = result.inertia
        return self
