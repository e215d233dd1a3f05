"""Input validation helpers shared by the estimators and functional API."""

from __future__ import annotations

import numpy as np

from .graph import ConstraintGraph


def as_feature_array(X) -> np.ndarray:
    """Coerce X to a 2-D float array with at least 2 rows; reject NaN/inf."""
    from .data import Dataset, FeatureMatrix  # circular at module load time

    if isinstance(X, Dataset):
        X = X.features.values
    elif isinstance(X, FeatureMatrix):
        X = X.values
    values = np.asarray(X, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    if values.ndim != 2:
        raise ValueError(f"expected a 2-D feature array, got ndim={values.ndim}")
    if values.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    if values.shape[1] < 1:
        raise ValueError("need at least 1 feature")
    if not np.isfinite(values).all():
        raise ValueError("features contain NaN or infinite values")
    return values


def as_graph(graph, n: int) -> ConstraintGraph:
    """Accept a ConstraintGraph or an edge list / adjacency matrix for n vertices."""
    if isinstance(graph, ConstraintGraph):
        if graph.n != n:
            raise ValueError(f"graph has {graph.n} vertices, expected {n}")
        return graph
    if graph is None:
        raise ValueError("a must-link constraint graph is required")
    arr = np.asarray(graph)
    if arr.ndim == 2 and arr.shape == (n, n):
        if not np.array_equal(arr, arr.T):
            raise ValueError("adjacency matrix must be symmetric")
        iu, ju = np.nonzero(np.triu(arr, k=1))
        return ConstraintGraph(n, list(zip(iu.tolist(), ju.tolist())))
    if arr.ndim == 2 and arr.shape[1] == 2:
        return ConstraintGraph(n, [(int(u), int(v)) for u, v in arr])
    if arr.ndim == 1 and arr.size == 0:
        return ConstraintGraph(n, [])
    raise ValueError(
        "graph must be a ConstraintGraph, an (n, n) 0/1 matrix, or an (m, 2) edge list"
    )


def check_labels(labels, n: int | None = None) -> np.ndarray:
    """Coerce labels to a 1-D int array (optionally of length n)."""
    labels = np.asarray(labels)
    if labels.ndim != 1:
        raise ValueError("labels must be 1-D")
    if n is not None and labels.shape[0] != n:
        raise ValueError(f"expected {n} labels, got {labels.shape[0]}")
    if labels.size and not np.issubdtype(labels.dtype, np.integer):
        as_int = labels.astype(int)
        if not np.array_equal(as_int, labels):
            raise ValueError("labels must be integers")
        labels = as_int
    return labels.astype(int, copy=False)


def check_k(k: int, n: int) -> int:
    k = int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    return k
