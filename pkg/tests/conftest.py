"""Shared fixtures: small hand-checkable graphs and planted datasets."""

from __future__ import annotations

import numpy as np
import pytest

from regionate import (ConstraintGraph, Dataset, FeatureMatrix, SyntheticSpec,
                       generate_synthetic, lattice_graph)
from regionate.data import STAGE_REDUCED

# A 9-vertex graph whose hub vertex A (=0) is adjacent to exactly
# B, C, D, E (=1..4) and whose diameter is 3, so depth-3 reachability
# covers every pair while depth 2 does not (F-D is 3 hops).
HUB_EDGES = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 5), (2, 6), (3, 7), (4, 8),
             (5, 6), (6, 7), (7, 8)]


@pytest.fixture
def hub_graph():
    return ConstraintGraph(9, HUB_EDGES)


@pytest.fixture
def path5():
    return ConstraintGraph(5, [(0, 1), (1, 2), (2, 3), (3, 4)])


@pytest.fixture
def two_block_10x10():
    """10x10 lattice, two planted left/right blocks, noiseless."""
    spec = SyntheticSpec(rows=10, cols=10, planted_regions="1x2",
                         feature_dim=2, noise_sigma=0.0, seed=0)
    return generate_synthetic(spec)


@pytest.fixture
def noisy_blocks_8x8():
    spec = SyntheticSpec(rows=8, cols=8, planted_regions="2x2",
                         feature_dim=3, noise_sigma=0.15, seed=5)
    return generate_synthetic(spec)


def reduced_dataset(values, edges=None, graph=None):
    """Wrap plain arrays as an already-reduced Dataset (skips PCA)."""
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    n = values.shape[0]
    if graph is None:
        graph = ConstraintGraph(n, edges or [])
    names = tuple(f"pc{j + 1}" for j in range(values.shape[1]))
    features = FeatureMatrix(values, STAGE_REDUCED, names)
    ids = tuple(f"u{i}" for i in range(n))
    return Dataset(ids, features, graph)


@pytest.fixture
def lattice3x3():
    return lattice_graph(3, 3)
