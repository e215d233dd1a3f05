"""Evaluation metrics for a regionalization.

* ``ssw``            within-region sum of squared feature deviations.
* ``pct_ml``         share of graph edges internal to a region.
* ``contiguity_c``   pairwise-proximity contiguity in [0, 1]: counts all
                     within-region unit pairs fully, and discounts each
                     cross-region pair by the path length between the two
                     regions along the minimum spanning tree of the
                     region graph (edge weight = minimum hop distance
                     between the regions), raised to ``gamma``.
* ``cbalance``       size balance, (k / N) * (prod n_i)^(1/k); 1.0 for
                     equal sizes, small when sizes are skewed.
* ``adjusted_rand``  chance-corrected partition agreement.

Determinism note: the MST is built with Kruskal, sorting candidate edges
by (weight, smaller region id, larger region id), so equal-weight edge
choices never depend on dict or float ordering.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .data import Dataset, STAGE_RAW
from .errors import DataFormatError
from .graph import ConstraintGraph
from .preprocess import preprocess as preprocess_dataset
from ._validation import check_labels


def ssw(values, labels) -> float:
    """Sum over regions of squared deviations from the region mean."""
    values = np.asarray(values, dtype=float)
    labels = check_labels(labels, values.shape[0])
    out = 0.0
    for r in np.unique(labels):
        rows = values[labels == r]
        out += float(((rows - rows.mean(axis=0)) ** 2).sum())
    return out


def pct_ml(labels, graph: ConstraintGraph) -> float:
    """Fraction of must-link edges whose endpoints share a region."""
    labels = check_labels(labels, graph.n)
    if graph.n_edges == 0:
        raise DataFormatError("pct_ml is undefined on a graph with no edges")
    internal = sum(1 for u, v in graph.edges if labels[u] == labels[v])
    return internal / graph.n_edges


def region_connectivity(labels, graph: ConstraintGraph) -> dict[int, bool]:
    """Whether each region induces a connected subgraph."""
    labels = check_labels(labels, graph.n)
    out = {}
    for r in np.unique(labels):
        members = np.flatnonzero(labels == r)
        out[int(r)] = len(graph.components(members)) == 1
    return out


def _region_hop_distances(labels, graph):
    """Minimum hop distance between every pair of regions (inf if none)."""
    regions = np.unique(labels)
    k = len(regions)
    index = {int(r): i for i, r in enumerate(regions)}
    dist = np.full((k, k), np.inf)
    np.fill_diagonal(dist, 0.0)
    for r in regions:
        sources = np.flatnonzero(labels == r)
        hops = graph.bfs_hops_multi(sources)
        for s in regions:
            if s == r:
                continue
            member_hops = hops[labels == s]
            reached = member_hops[member_hops >= 0]
            if reached.size:
                d = float(reached.min())
                i, j = index[int(r)], index[int(s)]
                dist[i, j] = min(dist[i, j], d)
                dist[j, i] = dist[i, j]
    return regions, dist


def _mst_kruskal(k, dist):
    """MST edges over k nodes; candidates sorted by (weight, i, j)."""
    candidates = sorted(
        (dist[i, j], i, j)
        for i in range(k) for j in range(i + 1, k)
        if np.isfinite(dist[i, j])
    )
    parent = list(range(k))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = []
    for w, i, j in candidates:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            edges.append((i, j, w))
            if len(edges) == k - 1:
                break
    if len(edges) != k - 1:
        raise DataFormatError(
            "region graph is disconnected; contiguity_c needs a connected graph"
        )
    return edges


def _tree_path_lengths(k, edges):
    """Pairwise path lengths along the tree (sum of edge weights)."""
    neighbors = [[] for _ in range(k)]
    for i, j, w in edges:
        neighbors[i].append((j, w))
        neighbors[j].append((i, w))
    lengths = np.zeros((k, k))
    for s in range(k):
        seen = {s}
        stack = [(s, 0.0)]
        while stack:
            node, acc = stack.pop()
            for nxt, w in neighbors[node]:
                if nxt not in seen:
                    seen.add(nxt)
                    lengths[s, nxt] = acc + w
                    stack.append((nxt, acc + w))
    return lengths


def contiguity_c(labels, graph: ConstraintGraph, gamma: float = 1.0) -> float:
    """Contiguity index (phi + nu) / omega in (0, 1].

    phi counts within-region unit pairs, omega all unit pairs, and nu
    adds cross-region pairs discounted by MST path length ** gamma.
    Single-region labelings score exactly 1.
    """
    labels = check_labels(labels, graph.n)
    if gamma <= 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    n = graph.n
    regions, counts = np.unique(labels, return_counts=True)
    k = len(regions)
    phi = float((counts * (counts - 1) // 2).sum())
    omega = n * (n - 1) / 2.0
    if k == 1:
        return phi / omega  # == 1.0

    _, dist = _region_hop_distances(labels, graph)
    edges = _mst_kruskal(k, dist)
    lengths = _tree_path_lengths(k, edges)
    nu = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            nu += counts[i] * counts[j] / lengths[i, j] ** gamma
    return float((phi + nu) / omega)


def cbalance(labels) -> float:
    """(k / N) times the geometric mean of region sizes; 1.0 iff balanced."""
    labels = check_labels(labels)
    _, counts = np.unique(labels, return_counts=True)
    k = len(counts)
    n = labels.shape[0]
    if (counts == counts[0]).all():
        return k * int(counts[0]) / n  # exactly 1.0, skipping exp/log noise
    log_gm = float(np.log(counts).mean())
    # AM-GM bounds this by 1; clamp the round-off overshoot
    return min(1.0, k / n * math.exp(log_gm))


def adjusted_rand(labels_a, labels_b) -> float:
    """Hubert-Arabie adjusted Rand index between two labelings."""
    a = check_labels(labels_a)
    b = check_labels(labels_b, a.shape[0])
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    contingency = np.zeros((ai.max() + 1, bi.max() + 1), dtype=np.int64)
    np.add.at(contingency, (ai, bi), 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    index = comb2(contingency).sum()
    sum_rows = comb2(contingency.sum(axis=1)).sum()
    sum_cols = comb2(contingency.sum(axis=0)).sum()
    total = comb2(np.int64(a.shape[0]))
    expected = sum_rows * sum_cols / total
    max_index = (sum_rows + sum_cols) / 2.0
    if max_index == expected:
        return 1.0
    return float((index - expected) / (max_index - expected))


@dataclass(frozen=True)
class MetricReport:
    """Metric bundle for one labeling, JSON-serializable."""

    ssw: float
    pct_ml: float
    contiguity_c: float
    cbalance: float
    per_region: tuple
    ari: float | None = None

    def to_dict(self) -> dict:
        out = {
            "ssw": self.ssw,
            "pct_ml": self.pct_ml,
            "contiguity_c": self.contiguity_c,
            "cbalance": self.cbalance,
            "per_region": [dict(p) for p in self.per_region],
        }
        if self.ari is not None:
            out["ari"] = self.ari
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def evaluate(dataset: Dataset, labels, gamma: float = 1.0,
             reference_labels=None,
             variance_target: float = 0.85) -> MetricReport:
    """All metrics for one labeling; ssw is computed in the reduced
    feature space (raw datasets are preprocessed first)."""
    if dataset.features.stage == STAGE_RAW:
        dataset = preprocess_dataset(dataset, variance_target)
    labels = check_labels(labels, dataset.n_units)
    values = dataset.features.values
    graph = dataset.graph

    connected = region_connectivity(labels, graph)
    per_region = []
    for r in np.unique(labels):
        rows = values[labels == r]
        per_region.append({
            "region": int(r),
            "size": int(rows.shape[0]),
            "connected": bool(connected[int(r)]),
            "ssw": float(((rows - rows.mean(axis=0)) ** 2).sum()),
        })
    ari = None
    if reference_labels is not None:
        ari = adjusted_rand(labels, reference_labels)
    return MetricReport(
        ssw=ssw(values, labels),
        pct_ml=pct_ml(labels, graph),
        contiguity_c=contiguity_c(labels, graph, gamma=gamma),
        cbalance=cbalance(labels),
        per_region=tuple(per_region),
        ari=ari,
    )
