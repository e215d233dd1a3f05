"""Hierarchical delineation: divisive spectral bisection and constrained
agglomerative merging, both recorded as a replayable merge tree.

Divisive (``hssc``): build the constrained affinity (RBF similarity
Hadamard truncated exponential kernel) once, then repeatedly split the
region with the largest within-region feature scatter by running a k=2
spectral bisection on the principal submatrix of the combined affinity.
At level k the region ids are exactly 0..k-1: the split parent keeps its
id (on the half holding the region's lowest-numbered unit) and the new
half takes id k-1. The first bisection seeds k-means with the run seed
itself, so a two-level tree reproduces the one-shot k=2 partition;
deeper levels use ``SeedSequence((seed, level))``.

Agglomerative: start from singletons and merge until one cluster
remains, scipy-style (the merge at step t creates cluster id n + t).
For single/complete/upgma the driver is a combined similarity: a
feature-similarity matrix maintained by the Lance-Williams rule of the
linkage (max / min / size-weighted mean, seeded from the unit RBF
matrix) times a constraint weighting. With ``kernel_update="recompute"``
the weighting is the truncated exponential kernel recomputed on the
contracted cluster graph after every merge (cluster adjacency = any
cross edge), so non-neighbor cluster pairs have combined similarity
exactly zero; with ``"adjacency-mask"`` it is the contracted 0/1
adjacency itself. The eligible pair with the largest combined value
merges. Ward instead tracks squared feature distances,
``d2(A, B) = 2 |A| |B| / (|A| + |B|) * ||mean_A - mean_B||^2``
via Lance-Williams, uses the constraint only as an eligibility mask
(positive kernel entry, or adjacency in mask mode), and merges the
smallest. When every remaining combined similarity is zero (or no ward
pair is eligible) the pair with the best *unconstrained* feature value
merges instead and the record is flagged forced. All ties break on the
lexicographically smallest (id, id) pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from .affinity import combine_hadamard, laplacian, rbf_similarity
from .data import Dataset, STAGE_RAW
from .embedding import spectral_embedding
from .errors import DataFormatError
from .graph import ConstraintGraph, truncated_exponential_kernel
from .partitional import (bypass_preprocessing, ensure_dataset, kmeans,
                          resolve_sigma)
from .preprocess import preprocess as preprocess_dataset
from ._validation import check_k

LINKAGES = ("single", "complete", "upgma", "ward")
KERNEL_UPDATE_MODES = ("recompute", "adjacency-mask")

TREE_HEADER = "level,event,parent_or_pair,children_or_value"


@dataclass(frozen=True)
class SplitRecord:
    """One divisive step; ``level`` is the region count after the split."""

    level: int
    parent: int
    children: tuple[int, int]

    forced = False


@dataclass(frozen=True)
class MergeRecord:
    """One agglomerative step; ``level`` is the cluster count after the
    merge and ``pair`` holds scipy-style cluster ids."""

    level: int
    pair: tuple[int, int]
    value: float
    forced: bool = False


@dataclass
class MergeTree:
    """Labels for every level 1..k_max plus the step log that links them."""

    method: str
    n: int
    levels: dict[int, np.ndarray]
    records: list
    meta: dict = field(default_factory=dict)

    @property
    def k_max(self) -> int:
        return max(self.levels)

    def labels_at(self, k: int) -> np.ndarray:
        if k not in self.levels:
            raise KeyError(f"no level {k}; tree holds 1..{self.k_max}")
        return self.levels[k]

    def to_lines(self) -> list[str]:
        lines = [TREE_HEADER]
        for rec in self.records:
            if isinstance(rec, SplitRecord):
                lines.append(
                    f"{rec.level},split,{rec.parent},"
                    f"{rec.children[0]}|{rec.children[1]}"
                )
            else:
                event = "forced_merge" if rec.forced else "merge"
                lines.append(
                    f"{rec.level},{event},{rec.pair[0]}|{rec.pair[1]},"
                    f"{rec.value!r}"
                )
        return lines

    def write(self, path) -> None:
        Path(path).write_text("\n".join(self.to_lines()) + "\n", encoding="utf-8")


def read_tree_log(path) -> list:
    """Parse a tree log written by MergeTree.write back into records."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != TREE_HEADER:
        raise DataFormatError(f"{path}: expected header {TREE_HEADER!r}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise DataFormatError(f"{path}:{lineno}: expected 4 fields")
        level_s, event, left, right = parts
        try:
            level = int(level_s)
            if event == "split":
                c1, c2 = right.split("|")
                records.append(SplitRecord(level, int(left), (int(c1), int(c2))))
            elif event in ("merge", "forced_merge"):
                i, j = left.split("|")
                records.append(
                    MergeRecord(level, (int(i), int(j)), float(right),
                                forced=event == "forced_merge")
                )
            else:
                raise ValueError(f"unknown event {event!r}")
        except ValueError as exc:
            raise DataFormatError(f"{path}:{lineno}: {exc}") from exc
    return records


def canonical_labels(assignment) -> np.ndarray:
    """Relabel arbitrary cluster ids to 0..k-1 in first-occurrence order."""
    assignment = np.asarray(assignment)
    labels = np.empty(assignment.shape[0], dtype=int)
    mapping: dict = {}
    for i, c in enumerate(assignment.tolist()):
        if c not in mapping:
            mapping[c] = len(mapping)
        labels[i] = mapping[c]
    return labels


def replay_merges(records: list, n: int, k_max: int) -> dict[int, np.ndarray]:
    """Rebuild per-level labels from a merge log, starting at singletons."""
    assignment = np.arange(n)
    levels: dict[int, np.ndarray] = {}
    if n <= k_max:
        levels[n] = canonical_labels(assignment)
    for step, rec in enumerate(records):
        a, b = rec.pair
        new_id = n + step
        assignment[(assignment == a) | (assignment == b)] = new_id
        count = n - step - 1
        if rec.level != count:
            raise DataFormatError(
                f"merge log out of order: step {step} claims level {rec.level}, "
                f"expected {count}"
            )
        if count <= k_max:
            levels[count] = canonical_labels(assignment)
    return levels


def replay_splits(records: list, labels_deepest: np.ndarray) -> dict[int, np.ndarray]:
    """Rebuild per-level labels from a split log by undoing splits from
    the deepest level's labels."""
    labels = np.asarray(labels_deepest).copy()
    k_max = int(labels.max()) + 1
    levels = {k_max: labels.copy()}
    for rec in sorted(records, key=lambda r: -r.level):
        if rec.level > k_max:
            continue
        child = rec.children[1]
        labels[labels == child] = rec.parent
        levels[rec.level - 1] = labels.copy()
    return levels


def _scatter(values) -> float:
    return float(((values - values.mean(axis=0)) ** 2).sum())


def hssc(dataset: Dataset, k_max: int, delta: int = 1, sigma="median",
         seed: int = 0, n_restarts: int = 10,
         variance_target: float = 0.85) -> MergeTree:
    """Divisive spectral hierarchy down to ``k_max`` regions.

    The region split next is the one with the largest within-region
    scatter among those with at least 2 units; ties prefer the larger
    region, then the lower region id.
    """
    if delta != int(delta) or delta < 1:
        raise ValueError(f"delta must be an integer hop radius >= 1, got {delta}")
    delta = int(delta)
    if dataset.features.stage == STAGE_RAW:
        dataset = preprocess_dataset(dataset, variance_target)
    values = dataset.features.values
    n = values.shape[0]
    k_max = check_k(k_max, n)

    sigma_used = resolve_sigma(values, sigma)
    sim = rbf_similarity(values, sigma_used)
    kern = truncated_exponential_kernel(dataset.graph, delta)
    total = combine_hadamard(sim, kern.matrix)

    labels = np.zeros(n, dtype=int)
    levels = {1: labels.copy()}
    records: list = []
    for level in range(2, k_max + 1):
        best = None
        for r in range(level - 1):
            members = np.flatnonzero(labels == r)
            if members.size < 2:
                continue
            key = (-_scatter(values[members]), -members.size, r)
            if best is None or key < best[0]:
                best = (key, r, members)
        if best is None:  # nothing splittable left
            break
        parent, members = best[1], best[2]

        sub = total[np.ix_(members, members)]
        emb = spectral_embedding(laplacian(sub), 2)
        level_seed = seed if level == 2 else np.random.SeedSequence((seed, level))
        km = kmeans(emb.vectors, 2, seed=level_seed, n_restarts=n_restarts)
        new_id = level - 1
        # the half holding the region's lowest-numbered unit keeps the id
        labels[members[km.labels != km.labels[0]]] = new_id
        levels[level] = labels.copy()
        records.append(SplitRecord(level, parent, (parent, new_id)))

    return MergeTree("hssc", n, levels, records,
                     meta={"sigma": sigma_used, "delta": delta, "seed": seed})


def _lw_update(linkage, v, a, b, others, sizes):
    """Lance-Williams value of merged (a, b) against each other cluster."""
    va, vb = v[a, others], v[b, others]
    if linkage == "single":
        return np.maximum(va, vb)
    if linkage == "complete":
        return np.minimum(va, vb)
    if linkage == "upgma":
        na, nb = sizes[a], sizes[b]
        return (na * va + nb * vb) / (na + nb)
    na, nb, nc = sizes[a], sizes[b], sizes[others]
    return ((na + nc) * va + (nb + nc) * vb - nc * v[a, b]) / (na + nb + nc)


def _constraint_weight(adj, ids, delta, kernel_update):
    """Constraint weighting between active clusters: recomputed truncated
    kernel entries, or the contracted 0/1 adjacency in mask mode."""
    sub = adj[np.ix_(ids, ids)]
    if kernel_update == "adjacency-mask":
        return sub.astype(float)
    if delta == 1:  # the series is exactly I + C; skip the graph rebuild
        return np.eye(len(ids)) + sub
    edges = [(i, j) for i, j in zip(*np.nonzero(np.triu(sub, k=1)))]
    g = ConstraintGraph(len(ids), edges)
    return truncated_exponential_kernel(g, delta).matrix


def agglomerative(dataset: Dataset, k_max: int, linkage: str = "ward",
                  delta: int = 1, sigma="median",
                  variance_target: float = 0.85,
                  kernel_update: str = "recompute") -> MergeTree:
    """Constrained agglomerative hierarchy with levels 1..k_max recorded.

    Runs all n - 1 merges so the log is a complete tree; only levels up
    to ``k_max`` keep label snapshots. ``sigma`` only matters for the
    similarity linkages (ward works on feature distances directly). The
    recorded value is the combined similarity that won the merge (the
    ward distance for ward), or the raw feature value for forced merges.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}, got {linkage!r}")
    if kernel_update not in KERNEL_UPDATE_MODES:
        raise ValueError(
            f"kernel_update must be one of {KERNEL_UPDATE_MODES}, got {kernel_update!r}"
        )
    if delta != int(delta) or delta < 0:
        raise ValueError(f"delta must be an integer hop radius >= 0, got {delta}")
    delta = int(delta)
    if dataset.features.stage == STAGE_RAW:
        dataset = preprocess_dataset(dataset, variance_target)
    values = dataset.features.values
    n = values.shape[0]
    k_max = check_k(k_max, n)
    ward = linkage == "ward"

    meta = {"linkage": linkage, "delta": delta, "kernel_update": kernel_update}
    n_ids = 2 * n - 1
    feat = np.zeros((n_ids, n_ids))
    if ward:
        diff = values[:, None, :] - values[None, :, :]
        feat[:n, :n] = (diff ** 2).sum(axis=2)
    else:
        sigma_used = resolve_sigma(values, sigma)
        feat[:n, :n] = rbf_similarity(values, sigma_used)
        meta["sigma"] = sigma_used
    adj = np.zeros((n_ids, n_ids), dtype=bool)
    adj[:n, :n] = dataset.graph.adjacency_matrix() > 0
    sizes = np.zeros(n_ids, dtype=int)
    sizes[:n] = 1

    assignment = np.arange(n)
    active = list(range(n))  # stays ascending: new ids only grow
    levels: dict[int, np.ndarray] = {}
    if n <= k_max:
        levels[n] = canonical_labels(assignment)
    records: list = []

    for step in range(n - 1):
        ids = np.array(active)
        upper = np.triu(np.ones((len(ids), len(ids)), dtype=bool), k=1)
        weight = _constraint_weight(adj, ids, delta, kernel_update)
        feat_sub = feat[np.ix_(ids, ids)]
        if ward:
            eligible = upper & (weight > 0)
            forced = not eligible.any()
            scores = np.where(upper if forced else eligible, feat_sub, np.inf)
            flat = int(scores.argmin())
        else:
            combined = np.where(upper, feat_sub * weight, 0.0)
            forced = not (combined > 0).any()
            scores = np.where(upper, feat_sub, -np.inf) if forced else combined
            flat = int(scores.argmax())
        # argmin/argmax scan row-major: ties land on the smallest (i, j)
        ai, bi = divmod(flat, len(ids))
        a, b = int(ids[ai]), int(ids[bi])
        value = float(feat[a, b] if (forced or ward) else scores[ai, bi])

        new_id = n + step
        others = np.array([c for c in active if c != a and c != b], dtype=int)
        if others.size:
            updated = _lw_update(linkage, feat, a, b, others, sizes)
            feat[new_id, others] = updated
            feat[others, new_id] = updated
            adj[new_id, others] = adj[a, others] | adj[b, others]
            adj[others, new_id] = adj[new_id, others]
        sizes[new_id] = sizes[a] + sizes[b]
        assignment[(assignment == a) | (assignment == b)] = new_id
        active = [c for c in active if c != a and c != b] + [new_id]

        count = n - step - 1
        records.append(MergeRecord(count, (a, b), value, forced=forced))
        if count <= k_max:
            levels[count] = canonical_labels(assignment)

    return MergeTree(linkage, n, levels, records, meta=meta)


class DivisiveSpectralRegions(BaseEstimator, ClusterMixin):
    """Estimator wrapper around ``hssc``.

    After ``fit``, ``labels_`` holds the ``k_max``-level labels and
    ``tree_`` the full MergeTree (``tree_.labels_at(k)`` for coarser
    cuts). Accepts a Dataset or a feature array plus ``graph``.
    """

    def __init__(self, k_max: int = 2, delta: int = 1, sigma="median",
                 seed: int = 0, n_restarts: int = 10,
                 variance_target: float = 0.85, preprocess: bool = True,
                 graph=None):
        self.k_max = k_max
        self.delta = delta
        self.sigma = sigma
        self.seed = seed
        self.n_restarts = n_restarts
        self.variance_target = variance_target
        self.preprocess = preprocess
        self.graph = graph

    def fit(self, X, y=None):
        dataset = ensure_dataset(X, self.graph)
        if not self.preprocess:
            dataset = bypass_preprocessing(dataset)
        tree = hssc(dataset, self.k_max, delta=self.delta, sigma=self.sigma,
                    seed=self.seed, n_restarts=self.n_restarts,
                    variance_target=self.variance_target)
        self.n_features_in_ = dataset.features.n_features
        self.tree_ = tree
        self.levels_ = tree.levels
        self.labels_ = tree.labels_at(tree.k_max)
        self.sigma_ = tree.meta["sigma"]
        return self


class ConstrainedAgglomerative(BaseEstimator, ClusterMixin):
    """Estimator wrapper around ``agglomerative``.

    ``labels_`` holds the ``k_max``-level labels; ``tree_`` the full
    merge log; ``n_forced_merges_`` counts merges that had to ignore the
    spatial constraint because no eligible pair remained.
    """

    def __init__(self, k_max: int = 2, linkage: str = "ward", delta: int = 1,
                 sigma="median", variance_target: float = 0.85,
                 preprocess: bool = True, kernel_update: str = "recompute",
                 graph=None):
        self.k_max = k_max
        self.linkage = linkage
        self.delta = delta
        self.sigma = sigma
        self.variance_target = variance_target
        self.preprocess = preprocess
        self.kernel_update = kernel_update
        self.graph = graph

    def fit(self, X, y=None):
        dataset = ensure_dataset(X, self.graph)
        if not self.preprocess:
            dataset = bypass_preprocessing(dataset)
        tree = agglomerative(dataset, self.k_max, linkage=self.linkage,
                             delta=self.delta, sigma=self.sigma,
                             variance_target=self.variance_target,
                             kernel_update=self.kernel_update)
        self.n_features_in_ = dataset.features.n_features
        self.tree_ = tree
        self.levels_ = tree.levels
        self.labels_ = tree.labels_at(tree.k_max)
        self.n_forced_merges_ = sum(1 for r in tree.records if r.forced)
        return self
