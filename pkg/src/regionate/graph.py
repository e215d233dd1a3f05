"""Must-link constraint graphs and the kernels derived from them.

The constraint graph is an undirected, unweighted graph over the spatial
units; an edge marks two units as spatially adjacent (a must-link pair).
Kernels turn that hard adjacency into a soft neighborhood weighting that
can be combined with a feature-similarity matrix.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import RegionateError


class ConstraintGraph:
    """Undirected graph of must-link adjacencies over ``n`` vertices.

    Self-loops are rejected; duplicate and reversed edges collapse to a
    single undirected edge.
    """

    def __init__(self, n: int, edges) -> None:
        if n < 1:
            raise ValueError(f"vertex count must be positive, got {n}")
        self.n = int(n)
        normalized = set()
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
            if u == v:
                raise ValueError(f"self-loop on vertex {u} is not allowed")
            normalized.add((min(u, v), max(u, v)))
        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(normalized))
        self._neighbors: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            self._neighbors[u].append(v)
            self._neighbors[v].append(u)
        for adj in self._neighbors:
            adj.sort()

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> list[int]:
        return self._neighbors[v]

    def degrees(self) -> np.ndarray:
        return np.array([len(adj) for adj in self._neighbors], dtype=int)

    def adjacency_matrix(self) -> np.ndarray:
        """Dense 0/1 symmetric adjacency with zero diagonal."""
        c = np.zeros((self.n, self.n))
        for u, v in self.edges:
            c[u, v] = 1.0
            c[v, u] = 1.0
        return c

    def bfs_hops(self, source: int, max_depth: int | None = None) -> np.ndarray:
        """Hop distance from ``source`` to every vertex; -1 if unreachable
        (or beyond ``max_depth``)."""
        dist = np.full(self.n, -1, dtype=int)
        dist[source] = 0
        queue = deque([source])
        while queue:
            u = queue.popleft()
            if max_depth is not None and dist[u] >= max_depth:
                continue
            for w in self._neighbors[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    def bfs_hops_multi(self, sources) -> np.ndarray:
        """Hop distance from the nearest of ``sources`` to every vertex;
        -1 if unreachable."""
        dist = np.full(self.n, -1, dtype=int)
        queue = deque()
        for s in sources:
            s = int(s)
            if dist[s] < 0:
                dist[s] = 0
                queue.append(s)
        while queue:
            u = queue.popleft()
            for w in self._neighbors[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    queue.append(w)
        return dist

    def components(self, subset=None) -> list[list[int]]:
        """Connected components of the subgraph induced by ``subset``
        (all vertices when omitted), each as a sorted vertex list, ordered
        by smallest member."""
        if subset is None:
            members = range(self.n)
        else:
            members = sorted(int(v) for v in subset)
            for v in members:
                if not 0 <= v < self.n:
                    raise ValueError(f"vertex {v} out of range")
        in_subset = np.zeros(self.n, dtype=bool)
        in_subset[list(members)] = True
        seen = np.zeros(self.n, dtype=bool)
        out: list[list[int]] = []
        for start in members:
            if seen[start]:
                continue
            comp = []
            queue = deque([start])
            seen[start] = True
            while queue:
                u = queue.popleft()
                comp.append(u)
                for w in self._neighbors[u]:
                    if in_subset[w] and not seen[w]:
                        seen[w] = True
                        queue.append(w)
            out.append(sorted(comp))
        return out

    def is_connected(self) -> bool:
        return len(self.components()) == 1

    def diameter(self) -> int:
        """Largest hop distance over all vertex pairs; requires a connected
        graph."""
        diam = 0
        for v in range(self.n):
            dist = self.bfs_hops(v)
            if (dist < 0).any():
                k = len(self.components())
                raise RegionateError(
                    f"graph is disconnected ({k} components); diameter undefined"
                )
            diam = max(diam, int(dist.max()))
        return diam


@dataclass(frozen=True)
class ConstraintKernel:
    """A symmetric nonnegative weighting derived from a constraint graph.

    ``kind`` is one of ``linear``, ``exponential``, ``truncated``,
    ``binarized``; ``delta`` is the hop radius for the truncated forms
    (``None`` otherwise).
    """

    kind: str
    delta: int | None
    matrix: np.ndarray


def linear_kernel(graph: ConstraintGraph) -> ConstraintKernel:
    """The raw adjacency matrix used as a kernel."""
    return ConstraintKernel("linear", None, graph.adjacency_matrix())


def truncated_exponential_kernel(graph: ConstraintGraph, delta: int) -> ConstraintKernel:
    """Finite diffusion kernel: sum of adjacency powers m = 0..delta, each
    divided by m!.

    Computed by repeated multiplication with a running factorial divisor.
    All delta + 1 terms are summed so that an entry is positive exactly
    when the pair is within delta hops (the binarized kernel's support).
    """
    delta = _check_delta(delta)
    c = graph.adjacency_matrix()
    total = np.eye(graph.n)
    term = np.eye(graph.n)
    for m in range(1, delta + 1):
        term = term @ c / m
        total += term
    total = (total + total.T) / 2.0  # kill 1-ulp drift from iterated matmul
    return ConstraintKernel("truncated", delta, total)


def binarized_kernel(graph: ConstraintGraph, delta: int) -> ConstraintKernel:
    """0/1 kernel marking vertex pairs within ``delta`` hops of each other.

    Equivalent to binarizing the truncated power sum, but computed by a
    depth-limited BFS from each vertex. The diagonal is all ones (every
    vertex is within zero hops of itself).
    """
    delta = _check_delta(delta)
    s = np.zeros((graph.n, graph.n))
    for v in range(graph.n):
        dist = graph.bfs_hops(v, max_depth=delta)
        s[v, dist >= 0] = 1.0
    return ConstraintKernel("binarized", delta, s)


def exponential_kernel(graph: ConstraintGraph, tolerance: float = 1e-12) -> ConstraintKernel:
    """Matrix exponential of the adjacency, summed term by term until the
    next term's largest entry falls below ``tolerance``."""
    if tolerance <= 0:
        raise ValueError(f"tolerance must be positive, got {tolerance}")
    c = graph.adjacency_matrix()
    total = np.eye(graph.n)
    term = np.eye(graph.n)
    m = 0
    while True:
        m += 1
        term = term @ c / m
        if term.max() < tolerance:
            break
        total += term
    total = (total + total.T) / 2.0  # kill 1-ulp drift from iterated matmul
    return ConstraintKernel("exponential", None, total)


def _check_delta(delta) -> int:
    if delta != int(delta) or delta < 0:
        raise ValueError(f"delta must be a nonnegative integer, got {delta!r}")
    return int(delta)
