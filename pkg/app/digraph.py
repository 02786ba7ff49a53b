"""
Weighted directed communication graphs.

Edge (j, i) means i receives information from j; its weight is a_ij = weights[i-1, j-1].
Node ids are 1-based in every public function and 0-based in the weight matrix.
"""
import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

import numpy as np

from .exceptions import GraphValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Immutable adjacency A = [a_ij] with a_ij > 0 iff edge (j, i)"""

    n: int
    weights: np.ndarray

    def __post_init__(self):
        if self.n < 1:
            raise GraphValidationError(f"graph needs at least one node, got n={self.n}")
        w = np.array(self.weights, dtype=float)
        if w.shape != (self.n, self.n):
            raise GraphValidationError(f"adjacency must be {self.n}x{self.n}, got {w.shape}")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise GraphValidationError("adjacency weights must be finite and non-negative")
        if np.any(np.diag(w) != 0):
            raise GraphValidationError("adjacency diagonal must be zero (no self-loops)")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    def in_neighbors(self, i: int) -> tuple[int, ...]:
        """N_i: nodes j with an edge (j, i)"""
        row = self.weights[i - 1]
        return tuple(int(j) + 1 for j in np.flatnonzero(row > 0))

    def out_neighbors(self, j: int) -> tuple[int, ...]:
        col = self.weights[:, j - 1]
        return tuple(int(i) + 1 for i in np.flatnonzero(col > 0))

    def edges(self) -> list[tuple[int, int, float]]:
        """(j, i, a_ij) triples sorted by (i, j)"""
        rows, cols = np.nonzero(self.weights > 0)
        return [(int(j) + 1, int(i) + 1, float(self.weights[i, j])) for i, j in zip(rows, cols)]

    @property
    def degrees(self) -> np.ndarray:
        return self.weights.sum(axis=1)

    def without_edge(self, j: int, i: int) -> "DirectedGraph":
        w = self.weights.copy()
        w[i - 1, j - 1] = 0.0
        return DirectedGraph(self.n, w)

    def induced_subgraph(self, nodes: Iterable[int]) -> "DirectedGraph":
        """Subgraph on `nodes` (renumbered 1..k in the given order) with inherited weights"""
        idx = [k - 1 for k in nodes]
        if not idx:
            raise GraphValidationError("induced subgraph needs at least one node")
        return DirectedGraph(len(idx), self.weights[np.ix_(idx, idx)])

    @cached_property
    def root_analysis(self) -> "RootAnalysis":
        return root_analysis(self)


@dataclass(frozen=True)
class RootAnalysis:
    """Root / non-root partition and the induced root graph"""

    roots: tuple[int, ...]
    non_roots: tuple[int, ...]
    root_subgraph: DirectedGraph | None  # None when no root exists

    @property
    def n(self) -> int:
        return len(self.roots) + len(self.non_roots)

    @property
    def root_count(self) -> int:
        return len(self.roots)


def build_graph(n: int, edges: Iterable[tuple[int, int, float]]) -> DirectedGraph:
    """Construct from (j, i, w) triples: information flows j -> i with weight a_ij = w"""
    if n < 1:
        raise GraphValidationError(f"graph needs at least one node, got n={n}")
    weights = np.zeros((n, n), dtype=float)
    seen = set()
    for edge in edges:
        j, i, w = edge
        key = (int(j), int(i))
        if not (1 <= key[0] <= n and 1 <= key[1] <= n):
            raise GraphValidationError(f"node out of range 1..{n}", edge=key)
        if key[0] == key[1]:
            raise GraphValidationError("self-loop", edge=key)
        if not np.isfinite(w) or w <= 0:
            raise GraphValidationError(f"weight must be positive and finite, got {w}", edge=key)
        if key in seen:
            raise GraphValidationError("duplicate edge", edge=key)
        seen.add(key)
        weights[key[1] - 1, key[0] - 1] = float(w)
    return DirectedGraph(n, weights)


def degree_and_laplacian(g: DirectedGraph) -> tuple[np.ndarray, np.ndarray]:
    """D = diag(d_i), d_i = sum_j a_ij ; L = D - A"""
    D = np.diag(g.degrees)
    return D, D - g.weights


def reachable_set(g: DirectedGraph, i: int) -> frozenset[int]:
    """Nodes k reachable by a directed path i -> ... -> k, including i"""
    if not 1 <= i <= g.n:
        raise GraphValidationError(f"node {i} out of range 1..{g.n}")
    # adjacency[k, m] > 0 means m -> k, so successors of m are the rows of column m
    successors = g.weights.T > 0
    seen = {i - 1}
    queue = deque([i - 1])
    while queue:
        m = queue.popleft()
        for k in np.flatnonzero(successors[m]):
            k = int(k)
            if k not in seen:
                seen.add(k)
                queue.append(k)
    return frozenset(k + 1 for k in seen)


def root_analysis(g: DirectedGraph) -> RootAnalysis:
    roots = tuple(i for i in range(1, g.n + 1) if len(reachable_set(g, i)) == g.n)
    non_roots = tuple(i for i in range(1, g.n + 1) if i not in roots)
    sub = g.induced_subgraph(roots) if roots else None
    return RootAnalysis(roots=roots, non_roots=non_roots, root_subgraph=sub)


def is_quasi_strongly_connected(g: DirectedGraph) -> bool:
    return len(g.root_analysis.roots) > 0


def is_strongly_connected(g: DirectedGraph) -> bool:
    return len(g.root_analysis.roots) == g.n


def random_quasi_strongly_connected(
    rng: np.random.Generator,
    n: int,
    extra_edge_prob: float = 0.2,
    weight_range: tuple[float, float] = (0.5, 1.5),
) -> DirectedGraph:
    """Planted spanning arborescence from a random root plus independent extra edges"""
    order = rng.permutation(n) + 1
    low, high = weight_range
    edges = {}
    for pos in range(1, n):
        parent = int(order[rng.integers(pos)])
        edges[(parent, int(order[pos]))] = float(rng.uniform(low, high))
    for j in range(1, n + 1):
        for i in range(1, n + 1):
            if i != j and (j, i) not in edges and rng.random() < extra_edge_prob:
                edges[(j, i)] = float(rng.uniform(low, high))
    return build_graph(n, [(j, i, w) for (j, i), w in sorted(edges.items())])
