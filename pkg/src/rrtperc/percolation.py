"""Bernoulli bond percolation on random recursive trees.

Removed edges are kept in place and *marked*; a cluster is a maximal subtree
without marked edges and is identified by its root vertex (0 or the outer
endpoint of a marked edge).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .indexed import Forest, IndexedTree
from .rng import RngLike, as_generator
from .trees import RootedTree


@dataclass(frozen=True, eq=False)
class MarkedTree:
    """A tree with the outcome of a percolation with retention probability ``p``.

    ``marked[j]`` tells whether edge ``j`` was removed; ``marked[0]`` is
    always False.
    """

    tree: RootedTree
    marked: np.ndarray
    p: float

    def __post_init__(self):
        marked = np.ascontiguousarray(self.marked, dtype=np.bool_)
        if marked.shape != (self.tree.n_vertices,) or marked[0]:
            raise ValueError("marked must have length n + 1 with marked[0] == False")
        if not 0.0 < self.p <= 1.0:
            raise ValueError(f"p must lie in (0, 1], got {self.p}")
        marked.setflags(write=False)
        object.__setattr__(self, "marked", marked)

    @classmethod
    def from_marks(cls, tree: RootedTree, marks, p: float = 1.0) -> "MarkedTree":
        """Build from an iterable of marked edge labels."""
        marked = np.zeros(tree.n_vertices, dtype=np.bool_)
        marks = list(marks)
        if any(not 1 <= j <= tree.n for j in marks):
            raise ValueError("edge labels must lie in 1..n")
        marked[marks] = True
        return cls(tree, marked, p)

    @property
    def marks(self) -> set[int]:
        return set(np.flatnonzero(self.marked).tolist())

    @property
    def n(self) -> int:
        return self.tree.n


@dataclass(frozen=True)
class ClusterInfo:
    root_vertex: int
    size: int
    generation: int
    members: frozenset[int]


def percolate(tree: RootedTree, p: float, rng: RngLike) -> MarkedTree:
    """Mark each edge independently with probability ``1 - p``."""
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    marked = np.zeros(tree.n_vertices, dtype=np.bool_)
    if tree.n:
        marked[1:] = as_generator(rng).random(tree.n) >= p
    return MarkedTree(tree, marked, p)


def supercritical_p(n: int, t: float) -> float:
    """``1 - t / ln n``."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0.0 < t < math.log(n):
        raise ValueError(f"need 0 < t < ln n = {math.log(n):.6g}, got t={t}")
    return 1.0 - t / math.log(n)


def cluster_roots(marked: MarkedTree) -> np.ndarray:
    """Root vertex of the cluster of every vertex."""
    return _kernels.cluster_roots(marked.tree.parent, marked.marked)


def generations(marked: MarkedTree) -> np.ndarray:
    """Number of marked edges on the path from 0 to each vertex."""
    return _kernels.marked_depths(marked.tree.parent, marked.marked)


def extract_clusters(marked: MarkedTree) -> list[ClusterInfo]:
    """All clusters, ordered by root vertex."""
    vertex, node_parent, size, gen = _kernels.cluster_forest(marked.tree.parent, marked.marked)
    roots = cluster_roots(marked)
    order = np.argsort(roots, kind="stable")
    bounds = np.searchsorted(roots[order], vertex)
    members = np.split(order, bounds[1:])
    return [
        ClusterInfo(int(v), int(s), int(g), frozenset(mem.tolist()))
        for v, s, g, mem in zip(vertex, size, gen, members)
    ]


@dataclass
class ClusterForest:
    """Clusters as an array forest, ranked by decreasing size.

    ``vertex[k]`` is the root vertex of cluster ``k``; cluster 0 holds
    vertex 0; children of a cluster are the clusters separated from it by a
    single marked edge.
    """

    vertex: np.ndarray
    size: np.ndarray
    generation: np.ndarray
    forest: Forest

    def value(self, u) -> int:
        k = self.forest.node(u)
        return int(self.size[k]) if k >= 0 else 0

    def largest_non_root(self) -> int:
        return int(self.size[1:].max()) if self.size.size > 1 else 0

    def to_indexed(self) -> IndexedTree:
        return self.forest.to_indexed(self.size.tolist())


def cluster_forest(marked: MarkedTree, rng: RngLike) -> ClusterForest:
    vertex, node_parent, size, gen = _kernels.cluster_forest(marked.tree.parent, marked.marked)
    tiebreak = as_generator(rng).random(vertex.size)
    ordinal = _kernels.rank_siblings(node_parent, size.astype(np.float64), tiebreak)
    return ClusterForest(vertex, size, gen, Forest(node_parent, ordinal))


def cluster_size_tree(marked: MarkedTree, rng: RngLike) -> IndexedTree:
    """Tree of cluster sizes, children ranked by decreasing size.

    Equal sizes are ordered uniformly at random using ``rng``.
    """
    return cluster_forest(marked, rng).to_indexed()


def subtree_size_tree(marked: MarkedTree, rng: RngLike) -> IndexedTree:
    """Sizes of the full subtrees hanging below marked edges.

    The node of a marked edge ``j`` stores the total number of descendants of
    ``j`` (marked edges included); its parent node is the nearest marked
    edge above ``j`` (or the root, storing ``n + 1``). Children are ranked by
    decreasing size with uniform tie-breaks.
    """
    vertex, node_parent, _, _ = _kernels.cluster_forest(marked.tree.parent, marked.marked)
    sizes = marked.tree.subtree_sizes()[vertex]
    tiebreak = as_generator(rng).random(vertex.size)
    ordinal = _kernels.rank_siblings(node_parent, sizes.astype(np.float64), tiebreak)
    return Forest(node_parent, ordinal).to_indexed(sizes.tolist())


def normalization(n: int, p: float, level: int) -> float:
    """Scale factor ``(1 - p)^(-level) * n^(-p)``."""
    if n < 2:
        raise ValueError("need n >= 2")
    if level > 0 and p >= 1.0:
        raise ValueError("p = 1 leaves no scale for generations >= 1")
    return math.exp(-p * math.log(n) - level * math.log1p(-p)) if level else math.exp(-p * math.log(n))


def normalize_tree(ct: IndexedTree, n: int, p: float) -> IndexedTree:
    """Entry at ``u`` multiplied by ``(1 - p)^(-|u|) n^(-p)``."""
    return ct.map_values(lambda u, v: v * normalization(n, p, len(u)))
