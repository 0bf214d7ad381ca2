"""Continuous-time destruction of a random recursive tree.

Each edge carries an independent exponential clock of rate ``1 / ln n`` and
is deleted when its clock rings. Removing an edge from a component detaches
the part below that edge; the detached part becomes the next child, in the
tree of components, of the component it was cut from.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .indexed import Forest, IndexedTree
from .percolation import MarkedTree
from .rng import RngLike, as_generator
from .trees import RootedTree

ComponentTree = IndexedTree
"""Indexed tree whose values are ``(size, birth_time)`` pairs."""


@dataclass(frozen=True, eq=False)
class DestructionRecord:
    """A tree with the removal time of every edge.

    ``removal_time[j]`` is the clock of edge ``j`` (entry 0 is ``inf``);
    ``removal_order`` lists edge labels by increasing removal time.
    """

    tree: RootedTree
    removal_time: np.ndarray
    removal_order: np.ndarray = field(init=False)

    def __post_init__(self):
        times = np.asarray(self.removal_time, dtype=np.float64)
        if times.shape != (self.tree.n_vertices,):
            raise ValueError("removal_time must have length n + 1")
        times = times.copy()
        times[0] = np.inf
        if np.any(np.isnan(times)) or np.any(times[1:] <= 0):
            raise ValueError("removal times must be positive")
        # equal times are ordered by edge label
        order = np.argsort(times[1:], kind="stable") + 1
        times.setflags(write=False)
        order.setflags(write=False)
        object.__setattr__(self, "removal_time", times)
        object.__setattr__(self, "removal_order", order)

    @classmethod
    def from_order(cls, tree: RootedTree, order) -> "DestructionRecord":
        """Record whose edge ``order[i]`` is removed at time ``i + 1``."""
        times = np.full(tree.n_vertices, np.inf)
        order = list(order)
        if sorted(order) != list(range(1, tree.n + 1)):
            raise ValueError("order must be a permutation of the edge labels")
        times[order] = np.arange(1, tree.n + 1, dtype=np.float64)
        return cls(tree, times)

    @property
    def n(self) -> int:
        return self.tree.n

    def marked_before(self, t: float) -> MarkedTree:
        """Percolation pattern formed by the edges removed before time ``t``."""
        p = math.exp(-t / math.log(self.n)) if self.n >= 2 else 1.0
        marked = self.removal_time < t
        marked[0] = False
        return MarkedTree(self.tree, marked, p)


def destroy(tree: RootedTree, rng: RngLike) -> DestructionRecord:
    """Attach i.i.d. exponential clocks of rate ``1 / ln n`` to the edges."""
    n = tree.n
    if n < 2:
        raise ValueError("destruction needs n >= 2 so that ln n > 0")
    gen = as_generator(rng)
    times = np.empty(n + 1)
    times[0] = np.inf
    while True:
        times[1:] = gen.exponential(math.log(n), size=n)
        # float collisions have probability ~n^2 2^-53; redraw if they happen
        if np.unique(times[1:]).size == n:
            return DestructionRecord(tree, times)


@dataclass
class ComponentForest:
    """Tree of components in array form.

    Node ``k`` is the component rooted at vertex ``k`` (cut off by edge ``k``,
    or the whole tree for ``k = 0``); ``forest.parent`` holds the component
    it was cut from, ``forest.ordinal`` its birth rank there.
    """

    size: np.ndarray
    birth: np.ndarray
    forest: Forest

    def values(self) -> list[tuple[int, float]]:
        return list(zip(self.size.tolist(), self.birth.tolist()))

    def to_indexed(self) -> ComponentTree:
        return self.forest.to_indexed(self.values())

    def first_generation(self) -> np.ndarray:
        """Node indices of generation 1 in birth order."""
        kids = np.flatnonzero(self.forest.parent == 0)
        return kids[np.argsort(self.birth[kids])]

    def ranked(self, rng: RngLike) -> Forest:
        """Children ranked by decreasing size (uniform tie-breaks)."""
        tiebreak = as_generator(rng).random(self.size.size)
        return self.forest.ranked(self.size.astype(np.float64), tiebreak)


def component_forest(record: DestructionRecord) -> ComponentForest:
    comp_parent, size, ordinal = _kernels.component_forest(record.tree.parent, record.removal_order)
    birth = record.removal_time.copy()
    birth[0] = 0.0
    return ComponentForest(size, birth, Forest(comp_parent, ordinal))


def tree_of_components(record: DestructionRecord) -> ComponentTree:
    """Sizes and birth times of all components, children in birth order."""
    return component_forest(record).to_indexed()


def rank_component_tree(ct: ComponentTree, rng: RngLike) -> ComponentTree:
    """Children of each node sorted by decreasing size, uniform tie-breaks."""
    return ct.ranked(rng, key=lambda v: v[0])


def truncate_components(ct: ComponentTree, t: float) -> ComponentTree:
    """Keep only components born strictly before ``t``."""
    if not t > 0:
        raise ValueError("t must be positive")
    return ct.prune(lambda u, v: v[1] < t)


def root_component_size(ct: ComponentTree, t: float = math.inf) -> int:
    """Size of the component of 0 at time ``t``."""
    total, _ = ct[()]
    return total - sum(size for size, birth in ct.child_values(()) if birth < t)


def percolation_time(n: int, p: float) -> float:
    """``-ln n * ln p``: stopping there leaves a percolation with parameter ``p``."""
    if n < 2:
        raise ValueError("need n >= 2")
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    return -math.log(n) * math.log(p)


# -- isolating the root -------------------------------------------------------


def isolate_root(tree: RootedTree, rng: RngLike) -> np.ndarray:
    """Sizes cut off from the root component, in order, until 0 is isolated.

    Each step removes a uniform edge of the current root component. Scanning
    a uniform permutation of all edges and skipping edges no longer attached
    to the root produces exactly this sequence.
    """
    if tree.n < 1:
        raise ValueError("need n >= 1")
    priority = np.empty(tree.n_vertices)
    priority[0] = np.inf
    priority[1:] = as_generator(rng).random(tree.n)
    order = np.argsort(priority[1:], kind="stable") + 1
    comp_parent, size, ordinal = _kernels.component_forest(tree.parent, order)
    first = np.flatnonzero(comp_parent == 0)
    return size[first[np.argsort(ordinal[first])]]


def isolate_root_size_chain(n: int, rng: RngLike) -> np.ndarray:
    """Cut sizes of root isolation on a fresh random tree, without the tree.

    From a root component with ``k`` edges the detached size is ``j`` with
    probability ``(k + 1) / (k j (j + 1))``; the remainder is again uniform.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    gen = as_generator(rng)
    chunk = int(2 * n / math.log(n + 1)) + 64
    pieces = []
    k = n
    while k > 0:
        u = gen.random(chunk)
        out = np.empty(chunk, dtype=np.int64)
        k, c = _kernels.conditioned_xi_chain(k, u, out)
        pieces.append(out[:c])
    return np.concatenate(pieces)


def xi_from_uniform(u):
    """``floor(1 / (1 - u))``: maps a uniform on [0, 1) to P(j) = 1 / (j (j + 1))."""
    return np.floor(1.0 / (1.0 - np.asarray(u, dtype=np.float64))).astype(np.int64)


def sample_xi(rng: RngLike, size=None):
    gen = as_generator(rng)
    xi = xi_from_uniform(gen.random(size))
    return int(xi) if size is None else xi


@dataclass(frozen=True)
class WalkRecord:
    """Root-isolation cut sizes coupled with an increasing random walk.

    ``xi`` holds the walk steps up to and including the first one that
    overshoots ``n``; ``partial_sums[k] = xi[0] + ... + xi[k - 1]``.
    """

    n: int
    xi: np.ndarray
    partial_sums: np.ndarray
    L_n: int
    cut_sizes: np.ndarray

    @property
    def X_n(self) -> int:
        return int(self.cut_sizes.size)

    def prefix_matches(self) -> bool:
        return bool(np.array_equal(self.cut_sizes[: self.L_n], self.xi[: self.L_n]))

    def undershoot(self) -> int:
        """``n - S_{L(n)}``."""
        return int(self.n - self.partial_sums[self.L_n])


def im_coupled_walk(n: int, rng: RngLike) -> WalkRecord:
    """Root isolation driven by i.i.d. steps until the walk passes ``n``.

    While ``S_k <= n`` the step ``xi_k`` is used as the ``k``-th cut: this is
    the conditional law given ``xi_k <= n - S_{k-1}`` edges left. After the
    first overshoot, cuts come from rejecting fresh steps larger than the
    number of remaining edges.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    gen = as_generator(rng)
    chunk = int(2 * n / math.log(n + 1)) + 64
    steps = []
    total = 0
    while True:
        xi = xi_from_uniform(gen.random(chunk))
        steps.append(xi)
        total += int(xi.sum())
        if total > n:
            break
    xi = np.concatenate(steps)
    sums = np.concatenate([[0], np.cumsum(xi)])
    L = int(np.searchsorted(sums, n, side="right")) - 1
    xi = xi[: L + 1]
    sums = sums[: L + 2]

    cuts = [xi[:L]]
    remaining = n - int(sums[L])
    while remaining > 0:
        m = 4 * remaining + 16
        out = np.empty(m, dtype=np.int64)
        remaining, c = _kernels.rejection_xi_chain(remaining, gen.random(m), out)
        cuts.append(out[:c])
    cut_sizes = np.concatenate(cuts)
    return WalkRecord(n, xi, sums, L, cut_sizes)


# -- cut-tree -----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class CutTree:
    """Binary tree of the vertex sets produced by successive edge removals.

    Nodes ``0..n`` are the singleton leaves; internal nodes are numbered
    ``n + 1 .. 2n`` and the root is ``2n`` (or 0 when ``n == 0``). The first
    child of an internal node is the side keeping the removed edge's inner
    endpoint, the second the detached side.
    """

    n: int
    left: np.ndarray
    right: np.ndarray
    edge: np.ndarray

    @property
    def root(self) -> int:
        return 2 * self.n

    def is_leaf(self, node: int) -> bool:
        return node <= self.n

    def children(self, node: int) -> tuple[int, ...]:
        return () if self.is_leaf(node) else (int(self.left[node]), int(self.right[node]))

    def leaves(self, node: int | None = None) -> list[int]:
        """Leaves below ``node`` from left to right."""
        stack = [self.root if node is None else node]
        out = []
        while stack:
            k = stack.pop()
            if self.is_leaf(k):
                out.append(k)
            else:
                stack.append(int(self.right[k]))
                stack.append(int(self.left[k]))
        return out

    def vertex_set(self, node: int) -> frozenset[int]:
        return frozenset(self.leaves(node))

    def branch_to(self, vertex: int) -> list[int]:
        """Nodes on the path from the root to the leaf ``vertex``."""
        up = np.full(2 * self.n + 1, -1, dtype=np.int64)
        internal = np.arange(self.n + 1, 2 * self.n + 1)
        up[self.left[internal]] = internal
        up[self.right[internal]] = internal
        path = [vertex]
        while up[path[-1]] >= 0:
            path.append(int(up[path[-1]]))
        return path[::-1]

    def to_nested(self, node: int | None = None):
        """``[vertices, [child, child]]`` with sorted vertex lists."""
        node = self.root if node is None else node
        if self.is_leaf(node):
            return [[node], []]
        return [sorted(self.vertex_set(node)), [self.to_nested(c) for c in self.children(node)]]

    def to_json(self) -> str:
        return json.dumps(self.to_nested())


def cut_tree(record: DestructionRecord) -> CutTree:
    left, right, edge = _kernels.cut_tree_merges(record.tree.parent, record.removal_order)
    return CutTree(record.n, left, right, edge)


# -- truncated components and percolation clusters ----------------------------


@dataclass(frozen=True)
class ClusterRank:
    root_vertex: int
    size: int
    rank: int
    generation: int


def rank_and_generation_clusters(
    record: DestructionRecord, t: float, rng: RngLike
) -> tuple[IndexedTree, list[ClusterRank]]:
    """Encode percolation clusters by the order in which edges were removed.

    Edges removed before ``t`` form the percolation pattern. Every component
    born before ``t`` has the root of exactly one cluster; cluster sizes are
    placed at the addresses of the size-ranked truncated component tree and
    then re-ranked by cluster size. The rank of a cluster is the level of
    its address, its generation the number of removed edges above it.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    gen = as_generator(rng)
    marked = record.marked_before(t)
    vertex, _, csize, cgen = _kernels.cluster_forest(record.tree.parent, marked.marked)

    comps = component_forest(record)
    # truncated components are rooted exactly at the cluster roots, so the
    # sibling sets of the size-ranked truncated tree are known; re-ranking
    # them by cluster size makes the component-size order irrelevant
    index = np.full(record.tree.n_vertices, -1, dtype=np.int64)
    index[vertex] = np.arange(vertex.size)
    parent = np.full(vertex.size, -1, dtype=np.int64)
    parent[1:] = index[comps.forest.parent[vertex[1:]]]
    ordinal = _kernels.rank_siblings(parent, csize.astype(np.float64), gen.random(vertex.size))
    frak = Forest(parent, ordinal)

    ranks = frak.depth_of()
    clusters = [
        ClusterRank(int(v), int(s), int(r), int(g))
        for v, s, r, g in zip(vertex, csize, ranks, cgen)
    ]
    return frak.to_indexed(csize.tolist()), clusters
