"""Random recursive trees stored as parent arrays."""

from __future__ import annotations

import itertools
import json
import math
import struct
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from . import _kernels
from .rng import RngLike, as_generator

MAX_ENUMERATION_N = 10
BINARY_MAGIC = b"RRT1"


@dataclass(frozen=True, eq=False)
class RootedTree:
    """Increasing tree on ``{0, ..., n}``.

    ``parent`` has length ``n + 1``; ``parent[0] == -1`` and
    ``parent[j] < j`` for every ``j >= 1``. The edge joining ``j`` to its
    parent carries the label ``j`` (its outer endpoint).
    """

    parent: np.ndarray

    def __post_init__(self):
        parent = np.ascontiguousarray(self.parent, dtype=np.int64)
        if parent.ndim != 1 or parent.size == 0 or parent[0] != -1:
            raise ValueError("parent array must be 1-d with parent[0] == -1")
        labels = np.arange(parent.size)
        if np.any(parent[1:] < 0) or np.any(parent[1:] >= labels[1:]):
            raise ValueError("not an increasing tree: need 0 <= parent[j] < j")
        parent.setflags(write=False)
        object.__setattr__(self, "parent", parent)

    @classmethod
    def from_parents(cls, parents: Iterable[int]) -> "RootedTree":
        """Build from ``[parent(1), ..., parent(n)]``."""
        return cls(np.concatenate([[-1], np.asarray(list(parents), dtype=np.int64)]))

    @property
    def n(self) -> int:
        """Number of edges."""
        return self.parent.size - 1

    @property
    def n_edges(self) -> int:
        return self.n

    @property
    def n_vertices(self) -> int:
        return self.parent.size

    def parents(self) -> list[int]:
        return self.parent[1:].tolist()

    def __eq__(self, other):
        if not isinstance(other, RootedTree):
            return NotImplemented
        return np.array_equal(self.parent, other.parent)

    def __hash__(self):
        return hash(self.parent.tobytes())

    def __repr__(self):
        return f"RootedTree(n={self.n}, parent={self.parents()})"

    def children(self) -> list[list[int]]:
        kids: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for j in range(1, self.n_vertices):
            kids[self.parent[j]].append(j)
        return kids

    def subtree_sizes(self) -> np.ndarray:
        return _kernels.subtree_sizes(self.parent)

    def depths(self) -> np.ndarray:
        return _kernels.depths(self.parent)

    def descendants(self, v: int) -> np.ndarray:
        """Sorted labels of ``v`` and all its descendants."""
        self._check_vertex(v)
        return np.flatnonzero(_kernels.descendant_mask(self.parent, v))

    def path_to_root(self, v: int) -> list[int]:
        self._check_vertex(v)
        path = [v]
        while v != 0:
            v = int(self.parent[v])
            path.append(v)
        return path

    def _check_vertex(self, v):
        if not 0 <= v <= self.n:
            raise IndexError(f"vertex {v} out of range 0..{self.n}")

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "parent": self.parents()})

    @classmethod
    def from_json(cls, text: str) -> "RootedTree":
        obj = json.loads(text)
        tree = cls.from_parents(obj["parent"])
        if tree.n != obj["n"]:
            raise ValueError(f"n={obj['n']} does not match {tree.n} parent entries")
        return tree

    def to_bytes(self) -> bytes:
        """``b"RRT1"`` followed by little-endian uint32 parents of ``1..n``."""
        return BINARY_MAGIC + self.parent[1:].astype("<u4").tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> "RootedTree":
        if data[:4] != BINARY_MAGIC or (len(data) - 4) % 4:
            raise ValueError("not an RRT1 binary tree")
        return cls.from_parents(np.frombuffer(data[4:], dtype="<u4").astype(np.int64))


def generate_rrt(n: int, rng: RngLike) -> RootedTree:
    """Uniform random recursive tree on ``{0, ..., n}``.

    Vertex ``j`` attaches to a uniform vertex of ``{0, ..., j - 1}``; every
    increasing tree then has probability ``1 / n!``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    gen = as_generator(rng)
    parent = np.empty(n + 1, dtype=np.int64)
    parent[0] = -1
    if n:
        parent[1:] = gen.integers(0, np.arange(1, n + 1))
    return RootedTree(parent)


def generate_rrt_batch(n: int, reps: int, rng: RngLike) -> np.ndarray:
    """``reps`` independent parent arrays stacked as rows of shape ``(reps, n + 1)``."""
    gen = as_generator(rng)
    parents = np.empty((reps, n + 1), dtype=np.int64)
    parents[:, 0] = -1
    for j in range(1, n + 1):
        parents[:, j] = gen.integers(0, j, size=reps)
    return parents


def enumerate_increasing_trees(n: int) -> list[RootedTree]:
    """All ``n!`` increasing trees on ``{0, ..., n}``."""
    if not 0 <= n <= MAX_ENUMERATION_N:
        raise ValueError(f"enumeration is limited to 0 <= n <= {MAX_ENUMERATION_N}")
    choices = [range(j) for j in range(1, n + 1)]
    return [RootedTree.from_parents(p) for p in itertools.product(*choices)]


def count_increasing_trees(n: int) -> int:
    return math.factorial(n)


def canonical_relabel(vertices: Iterable[int]) -> dict[int, int]:
    """Order-preserving bijection from ``vertices`` onto ``{0, ..., k - 1}``."""
    ordered = sorted(set(int(v) for v in vertices))
    if not ordered:
        raise ValueError("cannot relabel an empty vertex set")
    return {v: i for i, v in enumerate(ordered)}


def induced_tree(tree: RootedTree, vertices: Iterable[int]) -> RootedTree:
    """Canonically relabeled subtree spanned by a connected vertex set.

    The set must contain its own minimum as root and the parent of every
    other member.
    """
    relabel = canonical_relabel(vertices)
    ordered = sorted(relabel)
    try:
        parents = [relabel[int(tree.parent[v])] for v in ordered[1:]]
    except KeyError as exc:
        raise ValueError("vertex set does not span a subtree") from exc
    return RootedTree.from_parents(parents)


def extract_subtree(tree: RootedTree, v: int) -> RootedTree:
    """Full descendant subtree of ``v``, canonically relabeled."""
    return induced_tree(tree, tree.descendants(v))


def split_at_edge(tree: RootedTree, j: int) -> tuple[RootedTree, RootedTree]:
    """Remove edge ``j``; return (root side, detached side), both relabeled."""
    if not 1 <= j <= tree.n:
        raise IndexError(f"edge {j} out of range 1..{tree.n}")
    below = _kernels.descendant_mask(tree.parent, j)
    return induced_tree(tree, np.flatnonzero(~below)), induced_tree(tree, np.flatnonzero(below))
