"""Exact laws on small trees by enumeration, in rational arithmetic.

These are independent of the samplers: they only use the parent-array
enumeration of increasing trees and direct set computations.
"""

from __future__ import annotations

import itertools
from collections import defaultdict
from fractions import Fraction
from functools import lru_cache

from .trees import count_increasing_trees, enumerate_increasing_trees

Law = dict[tuple, Fraction]


def _clusters(parent: list[int], marks: frozenset[int]):
    """Cluster sizes and cluster-parent links, keyed by root vertex."""
    root = [0] * len(parent)
    size = defaultdict(int)
    up = {}
    size[0] = 1
    for j in range(1, len(parent)):
        if j in marks:
            root[j] = j
            up[j] = root[parent[j]]
        else:
            root[j] = root[parent[j]]
        size[root[j]] += 1
    kids = defaultdict(list)
    for j, r in up.items():
        kids[r].append(j)
    return size, kids


def _summary_law(size, kids) -> Law:
    """Law of ``(C_root, C_1, C_2, C_11)`` over uniform tie-breaks."""
    first = sorted((size[c] for c in kids[0]), reverse=True)
    c1 = first[0] if first else 0
    c2 = first[1] if len(first) > 1 else 0
    tops = [c for c in kids[0] if size[c] == c1] if first else [None]
    out: Law = defaultdict(Fraction)
    for c in tops:
        sub = max((size[d] for d in kids[c]), default=0) if c is not None else 0
        out[(size[0], c1, c2, sub)] += Fraction(1, len(tops))
    return out


def cluster_summary_law(n: int, p: Fraction) -> Law:
    """Exact law of ``(C_root, C_1, C_2, C_11)`` for percolation on ``T_n``.

    ``C_1, C_2`` are the two largest cluster sizes one marked edge away from
    the root cluster and ``C_11`` the largest below ``C_1`` (0 when absent).
    """
    p = Fraction(p)
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    law: Law = defaultdict(Fraction)
    tree_weight = Fraction(1, count_increasing_trees(n))
    for tree in enumerate_increasing_trees(n):
        parent = [-1] + tree.parents()
        for pattern in itertools.product((False, True), repeat=n):
            marks = frozenset(j + 1 for j, m in enumerate(pattern) if m)
            w = tree_weight * (1 - p) ** len(marks) * p ** (n - len(marks))
            if w == 0:
                continue
            size, kids = _clusters(parent, marks)
            for key, q in _summary_law(size, kids).items():
                law[key] += w * q
    return dict(law)


def marginal(law: Law, coords: tuple[int, ...]) -> Law:
    out: Law = defaultdict(Fraction)
    for key, q in law.items():
        out[tuple(key[i] for i in coords)] += q
    return dict(out)


def first_cut_law(n: int) -> dict[int, Fraction]:
    """Law of the number of vertices cut off by a uniform edge of ``T_n``."""
    if n < 1:
        raise ValueError("need n >= 1")
    law: dict[int, Fraction] = defaultdict(Fraction)
    w = Fraction(1, count_increasing_trees(n) * n)
    for tree in enumerate_increasing_trees(n):
        sizes = tree.subtree_sizes()
        for j in range(1, n + 1):
            law[int(sizes[j])] += w
    return dict(law)


def splitting_law(n: int, j: int) -> Fraction:
    """``(n + 1) / (n j (j + 1))`` for ``1 <= j <= n``."""
    if not 1 <= j <= n:
        return Fraction(0)
    return Fraction(n + 1, n * j * (j + 1))


@lru_cache(maxsize=None)
def expected_cuts(n: int) -> Fraction:
    """``E[X_n]`` by the recursion on the size of the first cut."""
    if n == 0:
        return Fraction(0)
    return 1 + sum(splitting_law(n, j) * expected_cuts(n - j) for j in range(1, n + 1))


def expected_cuts_by_enumeration(n: int) -> Fraction:
    """``E[X_n]`` by running root isolation over every tree and edge sequence."""

    def cuts(parent: list[int], alive: frozenset[int]) -> Fraction:
        # alive = edges still attached to the root component
        if not alive:
            return Fraction(0)
        total = Fraction(0)
        for j in alive:
            below = {j}
            for v in sorted(alive):
                if v > j and parent[v] in below:
                    below.add(v)
            total += cuts(parent, alive - below)
        return 1 + total / len(alive)

    w = Fraction(1, count_increasing_trees(n))
    return sum(
        (w * cuts([-1] + t.parents(), frozenset(range(1, n + 1))) for t in enumerate_increasing_trees(n)),
        Fraction(0),
    )
