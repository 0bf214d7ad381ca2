"""Samplers for the limit trees of rescaled cluster and component sizes.

Every node ``u`` of the limit tree ``Z`` has children given by the ranked
atoms of a Poisson measure with intensity ``Z_u a^-2 da``. The top ``k``
atoms of such a measure are exactly ``Z_u / Gamma_j`` where ``Gamma_j`` are
the arrival times of a unit Poisson process, so truncating to a finite
breadth does not bias the retained values.
"""

from __future__ import annotations

import math
from collections import deque

import numpy as np

from .indexed import IndexedTree, UIndex
from .rng import RngLike, as_generator, split

DEFAULT_DEPTH = 3
DEFAULT_BREADTH = 10


class RankingTieError(RuntimeError):
    """Two sibling values coincided in floating point."""


def _check_strict(values: np.ndarray):
    if values.size > 1 and not np.all(np.diff(values) < 0):
        raise RankingTieError("sibling values are not strictly decreasing")


def _check_shape(depth: int, breadth: int):
    if depth < 0:
        raise ValueError("depth must be >= 0")
    if breadth < 1:
        raise ValueError("breadth must be >= 1")


def prm_ranked_atoms(c: float, k: int, rng: RngLike) -> np.ndarray:
    """Largest ``k`` atoms of a Poisson measure with intensity ``c a^-2 da``."""
    if not c > 0:
        raise ValueError("mass must be positive")
    if k < 1:
        raise ValueError("k must be >= 1")
    gen = as_generator(rng)
    atoms = c / np.cumsum(gen.standard_exponential(k))
    _check_strict(atoms)
    return atoms


def largest_atoms(c: float, size: int, rng: RngLike) -> np.ndarray:
    """``size`` independent draws of the largest atom, ``c / Exp(1)``."""
    return c / as_generator(rng).standard_exponential(size)


def sample_Z(depth: int = DEFAULT_DEPTH, breadth: int = DEFAULT_BREADTH, rng: RngLike = None) -> IndexedTree:
    """Limit tree ``Z`` cut at ``depth`` levels with ``breadth`` children per node."""
    _check_shape(depth, breadth)
    gen = as_generator(rng)
    entries: dict[UIndex, float] = {(): 1.0}
    queue = deque([()]) if depth else deque()
    while queue:
        u = queue.popleft()
        atoms = prm_ranked_atoms(entries[u], breadth, gen)
        for j, a in enumerate(atoms.tolist(), start=1):
            entries[u + (j,)] = a
            if len(u) + 1 < depth:
                queue.append(u + (j,))
    return IndexedTree(entries, validate=False)


def sample_Z_with_times(
    depth: int = DEFAULT_DEPTH, breadth: int = DEFAULT_BREADTH, rng: RngLike = None
) -> IndexedTree:
    """``Z`` decorated with birth times ``z_u``, path sums of unit exponentials.

    The exponentials come from a stream independent of the one driving ``Z``.
    """
    z_stream, e_stream = split(rng, 2)
    tree = sample_Z(depth, breadth, z_stream)
    births: dict[UIndex, float] = {(): 0.0}
    for u in tree:
        if u:
            births[u] = births[u[:-1]] + float(e_stream.standard_exponential())
    return tree.map_values(lambda u, v: (v, births[u]))


def squeeze_out(decorated: IndexedTree, t: float) -> IndexedTree:
    """Delete entries born at or after ``t`` (with their subtrees) and relabel."""
    if not t > 0:
        raise ValueError("t must be positive")
    return decorated.prune(lambda u, v: v[1] < t)


def _truncated_children(mass: float, z: float, t: float, k: int, gen: np.random.Generator):
    window = 1.0 - math.exp(-(t - z))
    atoms = prm_ranked_atoms(mass * window, k, gen)
    r = -np.log1p(-gen.random(k) * window)
    return atoms, z + r


def sample_truncated(
    t: float, depth: int = DEFAULT_DEPTH, breadth: int = DEFAULT_BREADTH, rng: RngLike = None
) -> IndexedTree:
    """Decorated tree of the components born before ``t``.

    Children of ``u`` are the ranked atoms of a Poisson measure on
    ``(0, inf) x (0, t - z_u)`` with intensity ``Z_u a^-2 da e^-r dr``: sizes
    are ranked atoms of mass ``Z_u (1 - e^-(t - z_u))`` and each increment is
    an exponential conditioned to stay below ``t - z_u``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    _check_shape(depth, breadth)
    gen = as_generator(rng)
    entries: dict[UIndex, tuple[float, float]] = {(): (1.0, 0.0)}
    queue = deque([()]) if depth else deque()
    while queue:
        u = queue.popleft()
        mass, z = entries[u]
        atoms, births = _truncated_children(mass, z, t, breadth, gen)
        for j, (a, b) in enumerate(zip(atoms.tolist(), births.tolist()), start=1):
            entries[u + (j,)] = (a, b)
            if len(u) + 1 < depth:
                queue.append(u + (j,))
    return IndexedTree(entries, validate=False)


def sample_truncated_by_squeeze(
    t: float, depth: int = DEFAULT_DEPTH, breadth: int = DEFAULT_BREADTH, rng: RngLike = None
) -> IndexedTree:
    """Same law as :func:`sample_truncated`, by deleting late births from ``Z``.

    Each node draws untruncated children until ``breadth`` of them are born
    before ``t``, so the kept top ``breadth`` is exact.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    _check_shape(depth, breadth)
    z_stream, e_stream = split(rng, 2)
    entries: dict[UIndex, tuple[float, float]] = {(): (1.0, 0.0)}
    queue = deque([()]) if depth else deque()
    while queue:
        u = queue.popleft()
        mass, z = entries[u]
        gamma = 0.0
        j = 0
        while j < breadth:
            gamma += z_stream.standard_exponential()
            birth = z + e_stream.standard_exponential()
            if birth < t:
                j += 1
                entries[u + (j,)] = (mass / gamma, float(birth))
                if len(u) + 1 < depth:
                    queue.append(u + (j,))
    return IndexedTree(entries, validate=False)


def sample_G(
    t: float, depth: int = DEFAULT_DEPTH, breadth: int = DEFAULT_BREADTH, rng: RngLike = None
) -> IndexedTree:
    """Ranked tree of ``G_u = t^-|u| e^(z_u) Z_u`` over the truncated tree.

    Re-ranking by ``e^z Z`` can promote children beyond the first ``breadth``
    atoms, so each node draws atoms until no later atom can enter the top
    ``breadth``: an atom ``a`` has ``e^z a <= e^t a``.
    """
    if not t > 0:
        raise ValueError("t must be positive")
    _check_shape(depth, breadth)
    gen = as_generator(rng)
    # raw truncated values (Z, z) at the re-ranked addresses
    raw: dict[UIndex, tuple[float, float]] = {(): (1.0, 0.0)}
    queue = deque([()]) if depth else deque()
    while queue:
        u = queue.popleft()
        mass, z = raw[u]
        window = 1.0 - math.exp(-(t - z))
        cap = math.exp(t - z)
        k = max(2 * breadth, 8)
        gammas = np.cumsum(gen.standard_exponential(k))
        incr = -np.log1p(-gen.random(k) * window)
        while True:
            atoms = mass * window / gammas
            weight = np.exp(incr) * atoms
            kth = np.partition(weight, -breadth)[-breadth] if weight.size >= breadth else 0.0
            if cap * atoms[-1] <= kth:
                break
            gammas = np.concatenate([gammas, gammas[-1] + np.cumsum(gen.standard_exponential(k))])
            incr = np.concatenate([incr, -np.log1p(-gen.random(k) * window)])
            k *= 2
        top = np.argsort(-weight, kind="stable")[:breadth]
        _check_strict(weight[top])
        for j, i in enumerate(top.tolist(), start=1):
            raw[u + (j,)] = (float(atoms[i]), z + float(incr[i]))
            if len(u) + 1 < depth:
                queue.append(u + (j,))
    return IndexedTree(
        {u: t ** (-len(u)) * math.exp(z) * a for u, (a, z) in raw.items()}, validate=False
    )


def level_values(trees, u: UIndex, coord: int | None = None) -> np.ndarray:
    """Value at address ``u`` across a list of trees (0 when absent)."""
    out = np.empty(len(trees))
    for i, tree in enumerate(trees):
        v = tree.value(u, None)
        if v is None:
            out[i] = 0.0
        else:
            out[i] = v[coord] if coord is not None else v
    return out
