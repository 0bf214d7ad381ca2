"""Yule process with neutral mutations.

The genealogy of a unit-rate Yule process stopped when it reaches ``n + 1``
individuals is a random recursive tree. Each newborn is a mutant with
probability ``1 - p`` and founds a new type; the ``j``-th mutant born inside
type ``u`` founds type ``u + (j,)``. Types are exactly the percolation
clusters of the genealogical tree with marks on the mutants' edges.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .indexed import Forest, IndexedTree, UIndex
from .percolation import MarkedTree
from .rng import RngLike, as_generator
from .trees import RootedTree


@dataclass(frozen=True, eq=False)
class MutationGenealogy:
    """Yule genealogy at the instant ``rho_n`` the population reaches ``n + 1``.

    ``type_sizes`` is indexed in birth order of the types (not ranked);
    ``type_birth[u]`` is the birth time of the founding mutant of ``u``.
    """

    tree: RootedTree
    mutant: np.ndarray
    birth_times: np.ndarray
    type_sizes: IndexedTree
    type_birth: dict[UIndex, float]
    p: float

    @property
    def rho_n(self) -> float:
        return float(self.birth_times[-1])

    @property
    def n(self) -> int:
        return self.tree.n

    def marked_tree(self) -> MarkedTree:
        return MarkedTree(self.tree, self.mutant, self.p)

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "parent": self.tree.parents(),
                "marks": np.flatnonzero(self.mutant).tolist(),
                "p": self.p,
                "birth_times": self.birth_times.tolist(),
                "rho_n": self.rho_n,
            }
        )


@dataclass(frozen=True)
class MartingalePath:
    """``W(t) = exp(-t) Z(t)`` just after each birth event."""

    times: np.ndarray
    values: np.ndarray

    def sup_sq_deviation(self, target: float, t: float) -> float:
        """``sup_{t <= s <= last birth} |W(s) - target|^2``.

        Between births ``W`` decays monotonically, so the supremum over each
        piece is attained at one of its two ends.
        """
        times, values = self.times, self.values
        pop = np.arange(1, times.size + 1, dtype=np.float64)
        # value at the start of each piece (just after a birth, or at t)
        start_t = np.maximum(times[:-1], t)
        end_t = times[1:]
        live = end_t > t
        start = pop[:-1][live] * np.exp(-start_t[live])
        end = pop[:-1][live] * np.exp(-end_t[live])
        last = values[-1] if times[-1] >= t else pop[-1] * math.exp(-t)
        candidates = np.concatenate([start, end, [last]])
        return float(np.max((candidates - target) ** 2))


def simulate_yule_mutations(n: int, p: float, rng: RngLike) -> MutationGenealogy:
    """Simulate the genealogy of ``n + 1`` individuals with mutation rate ``1 - p``.

    The jump chain picks a uniform parent among the current individuals; the
    waiting time after the ``j``-th individual is born is exponential with
    rate ``j``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if not 0.0 < p <= 1.0:
        raise ValueError(f"p must lie in (0, 1], got {p}")
    gen = as_generator(rng)
    parent = np.empty(n + 1, dtype=np.int64)
    parent[0] = -1
    mutant = np.zeros(n + 1, dtype=np.bool_)
    births = np.zeros(n + 1)
    if n:
        rates = np.arange(1, n + 1, dtype=np.float64)
        parent[1:] = gen.integers(0, np.arange(1, n + 1))
        mutant[1:] = gen.random(n) >= p
        births[1:] = np.cumsum(gen.standard_exponential(n) / rates)
    tree = RootedTree(parent)

    _, type_parent, founder, size = _kernels.type_forest(parent, mutant)
    forest = Forest(type_parent, _kernels.birth_ordinals(type_parent))
    addresses = forest.addresses()
    type_sizes = IndexedTree(dict(zip(addresses, size.tolist())), validate=False)
    type_birth = dict(zip(addresses, births[founder].tolist()))
    return MutationGenealogy(tree, mutant, births, type_sizes, type_birth, p)


def martingale_terminal_proxy(g: MutationGenealogy) -> float:
    """``exp(-rho_n) (n + 1)``, the observable stand-in for ``W(infinity)``."""
    if g.n < 1:
        raise ValueError("need n >= 1")
    return math.exp(-g.rho_n) * (g.n + 1)


def martingale_path(g: MutationGenealogy) -> MartingalePath:
    return martingale_path_from_births(g.birth_times.copy())


def geometric_yule_marginal(p: float, u: float, k: int) -> float:
    """P(size = k) at time ``u`` for a rate-``p`` Yule process from one individual."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if u < 0:
        raise ValueError("u must be >= 0")
    q = math.exp(-p * u)
    return q * (1.0 - q) ** (k - 1)


def yule_population(horizon: float, rate: float, size: int, rng: RngLike) -> np.ndarray:
    """Population at ``horizon`` of ``size`` independent rate-``rate`` Yule processes."""
    gen = as_generator(rng)
    pop = np.ones(size, dtype=np.int64)
    clock = np.zeros(size)
    alive = np.arange(size)
    while alive.size:
        clock[alive] += gen.standard_exponential(alive.size) / (rate * pop[alive])
        grew = clock[alive] <= horizon
        pop[alive[grew]] += 1
        alive = alive[grew]
    return pop


def yule_birth_times(n: int, rng: RngLike) -> np.ndarray:
    """Birth times of individuals ``0..n`` (individual 0 at time 0)."""
    gen = as_generator(rng)
    births = np.zeros(n + 1)
    births[1:] = np.cumsum(gen.standard_exponential(n) / np.arange(1, n + 1, dtype=np.float64))
    return births


def martingale_path_from_births(births: np.ndarray) -> MartingalePath:
    pop = np.arange(1, births.size + 1, dtype=np.float64)
    return MartingalePath(births, pop * np.exp(-births))


def rho_n_samples(n: int, reps: int, rng: RngLike) -> np.ndarray:
    """``reps`` draws of the time the Yule process reaches ``n + 1``."""
    gen = as_generator(rng)
    rates = np.arange(1, n + 1, dtype=np.float64)
    return np.array([np.sum(gen.standard_exponential(n) / rates) for _ in range(reps)])
