"""Processes indexed by the universal tree of finite integer sequences.

An address ``u`` is a tuple of positive integers; ``()`` is the root and
``u + (j,)`` is the ``j``-th child of ``u``. Absent addresses carry the value 0.
"""

from __future__ import annotations

import csv
import io
import json
from collections.abc import Mapping
from dataclasses import dataclass
from typing import Any, Callable, Iterator, Sequence

import numpy as np

from . import _kernels
from .rng import RngLike, as_generator

UIndex = tuple[int, ...]


def format_path(u: UIndex) -> str:
    return ".".join(str(j) for j in u)


def parse_path(text: str) -> UIndex:
    if text == "":
        return ()
    u = tuple(int(part) for part in text.split("."))
    if any(j < 1 for j in u):
        raise ValueError(f"address entries must be >= 1: {text!r}")
    return u


def address_order(u: UIndex):
    return (len(u), u)


class IndexedTree(Mapping):
    """Finite, prefix-closed map from addresses to values.

    Children of every node occupy ordinals ``1..l`` without gaps. Values may
    be numbers or tuples; for tuples the first coordinate is the size used by
    ranking and validation.
    """

    def __init__(self, entries: Mapping[UIndex, Any] | None = None, validate: bool = True):
        self._entries: dict[UIndex, Any] = {}
        for u, value in sorted((entries or {}).items(), key=lambda kv: address_order(kv[0])):
            self._entries[tuple(int(j) for j in u)] = value
        if validate:
            self.validate()

    def __getitem__(self, u: UIndex):
        return self._entries[tuple(u)]

    def __iter__(self) -> Iterator[UIndex]:
        return iter(self._entries)

    def __len__(self) -> int:
        return len(self._entries)

    def __eq__(self, other):
        if isinstance(other, IndexedTree):
            return self._entries == other._entries
        return NotImplemented

    def __repr__(self):
        body = ", ".join(f"{format_path(u)!r}: {v!r}" for u, v in list(self.items())[:8])
        more = ", ..." if len(self) > 8 else ""
        return f"IndexedTree({{{body}{more}}})"

    def value(self, u: UIndex, default=0):
        return self._entries.get(tuple(u), default)

    def children(self, u: UIndex = ()) -> list[UIndex]:
        kids = []
        j = 1
        while (child := tuple(u) + (j,)) in self._entries:
            kids.append(child)
            j += 1
        return kids

    def child_values(self, u: UIndex = ()) -> list:
        return [self._entries[c] for c in self.children(u)]

    def level(self, k: int) -> dict[UIndex, Any]:
        return {u: v for u, v in self._entries.items() if len(u) == k}

    @property
    def depth(self) -> int:
        return max((len(u) for u in self._entries), default=-1)

    def validate(self):
        for u, value in self._entries.items():
            if any(j < 1 for j in u):
                raise ValueError(f"address {u} has an entry < 1")
            if _size(value) <= 0:
                raise ValueError(f"stored values must be positive, got {value!r} at {u}")
            if u:
                if u[:-1] not in self._entries:
                    raise ValueError(f"address {u} present but parent {u[:-1]} absent")
                if u[-1] > 1 and u[:-1] + (u[-1] - 1,) not in self._entries:
                    raise ValueError(f"gap before child {u}")

    def map_values(self, fn: Callable[[UIndex, Any], Any]) -> "IndexedTree":
        return IndexedTree({u: fn(u, v) for u, v in self._entries.items()}, validate=False)

    def prune(self, keep: Callable[[UIndex, Any], bool]) -> "IndexedTree":
        """Drop nodes failing ``keep`` (with their subtrees) and close the gaps.

        Surviving siblings keep their relative order.
        """
        new_address: dict[UIndex, UIndex] = {}
        counters: dict[UIndex, int] = {}
        out: dict[UIndex, Any] = {}
        for u, value in self._entries.items():
            if u:
                parent = new_address.get(u[:-1])
                if parent is None or not keep(u, value):
                    continue
                counters[parent] = counters.get(parent, 0) + 1
                new = parent + (counters[parent],)
            else:
                if not keep(u, value):
                    return IndexedTree({}, validate=False)
                new = ()
            new_address[u] = new
            out[new] = value
        return IndexedTree(out, validate=False)

    def ranked(self, rng: RngLike, key: Callable[[Any], float] | None = None) -> "IndexedTree":
        """Children of each node sorted by decreasing ``key``, uniform tie-break.

        The parent-child relation is preserved: the subtree below a node moves
        with it.
        """
        forest, values = Forest.from_indexed(self)
        keys = np.array([float(key(v) if key else _size(v)) for v in values])
        tiebreak = as_generator(rng).random(len(values))
        return forest.ranked(keys, tiebreak).to_indexed(values)

    def total(self) -> float:
        return sum(_size(v) for v in self._entries.values())

    def to_json(self) -> str:
        return json.dumps({format_path(u): _jsonable(v) for u, v in self._entries.items()})

    @classmethod
    def from_json(cls, text: str) -> "IndexedTree":
        obj = json.loads(text)
        return cls({parse_path(k): tuple(v) if isinstance(v, list) else v for k, v in obj.items()})

    def to_csv(self, columns: Sequence[str] = ("value",)) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["path", "level", *columns])
        for u, value in self._entries.items():
            row = list(value) if isinstance(value, tuple) else [value]
            writer.writerow([format_path(u), len(u), *(_csv_cell(x) for x in row)])
        return buf.getvalue()


def _size(value) -> float:
    return value[0] if isinstance(value, tuple) else value


def _jsonable(value):
    if isinstance(value, tuple):
        return [_jsonable(x) for x in value]
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        return float(value)
    return value


def _csv_cell(x):
    return repr(float(x)) if isinstance(x, (float, np.floating)) else x


@dataclass
class Forest:
    """Array form of a single-rooted indexed tree.

    Node 0 is the root and every node's parent has a smaller index.
    ``ordinal[k]`` is the child number of node ``k`` under its parent.
    """

    parent: np.ndarray
    ordinal: np.ndarray

    @classmethod
    def from_indexed(cls, tree: IndexedTree) -> tuple["Forest", list]:
        addresses = sorted(tree, key=address_order)
        index = {u: k for k, u in enumerate(addresses)}
        parent = np.array([index[u[:-1]] if u else -1 for u in addresses], dtype=np.int64)
        ordinal = np.array([u[-1] if u else 0 for u in addresses], dtype=np.int64)
        return cls(parent, ordinal), [tree[u] for u in addresses]

    def __len__(self):
        return self.parent.size

    def ranked(self, key: np.ndarray, tiebreak: np.ndarray) -> "Forest":
        key = np.asarray(key, dtype=np.float64)
        tiebreak = np.asarray(tiebreak, dtype=np.float64)
        return Forest(self.parent, _kernels.rank_siblings(self.parent, key, tiebreak))

    def addresses(self) -> list[UIndex]:
        out: list[UIndex] = [()] * len(self)
        parent = self.parent.tolist()
        ordinal = self.ordinal.tolist()
        for k in range(1, len(out)):
            out[k] = out[parent[k]] + (ordinal[k],)
        return out

    def node(self, u: UIndex) -> int:
        """Index of the node at address ``u``, or -1."""
        k = 0
        for j in u:
            k = _kernels.find_child(self.parent, self.ordinal, k, j)
            if k < 0:
                return -1
        return k

    def depth_of(self) -> np.ndarray:
        return _kernels.depths(self.parent) if len(self) else np.zeros(0, dtype=np.int64)

    def to_indexed(self, values: Sequence) -> IndexedTree:
        return IndexedTree(dict(zip(self.addresses(), values)), validate=False)
