"""Seeded random streams.

A :class:`RngStream` is a recipe, not a state: every call to
:meth:`RngStream.generator` returns a fresh generator positioned at the start
of the stream. Operations that need randomness accept either a stream or an
already-advanced :class:`numpy.random.Generator`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """Reproducible PCG64 stream identified by ``(seed, stream_id)``.

    Distinct stream ids are mapped through :class:`numpy.random.SeedSequence`
    spawn keys, which gives statistically independent streams.
    """

    seed: int
    stream_id: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self):
        if not (0 <= self.seed <= _MASK64 and 0 <= self.stream_id <= _MASK64):
            raise ValueError("seed and stream_id must be 64-bit unsigned integers")

    def seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence(self.seed, spawn_key=(self.stream_id, *self.path))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(self.seed_sequence()))

    def substream(self, *keys: int) -> "RngStream":
        return RngStream(self.seed, self.stream_id, self.path + tuple(int(k) for k in keys))

    def replicate(self, index: int) -> "RngStream":
        """Stream for replicate ``index``: ``stream_id = base + index``."""
        return RngStream(self.seed, (self.stream_id + index) & _MASK64, self.path)


RngLike = Union[RngStream, np.random.Generator, int, None]


def as_generator(rng: RngLike) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngStream):
        return rng.generator()
    if rng is None or isinstance(rng, (int, np.integer)):
        return np.random.default_rng(rng)
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def split(rng: RngLike, k: int) -> list[np.random.Generator]:
    """``k`` independent generators derived from ``rng``."""
    if isinstance(rng, RngStream):
        return [rng.substream(i).generator() for i in range(k)]
    return as_generator(rng).spawn(k)
