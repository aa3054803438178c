"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by
``(master_seed, stream_index, *subpath)``. Philox is a counter-based bit
generator, so a stream is fully determined by its key and the number of
draws taken from it, which makes sample-parallel loops reproducible
regardless of how the samples are scheduled.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np

DEFAULT_SEED_ENV = "REGDIGRAPH_SEED"


def default_seed() -> int:
    return int(os.environ.get(DEFAULT_SEED_ENV, "20170101"))


@dataclass(frozen=True)
class RngStream:
    master_seed: int
    stream_index: int = 0
    subpath: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.stream_index < 0:
            raise ValueError("stream_index must be nonnegative")

    def generator(self) -> np.random.Generator:
        """A fresh generator positioned at draw counter zero."""
        ss = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_index, *self.subpath)
        )
        return np.random.Generator(np.random.Philox(ss))

    def child(self, index: int) -> "RngStream":
        return RngStream(self.master_seed, self.stream_index, (*self.subpath, int(index)))

    def children(self, count: int) -> list["RngStream"]:
        return [self.child(i) for i in range(count)]


def as_stream(rng) -> RngStream:
    """Coerce ``None``, an int seed or a stream into a :class:`RngStream`."""
    if isinstance(rng, RngStream):
        return rng
    if rng is None:
        return RngStream(default_seed())
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng))
    raise TypeError(f"cannot interpret {type(rng).__name__} as a random stream")


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return as_stream(rng).generator()
