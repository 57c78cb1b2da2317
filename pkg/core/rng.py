"""
Random Streams Module

Value-typed, splittable random streams. A stream is identified by a master
seed and a stream id; equal pairs always reproduce the same sequence.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import DomainError

UINT64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class RngStream:
    """Deterministic random stream keyed by (master_seed, stream_id)."""

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not 0 <= int(value) <= UINT64_MAX:
                raise DomainError(f"{name} must be an unsigned 64-bit integer, got {value}")
            object.__setattr__(self, name, int(value))

    def _seed_sequence(self) -> np.random.SeedSequence:
        return np.random.SeedSequence([self.master_seed, self.stream_id])

    def generator(self) -> np.random.Generator:
        """Fresh numpy Generator positioned at the start of this stream."""
        return np.random.default_rng(self._seed_sequence())

    def derived_seed(self) -> int:
        """A 64-bit seed derived from this stream, usable as a new master seed."""
        return int(self._seed_sequence().generate_state(1, dtype=np.uint64)[0])

    def spawn(self, index: int) -> "RngStream":
        """
        Child stream number ``index``.

        Children depend only on (parent, index), never on how many siblings
        were used or in which order.
        """
        return RngStream(self.derived_seed(), int(index))
