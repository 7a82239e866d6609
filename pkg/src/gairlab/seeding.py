"""Deterministic, name-keyed random streams.

All stochastic components draw from a :class:`SeedBank`. Each stream is keyed
by a string name and derived from the master seed with ``SeedSequence``, so

* the same (master seed, name) pair always yields the same stream, and
* adding a new named stream (e.g. enabling a plugin) never perturbs the
  draws of existing streams.

The second property is what makes "enabling a disabled feature changes
nothing" guarantees testable at the bit level.
"""

from __future__ import annotations

import zlib

import numpy as np


def _key_to_int(key: str) -> int:
    # crc32 is stable across platforms and Python versions (unlike hash()).
    return zlib.crc32(key.encode("utf-8"))


class SeedBank:
    """Factory for named, independent ``np.random.Generator`` streams."""

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed)
        self._streams: dict[str, np.random.Generator] = {}

    def seed_for(self, name: str) -> int:
        """A 63-bit integer seed derived from (master, name)."""
        ss = np.random.SeedSequence([self.master_seed, _key_to_int(name)])
        return int(ss.generate_state(1, dtype=np.uint64)[0] >> 1)

    def generator(self, name: str) -> np.random.Generator:
        """The persistent stream for ``name`` (created on first use)."""
        if name not in self._streams:
            ss = np.random.SeedSequence([self.master_seed, _key_to_int(name)])
            self._streams[name] = np.random.Generator(np.random.PCG64(ss))
        return self._streams[name]

    def fresh(self, name: str, index: int) -> np.random.Generator:
        """A one-shot stream for (name, index), e.g. per-episode resets."""
        ss = np.random.SeedSequence([self.master_seed, _key_to_int(name), int(index)])
        return np.random.Generator(np.random.PCG64(ss))
