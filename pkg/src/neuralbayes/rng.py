"""Seed-stream derivation.

Every random draw in the package comes from a Philox (counter-based)
generator keyed by ``(seed, purpose, index)``.  Streams for distinct
purposes or indices are independent, so record-level work can be
parallelised without changing the output.
"""

import zlib

import numpy as np


def purpose_code(purpose):
    """Stable 32-bit code for a purpose label."""
    return zlib.crc32(purpose.encode("utf-8"))


def stream_id(seed, purpose, index=0):
    return (int(seed), purpose_code(purpose), int(index))


def stream(seed, purpose="default", index=0):
    """Independent generator for ``(seed, purpose, index)``."""
    if isinstance(seed, np.random.Generator):
        raise TypeError("stream() needs an integer seed, got a Generator")
    if int(seed) < 0:
        raise ValueError("seeds must be non-negative")
    ss = np.random.SeedSequence(int(seed), spawn_key=(purpose_code(purpose), int(index)))
    return np.random.Generator(np.random.Philox(ss))


def as_generator(seed):
    """Accept an integer seed or an existing Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return stream(seed, "default", 0)
