"""Deterministic random streams.

All randomness in the package flows through counter-based Philox generators.
Replicate/bootstrap/grid-cell streams derive their keys from a base seed and
the replicate index, so parallel and serial execution order cannot change any
result.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    """Stable 64-bit integer mixer (splitmix64 finalizer)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(seed: int, index: int) -> int:
    """Derive the stream seed for replicate ``index`` as seed XOR hash(index).

    The hash is splitmix64, not Python's salted ``hash``, so derived seeds are
    identical across processes and platforms.
    """
    return (int(seed) & _MASK64) ^ _splitmix64(int(index))


def generator(seed: int) -> np.random.Generator:
    """Counter-based generator for a given 64-bit seed."""
    return np.random.Generator(np.random.Philox(key=int(seed) & _MASK64))
