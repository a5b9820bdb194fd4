"""Seeded, counter-based randomness.

Every random draw in the package goes through :func:`stream`, which derives an
independent Philox generator from ``(seed, *keys)``. Trial ``i`` of an
experiment uses ``stream(seed, ..., i)`` so results never depend on the order
in which trials are evaluated.

:func:`prf_bits` is a keyed pseudo-random function used for shared coins that
both protocol parties must read identically.
"""

from __future__ import annotations

import hashlib
from typing import Hashable

import numpy as np

_MASK64 = (1 << 64) - 1


def _key_words(key: Hashable) -> list[int]:
    if isinstance(key, (int, np.integer)) and not isinstance(key, bool):
        k = int(key)
        if 0 <= k <= _MASK64:
            return [k & 0xFFFFFFFF, k >> 32]
    digest = hashlib.blake2b(repr(key).encode(), digest_size=8).digest()
    v = int.from_bytes(digest, "little")
    return [v & 0xFFFFFFFF, v >> 32]


def _entropy(seed: int, keys: tuple) -> list[int]:
    words = [int(seed) & 0xFFFFFFFF, (int(seed) >> 32) & 0xFFFFFFFF]
    for key in keys:
        words.extend(_key_words(key))
    return words


def stream(seed: int, *keys: Hashable) -> np.random.Generator:
    """Independent generator for the draw addressed by ``(seed, *keys)``."""
    ss = np.random.SeedSequence(_entropy(seed, keys))
    return np.random.Generator(np.random.Philox(ss))


def prf_bits(seed: int, key: Hashable, nbits: int) -> int:
    """``nbits`` pseudo-random bits, as an int, addressed by ``(seed, key)``."""
    if nbits <= 0:
        return 0
    material = repr((int(seed), key)).encode()
    raw = hashlib.shake_256(material).digest((nbits + 7) // 8)
    return int.from_bytes(raw, "little") & ((1 << nbits) - 1)
