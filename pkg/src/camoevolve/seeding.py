"""Deterministic RNG derivation.

All randomness in the toolkit flows through ``derive_rng`` so that any
(sub)stream is a pure function of a tuple of non-negative integer keys.
Independent streams can then be drawn in any order (or in parallel) without
changing results.
"""

from __future__ import annotations

import hashlib

import numpy as np


def derive_rng(*keys: int) -> np.random.Generator:
    """Return a Generator keyed by the given non-negative integers."""
    entropy = [int(k) for k in keys]
    if any(k < 0 for k in entropy):
        raise ValueError(f"seed keys must be non-negative, got {entropy}")
    return np.random.default_rng(np.random.SeedSequence(entropy))


def derive_seed(*keys: int) -> int:
    """Collapse a key tuple into a single reproducible 64-bit seed."""
    entropy = [int(k) for k in keys]
    if any(k < 0 for k in entropy):
        raise ValueError(f"seed keys must be non-negative, got {entropy}")
    state = np.random.SeedSequence(entropy).generate_state(2, np.uint32)
    return int(state[0]) << 32 | int(state[1])


def content_key(data: bytes) -> int:
    """Hash raw bytes into a 64-bit key usable with derive_rng."""
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")
