"""Deterministic RNG stream derivation.

Every stochastic component (replication r, tree b, fold shuffle, ...) gets its
own independent stream derived from the master seed plus a key path, so results
are reproducible for any execution order or worker count.
"""
from __future__ import annotations

import zlib

import numpy as np


def _key_to_ints(key) -> list[int]:
    out = []
    for part in key:
        if isinstance(part, str):
            out.append(zlib.crc32(part.encode("utf-8")))
        elif isinstance(part, (int, np.integer)):
            out.append(int(part) & 0xFFFFFFFF)
        else:
            raise TypeError(f"stream key parts must be str or int, got {type(part)!r}")
    return out


def seed_seq(master_seed: int, *key) -> np.random.SeedSequence:
    """SeedSequence for the stream identified by (master_seed, *key)."""
    return np.random.SeedSequence([int(master_seed)] + _key_to_ints(key))


def rng_for(master_seed: int, *key) -> np.random.Generator:
    """Independent Generator for the stream identified by (master_seed, *key)."""
    return np.random.default_rng(seed_seq(master_seed, *key))


def uint64_for(master_seed: int, *key) -> int:
    """A single 64-bit stream seed, used to key counter-based kernels."""
    return int(seed_seq(master_seed, *key).generate_state(1, np.uint64)[0])
