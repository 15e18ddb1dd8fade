# src/run_seed.py
"""
Per-run seed derivation.

Run i of a simulation seeded with master_seed uses the (i+1)-th output of a
SplitMix64 stream started at master_seed:

    state = (master_seed + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2**64
    seed = z ^ (z >> 31)

The increment is odd and the finaliser is a bijection on 64-bit words, so
distinct run indices below 2**64 never share a seed.
"""
from __future__ import annotations
from typing import Union

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _check_master(master_seed: int) -> int:
    master_seed = int(master_seed)
    if not (0 <= master_seed <= MASK64):
        raise ValueError(f"master seed must be an unsigned 64-bit integer, got {master_seed}")
    return master_seed


def mix64(state: int) -> int:
    z = state & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_run_seed(master_seed: int, run_index: int) -> int:
    master_seed = _check_master(master_seed)
    if run_index < 0:
        raise ValueError(f"run index must be >= 0, got {run_index}")
    return mix64(master_seed + (run_index + 1) * GOLDEN_GAMMA)


def derive_run_seeds(master_seed: int, run_indices: Union[range, np.ndarray]) -> np.ndarray:
    """Vectorised derive_run_seed; uint64 arithmetic wraps modulo 2**64."""
    master = np.uint64(_check_master(master_seed))
    idx = np.asarray(run_indices, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = master + (idx + np.uint64(1)) * np.uint64(GOLDEN_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))
