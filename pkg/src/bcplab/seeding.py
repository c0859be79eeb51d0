"""Deterministic seed derivation shared by samplers and the batch harness.

Trial ``i`` of a run seeded with ``seed`` uses ``splitmix64(seed + i)``.
The mixer is the standard SplitMix64 finalizer, reproducible across
languages and platforms; reports echo this rule so external tooling can
replay individual trials.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1

_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

SEED_RULE = "trial_seed = splitmix64(seed + trial_index) mod 2**64"


def splitmix64(value: int) -> int:
    """One SplitMix64 step: add the golden gamma, then finalize."""
    z = (value + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, index: int) -> int:
    """Seed for an indexed substream (trial, block, restart...)."""
    return splitmix64((seed + index) & MASK64)
