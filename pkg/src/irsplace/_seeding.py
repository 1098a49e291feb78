"""Seed derivation shared by the simulator, the rounding trials and the experiment runner."""

from __future__ import annotations

import numpy as np

_MASK = (1 << 64) - 1


def splitmix64(value: int) -> int:
    z = (value + 0x9E3779B97F4A7C15) & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def mix_seed(*parts: int) -> int:
    """Fold integers into one 64-bit seed: ``h = splitmix64(h ^ part)`` from ``h = 0``.

    External tools can replay any experiment row with this recipe.
    """
    h = 0
    for p in parts:
        h = splitmix64(h ^ (int(p) & _MASK))
    return h


def substream(seed: int, *keys: int) -> np.random.Generator:
    """Independent counter-based (Philox) generator for ``(seed, *keys)``."""
    ss = np.random.SeedSequence([int(seed) & _MASK, *(int(k) & _MASK for k in keys)])
    return np.random.Generator(np.random.Philox(ss))
