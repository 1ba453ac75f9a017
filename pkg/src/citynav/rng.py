"""Seeded random streams: splitmix64 key derivation feeding stdlib Mersenne Twister.

Every stage of generation draws from its own named stream so stages stay
independently reproducible: reordering or skipping one stage never shifts the
draws of another.
"""

from __future__ import annotations

import random

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 step; returns the mixed 64-bit output for `state + gamma`."""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(root_seed: int, *labels) -> int:
    """Derive a 64-bit stream seed from a root seed and a label path.

    Labels may be strings or integers; strings hash via their UTF-8 bytes so the
    derivation is stable across processes and platforms.
    """
    state = root_seed & _MASK64
    for label in labels:
        if isinstance(label, str):
            for b in label.encode("utf-8"):
                state = splitmix64(state ^ b)
        elif isinstance(label, int):
            state = splitmix64(state ^ (label & _MASK64))
        else:
            raise TypeError(f"stream label must be str or int, got {type(label)}")
        state = splitmix64(state)
    return state


def stream(root_seed: int, *labels) -> random.Random:
    """A `random.Random` seeded from the derived stream key."""
    return random.Random(derive_seed(root_seed, *labels))
