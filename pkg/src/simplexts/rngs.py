"""Seed handling shared by every Monte Carlo routine.

All parallel work derives child streams with ``SeedSequence.spawn`` so that
results depend only on the master seed, never on scheduling.
"""

from __future__ import annotations

import numpy as np


def seed_sequence(rng=None) -> np.random.SeedSequence:
    """Coerce an int, ``None``, ``SeedSequence`` or ``Generator`` to a ``SeedSequence``.

    A ``Generator`` is consumed (one 63-bit draw) to seed the sequence.
    """
    if isinstance(rng, np.random.SeedSequence):
        return rng
    if isinstance(rng, np.random.Generator):
        return np.random.SeedSequence(int(rng.integers(0, 2 ** 63)))
    return np.random.SeedSequence(rng)


def spawn_generators(rng, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in seed_sequence(rng).spawn(count)]
