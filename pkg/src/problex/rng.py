"""Seeded random streams.

Every run derives its randomness from one 64-bit seed through named
substreams, so each component (model init, pseudo-item generation, the
random baseline) is reproducible in isolation.
"""

from __future__ import annotations

import numpy as np

_SUBSTREAMS = {
    "init": 0,
    "pseudo-gen": 1,
    "random-baseline": 2,
}


def substream(seed: int, name: str) -> np.random.Generator:
    """Generator for one named substream of the run-level seed."""
    try:
        stream_id = _SUBSTREAMS[name]
    except KeyError:
        raise ValueError(f"unknown substream {name!r}; known: {sorted(_SUBSTREAMS)}") from None
    entropy = (int(seed) & 0xFFFFFFFFFFFFFFFF, stream_id)
    return np.random.default_rng(np.random.SeedSequence(entropy))
