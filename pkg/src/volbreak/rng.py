"""Deterministic random-stream derivation.

All randomness in the package flows through Philox, a counter-based
generator, keyed from a master seed plus an integer path. Streams for
``(seed, *path)`` are independent and do not depend on scheduling, so
Monte Carlo runs are reproducible under any degree of parallelism.
"""

from __future__ import annotations

import numpy as np

__all__ = ["stream", "derive_seed"]


def stream(seed: int, *path: int) -> np.random.Generator:
    """Return an independent generator for the stream ``(seed, *path)``."""
    ss = np.random.SeedSequence((int(seed),) + tuple(int(p) for p in path))
    return np.random.Generator(np.random.Philox(ss))


def derive_seed(seed: int, *path: int) -> int:
    """Fold ``(seed, *path)`` into a single 64-bit sub-seed."""
    ss = np.random.SeedSequence((int(seed),) + tuple(int(p) for p in path))
    return int(ss.generate_state(1, np.uint64)[0])
