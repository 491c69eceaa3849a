"""Counter-based random streams.

Every random draw in the package comes from a generator keyed by an explicit
tuple of integers, e.g. ``(seed, episode, t, TRANSITION)``. Nothing holds hidden
RNG state, so replications can be run in any order or in parallel and still
produce identical output.
"""

from __future__ import annotations

import numpy as np

# stream tags
ENV = 1
TRANSITION = 2
PLANNER = 3
POLICY = 4
IBE = 5
REWARD = 6


def rng_stream(*keys: int) -> np.random.Generator:
    """Philox generator keyed by the nonnegative integers ``keys``."""
    if not keys:
        raise ValueError("rng_stream needs at least one key")
    ints = [int(k) for k in keys]
    if any(k < 0 for k in ints):
        raise ValueError(f"stream keys must be nonnegative, got {keys}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(ints)))


def as_generator(rng) -> np.random.Generator:
    """Accept a Generator or an integer seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    return rng_stream(int(rng))
