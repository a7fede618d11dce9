"""Deterministic random-number streams for the whole simulator.

Every random draw in an experiment flows from a single 64-bit seed through
a counter-based generator (Philox).  Each purpose (partitioning, weight
init, mini-batch shuffling, client sampling, failure simulation, ...) gets
its own stream, keyed by integer path components, so results do not depend
on the order in which the streams are consumed.
"""

from __future__ import annotations

import numpy as np

# Stream purposes.  The values are part of the determinism contract: changing
# them changes every seeded result.
SYNTH = 1
SPLIT = 2
PARTITION = 3
INIT = 4
BATCH = 5
SAMPLE = 6
FAILURE = 7


class SeedTree:
    """Family of independent generators derived from one experiment seed.

    ``generator(purpose, *path)`` returns a fresh ``np.random.Generator``
    whose state depends only on ``(seed, purpose, *path)``.  Calling it
    twice with the same path yields identical streams, and distinct paths
    yield statistically independent streams.
    """

    def __init__(self, seed: int):
        if not 0 <= seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self.seed = int(seed)

    def generator(self, purpose: int, *path: int) -> np.random.Generator:
        entropy = [self.seed, int(purpose), *(int(p) for p in path)]
        return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
