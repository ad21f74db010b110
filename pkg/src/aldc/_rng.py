"""Seeded random streams.

Every randomized operation draws from numpy's PCG64 bit generator, keyed
by a ``SeedSequence(entropy=seed, spawn_key=key)``.  Distinct keys give
statistically independent streams, so a stream for (direction 3) or
(certificate node 17, size 40) is reproducible no matter in which order
the streams are consumed.
"""

from __future__ import annotations

import numpy as np


def stream(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
