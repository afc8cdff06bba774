"""Seedable parallel random-number substreams.

Replications of a simulation draw from substreams keyed by
(master seed, replication index), so results are bit-for-bit identical
no matter how the replications are scheduled across workers.
"""

from __future__ import annotations

import numpy as np


def master_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


def substream(seed: int, *indices: int) -> np.random.Generator:
    """Independent generator for one replication (or nested task) of a run."""
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(indices))
    return np.random.Generator(np.random.Philox(ss))
