"""Deterministic random-stream derivation.

Every stochastic routine in the package receives an integer seed and derives
independent child streams through ``SeedSequence`` spawn keys, so results are
bit-identical no matter how the work is scheduled.
"""

from __future__ import annotations

import numpy as np


def substream(seed: int, *key: int) -> np.random.Generator:
    """Generator for the child stream addressed by ``key`` under ``seed``."""
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    )


def child_seed(seed: int, *key: int) -> int:
    """A derived integer seed, for passing down to seed-taking APIs."""
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return int(ss.generate_state(1, np.uint64)[0])
