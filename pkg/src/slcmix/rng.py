"""Counter-based random substreams.

Every draw in the package comes from ``substream(seed, *key)``: a
``numpy.random.SeedSequence`` with the master seed as entropy and the key
as spawn key.  Distinct keys give statistically independent streams, so
results do not depend on the order or process in which tasks run.
"""

from __future__ import annotations

from typing import Sequence, Union

import numpy as np

Seed = Union[int, Sequence[int]]


def substream(seed: Seed, *key: int) -> np.random.Generator:
    entropy = [int(s) for s in seed] if isinstance(seed, (list, tuple)) else int(seed)
    return np.random.default_rng(np.random.SeedSequence(entropy, spawn_key=tuple(int(k) for k in key)))


def child_seed(seed: Seed, *key: int) -> list[int]:
    """Seed for a nested task: the parent seed with the key appended."""
    base = [int(s) for s in seed] if isinstance(seed, (list, tuple)) else [int(seed)]
    return base + [int(k) for k in key]
