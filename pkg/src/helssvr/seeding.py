"""Deterministic random sources.

All randomness in the library flows through a counter-based Philox
generator keyed by integer seeds, so every training run, fold split, and
synthetic dataset is reproducible bit-for-bit from its seed alone.
"""

from __future__ import annotations

import numpy as np


def make_rng(*entropy: int) -> np.random.Generator:
    """Philox generator keyed by one or more integers."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(list(entropy))))


def child_seed(master: int, *indices: int) -> int:
    """Derived seed for an indexed work item (grid cell, fold, ...).

    Deterministic in (master, indices) and independent of the order in
    which work items are executed.
    """
    seq = np.random.SeedSequence([int(master), *[int(i) for i in indices]])
    return int(seq.generate_state(1, np.uint64)[0])


def sample_without_replacement(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
    """Draw ``k`` distinct indices from ``range(n)``, uniformly.

    Partial Fisher-Yates over an index buffer: only the first ``k``
    positions are shuffled.  The k uniform variates are drawn in one call
    and mapped to shrinking ranges, which keeps the draw cheap for small
    batches from large index sets.
    """
    if not 0 <= k <= n:
        raise ValueError(f"cannot draw {k} distinct indices from {n}")
    idx = np.arange(n)
    us = rng.random(k)
    for i in range(k):
        j = i + int(us[i] * (n - i))
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:k].copy()
