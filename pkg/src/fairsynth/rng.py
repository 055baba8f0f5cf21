"""Seed derivation and generator construction.

All randomness in the package flows through explicitly passed
``numpy.random.Generator`` objects; there is no global RNG state. A single
master seed deterministically fans out into sub-seeds through a fixed
counter scheme:

    sub_seed = first 64-bit word of
               SeedSequence(entropy=master, spawn_key=(purpose_id, index))

where ``purpose_id`` is the table below and ``index`` numbers repetitions
(epoch, repetition, ...). The scheme is stable across runs and platforms.
"""

from __future__ import annotations

import numpy as np

PURPOSES = {
    "fit": 1,
    "sample": 2,
    "split": 3,
    "rep": 4,
    "decode": 5,
    "proxy": 6,
    "init": 7,
    "logreg": 8,
    "surrogate": 9,
}


def derive_seed(master: int, purpose: str, index: int = 0) -> int:
    """Derive a 64-bit sub-seed from a master seed for one purpose/index."""
    if purpose not in PURPOSES:
        raise KeyError(f"unknown seed purpose {purpose!r}")
    ss = np.random.SeedSequence(entropy=master, spawn_key=(PURPOSES[purpose], index))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """PCG64 generator for an explicit integer seed."""
    return np.random.Generator(np.random.PCG64(seed))
