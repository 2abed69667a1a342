"""Reproducible random streams built on the counter-based Philox generator.

A 64-bit master seed and an integer purpose tag select a base stream via
SeedSequence((seed, tag)); the stream for symbol l is that base stream
jumped l times (2^128 draws apart). Draws for a given (seed, tag, l) are
therefore identical whether symbols are generated serially, out of order,
or in parallel.
"""

from __future__ import annotations

import numpy as np

NOISE_TAG = 1
WAVEFORM_TAG = 2
TRIAL_TAG = 3


def symbol_stream(seed: int, tag: int, l: int) -> np.random.Generator:
    """Generator for symbol l of the (seed, tag) stream family."""
    base = np.random.Philox(np.random.SeedSequence((seed, tag)))
    return np.random.Generator(base.jumped(l) if l else base)


def trial_seed(seed: int, trial: int) -> int:
    """Derived 64-bit seed for an independent trial substream."""
    ss = np.random.SeedSequence((seed, TRIAL_TAG, trial))
    return int(ss.generate_state(1, np.uint64)[0])
