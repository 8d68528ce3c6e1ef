"""Deterministic RNG streams derived from one master seed.

Every stage or operation that needs randomness asks for a stream by label,
so runs are reproducible and independent of evaluation order or thread
count. Labels in use:

    synthesize   corpus generator
    folds        cross-validation fold assignment
    sampler      class-imbalance resampling (per fold: suffixed "/fold<i>")
    forest       random-forest bootstrap/feature draws
    stepwise     one-shot upsampling inside stepwise selection
"""

from __future__ import annotations

import hashlib

import numpy as np


def _label_entropy(label: str) -> int:
    return int.from_bytes(hashlib.sha256(label.encode("utf-8")).digest()[:8], "big")


def seed_sequence(seed: int, label: str) -> np.random.SeedSequence:
    """SeedSequence for (master seed, label); stable across runs and platforms."""
    return np.random.SeedSequence([int(seed), _label_entropy(label)])


def rng_for(seed: int, label: str) -> np.random.Generator:
    """A fresh generator for the given master seed and stage label."""
    return np.random.default_rng(seed_sequence(seed, label))


def child_seed(seed: int, label: str) -> int:
    """A derived 64-bit integer seed for handing to a sub-operation."""
    return int(seed_sequence(seed, label).generate_state(1, dtype=np.uint64)[0])
