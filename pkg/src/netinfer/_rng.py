"""Deterministic random-stream plumbing shared by samplers and resampling loops."""

from __future__ import annotations

import numpy as np


def edge_weight_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Return (edge_stream, weight_stream) generators for one sampler call.

    Both streams are Philox counter streams keyed by the same seed; the weight
    stream is jumped far ahead so edge-support draws are identical whether or
    not weights are requested.
    """
    root = np.random.SeedSequence(seed)
    edge = np.random.Generator(np.random.Philox(root))
    weight = np.random.Generator(np.random.Philox(root).jumped(1))
    return edge, weight


def child_seed(seed: int, *path: int) -> int:
    """Derive a stable child seed for substream `path` (bootstrap index, side, ...)."""
    ss = np.random.SeedSequence(seed, spawn_key=tuple(int(p) for p in path))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
