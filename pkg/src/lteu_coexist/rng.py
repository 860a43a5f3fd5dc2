"""Seeded random streams keyed by (seed, label)."""

import zlib

import numpy as np


def stream(seed: int, label: str, *extra: int) -> np.random.Generator:
    """Independent generator for a call site.

    The same ``(seed, label, *extra)`` always yields the same stream; distinct
    labels give statistically independent streams.
    """
    key = [int(seed) & 0xFFFFFFFFFFFFFFFF, zlib.crc32(label.encode("utf-8"))]
    key.extend(int(e) for e in extra)
    return np.random.default_rng(np.random.SeedSequence(key))


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) entries."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)
