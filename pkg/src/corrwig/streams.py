"""Deterministic random streams.

Every random quantity in this package is drawn from a Philox counter-based
generator whose 128-bit key encodes (master seed, replica index, diagonal
index).  Streams with distinct keys are statistically independent, and the
same key always reproduces the same draws, independent of evaluation order
or thread count.

Normal variates are produced by the Box-Muller transform on the Philox
uniforms rather than by numpy's default ziggurat, so the exact output
depends only on this module.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError

# Fixed default master seed so bare invocations are reproducible.
DEFAULT_SEED = 20770

_U32 = 1 << 32
_U64 = 1 << 64


def substream(seed: int, replica: int = 0, diagonal: int = 0) -> np.random.Generator:
    """Independent generator keyed by (seed, replica, diagonal).

    The Philox key is two 64-bit words: the master seed, and the replica
    and diagonal indices packed into the high and low halves of the second
    word.  Replica and diagonal must each fit in 32 bits.
    """
    if not 0 <= seed < _U64:
        raise ConfigurationError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if not 0 <= replica < _U32:
        raise ConfigurationError(f"replica index out of range: {replica}")
    if not 0 <= diagonal < _U32:
        raise ConfigurationError(f"diagonal index out of range: {diagonal}")
    key = np.array([seed, replica * _U32 + diagonal], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def standard_normals(rng: np.random.Generator, count: int) -> np.ndarray:
    """Draw `count` N(0,1) variates via Box-Muller."""
    if count < 0:
        raise ConfigurationError(f"count must be nonnegative, got {count}")
    if count == 0:
        return np.empty(0)
    half = (count + 1) // 2
    # 1 - U maps [0,1) to (0,1], keeping the logarithm finite.
    u1 = 1.0 - rng.random(half)
    u2 = rng.random(half)
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])
    return z[:count]
