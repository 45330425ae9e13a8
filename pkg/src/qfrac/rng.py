"""Counter-based random substreams.

Every draw is a pure function of ``(seed, stream, index)``, so a run produces
the same bits no matter how its shots are split between workers.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15

QUANTUM_STREAM = 1
CLASSICAL_STREAM = 2

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64(z: int) -> int:
    """SplitMix64 finalizer on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64_array(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps silently, which is exactly what we want.
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, stream: int) -> int:
    return mix64(seed ^ mix64(stream * GOLDEN_GAMMA))


def derive_seed(seed: int, tag: int) -> int:
    """A new 64-bit seed, statistically unrelated to ``seed``."""
    return mix64(mix64(seed) ^ (tag * GOLDEN_GAMMA & MASK64))


def word(seed: int, stream: int, index: int) -> int:
    """The 64-bit word for one shot index (scalar reference path)."""
    base = stream_key(seed, stream)
    return mix64(base + ((index + 1) * GOLDEN_GAMMA & MASK64))


def words(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    """Words for indices ``start .. start+count-1`` as a uint64 array."""
    base = np.uint64(stream_key(seed, stream))
    idx = np.arange(start + 1, start + count + 1, dtype=np.uint64)
    return _mix64_array(base + idx * np.uint64(GOLDEN_GAMMA))


def to_unit(w):
    """Map 64-bit words to doubles in [0, 1) using the top 53 bits."""
    if isinstance(w, np.ndarray):
        return (w >> np.uint64(11)).astype(np.float64) * 2.0**-53
    return (w >> 11) * 2.0**-53


def uniforms(seed: int, stream: int, start: int, count: int) -> np.ndarray:
    return to_unit(words(seed, stream, start, count))


def uniform(seed: int, stream: int, index: int) -> float:
    return to_unit(word(seed, stream, index))


def top_bits(w, width: int):
    """Uniform integer in ``[0, 2**width)`` from the high bits of a word."""
    if isinstance(w, np.ndarray):
        return w >> np.uint64(64 - width)
    return w >> (64 - width)
