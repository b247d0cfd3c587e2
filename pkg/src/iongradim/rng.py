"""Counter-based deterministic random streams.

Every draw is a pure function of (seed, counter), so shots can be evaluated
in any order, or in parallel, with bit-identical results. The core is the
SplitMix64 sequence: for counter n,

    state(n)  = seed + (n + 1) * 0x9E3779B97F4A7C15   (mod 2^64)
    output(n) = mix(state(n))

where mix is the standard SplitMix64 finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

Counter 0 with seed 0 therefore reproduces the first output of the
canonical sequentially-seeded SplitMix64 stream, 0xE220A8397B1DCDAF, which
the test suite pins. Uniforms map the top 53 bits into (0, 1]; Gaussians
use the Box-Muller transform on two counters.
"""

from __future__ import annotations

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1


def _as_u64(x) -> np.ndarray:
    return np.asarray(x, dtype=np.uint64)


def splitmix64(seed: int, counter) -> np.ndarray:
    """Raw 64-bit output for the given counter(s). Vectorized over counter."""
    n = _as_u64(counter)
    with np.errstate(over="ignore"):   # mod-2^64 wraparound is the algorithm
        z = np.uint64(seed & _U64_MASK) + (n + np.uint64(1)) * GOLDEN
        z = z ^ (z >> np.uint64(30))
        z = z * _MIX1
        z = z ^ (z >> np.uint64(27))
        z = z * _MIX2
        z = z ^ (z >> np.uint64(31))
    return z


def uniform(seed: int, counter) -> np.ndarray:
    """Uniform draw(s) in (0, 1]: top 53 bits, offset to exclude exact zero."""
    bits = splitmix64(seed, counter) >> np.uint64(11)
    return (bits.astype(np.float64) + 1.0) * 2.0 ** -53


def gaussian(seed: int, counter_a, counter_b) -> np.ndarray:
    """Standard normal draw(s) via Box-Muller from two counter streams."""
    u1 = uniform(seed, counter_a)
    u2 = uniform(seed, counter_b)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def derive_seed(seed: int, index: int) -> int:
    """Independent sub-seed for arm/trial `index` of a master seed."""
    return int(splitmix64(seed, np.uint64(index)))
