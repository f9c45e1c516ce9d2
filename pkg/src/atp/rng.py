"""Deterministic PRNG primitives for reproducible fixture generation.

splitmix64 seeds a xoshiro256** stream (Blackman & Vigna's public-domain
generators); Gaussian variates come from Box-Muller on that stream. Every
step is pinned down to the bit so an independent implementation can
reproduce fixture files byte for byte. numpy's generators are deliberately
not used here: their streams are not part of any cross-version contract.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = 0x9E3779B97F4A7C15

# float64-rounded 2*pi, the constant used by the Box-Muller step below
_TWO_PI = 6.283185307179586


def mix64(z: int) -> int:
    """splitmix64 finalizer: a 64-bit bijective scrambler."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    """Weyl-sequence generator used only to expand seeds into state."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        return mix64(self._state)


class Xoshiro256StarStar:
    """xoshiro256** with state expanded from a 64-bit seed via splitmix64."""

    def __init__(self, seed: int):
        sm = SplitMix64(seed)
        self._s = [sm.next_u64() for _ in range(4)]

    def next_u64(self) -> int:
        s = self._s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def next_float64(self) -> float:
        """Uniform in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * 2.0**-53


class GaussianStream:
    """Standard-normal stream via Box-Muller with spare caching.

    Normative draw rule, per pair: u1 = 1 - uniform() (in (0, 1], so the
    log is finite), u2 = uniform(); r = sqrt(-2*ln(u1)); emit r*cos(2*pi*u2)
    then r*sin(2*pi*u2). The spare persists across calls, so the mapping
    from seed to the n-th variate does not depend on how draws are batched.
    Scalar libm calls keep results identical across array layouts.
    """

    def __init__(self, rng: Xoshiro256StarStar):
        self._rng = rng
        self._spare: float | None = None

    def next(self) -> float:
        if self._spare is not None:
            z = self._spare
            self._spare = None
            return z
        u1 = 1.0 - self._rng.next_float64()
        u2 = self._rng.next_float64()
        r = math.sqrt(-2.0 * math.log(u1))
        self._spare = r * math.sin(_TWO_PI * u2)
        return r * math.cos(_TWO_PI * u2)

    def fill(self, n: int) -> np.ndarray:
        """Next n variates as a float64 array."""
        return np.array([self.next() for _ in range(n)], dtype=np.float64)


def stream_seed(seed: int, index: int) -> int:
    """Derive an independent per-stream seed from (seed, index).

    Used by the stability probe so trial i's noise depends only on the
    configured seed and i, never on execution order.
    """
    return mix64((seed + (index + 1) * _GOLDEN) & MASK64)
