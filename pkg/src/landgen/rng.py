"""Seedable PCG32 generator with vectorized block sampling.

Every random draw in the package flows through this module so that datasets,
checkpoints, and reports are bit-reproducible for a given master seed and do
not depend on numpy's generator internals.

Algorithm: PCG XSH-RR 64/32. The state transition is the 64-bit LCG

    state <- state * 6364136223846793005 + inc  (mod 2^64)

with ``inc = 2*stream + 1``; distinct streams are independent sequences.
The 32-bit output applies the xorshift-high/random-rotate permutation to the
pre-advance state. Derived draws are defined exactly:

* u64:     two consecutive u32 outputs, first is the high word.
* uniform: ``(u64 >> 11) * 2^-53`` in [0, 1).
* normal:  Box-Muller on pairs ``(u1, u2)`` where ``u1 = ((u64 >> 11)+1) * 2^-53``
  is in (0, 1]; each call to :meth:`Rng.normals` consumes whole pairs and
  discards the spare sine value when the requested count is odd.
* poisson: Knuth's product-of-uniforms method (intended for small means).
"""

from __future__ import annotations

import math

import numpy as np

PCG_MULT = 6364136223846793005
_MASK64 = (1 << 64) - 1
_U64_MULT = np.uint64(PCG_MULT)
_TWO53_INV = 2.0**-53

# Reserved stream offsets for deriving purpose-specific generators from one
# master seed. Per-sample synthesis streams start at SAMPLE_STREAM_BASE + id.
STREAM_SPLIT = 1
STREAM_VGAE_INIT = 2
STREAM_VGAE_TRAIN = 3
STREAM_CVAE_INIT = 4
STREAM_CVAE_TRAIN = 5
STREAM_EVAL = 6
STREAM_STUDY = 7
SAMPLE_STREAM_BASE = 1 << 20


class Rng:
    """PCG32 generator over one (seed, stream) sequence."""

    __slots__ = ("_state", "_inc")

    def __init__(self, seed: int, stream: int = 0):
        self._inc = ((int(stream) << 1) | 1) & _MASK64
        self._state = 0
        self._step()
        self._state = (self._state + int(seed)) & _MASK64
        self._step()

    def _step(self) -> None:
        self._state = (self._state * PCG_MULT + self._inc) & _MASK64

    def next_u32(self) -> int:
        old = self._state
        self._step()
        xorshifted = (((old >> 18) ^ old) >> 27) & 0xFFFFFFFF
        rot = old >> 59
        return ((xorshifted >> rot) | (xorshifted << ((-rot) & 31))) & 0xFFFFFFFF

    def _state_block(self, count: int) -> np.ndarray:
        """Consecutive pre-advance states, vectorized via the LCG closed form.

        state_k = a^k * s0 + inc * (a^(k-1) + ... + 1)  (mod 2^64)
        """
        base = np.full(count, _U64_MULT)
        base[0] = np.uint64(1)
        powers = np.cumprod(base)  # a^0 .. a^(count-1), wrapping mod 2^64
        geom = np.zeros(count, dtype=np.uint64)
        if count > 1:
            geom[1:] = np.cumsum(powers)[:-1]
        states = powers * np.uint64(self._state) + geom * np.uint64(self._inc)
        last = int(states[-1])
        self._state = (last * PCG_MULT + self._inc) & _MASK64
        return states

    def u32_block(self, count: int) -> np.ndarray:
        if count <= 0:
            return np.empty(0, dtype=np.uint32)
        old = self._state_block(count)
        xorshifted = (((old >> np.uint64(18)) ^ old) >> np.uint64(27)).astype(np.uint32)
        rot = (old >> np.uint64(59)).astype(np.uint32)
        return (xorshifted >> rot) | (xorshifted << ((np.uint32(32) - rot) & np.uint32(31)))

    def u64_block(self, count: int) -> np.ndarray:
        raw = self.u32_block(2 * count)
        hi = raw[0::2].astype(np.uint64)
        lo = raw[1::2].astype(np.uint64)
        return (hi << np.uint64(32)) | lo

    def uniform_block(self, count: int) -> np.ndarray:
        """Doubles in [0, 1)."""
        return (self.u64_block(count) >> np.uint64(11)).astype(np.float64) * _TWO53_INV

    def _positive_uniform_block(self, count: int) -> np.ndarray:
        """Doubles in (0, 1], safe to pass to log."""
        mant = (self.u64_block(count) >> np.uint64(11)).astype(np.float64)
        return (mant + 1.0) * _TWO53_INV

    def uniform(self, low: float = 0.0, high: float = 1.0) -> float:
        return low + (high - low) * float(self.uniform_block(1)[0])

    def normals(self, count: int, size: tuple[int, ...] | None = None) -> np.ndarray:
        """Standard-normal draws via Box-Muller."""
        if count <= 0:
            return np.empty(0, dtype=np.float64)
        pairs = (count + 1) // 2
        raw = self.u64_block(2 * pairs)
        mant = (raw >> np.uint64(11)).astype(np.float64)
        u1 = (mant[0::2] + 1.0) * _TWO53_INV
        u2 = mant[1::2] * _TWO53_INV
        radius = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * math.pi) * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = radius * np.cos(theta)
        out[1::2] = radius * np.sin(theta)
        out = out[:count]
        return out.reshape(size) if size is not None else out

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def poisson(self, lam: np.ndarray) -> np.ndarray:
        """Poisson draws, one per entry of ``lam``; expected rounds ~ max(lam)."""
        lam = np.asarray(lam, dtype=np.float64)
        if np.any(lam < 0.0):
            raise ValueError("poisson rate must be non-negative")
        flat = lam.reshape(-1)
        limit = np.exp(-flat)
        product = np.ones_like(flat)
        counts = np.zeros(flat.shape, dtype=np.int64)
        active = np.flatnonzero(product > limit)
        while active.size:
            u = self.uniform_block(active.size)
            product[active] *= u
            counts[active] += 1
            active = active[product[active] > limit[active]]
        return (counts - 1).clip(min=0).reshape(lam.shape)

    def randint_below(self, n: int) -> int:
        """Integer in [0, n); modulo bias is below n / 2^64."""
        if n <= 0:
            raise ValueError("n must be positive")
        return int(self.u64_block(1)[0] % np.uint64(n))

    def shuffle(self, values: np.ndarray) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(values) - 1, 0, -1):
            j = self.randint_below(i + 1)
            values[i], values[j] = values[j], values[i]

    def permutation(self, n: int) -> np.ndarray:
        idx = np.arange(n)
        self.shuffle(idx)
        return idx


def derive_rng(seed: int, stream: int) -> Rng:
    """Generator for one purpose-specific stream of a master seed."""
    return Rng(seed, stream)
