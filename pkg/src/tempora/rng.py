"""Deterministic counter-based random streams for reproducible sweeps.

The generator is a stateless pseudo-random function from (seed, counter) to
64 bits, so any draw can be produced independently, in any order, on any
worker.  The mixing function is frozen:

    raw64(seed, n) = mix64((seed + (n + 1) * GOLDEN) mod 2**64)

where GOLDEN = 0x9E3779B97F4A7C15 and mix64 is the SplitMix64 finalizer

    z ^= z >> 30;  z *= 0xBF58476D1CE4E5B9
    z ^= z >> 27;  z *= 0x94D049BB133111EB
    z ^= z >> 31

i.e. raw64(seed, n) is output n of a standard SplitMix64 sequence seeded
with `seed`.

Counter layout.  Trial k owns the counter block [k*TRIAL_STRIDE,
(k+1)*TRIAL_STRIDE).  Within a trial, machine slot s (SLOT_* constants) owns
counters [s*SLOT_STRIDE, (s+1)*SLOT_STRIDE) of the block, and resampling
attempt a within a slot starts at offset a*ATTEMPT_STRIDE.  Retries of one
machine therefore never shift any other machine's draws, and scalar and
vectorized sampling agree by construction.

Derived values: uniform01 = (raw64 >> 11) * 2**-53 in [0, 1); normals come
from Box-Muller over counter pairs (2j, 2j+1), with the radius uniform
mapped into (0, 1] so the logarithm is always finite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

GOLDEN = 0x9E3779B97F4A7C15
MASK64 = (1 << 64) - 1

TRIAL_STRIDE = 4096
SLOT_STRIDE = 512
ATTEMPT_STRIDE = 16

SLOT_ALICE1 = 0
SLOT_ALICE2 = 1
SLOT_BOB1 = 2
SLOT_BOB2 = 3
SLOT_CHARLIE = 4
SLOT_INITIAL = 5

_U64 = np.uint64
_TWO_NEG53 = 2.0 ** -53


def mix64(x: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer on uint64 values (elementwise, wrapping)."""
    x = np.asarray(x, dtype=_U64)
    with np.errstate(over="ignore"):
        x = (x ^ (x >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        x = (x ^ (x >> _U64(27))) * _U64(0x94D049BB133111EB)
        return x ^ (x >> _U64(31))


def raw64(seed: int, counters: np.ndarray) -> np.ndarray:
    """64-bit outputs for an array of counters under one master seed."""
    n = np.asarray(counters, dtype=_U64)
    with np.errstate(over="ignore"):
        z = _U64(seed & MASK64) + (n + _U64(1)) * _U64(GOLDEN)
    return mix64(z)


def uniform01(seed: int, counters: np.ndarray) -> np.ndarray:
    """Uniform doubles in [0, 1), one per counter."""
    return (raw64(seed, counters) >> _U64(11)).astype(np.float64) * _TWO_NEG53


def normals(seed: int, counters: np.ndarray) -> np.ndarray:
    """Standard normal doubles, one per counter.

    Counters pair up along the last axis, which must have even length:
    entries (2j, 2j+1) feed one Box-Muller transform and yield the cosine
    and sine branch respectively.
    """
    counters = np.asarray(counters)
    if counters.shape[-1] % 2 != 0:
        raise ValueError("normals needs an even number of counters per row")
    r = raw64(seed, counters) >> _U64(11)
    u1 = (r[..., 0::2].astype(np.float64) + 1.0) * _TWO_NEG53  # (0, 1]
    u2 = r[..., 1::2].astype(np.float64) * _TWO_NEG53          # [0, 1)
    rad = np.sqrt(-2.0 * np.log(u1))
    ang = (2.0 * np.pi) * u2
    out = np.empty(counters.shape, dtype=np.float64)
    out[..., 0::2] = rad * np.cos(ang)
    out[..., 1::2] = rad * np.sin(ang)
    return out


@dataclass(frozen=True)
class Stream:
    """Addressable sub-stream for one machine slot of one trial."""

    seed: int
    trial: int
    slot: int = 0

    def counters(self, n: int, attempt: int = 0, offset: int = 0) -> np.ndarray:
        base = (self.trial * TRIAL_STRIDE + self.slot * SLOT_STRIDE
                + attempt * ATTEMPT_STRIDE + offset)
        return np.arange(base, base + n, dtype=np.uint64)

    def uniforms(self, n: int, attempt: int = 0) -> np.ndarray:
        return uniform01(self.seed, self.counters(n, attempt))

    def normals(self, n: int, attempt: int = 0) -> np.ndarray:
        return normals(self.seed, self.counters(n, attempt))
