"""Pinned 64-bit pseudo-random streams.

Streams are seeded by splitmix64 and sampled with xoshiro256++. Bounded
integers come from bitmask rejection on the high bits, so every platform
sees the same sequence for the same ``(seed, stream)``.

The kernels work on a ``uint64[4]`` state array and can be called from
other numba code. :class:`RngState` is the Python-facing wrapper.
"""
from __future__ import annotations

import numpy as np
from numba import njit

MASK64 = (1 << 64) - 1

GOLDEN_GAMMA = 0x9E3779B97F4A7C15
STREAM_MULTIPLIER = 0xD1B54A32D192ED03

_GAMMA = np.uint64(GOLDEN_GAMMA)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_STREAM = np.uint64(STREAM_MULTIPLIER)


@njit(cache=True, nogil=True)
def _mix64(z):
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


@njit(cache=True, nogil=True)
def _rotl(x, k):
    return (x << np.uint64(k)) | (x >> np.uint64(64 - k))


@njit(cache=True, nogil=True)
def _stream_start(seed, stream):
    # stream 0 leaves the seed untouched: mix64(0) == 0
    return np.uint64(seed) ^ _mix64(np.uint64(stream) * _STREAM)


@njit(cache=True, nogil=True)
def _seed_state(state, start):
    """Fill ``state`` with four successive splitmix64 outputs from ``start``."""
    x = np.uint64(start)
    for i in range(4):
        x = x + _GAMMA
        state[i] = _mix64(x)


@njit(cache=True, nogil=True)
def _next(state):
    s0 = state[0]
    s1 = state[1]
    s2 = state[2]
    s3 = state[3]
    result = _rotl(s0 + s3, 23) + s0
    t = s1 << np.uint64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    state[0] = s0
    state[1] = s1
    state[2] = s2
    state[3] = s3
    return result


@njit(cache=True, nogil=True)
def _bounded(state, n):
    """Uniform integer in ``[0, n)``; ``n == 1`` draws nothing."""
    if n <= 1:
        return 0
    m = n - 1
    bits = 0
    while m:
        m >>= 1
        bits += 1
    shift = np.uint64(64 - bits)
    bound = np.uint64(n)
    while True:
        x = _next(state) >> shift
        if x < bound:
            return np.int64(x)


@njit(cache=True, nogil=True)
def _fill_u64(state, out):
    for i in range(out.shape[0]):
        out[i] = _next(state)


@njit(cache=True, nogil=True)
def _fill_bounded(state, n, out):
    for i in range(out.shape[0]):
        out[i] = _bounded(state, n)


def splitmix64(x: int) -> tuple[int, int]:
    """One splitmix64 step on a Python int: returns ``(new_state, output)``."""
    x = (x + GOLDEN_GAMMA) & MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return x, z ^ (z >> 31)


def stream_seed(seed: int, stream: int = 0) -> int:
    """The splitmix64 start state of ``stream`` under master ``seed``."""
    return int(_stream_start(np.uint64(seed & MASK64), np.uint64(stream & MASK64)))


def seed_state(state: np.ndarray, seed: int, stream: int = 0) -> np.ndarray:
    """Seed a ``uint64[4]`` array in place for ``(seed, stream)``."""
    _seed_state(state, np.uint64(stream_seed(seed, stream)))
    return state


class RngState:
    """A xoshiro256++ stream.

    Create one with :meth:`from_seed`. ``stream`` selects an independent
    sub-stream of the same master seed (one per Monte Carlo replicate).
    """

    __slots__ = ("state",)

    def __init__(self, state):
        self.state = np.asarray(state, dtype=np.uint64).copy()
        if self.state.shape != (4,):
            raise ValueError("xoshiro256++ state must have four 64-bit words")
        if not self.state.any():
            raise ValueError("xoshiro256++ state must not be all zero")

    @classmethod
    def from_seed(cls, seed: int, stream: int = 0) -> "RngState":
        return cls(seed_state(np.zeros(4, dtype=np.uint64), seed, stream))

    def copy(self) -> "RngState":
        return RngState(self.state)

    def next_u64(self) -> int:
        return int(_next(self.state))

    def bounded(self, n: int) -> int:
        if n < 1:
            raise ValueError(f"bound must be positive, got {n}")
        return int(_bounded(self.state, n))

    def u64_array(self, size: int) -> np.ndarray:
        out = np.empty(size, dtype=np.uint64)
        _fill_u64(self.state, out)
        return out

    def bounded_array(self, n: int, size: int) -> np.ndarray:
        if n < 1:
            raise ValueError(f"bound must be positive, got {n}")
        out = np.empty(size, dtype=np.int64)
        _fill_bounded(self.state, n, out)
        return out

    def __eq__(self, other):
        return isinstance(other, RngState) and bool((self.state == other.state).all())

    def __repr__(self):
        return "RngState([" + ", ".join(f"{int(w):#018x}" for w in self.state) + "])"
