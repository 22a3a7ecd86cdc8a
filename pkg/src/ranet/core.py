"""Random Apollonian Network generator.

A state holds the degree array and the face registry, the indexable list
of internal triangular faces. Inserting into slot ``i`` holding ``(a, b, c)``
overwrites it with ``(a, b, v)`` and appends ``(b, c, v)`` then
``(c, a, v)``. Every face index therefore has a fixed meaning given the
choices so far. That is what makes replay and the oracle's coupling work.

Vertex ids are 32-bit: 0, 1, 2 form the outer triangle and the vertex
inserted at step ``s`` is ``s + 2``. After ``t`` insertions there are
``2t + 1`` faces.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np
from numba import njit

from .errors import CapacityError, TraceError
from .rng import RngState, _bounded, seed_state

FACE_DTYPE = np.uint32
DEGREE_DTYPE = np.int32

# 32-bit vertex ids: t + 2 must fit below 2**32 - 1
MAX_T = 2**32 - 4
DEFAULT_MEMORY_BUDGET = 2 * 1024**3

HULL = (0, 1, 2)


def estimate_bytes(t: int, *, edges: bool = False, trace: bool = False) -> int:
    """Bytes held by the arrays of a state after ``t`` insertions."""
    n = (t + 3) * 4 + (2 * t + 1) * 12
    if edges:
        n += t * 12
    if trace:
        n += t * 4
    return n


def check_capacity(t: int, memory_budget: int | None = None, **kw) -> None:
    if t > MAX_T:
        raise CapacityError(f"t={t} exceeds the 32-bit vertex id cap ({MAX_T})")
    budget = DEFAULT_MEMORY_BUDGET if memory_budget is None else memory_budget
    need = estimate_bytes(t, **kw)
    if need > budget:
        raise CapacityError(
            f"t={t} needs ~{need / 2**20:.0f} MiB, over the {budget / 2**20:.0f} MiB budget"
        )


# ----------------------------------------------------------------------------
# kernels


@njit(cache=True, nogil=True)
def _apply(degrees, faces, s, idx):
    """Insert vertex ``s + 3`` into face slot ``idx`` of a state at time ``s``."""
    v = s + 3
    a = faces[idx, 0]
    b = faces[idx, 1]
    c = faces[idx, 2]
    degrees[a] += 1
    degrees[b] += 1
    degrees[c] += 1
    degrees[v] = 3
    faces[idx, 2] = v
    n = 2 * s + 1
    faces[n, 0] = b
    faces[n, 1] = c
    faces[n, 2] = v
    faces[n + 1, 0] = c
    faces[n + 1, 1] = a
    faces[n + 1, 2] = v
    return a, b, c


@njit(cache=True, nogil=True)
def _reset(degrees, faces):
    degrees[0] = 2
    degrees[1] = 2
    degrees[2] = 2
    faces[0, 0] = 0
    faces[0, 1] = 1
    faces[0, 2] = 2


@njit(cache=True, nogil=True)
def _grow(degrees, faces, t0, t1, rng, trace, record_trace, corners, record_corners):
    for s in range(t0, t1):
        idx = _bounded(rng, 2 * s + 1)
        if record_trace:
            trace[s] = idx
        a, b, c = _apply(degrees, faces, s, idx)
        if record_corners:
            corners[s, 0] = a
            corners[s, 1] = b
            corners[s, 2] = c


@njit(cache=True, nogil=True)
def _replay(degrees, faces, t0, trace, corners, record_corners):
    for j in range(trace.shape[0]):
        s = t0 + j
        a, b, c = _apply(degrees, faces, s, trace[j])
        if record_corners:
            corners[s, 0] = a
            corners[s, 1] = b
            corners[s, 2] = c


@njit(cache=True, nogil=True)
def _first_bad_step(trace, t0):
    """0-based offset of the first out-of-range index, or -1."""
    for j in range(trace.shape[0]):
        x = trace[j]
        if x < 0 or x >= 2 * (t0 + j) + 1:
            return j
    return -1


_EMPTY_TRACE = np.empty(0, dtype=np.int64)
_EMPTY_CORNERS = np.empty((0, 3), dtype=FACE_DTYPE)


# ----------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class ChoiceTrace:
    """The face index chosen at each insertion step, step 1 first.

    The entry for step ``s`` must lie in ``[0, 2s - 1)``; the first is always 0.
    """

    indices: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.indices, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(self, "indices", arr)

    def __len__(self):
        return self.indices.shape[0]

    def __getitem__(self, i):
        return int(self.indices[i])

    def __iter__(self):
        return (int(x) for x in self.indices)

    def __eq__(self, other):
        if not isinstance(other, ChoiceTrace):
            return NotImplemented
        return np.array_equal(self.indices, other.indices)

    def validate(self) -> None:
        """Raise :class:`TraceError` naming the first out-of-range step."""
        bad = _first_bad_step(self.indices, 0)
        if bad >= 0:
            step = bad + 1
            raise TraceError(
                f"step {step}: face index {int(self.indices[bad])} out of range "
                f"[0, {2 * step - 1})",
                step=step,
            )


@dataclass(frozen=True)
class DegreeHistogram:
    """Vertex counts ``Z_k`` keyed by degree, taken at time ``t``."""

    counts: Mapping[int, int]
    t: int

    @classmethod
    def from_degrees(cls, degrees: np.ndarray, t: int) -> "DegreeHistogram":
        bins = np.bincount(degrees)
        nz = np.flatnonzero(bins)
        return cls({int(k): int(bins[k]) for k in nz}, t)

    def __getitem__(self, k):
        return self.counts.get(k, 0)

    @property
    def max_degree(self) -> int:
        return max(k for k, c in self.counts.items() if c)

    def vertex_count(self) -> int:
        return sum(self.counts.values())

    def degree_sum(self) -> int:
        return sum(k * c for k, c in self.counts.items())

    def as_dict(self) -> dict[int, int]:
        return {k: self.counts[k] for k in sorted(self.counts) if self.counts[k]}

    def __eq__(self, other):
        if not isinstance(other, DegreeHistogram):
            return NotImplemented
        return self.t == other.t and self.as_dict() == other.as_dict()


@dataclass(eq=False)
class RanState:
    """An evolving RAN after ``t`` insertions.

    ``degrees`` and ``faces`` are views of the live prefix of the backing
    arrays; ``corners`` (the chosen face's corners per step) is only kept
    when edges are requested. It holds the same information as the edge list.
    """

    t: int
    _degrees: np.ndarray = field(repr=False)
    _faces: np.ndarray = field(repr=False)
    _corners: np.ndarray | None = field(default=None, repr=False)
    trace: ChoiceTrace | None = field(default=None, repr=False)

    @property
    def degrees(self) -> np.ndarray:
        return self._degrees[: self.t + 3]

    @property
    def faces(self) -> np.ndarray:
        return self._faces[: 2 * self.t + 1]

    @property
    def records_edges(self) -> bool:
        return self._corners is not None

    @property
    def num_vertices(self) -> int:
        return self.t + 3

    @property
    def num_edges(self) -> int:
        return 3 * (self.t + 1)

    @property
    def num_faces(self) -> int:
        return 2 * self.t + 1

    def edges(self) -> np.ndarray:
        """``(3(t+1), 2)`` array of edges in insertion order."""
        if self._corners is None:
            raise ValueError("state was built without edge recording")
        t = self.t
        out = np.empty((3 * (t + 1), 2), dtype=FACE_DTYPE)
        out[:3] = [(0, 1), (1, 2), (2, 0)]
        out[3:, 0] = self._corners[:t].reshape(-1)
        out[3:, 1] = np.repeat(np.arange(3, t + 3, dtype=FACE_DTYPE), 3)
        return out

    def copy(self) -> "RanState":
        return RanState(
            self.t,
            self._degrees.copy(),
            self._faces.copy(),
            None if self._corners is None else self._corners.copy(),
            self.trace,
        )

    def same_graph(self, other: "RanState") -> bool:
        """Equal step count, degrees, registry and (if both kept) edges."""
        if self.t != other.t:
            return False
        if not (np.array_equal(self.degrees, other.degrees)
                and np.array_equal(self.faces, other.faces)):
            return False
        if self.records_edges and other.records_edges:
            return np.array_equal(self._corners[: self.t], other._corners[: other.t])
        return True

    def _reserve(self, t: int) -> None:
        """Make room for a state at time ``t``, doubling the backing arrays."""
        if t + 3 <= self._degrees.shape[0]:
            return
        check_capacity(t, edges=self.records_edges)
        cap = max(t, 2 * self.t, 16)
        deg = np.zeros(cap + 3, dtype=DEGREE_DTYPE)
        deg[: self.t + 3] = self.degrees
        faces = np.zeros((2 * cap + 1, 3), dtype=FACE_DTYPE)
        faces[: 2 * self.t + 1] = self.faces
        self._degrees, self._faces = deg, faces
        if self._corners is not None:
            corners = np.zeros((cap, 3), dtype=FACE_DTYPE)
            corners[: self.t] = self._corners[: self.t]
            self._corners = corners


def _allocate(t: int, edges: bool) -> RanState:
    degrees = np.zeros(t + 3, dtype=DEGREE_DTYPE)
    faces = np.zeros((2 * t + 1, 3), dtype=FACE_DTYPE)
    _reset(degrees, faces)
    corners = np.zeros((t, 3), dtype=FACE_DTYPE) if edges else None
    return RanState(0, degrees, faces, corners)


# ----------------------------------------------------------------------------
# operations


def init_state(*, edges: bool = True) -> RanState:
    """The initial triangle: 3 vertices of degree 2 and the single face (0, 1, 2)."""
    return _allocate(0, edges)


def apply_step(state: RanState, face_index: int) -> RanState:
    """Insert a vertex into face ``face_index``. Mutates and returns ``state``."""
    t = state.t
    if not 0 <= face_index < 2 * t + 1:
        raise TraceError(
            f"step {t + 1}: face index {face_index} out of range [0, {2 * t + 1})",
            step=t + 1,
        )
    state._reserve(t + 1)
    a, b, c = _apply(state._degrees, state._faces, t, face_index)
    if state._corners is not None:
        state._corners[t] = (a, b, c)
    state.t = t + 1
    state.trace = None
    return state


def sample_index(state: RanState, rng: RngState) -> int:
    """A face index uniform on ``[0, 2t + 1)``, advancing ``rng``."""
    return rng.bounded(2 * state.t + 1)


def generate(
    t: int,
    seed: int,
    *,
    stream: int = 0,
    edges: bool = False,
    record_trace: bool = False,
    memory_budget: int | None = None,
) -> RanState:
    """Grow a RAN for ``t`` steps. The result depends only on ``(t, seed, stream)``."""
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t}")
    check_capacity(t, memory_budget, edges=edges, trace=record_trace)
    state = _allocate(t, edges)
    rng = seed_state(np.zeros(4, dtype=np.uint64), seed, stream)
    trace = np.zeros(t, dtype=np.int64) if record_trace else _EMPTY_TRACE
    corners = state._corners if edges else _EMPTY_CORNERS
    _grow(state._degrees, state._faces, 0, t, rng, trace, record_trace, corners, edges)
    state.t = t
    if record_trace:
        state.trace = ChoiceTrace(trace)
    return state


def replay(trace: ChoiceTrace | Iterable[int], *, edges: bool = False) -> RanState:
    """Rebuild the state reached by following ``trace`` from the initial triangle."""
    if not isinstance(trace, ChoiceTrace):
        trace = ChoiceTrace(np.fromiter(trace, dtype=np.int64))
    trace.validate()
    t = len(trace)
    check_capacity(t, edges=edges)
    state = _allocate(t, edges)
    corners = state._corners if edges else _EMPTY_CORNERS
    _replay(state._degrees, state._faces, 0, trace.indices, corners, edges)
    state.t = t
    state.trace = trace
    return state


def degree_histogram(state: RanState) -> DegreeHistogram:
    return DegreeHistogram.from_degrees(state.degrees, state.t)


def max_degree(state: RanState) -> int:
    return int(state.degrees.max())
