"""Exact ground truth at small scale.

``exact_expectations`` enumerates every choice trace. Each step is uniform
over ``2s - 1`` faces no matter what came before, so all
``1 * 3 * 5 * ... * (2t - 1)`` traces are equally likely and the mean is
a plain average.

The coupling helpers build pairs of runs that differ at one step ``j``
(slot ``i`` in one run, ``i'`` in the other) and then follow the same
sequence of slots, except that ``i`` and ``i'`` are swapped. With the
registry discipline this maps the three subfaces of one special face onto
the three subfaces of the other, and the whole untouched face onto the
whole untouched face. So at most the six corners of the two special
faces can end up with different degrees.
"""
from __future__ import annotations

import itertools
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from .core import ChoiceTrace, DegreeHistogram, replay
from .errors import CapacityError, DomainError, TraceError
from .expectations import exact_column
from .rng import RngState, _bounded

ORACLE_T_CAP = 8
EXHAUSTIVE_COUPLING_T_CAP = 5
COUPLING_BOUND = 6


def trace_count(t: int) -> int:
    """Number of distinct choice traces of length ``t``."""
    n = 1
    for s in range(1, t):
        n *= 2 * s + 1
    return n


# ----------------------------------------------------------------------------
# enumeration kernel


@njit(cache=True, nogil=True)
def _do(deg, faces, hist, d, idx):
    v = d + 3
    a = faces[idx, 0]
    b = faces[idx, 1]
    c = faces[idx, 2]
    for x in (a, b, c):
        hist[deg[x]] -= 1
        deg[x] += 1
        hist[deg[x]] += 1
    deg[v] = 3
    hist[3] += 1
    faces[idx, 2] = v
    faces[2 * d + 1, 0] = b
    faces[2 * d + 1, 1] = c
    faces[2 * d + 1, 2] = v
    faces[2 * d + 2, 0] = c
    faces[2 * d + 2, 1] = a
    faces[2 * d + 2, 2] = v


@njit(cache=True, nogil=True)
def _undo(deg, faces, hist, d, idx):
    a = faces[idx, 0]
    b = faces[idx, 1]
    c = faces[2 * d + 2, 0]
    faces[idx, 2] = c
    for x in (a, b, c):
        hist[deg[x]] -= 1
        deg[x] -= 1
        hist[deg[x]] += 1
    hist[3] -= 1
    deg[d + 3] = 0


@njit(cache=True, nogil=True)
def _enumerate(t, prefix):
    """Sum of ``Z_k(t)`` over all traces that start with ``prefix``."""
    deg = np.zeros(t + 3, dtype=np.int64)
    faces = np.zeros((2 * t + 1, 3), dtype=np.int64)
    hist = np.zeros(t + 4, dtype=np.int64)
    acc = np.zeros(t + 4, dtype=np.int64)
    deg[0] = 2
    deg[1] = 2
    deg[2] = 2
    hist[2] = 3
    faces[0, 0] = 0
    faces[0, 1] = 1
    faces[0, 2] = 2
    s0 = prefix.shape[0]
    for d in range(s0):
        _do(deg, faces, hist, d, prefix[d])
    if s0 == t:
        acc += hist
        return acc
    nxt = np.zeros(t, dtype=np.int64)
    d = s0
    while True:
        if nxt[d] < 2 * d + 1:
            idx = nxt[d]
            _do(deg, faces, hist, d, idx)
            if d + 1 == t:
                acc += hist
                _undo(deg, faces, hist, d, idx)
                nxt[d] += 1
            else:
                d += 1
                nxt[d] = 0
        else:
            if d == s0:
                break
            d -= 1
            _undo(deg, faces, hist, d, nxt[d])
            nxt[d] += 1
    return acc


@dataclass(frozen=True)
class ExactExpectation:
    """``E[Z_k(t)]`` for every degree ``k``, as exact rationals."""

    t: int
    values: dict[int, Fraction]
    trace_count: int

    def __getitem__(self, k):
        return self.values.get(k, Fraction(0))

    def total(self) -> Fraction:
        return sum(self.values.values(), Fraction(0))


def _prefixes(t: int) -> list[np.ndarray]:
    if t >= 2:
        return [np.array([0, i], dtype=np.int64) for i in range(3)]
    return [np.zeros(min(t, 1), dtype=np.int64)]


def exact_expectations(t: int, workers: int = 1) -> ExactExpectation:
    """Average the degree histogram over all choice traces of length ``t``.

    The trace space is split by the step-2 choice. Partial sums are integers
    and are reduced in prefix order, so the result does not depend on
    ``workers``.
    """
    if t < 0:
        raise DomainError(f"t must be non-negative, got {t}")
    if t > ORACLE_T_CAP:
        raise CapacityError(
            f"exact enumeration capped at t={ORACLE_T_CAP}; "
            f"t={t} has {trace_count(t)} traces"
        )
    prefixes = _prefixes(t)
    if workers > 1 and len(prefixes) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda p: _enumerate(t, p), prefixes))
    else:
        parts = [_enumerate(t, p) for p in prefixes]
    acc = np.zeros(t + 4, dtype=np.int64)
    for part in parts:
        acc += part
    n = trace_count(t)
    values = {int(k): Fraction(int(acc[k]), n) for k in np.flatnonzero(acc)}
    return ExactExpectation(t, values, n)


def recurrence_discrepancy(t: int) -> dict[int, Fraction]:
    """``N_k(t)`` from the recurrence minus the true ``E[Z_k(t)]``, per ``k >= 3``."""
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    truth = exact_expectations(t)
    rec = exact_column(t, t + 2)
    return {k: rec[k] - truth[k] for k in range(3, t + 3)}


def oracle_csv(t: int) -> str:
    """CSV ``k,exact_num,exact_den,recurrence,discrepancy`` for ``3 <= k <= t+2``."""
    truth = exact_expectations(t)
    rec = exact_column(t, t + 2)
    lines = ["k,exact_num,exact_den,recurrence,discrepancy"]
    for k in range(3, t + 3):
        e = truth[k]
        lines.append(f"{k},{e.numerator},{e.denominator},{rec[k]},{rec[k] - e}")
    return "\n".join(lines) + "\n"


# ----------------------------------------------------------------------------
# coupling


@njit(cache=True, nogil=True)
def _run_pair(trace, j, alt, deg_a, faces_a, deg_b, faces_b):
    """Replay ``trace`` and its partner; 1-based ``j`` is the differing step."""
    t = trace.shape[0]
    for d in range(3):
        deg_a[d] = 2
        deg_b[d] = 2
        faces_a[0, d] = d
        faces_b[0, d] = d
    i = trace[j - 1] if j <= t else -1
    for s in range(t):
        x = trace[s]
        y = x
        if s == j - 1:
            y = alt
        elif s >= j:
            if x == i:
                y = alt
            elif x == alt:
                y = i
        for deg, faces, idx in ((deg_a, faces_a, x), (deg_b, faces_b, y)):
            v = s + 3
            a = faces[idx, 0]
            b = faces[idx, 1]
            c = faces[idx, 2]
            deg[a] += 1
            deg[b] += 1
            deg[c] += 1
            deg[v] = 3
            faces[idx, 2] = v
            faces[2 * s + 1, 0] = b
            faces[2 * s + 1, 1] = c
            faces[2 * s + 1, 2] = v
            faces[2 * s + 2, 0] = c
            faces[2 * s + 2, 1] = a
            faces[2 * s + 2, 2] = v


@njit(cache=True, nogil=True)
def _pair_stats(trace, j, alt):
    t = trace.shape[0]
    deg_a = np.zeros(t + 3, dtype=np.int64)
    deg_b = np.zeros(t + 3, dtype=np.int64)
    faces_a = np.zeros((2 * t + 1, 3), dtype=np.int64)
    faces_b = np.zeros((2 * t + 1, 3), dtype=np.int64)
    _run_pair(trace, j, alt, deg_a, faces_a, deg_b, faces_b)
    hist = np.zeros(t + 4, dtype=np.int64)
    moved = 0
    for v in range(t + 3):
        hist[deg_a[v]] += 1
        hist[deg_b[v]] -= 1
        if deg_a[v] != deg_b[v]:
            moved += 1
    return np.abs(hist).max(), moved, deg_a, deg_b


@njit(cache=True, nogil=True)
def _sampled(t, samples, rng):
    trace = np.zeros(t, dtype=np.int64)
    worst = 0
    worst_moved = 0
    for _ in range(samples):
        for s in range(t):
            trace[s] = _bounded(rng, 2 * s + 1)
        j = 2 + _bounded(rng, t - 1)
        i = trace[j - 1]
        alt = _bounded(rng, 2 * j - 2)
        if alt >= i:
            alt += 1
        diff, moved, _a, _b = _pair_stats(trace, j, alt)
        worst = max(worst, diff)
        worst_moved = max(worst_moved, moved)
    return worst, worst_moved


@dataclass(frozen=True)
class CoupledPair:
    """A base trace plus an alternative slot ``alt`` at step ``j`` (1-based).

    ``j = len(trace) + 1`` denotes the uncoupled pair (both runs identical).
    """

    trace: ChoiceTrace
    j: int
    alt: int = 0

    def __post_init__(self):
        if not isinstance(self.trace, ChoiceTrace):
            object.__setattr__(self, "trace", ChoiceTrace(np.asarray(self.trace)))

    @property
    def t(self) -> int:
        return len(self.trace)

    @property
    def i(self) -> int | None:
        return self.trace[self.j - 1] if self.j <= self.t else None

    def validate(self) -> None:
        self.trace.validate()
        if not 1 <= self.j <= self.t + 1:
            raise TraceError(f"differing step j={self.j} outside [1, {self.t + 1}]", step=self.j)
        if self.j <= self.t:
            if not 0 <= self.alt < 2 * self.j - 1:
                raise TraceError(
                    f"step {self.j}: alternative index {self.alt} out of range "
                    f"[0, {2 * self.j - 1})",
                    step=self.j,
                )
            if self.alt == self.i:
                raise TraceError(f"step {self.j}: alternative equals the base choice", step=self.j)

    def partner(self) -> ChoiceTrace:
        """The second run's trace: ``alt`` at step ``j``, then ``i`` and ``alt`` swapped."""
        out = self.trace.indices.copy()
        if self.j <= self.t:
            i, alt = self.i, self.alt
            tail = out[self.j :].copy()
            out[self.j - 1] = alt
            out[self.j :][tail == i] = alt
            out[self.j :][tail == alt] = i
        return ChoiceTrace(out)


@dataclass(frozen=True)
class PairOutcome:
    max_difference: int
    differing_vertices: int
    histogram: DegreeHistogram
    partner_histogram: DegreeHistogram


def evaluate_pair(pair: CoupledPair) -> PairOutcome:
    pair.validate()
    j = pair.j
    diff, moved, deg_a, deg_b = _pair_stats(pair.trace.indices, j, pair.alt if j <= pair.t else 0)
    return PairOutcome(
        int(diff), int(moved),
        DegreeHistogram.from_degrees(deg_a, pair.t),
        DegreeHistogram.from_degrees(deg_b, pair.t),
    )


def coupled_difference(pair: CoupledPair) -> int:
    """Largest ``|Z_k - Z'_k|`` over ``k`` between the two coupled runs."""
    return evaluate_pair(pair).max_difference


@dataclass
class CouplingReport:
    t: int
    pairs_checked: int
    max_difference: int
    max_differing_vertices: int
    exhaustive: bool = False
    notes: list[str] = field(default_factory=list)

    @property
    def within_bound(self) -> bool:
        return (self.max_difference <= COUPLING_BOUND
                and self.max_differing_vertices <= COUPLING_BOUND)

    def to_json(self) -> str:
        body = {
            "t": self.t,
            "pairs_checked": self.pairs_checked,
            "max_difference": self.max_difference,
            "max_differing_vertices": self.max_differing_vertices,
            "exhaustive": self.exhaustive,
            "notes": self.notes,
        }
        return json.dumps(body, indent=2) + "\n"


def sampled_coupling_check(t: int, samples: int, seed: int) -> CouplingReport:
    """Random base trace, random step ``j >= 2``, random ``alt != i``; track the worst pair."""
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    if samples < 0:
        raise DomainError(f"samples must be non-negative, got {samples}")
    if samples == 0:
        return CouplingReport(t, 0, 0, 0, notes=["no samples"])
    if t == 1:
        return CouplingReport(t, 0, 0, 0, notes=["no alternative choice exists at t=1"])
    rng = RngState.from_seed(seed)
    worst, moved = _sampled(t, samples, rng.state)
    return CouplingReport(t, samples, int(worst), int(moved))


def exhaustive_coupling_check(t: int) -> CouplingReport:
    """Every base trace of length ``t`` against every alternative at every step."""
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    if t > EXHAUSTIVE_COUPLING_T_CAP:
        raise CapacityError(f"exhaustive coupling capped at t={EXHAUSTIVE_COUPLING_T_CAP}")
    worst = moved = pairs = 0
    ranges = [range(2 * s + 1) for s in range(t)]
    for tup in itertools.product(*ranges):
        trace = np.array(tup, dtype=np.int64)
        for j in range(2, t + 1):
            i = tup[j - 1]
            for alt in range(2 * j - 1):
                if alt == i:
                    continue
                diff, m, _a, _b = _pair_stats(trace, j, alt)
                worst = max(worst, int(diff))
                moved = max(moved, int(m))
                pairs += 1
    return CouplingReport(t, pairs, worst, moved, exhaustive=True)


def brute_force_histograms(t: int):
    """Yield the degree histogram of every trace of length ``t`` via :func:`replay`."""
    for tup in itertools.product(*[range(2 * s + 1) for s in range(t)]):
        yield DegreeHistogram.from_degrees(replay(tup).degrees, t)
