"""Expected degree counts N_k(t) from the mean-field recurrences.

The recurrence is encoded literally: every vertex of degree ``k`` is taken
to lie in ``k`` faces, including the three hull vertices. That makes the
table differ from the true process at small ``t`` (``N_3(2) = 1`` where the
process has ``E[Z_3(2)] = 2``); :mod:`ranet.oracle` measures the gap.

Float columns are advanced in place. The update multiplies errors by
``1 - k/(2t+1) < 1``, so double precision is stable. Exact values use a
shared denominator ``D(t) = 3 * 5 * ... * (2t - 1)`` with integer numerators,
which avoids gcd work on every cell.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .errors import CapacityError, DomainError

K_BOUND = 3.6
K_BOUND_EXACT = Fraction(18, 5)
DEFAULT_K_MAX = 1000
DEFAULT_EXACT_CAP = 1000


def limit_coefficient(k: int) -> Fraction:
    """Limiting fraction of degree-``k`` vertices, ``24 / (k (k+1) (k+2))``."""
    if k < 3:
        raise DomainError(f"limit coefficients are defined for k >= 3, got {k}")
    return Fraction(24, k * (k + 1) * (k + 2))


def limit_coefficients_array(k_max: int) -> np.ndarray:
    """``b[k]`` as floats for ``0 <= k <= k_max``; zero below 3."""
    k = np.arange(k_max + 1, dtype=np.float64)
    b = np.zeros(k_max + 1)
    b[3:] = 24.0 / (k[3:] * (k[3:] + 1) * (k[3:] + 2))
    return b


def tail_mass(k: int) -> Fraction:
    """``1 - sum_{j=3..k} b_j``, equal to ``12 / ((k+1)(k+2))``."""
    return Fraction(12, (k + 1) * (k + 2))


def mean_degree_remainder(k: int) -> Fraction:
    """``6 - sum_{j=3..k} j b_j``, equal to ``24 / (k+2)``."""
    return Fraction(24, k + 2)


@dataclass(frozen=True)
class LimitCoefficients:
    b: dict[int, Fraction]
    K: Fraction = K_BOUND_EXACT

    @classmethod
    def up_to(cls, k_max: int) -> "LimitCoefficients":
        return cls({k: limit_coefficient(k) for k in range(3, k_max + 1)})


def azuma_bound(lam: float, t: int) -> float:
    """Tail bound ``2 exp(-lam^2 / (72 t))`` on ``|Z_k(t) - N_k(t)| >= lam``."""
    if lam < 0:
        raise DomainError(f"lambda must be non-negative, got {lam}")
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    return 2.0 * math.exp(-lam * lam / (72.0 * t))


# ----------------------------------------------------------------------------
# float recurrence


@njit(cache=True, nogil=True)
def _advance(col, t, k_max):
    """Turn the column at time ``t`` into the column at ``t + 1`` in place.

    ``col[k]`` holds N_k; descending ``k`` keeps ``col[k - 1]`` at its old value.
    """
    d = 2.0 * t + 1.0
    top = min(k_max, t + 3)
    for k in range(top, 3, -1):
        col[k] = col[k] * (1.0 - k / d) + col[k - 1] * ((k - 1) / d)
    col[3] = col[3] + 1.0 - 3.0 * col[3] / d


@njit(cache=True, nogil=True)
def _basis(col):
    col[:] = 0.0
    col[3] = 4.0


@njit(cache=True, nogil=True)
def _fill(table, k_max):
    col = np.zeros(k_max + 1)
    _basis(col)
    t_max = table.shape[1]
    for t in range(1, t_max + 1):
        for k in range(3, k_max + 1):
            table[k - 3, t - 1] = col[k]
        if t < t_max:
            _advance(col, t, k_max)


@njit(cache=True, nogil=True)
def _sweep_error(t_max, k_max, b):
    col = np.zeros(k_max + 1)
    _basis(col)
    best = -1.0
    best_k = 0
    best_t = 0
    for t in range(1, t_max + 1):
        for k in range(3, k_max + 1):
            e = abs(col[k] - b[k] * t)
            if e > best:
                best = e
                best_k = k
                best_t = t
        if t < t_max:
            _advance(col, t, k_max)
    return best, best_k, best_t


# ----------------------------------------------------------------------------
# exact recurrence


def _exact_columns(t_max: int, k_max: int):
    """Yield ``(t, denominator, numerators)`` for ``t = 1..t_max``.

    ``numerators[k]`` over ``denominator`` is N_k(t) exactly.
    """
    num = [0] * (k_max + 1)
    num[3] = 4
    den = 1
    for t in range(1, t_max + 1):
        yield t, den, num
        if t == t_max:
            return
        d = 2 * t + 1
        top = min(k_max, t + 3)
        for k in range(top, 3, -1):
            num[k] = num[k] * (d - k) + num[k - 1] * (k - 1)
        num[3] = num[3] * (d - 3) + den * d
        den *= d


def exact_column(t: int, k_max: int) -> dict[int, Fraction]:
    """``{k: N_k(t)}`` as exact rationals for ``3 <= k <= k_max``."""
    if t < 1:
        raise DomainError(f"t must be >= 1, got {t}")
    for tt, den, num in _exact_columns(t, k_max):
        if tt == t:
            return {k: Fraction(num[k], den) for k in range(3, k_max + 1)}
    raise AssertionError("unreachable")


@dataclass(frozen=True)
class ExpectationTable:
    """``values[k - 3, t - 1] = N_k(t)`` for ``3 <= k <= k_max``, ``1 <= t <= t_max``.

    ``exact`` holds ``(denominator, numerators)`` per ``t`` up to ``exact_t``.
    """

    t_max: int
    k_max: int
    values: np.ndarray
    exact_t: int = 0
    _exact: tuple = ()

    def N(self, k: int, t: int) -> float:
        if k < 3 or k > self.k_max or t < 1 or t > self.t_max:
            raise DomainError(f"(k={k}, t={t}) outside the table")
        return float(self.values[k - 3, t - 1])

    def exact(self, k: int, t: int) -> Fraction:
        if t > self.exact_t:
            raise DomainError(f"exact values stop at t={self.exact_t}")
        den, num = self._exact[t - 1]
        return Fraction(num[k - 3], den)

    def error_terms(self) -> np.ndarray:
        """``e_k(t) = N_k(t) - b_k t`` on the same grid."""
        b = limit_coefficients_array(self.k_max)[3:]
        t = np.arange(1, self.t_max + 1, dtype=np.float64)
        return self.values - np.outer(b, t)

    def to_csv(self, t: int | None = None, exact: bool = False) -> str:
        """CSV ``k,t,N,b_k_times_t,e`` for one time (default ``t_max``)."""
        t = self.t_max if t is None else t
        lines = ["k,t,N,b_k_times_t,e"]
        for k in range(3, self.k_max + 1):
            if exact:
                n = self.exact(k, t)
                bt = limit_coefficient(k) * t
                lines.append(f"{k},{t},{n},{bt},{n - bt}")
            else:
                n = self.N(k, t)
                bt = float(limit_coefficient(k)) * t
                lines.append(f"{k},{t},{n!r},{bt!r},{n - bt!r}")
        return "\n".join(lines) + "\n"


def recurrence_table(t_max: int, k_max: int = DEFAULT_K_MAX, *, exact_t: int = 0,
                     exact_cap: int = DEFAULT_EXACT_CAP) -> ExpectationTable:
    """Fill N_k(t) from the basis ``N_3(1) = 4``, ``N_k(1) = 0`` for ``k >= 4``.

    ``exact_t`` additionally fills the exact-rational slice for ``t <= exact_t``.
    """
    if t_max < 1:
        raise DomainError(f"t_max must be >= 1, got {t_max}")
    if k_max < 3:
        raise DomainError(f"k_max must be >= 3, got {k_max}")
    if exact_t > exact_cap:
        raise CapacityError(f"exact table requested to t={exact_t}, cap is {exact_cap}")
    if exact_t > t_max:
        raise DomainError("exact slice cannot extend past t_max")
    values = np.zeros((k_max - 2, t_max))
    _fill(values, k_max)
    exact = tuple(
        (den, tuple(num[3:]))
        for _, den, num in _exact_columns(exact_t, k_max)
    ) if exact_t else ()
    values.setflags(write=False)
    return ExpectationTable(t_max, k_max, values, exact_t, exact)


@dataclass(frozen=True)
class ErrorBound:
    """Largest ``|N_k(t) - b_k t|`` over a sweep, and where it occurs."""

    value: float
    k: int
    t: int

    @property
    def holds(self) -> bool:
        return self.value <= K_BOUND


def verify_error_bound(t_max: int, k_max: int = 100) -> ErrorBound:
    """Sweep ``1 <= t <= t_max``, ``3 <= k <= k_max`` without storing the table."""
    if t_max < 1 or k_max < 3:
        raise DomainError("need t_max >= 1 and k_max >= 3")
    value, k, t = _sweep_error(t_max, k_max, limit_coefficients_array(k_max))
    return ErrorBound(float(value), int(k), int(t))
