"""Replicated simulation and the statistics checked against the theory.

Replicate ``r`` draws from the stream derived from ``(master_seed, r)``.
Results are therefore a pure function of the configuration, whatever the
worker count. Workers are threads running nogil kernels over contiguous
replicate ranges; each writes only its own rows.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np
from numba import njit
from scipy import optimize, special

from .core import (
    DEFAULT_MEMORY_BUDGET,
    DegreeHistogram,
    _grow,
    _reset,
    check_capacity,
    estimate_bytes,
)
from .errors import CapacityError, DomainError
from .expectations import azuma_bound, limit_coefficient
from .rng import _seed_state, _stream_start, stream_seed

DEFAULT_K_REPORT_MAX = 10_000


@dataclass(frozen=True)
class SimulationConfig:
    t: int
    replicates: int
    master_seed: int
    workers: int = 1
    k_report_max: int = DEFAULT_K_REPORT_MAX
    memory_budget: int = DEFAULT_MEMORY_BUDGET

    def __post_init__(self):
        if self.t < 0:
            raise DomainError(f"t must be non-negative, got {self.t}")
        if self.replicates < 1:
            raise DomainError(f"replicates must be >= 1, got {self.replicates}")
        if self.workers < 1:
            raise DomainError(f"workers must be >= 1, got {self.workers}")
        if self.k_report_max < 3:
            raise DomainError("k_report_max must be >= 3")

    @property
    def columns(self) -> int:
        """Histogram columns: degrees ``0..min(k_report_max, t+2)`` plus overflow."""
        return min(self.k_report_max, self.t + 2) + 2


@njit(cache=True, nogil=True)
def _simulate(t, seed, r0, r1, counts, maxdeg):
    degrees = np.zeros(t + 3, dtype=np.int32)
    faces = np.zeros((2 * t + 1, 3), dtype=np.uint32)
    rng = np.zeros(4, dtype=np.uint64)
    trace = np.empty(0, dtype=np.int64)
    corners = np.empty((0, 3), dtype=np.uint32)
    over = counts.shape[1] - 1
    for r in range(r0, r1):
        _reset(degrees, faces)
        _seed_state(rng, _stream_start(seed, np.uint64(r)))
        _grow(degrees, faces, 0, t, rng, trace, False, corners, False)
        row = r - r0
        m = 0
        for v in range(t + 3):
            d = degrees[v]
            if d > m:
                m = d
            if d < over:
                counts[row, d] += 1
            else:
                counts[row, over] += 1
        maxdeg[row] = m


@dataclass(frozen=True)
class ReplicateSummary:
    index: int
    seed: int
    histogram: DegreeHistogram
    max_degree: int
    overflow: int = 0


@dataclass(eq=False)
class ReplicateSet:
    """All replicates of one configuration, stored as a count matrix.

    ``counts[r, k]`` is ``Z_k`` for replicate ``r``. The last column lumps
    degrees above ``k_report_max``.
    """

    config: SimulationConfig
    counts: np.ndarray
    max_degree: np.ndarray

    @property
    def t(self) -> int:
        return self.config.t

    def __len__(self):
        return self.counts.shape[0]

    def __getitem__(self, r: int) -> ReplicateSummary:
        if r < 0:
            r += len(self)
        row = self.counts[r]
        hist = {int(k): int(row[k]) for k in np.flatnonzero(row[:-1])}
        return ReplicateSummary(
            r,
            stream_seed(self.config.master_seed, r),
            DegreeHistogram(hist, self.t),
            int(self.max_degree[r]),
            int(row[-1]),
        )

    def __iter__(self):
        return (self[r] for r in range(len(self)))

    def __eq__(self, other):
        if not isinstance(other, ReplicateSet):
            return NotImplemented
        return (self.t == other.t
                and np.array_equal(self.counts, other.counts)
                and np.array_equal(self.max_degree, other.max_degree))

    def z(self, k: int) -> np.ndarray:
        """``Z_k`` across replicates."""
        if 0 <= k < self.counts.shape[1] - 1:
            return self.counts[:, k].astype(np.int64)
        return np.zeros(len(self), dtype=np.int64)

    def pooled_histogram(self) -> DegreeHistogram:
        total = self.counts[:, :-1].sum(axis=0, dtype=np.int64)
        return DegreeHistogram({int(k): int(total[k]) for k in np.flatnonzero(total)}, self.t)


def _chunks(n: int, parts: int) -> list[tuple[int, int]]:
    bounds = np.linspace(0, n, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def run_replicates(config: SimulationConfig) -> ReplicateSet:
    """Simulate every replicate of ``config``; output is independent of ``workers``."""
    check_capacity(config.t, config.memory_budget)
    R, W = config.replicates, config.columns
    need = estimate_bytes(config.t) * config.workers + R * W * 4
    if need > config.memory_budget:
        raise CapacityError(
            f"t={config.t} x {R} replicates needs ~{need / 2**20:.0f} MiB, "
            f"over the {config.memory_budget / 2**20:.0f} MiB budget"
        )
    counts = np.zeros((R, W), dtype=np.int32)
    maxdeg = np.zeros(R, dtype=np.int64)
    seed = np.uint64(config.master_seed & (2**64 - 1))

    def work(span):
        a, b = span
        _simulate(config.t, seed, a, b, counts[a:b], maxdeg[a:b])

    spans = _chunks(R, min(R, config.workers * 4 if config.workers > 1 else 1))
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            list(pool.map(work, spans))
    else:
        for span in spans:
            work(span)
    return ReplicateSet(config, counts, maxdeg)


# ----------------------------------------------------------------------------
# checks against the theory


def _z_values(summaries, k: int) -> tuple[np.ndarray, int]:
    if isinstance(summaries, ReplicateSet):
        return summaries.z(k), summaries.t
    summaries = list(summaries)
    if not summaries:
        raise DomainError("no replicate summaries given")
    ts = {s.histogram.t for s in summaries}
    if len(ts) != 1:
        raise DomainError(f"summaries taken at different times: {sorted(ts)}")
    return np.array([s.histogram[k] for s in summaries], dtype=np.int64), ts.pop()


def default_lambdas(t: int) -> list[float]:
    """``sqrt(t)``, ``sqrt(t ln t)`` and ``2 sqrt(t ln t)``."""
    base = math.sqrt(t * math.log(t)) if t > 1 else 0.0
    return sorted({math.sqrt(t), base, 2 * base})


@dataclass(frozen=True)
class ConcentrationReport:
    k: int
    t: int
    replicates: int
    mean: float
    lambdas: list[float]
    empirical: list[float]
    bounds: list[float]
    stderr: list[float]
    flagged: list[bool]

    @property
    def any_flagged(self) -> bool:
        return any(self.flagged)

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "mean": self.mean,
            "lambda": self.lambdas,
            "empirical": self.empirical,
            "bound": self.bounds,
            "stderr": self.stderr,
            "flagged": self.flagged,
        }


def concentration_check(summaries, k: int, lambdas: Sequence[float] | None = None,
                        n_se: float = 3.0) -> ConcentrationReport:
    """Empirical ``P(|Z_k - mean| >= lam)`` against the Azuma tail bound.

    Centres at the sample mean because ``E[Z_k(t)]`` is unknown at scale.
    A lambda is flagged when the empirical rate exceeds the bound by more
    than ``n_se`` binomial standard errors, taken at ``p = min(bound, 1)``.
    """
    z, t = _z_values(summaries, k)
    R = z.shape[0]
    if R < 2:
        raise DomainError("concentration needs at least 2 replicates")
    if t < 1:
        raise DomainError("concentration needs t >= 1")
    lambdas = default_lambdas(t) if lambdas is None else [float(x) for x in lambdas]
    mean = float(z.mean())
    dev = np.abs(z - mean)
    emp, bnd, se, flag = [], [], [], []
    for lam in lambdas:
        p_emp = float(np.count_nonzero(dev >= lam)) / R
        bound = azuma_bound(lam, t)
        p0 = min(bound, 1.0)
        s = math.sqrt(p0 * (1 - p0) / R)
        emp.append(p_emp)
        bnd.append(bound)
        se.append(s)
        flag.append(p_emp > bound + n_se * s)
    return ConcentrationReport(k, t, R, mean, list(lambdas), emp, bnd, se, flag)


@dataclass(frozen=True)
class LimitDeviation:
    k: int
    mean_frequency: float
    stderr: float
    b_k: float
    deviation: float
    mean: float = 0.0
    stddev: float = 0.0


def check_limits(summaries, k_max: int, k_min: int = 3) -> list[LimitDeviation]:
    """Per ``k``: ``|mean(Z_k)/t - b_k|`` with the standard error of the mean."""
    out = []
    for k in range(k_min, k_max + 1):
        z, t = _z_values(summaries, k)
        if t < 1:
            raise DomainError("limits need t >= 1")
        R = z.shape[0]
        mean = float(z.mean())
        sd = float(z.std(ddof=1)) if R > 1 else 0.0
        b = float(limit_coefficient(k))
        freq = mean / t
        out.append(LimitDeviation(k, freq, sd / math.sqrt(R) / t, b, abs(freq - b), mean, sd))
    return out


# ----------------------------------------------------------------------------
# power-law fit


@dataclass(frozen=True)
class ExponentFit:
    k_min: int
    exponent: float
    stderr: float
    method: str
    n_tail: float
    ccdf_exponent: float
    zeta_exponent: float

    def to_dict(self) -> dict:
        return {
            "k_min": self.k_min,
            "exponent": self.exponent,
            "stderr": self.stderr,
            "method": self.method,
            "n_tail": self.n_tail,
            "ccdf_exponent": self.ccdf_exponent,
            "zeta_exponent": self.zeta_exponent,
        }


def _tail(histogram, k_min: int) -> tuple[np.ndarray, np.ndarray]:
    counts: Mapping = histogram.counts if isinstance(histogram, DegreeHistogram) else histogram
    pairs = sorted((int(k), float(c)) for k, c in counts.items() if k >= k_min and c > 0)
    if len(pairs) < 10:
        raise DomainError(
            f"need at least 10 distinct degrees >= {k_min} to fit, got {len(pairs)}"
        )
    k, w = map(np.array, zip(*pairs))
    return k.astype(np.float64), w


def fit_exponent(histogram, k_min: int = 6) -> ExponentFit:
    """Discrete maximum-likelihood tail exponent on degrees ``k >= k_min``.

    The model is ``p(k) ∝ Γ(k) / Γ(k + α)`` (Yule-Simon tail, ``~ k^-α``).
    Its normaliser over ``k >= m`` telescopes to
    ``Γ(m) / ((α - 1) Γ(m + α - 1))``. The pure discrete power law (Hurwitz
    zeta normaliser) and the log-log CCDF slope are kept as cross-checks.
    Accepts a :class:`DegreeHistogram` or any ``{k: weight}`` mapping.
    """
    k, w = _tail(histogram, k_min)
    n = w.sum()
    m = float(k_min)

    def score(a):
        return (-(w * special.digamma(k + a)).sum() / n
                + 1.0 / (a - 1.0) + special.digamma(m + a - 1.0))

    lo, hi = 1.0 + 1e-9, 50.0
    alpha = optimize.brentq(score, lo, hi, xtol=1e-12) if score(lo) * score(hi) < 0 else hi
    info = ((w * special.polygamma(1, k + alpha)).sum() / n
            + 1.0 / (alpha - 1.0) ** 2 - special.polygamma(1, m + alpha - 1.0))
    stderr = 1.0 / math.sqrt(n * info) if info > 0 else math.inf

    mean_log = (w * np.log(k)).sum() / n
    zeta_alpha = optimize.minimize_scalar(
        lambda a: a * mean_log + math.log(special.zeta(a, m)),
        bounds=(1.0001, 20.0), method="bounded",
    ).x

    ccdf = np.cumsum(w[::-1])[::-1] / n
    slope = np.polyfit(np.log(k), np.log(ccdf), 1)[0]
    return ExponentFit(k_min, float(alpha), float(stderr), "discrete-mle/yule-simon",
                       float(n), float(1.0 - slope), float(zeta_alpha))


# ----------------------------------------------------------------------------
# maximum degree


@dataclass(frozen=True)
class MaxDegreeScaling:
    t_list: list[int]
    medians: list[float]
    ratios: list[float]
    slope: float | None
    per_t_max: list[np.ndarray] = field(repr=False, default_factory=list)


def max_degree_scaling(t_list: Sequence[int], replicates: int, master_seed: int,
                       workers: int = 1) -> MaxDegreeScaling:
    """Median max degree per ``t``, its ratio to ``sqrt(t)``, and the log-log slope."""
    t_list = [int(t) for t in t_list]
    if not t_list:
        raise DomainError("t_list is empty")
    if any(b <= a for a, b in zip(t_list, t_list[1:])):
        raise DomainError("t_list must be strictly ascending")
    if t_list[0] < 1:
        raise DomainError("t values must be >= 1")
    medians, ratios, raw = [], [], []
    for t in t_list:
        rs = run_replicates(SimulationConfig(t, replicates, master_seed, workers))
        med = float(np.median(rs.max_degree))
        medians.append(med)
        ratios.append(med / math.sqrt(t))
        raw.append(rs.max_degree.copy())
    slope = None
    if len(t_list) >= 2:
        slope = float(np.polyfit(np.log(t_list), np.log(medians), 1)[0])
    return MaxDegreeScaling(t_list, medians, ratios, slope, raw)


# ----------------------------------------------------------------------------
# JSON summary


def simulation_summary(rs: ReplicateSet, concentration_ks: Sequence[int] = (3, 4, 5, 6),
                       lambdas: Sequence[float] | None = None, k_min_fit: int = 6) -> dict:
    """The summary document written by ``ranet simulate``."""
    t = rs.t
    cfg = rs.config
    top = int(min(rs.max_degree.max(), rs.counts.shape[1] - 2))
    per_k = []
    if t >= 1:
        for d in check_limits(rs, top):
            per_k.append({
                "k": d.k,
                "mean": d.mean,
                "stddev": d.stddev,
                "b_k": d.b_k,
                "deviation": d.deviation,
            })
    med = float(np.median(rs.max_degree))
    conc = []
    if t >= 1 and len(rs) >= 2:
        conc = [concentration_check(rs, k, lambdas).to_dict() for k in concentration_ks]
    try:
        exponent = fit_exponent(rs.pooled_histogram(), k_min_fit).to_dict()
    except DomainError:
        exponent = None
    return {
        "t": t,
        "replicates": len(rs),
        "master_seed": cfg.master_seed,
        "per_k": per_k,
        "max_degree": {"median": med, "ratio_sqrt_t": med / math.sqrt(t) if t else None},
        "concentration": conc,
        "exponent": exponent,
    }
