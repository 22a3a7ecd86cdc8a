"""Acceptance criteria, shared by ``ranet verify`` and the test suite.

Each criterion returns a :class:`CriterionResult` carrying the measured
values. ``quick=True`` shrinks problem sizes by 10x. Tolerances are fixed
except where they follow from the problem size: criterion 7 derives its
tolerance from ``t``.
"""
from __future__ import annotations

import json
import math
import os
import subprocess
import sys
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import core, expectations, montecarlo, oracle


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    measured: str
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.number:>2}. {self.name}: {self.measured} ({self.seconds:.1f}s)"


def _timed(number: int, name: str, fn: Callable[[], tuple[bool, str]]) -> CriterionResult:
    start = time.perf_counter()
    passed, measured = fn()
    return CriterionResult(number, name, bool(passed), measured, time.perf_counter() - start)


def k_bound(quick: bool = False) -> CriterionResult:
    t_max = 10**5 if quick else 10**6

    def run():
        start = time.perf_counter()
        sweep = expectations.verify_error_bound(t_max, 100)
        elapsed = time.perf_counter() - start
        e31 = float(expectations.recurrence_table(1, 3).error_terms()[0, 0])
        rel = abs(e31 - 3.6) / 3.6
        ok = sweep.holds and rel <= 1e-12 and elapsed < 30
        return ok, (f"sup|e_k(t)|={sweep.value!r} at (k={sweep.k}, t={sweep.t}) over t<={t_max}, "
                    f"k<=100; e_3(1)={e31!r} (rel err {rel:.1e}); sweep {elapsed:.2f}s")

    return _timed(1, "K-bound 3.6", run)


def limit_coefficients(quick: bool = False) -> CriterionResult:
    k_top = 10**3 if quick else 10**4

    def run():
        b = expectations.limit_coefficient
        first_three = (b(3), b(4), b(5)) == (Fraction(2, 5), Fraction(1, 5), Fraction(4, 35))
        closed = all(b(k) * k * (k + 1) * (k + 2) == 24 for k in range(3, k_top + 1))
        recursion = all(b(k) == b(k - 1) * Fraction(k - 1, k + 2) for k in range(4, k_top + 1))
        partial = Fraction(0)
        sums_ok = True
        for k in range(3, k_top + 1):
            partial += b(k)
            if 1 - partial != Fraction(12, (k + 1) * (k + 2)):
                sums_ok = False
                break
        ok = first_three and closed and recursion and sums_ok
        return ok, (f"b_3,b_4,b_5 exact={first_three}; b_k*k(k+1)(k+2)=24 for k<={k_top}: {closed}; "
                    f"b_k recursion: {recursion}; tail 12/((K+1)(K+2)): {sums_ok}")

    return _timed(2, "Limit coefficients", run)


def oracle_equivalence(quick: bool = False) -> CriterionResult:
    R = 10**4 if quick else 10**5

    def run():
        start = time.perf_counter()
        worst = 0.0
        exact_ok = True
        for t in range(1, 7):
            rs = montecarlo.run_replicates(montecarlo.SimulationConfig(t, R, 20240 + t))
            truth = oracle.exact_expectations(t)
            for k in range(2, t + 4):
                z = rs.z(k)
                mean = z.mean()
                target = float(truth[k])
                se = z.std(ddof=1) / math.sqrt(R)
                if t <= 3:
                    exact_ok &= truth[k].denominator == 1 and bool((z == truth[k].numerator).all())
                if se == 0:
                    score = 0.0 if mean == target else math.inf
                else:
                    score = abs(mean - target) / se
                worst = max(worst, score)
        elapsed = time.perf_counter() - start
        ok = worst <= 4 and exact_ok and elapsed < 60
        return ok, (f"worst |mean - E|/SE = {worst:.2f} over t<=6, R={R}; "
                    f"t<=3 exact: {exact_ok}; {elapsed:.1f}s")

    return _timed(3, "Oracle equivalence", run)


def structural_invariants(quick: bool = False) -> CriterionResult:
    seeds = 10 if quick else 100

    def run():
        violations = 0
        checked = 0
        for t in (10, 10**2, 10**3, 10**4):
            for seed in range(seeds):
                s = core.generate(t, seed, edges=True)
                e = s.edges().astype(np.int64)
                lo, hi = np.minimum(e[:, 0], e[:, 1]), np.maximum(e[:, 0], e[:, 1])
                distinct_edges = np.unique(lo * (t + 3) + hi).shape[0]
                distinct_vertices = np.unique(e).shape[0]
                checks = (
                    s.num_vertices == t + 3 and distinct_vertices == t + 3,
                    distinct_edges == 3 * (t + 1) and e.shape[0] == 3 * (t + 1),
                    s.faces.shape[0] == 2 * t + 1,
                    int(s.degrees.sum()) == 6 * (t + 1),
                    int(s.degrees.min()) == 3,
                    np.array_equal(np.bincount(e.ravel(), minlength=t + 3), s.degrees),
                )
                violations += checks.count(False)
                checked += 1
        return violations == 0, f"{violations} violations over {checked} states"

    return _timed(4, "Structural invariants", run)


def bounded_difference(quick: bool = False) -> CriterionResult:
    samples = 10**3 if quick else 10**4

    def run():
        start = time.perf_counter()
        reports = [oracle.exhaustive_coupling_check(t) for t in range(1, 6)]
        sampled = oracle.sampled_coupling_check(100, samples, 2)
        elapsed = time.perf_counter() - start
        ex_max = max(r.max_difference for r in reports)
        ex_v = max(r.max_differing_vertices for r in reports)
        ok = all(r.within_bound for r in reports) and sampled.within_bound and elapsed < 60
        return ok, (f"exhaustive t<=5: max diff {ex_max}, max moved vertices {ex_v} "
                    f"({sum(r.pairs_checked for r in reports)} pairs); sampled t=100: max diff "
                    f"{sampled.max_difference}, moved {sampled.max_differing_vertices} "
                    f"({sampled.pairs_checked} pairs); {elapsed:.1f}s")

    return _timed(5, "Bounded difference <= 6", run)


def concentration(quick: bool = False) -> CriterionResult:
    t, R = (10**3, 100) if quick else (10**4, 10**3)

    def run():
        start = time.perf_counter()
        rs = montecarlo.run_replicates(montecarlo.SimulationConfig(t, R, 6))
        reports = [montecarlo.concentration_check(rs, k, [100, 300, 1000, 3000]) for k in (3, 4, 5, 6)]
        elapsed = time.perf_counter() - start
        flagged = sum(sum(r.flagged) for r in reports)
        worst = max(e - b for r in reports for e, b in zip(r.empirical, r.bounds))
        ok = flagged == 0 and elapsed < 120
        return ok, (f"t={t}, R={R}: {flagged} flagged lambdas; "
                    f"max(empirical - bound) = {worst:.3g}; {elapsed:.1f}s")

    return _timed(6, "Concentration tail bound", run)


def convergence_tolerance(t: int) -> float:
    """``sqrt(t ln t)/t + 3.6/t`` rounded up to a multiple of 0.005."""
    raw = math.sqrt(t * math.log(t)) / t + 3.6 / t
    return math.ceil(raw / 0.005 - 1e-9) * 0.005


def degree_convergence(quick: bool = False) -> CriterionResult:
    t = 10**5 if quick else 10**6
    tol = convergence_tolerance(t)

    def run():
        start = time.perf_counter()
        hist = core.degree_histogram(core.generate(t, 7))
        elapsed = time.perf_counter() - start
        devs = {k: abs(hist[k] / t - float(expectations.limit_coefficient(k))) for k in range(3, 11)}
        worst = max(devs.values())
        ok = worst <= tol and elapsed < 10
        return ok, f"t={t}: max_k |Z_k/t - b_k| = {worst:.2e} (tol {tol:g}); {elapsed:.2f}s"

    return _timed(7, "Degree-frequency convergence", run)


def powerlaw_exponent(quick: bool = False) -> CriterionResult:
    t = 10**5 if quick else 10**6

    def run():
        law = {k: float(expectations.limit_coefficient(k)) for k in range(6, 10**4 + 1)}
        exact_fit = montecarlo.fit_exponent(law, 6)
        run_fit = montecarlo.fit_exponent(core.degree_histogram(core.generate(t, 8)), 6)
        ok = 2.95 <= exact_fit.exponent <= 3.05 and 2.7 <= run_fit.exponent <= 3.3
        return ok, (f"exact b_k law: {exact_fit.exponent:.4f}; t={t} run: "
                    f"{run_fit.exponent:.4f} +/- {run_fit.stderr:.4f} "
                    f"(ccdf cross-check {run_fit.ccdf_exponent:.3f})")

    return _timed(8, "Power-law exponent", run)


def max_degree_slope(quick: bool = False) -> CriterionResult:
    ts = [10**3, 10**4, 10**5] if quick else [10**4, 10**5, 10**6]

    def run():
        res = montecarlo.max_degree_scaling(ts, 30, 9)
        ok = 0.35 <= res.slope <= 0.65
        ratios = ", ".join(f"{r:.2f}" for r in res.ratios)
        return ok, f"slope {res.slope:.4f} over t={ts}; median/sqrt(t) = [{ratios}]"

    return _timed(9, "Max-degree scaling", run)


def bench_generate(t: int, seed: int = 1) -> dict:
    out = subprocess.run(
        [sys.executable, "-m", "ranet._bench", str(t), str(seed)],
        check=True, capture_output=True, text=True,
    )
    return json.loads(out.stdout)


def available_cpus() -> int:
    if hasattr(os, "sched_getaffinity"):
        return len(os.sched_getaffinity(0))
    return os.cpu_count() or 1


def performance(quick: bool = False) -> CriterionResult:
    t_gen, limit_s = (10**6, 1.0) if quick else (10**7, 10.0)
    t_sim = 10**4 if quick else 10**5

    def run():
        bench = bench_generate(t_gen)
        gen_ok = bench["seconds"] <= limit_s and bench["max_rss_mb"] <= 500
        timings, outputs = {}, {}
        for w in (1, 4):
            cfg = montecarlo.SimulationConfig(t_sim, 100, 10, workers=w)
            montecarlo.run_replicates(montecarlo.SimulationConfig(10, 4, 0, workers=w))
            start = time.perf_counter()
            outputs[w] = montecarlo.run_replicates(cfg)
            timings[w] = time.perf_counter() - start
        speedup = timings[1] / timings[4]
        identical = outputs[1] == outputs[4]
        ok = gen_ok and speedup >= 3 and identical
        return ok, (f"generate t={t_gen}: {bench['seconds']:.2f}s, peak RSS "
                    f"{bench['max_rss_mb']:.0f} MB; simulate t={t_sim}, R=100: 4-worker speedup "
                    f"{speedup:.2f}x (cpus available: {available_cpus()}), "
                    f"identical output: {identical}")

    return _timed(10, "Performance", run)


CRITERIA = [
    k_bound,
    limit_coefficients,
    oracle_equivalence,
    structural_invariants,
    bounded_difference,
    concentration,
    degree_convergence,
    powerlaw_exponent,
    max_degree_slope,
    performance,
]


def run_all(quick: bool = False, only: set[int] | None = None, echo=None) -> list[CriterionResult]:
    results = []
    for number, crit in enumerate(CRITERIA, start=1):
        if only and number not in only:
            continue
        res = crit(quick)
        if echo:
            echo(res.line())
        results.append(res)
    return results
