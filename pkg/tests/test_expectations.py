import math
from fractions import Fraction

import numpy as np
import pytest

from ranet import DomainError, azuma_bound, limit_coefficient, recurrence_table, verify_error_bound
from ranet.expectations import (
    K_BOUND,
    LimitCoefficients,
    exact_column,
    mean_degree_remainder,
    tail_mass,
)

from reference import recurrence_fractions


def test_basis_and_hand_values():
    tb = recurrence_table(3, 5)
    assert tb.N(3, 1) == 4
    assert tb.N(3, 2) == 1.0
    assert tb.N(3, 3) == pytest.approx(1.4, rel=1e-15)
    assert tb.N(4, 2) == 4.0
    assert all(tb.N(k, 1) == 0 for k in (4, 5))


def test_exact_slice_matches_fraction_reference():
    ref = recurrence_fractions(40, 12)
    tb = recurrence_table(40, 12, exact_t=40)
    for k in range(3, 13):
        for t in range(1, 41):
            assert tb.exact(k, t) == ref[k][t]
    assert exact_column(3, 5) == {3: Fraction(7, 5), 4: Fraction(7, 5), 5: Fraction(16, 5)}


def test_float_table_agrees_with_exact_table():
    tb = recurrence_table(1000, 50, exact_t=1000)
    worst = 0.0
    for t in range(1, 1001):
        for k in range(3, 51):
            exact = tb.exact(k, t)
            value = tb.N(k, t)
            if exact == 0:
                assert value == 0
            else:
                worst = max(worst, abs(value - float(exact)) / float(exact))
    assert worst <= 1e-12


def test_table_invariants():
    tb = recurrence_table(500, 600)
    total = tb.values.sum(axis=0)
    t = np.arange(1, 501)
    assert np.allclose(total, t + 3, rtol=1e-12)
    small = recurrence_table(500, 20)
    assert (small.values.sum(axis=0) <= t + 3 + 1e-9).all()


def test_exact_mass_conservation():
    for t in (1, 5, 50):
        col = exact_column(t, t + 3)
        assert sum(col.values()) == t + 3


def test_limit_coefficients():
    assert limit_coefficient(3) == Fraction(2, 5)
    assert limit_coefficient(4) == Fraction(1, 5)
    assert limit_coefficient(5) == Fraction(4, 35)
    assert limit_coefficient(6) == Fraction(1, 14)
    assert limit_coefficient(10) == Fraction(1, 55)
    for k in (2, 0, -4):
        with pytest.raises(DomainError):
            limit_coefficient(k)


def test_limit_recursion_and_sums():
    b = LimitCoefficients.up_to(10**4).b
    assert LimitCoefficients.up_to(5).K == Fraction(18, 5)
    partial = Fraction(0)
    partial_mean = Fraction(0)
    prev_gap = Fraction(1)
    for k in range(3, 10**4 + 1):
        if k >= 4:
            assert b[k] == b[k - 1] * Fraction(k - 1, k + 2)
        partial += b[k]
        partial_mean += k * b[k]
        assert 1 - partial == tail_mass(k) == Fraction(12, (k + 1) * (k + 2))
        assert 6 - partial_mean == mean_degree_remainder(k)
        assert 1 - partial < prev_gap
        prev_gap = 1 - partial


def test_power_law_slope_of_limits():
    k = np.arange(100, 10**4 + 1)
    b = np.array([float(limit_coefficient(int(x))) for x in k])
    slope = np.polyfit(np.log(k), np.log(b), 1)[0]
    assert 2.9 <= abs(slope) <= 3.1


def test_error_term_examples():
    tb = recurrence_table(2, 4)
    e = tb.error_terms()
    assert abs(e[0, 0] - 3.6) / 3.6 <= 1e-12
    assert e[0, 1] == pytest.approx(0.2, abs=1e-15)


def test_error_bound_small_sweep_and_location():
    res = verify_error_bound(2000, 100)
    assert res.holds and res.value <= K_BOUND
    assert (res.k, res.t) == (3, 1)
    assert res.value == pytest.approx(3.6, rel=1e-12)


def test_error_bound_full_sweep():
    res = verify_error_bound(10**6, 100)
    assert res.value <= 3.6


def test_convergence_rate_per_cell():
    tb = recurrence_table(3000, 60)
    b = np.array([float(limit_coefficient(k)) for k in range(3, 61)])
    t = np.arange(1, 3001)
    gap = np.abs(tb.values / t - b[:, None])
    assert (gap <= 3.6 / t + 1e-12).all()


def test_azuma_bound():
    assert azuma_bound(0, 17) == 2
    assert azuma_bound(3000, 10**4) == pytest.approx(2 * math.exp(-12.5), rel=1e-12)
    assert azuma_bound(3000, 10**4) == pytest.approx(7.45e-6, rel=1e-3)
    t = 10**4
    lam = math.sqrt(t * math.log(t))
    assert azuma_bound(lam, t) == pytest.approx(2 * t ** (-1 / 72), rel=1e-12)
    with pytest.raises(DomainError):
        azuma_bound(-1, 3)
    with pytest.raises(DomainError):
        azuma_bound(1, 0)


def test_table_csv():
    assert recurrence_table(1, 3).to_csv() == "k,t,N,b_k_times_t,e\n3,1,4.0,0.4,3.6\n"
    exact = recurrence_table(2, 4, exact_t=2).to_csv(exact=True)
    assert exact == "k,t,N,b_k_times_t,e\n3,2,1,4/5,1/5\n4,2,4,2/5,18/5\n"


def test_table_arguments():
    with pytest.raises(DomainError):
        recurrence_table(0, 5)
    with pytest.raises(DomainError):
        recurrence_table(5, 2)
    with pytest.raises(DomainError):
        recurrence_table(5, 5).exact(3, 1)
