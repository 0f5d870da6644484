import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from transit_measure.core import ValidationError, make_timetable
from transit_measure.lineplan_logit import (LogitAllocation, construct_logit_timetable, departure_gaps,
                                            f_and_fprime, fprime, g_inverse, jump_objective,
                                            logit_lineplan_measure, probability_form,
                                            solve_logit_allocation, tau_of_y)
from transit_measure.lineplan_sp import sp_lineplan_measure
from transit_measure.routeset import Logit, PerceivedTravelTime, measure_closed_form
from transit_measure.timetable import LogitPerceived, representation, timetable_measure

# (1/20) log((1 - e^-10) / (1 - e^-20)), evaluated directly
TAU_HALF = -2.2699449608465824e-06
FIG6_MEASURE = 0.24999773005503914


def test_tau_examples():
    assert tau_of_y(60, 12.5, 60, 0.3) == 12.5
    assert tau_of_y(0.5, 0, 1, 20) == pytest.approx(TAU_HALF, rel=1e-12)
    vals = [tau_of_y(y, 0, 1, 2.0) for y in (1e-1, 1e-3, 1e-6, 1e-12, 1e-300)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < -300
    with pytest.raises(ValidationError):
        tau_of_y(0, 0, 1, 1)


def test_tau_stable_for_extreme_scales():
    # tiny beta*y and huge beta*T
    assert math.isfinite(tau_of_y(1e-9, 3, 60, 1e-6))
    assert tau_of_y(30, 3, 60, 1e3) == pytest.approx(3, abs=1e-12)


def test_f_examples():
    f, _ = f_and_fprime(10, 4, 10, 0.5)
    assert f == pytest.approx(0.5 * 100 + 10 * 4, abs=1e-12)
    assert f_and_fprime(0, 4, 10, 0.5) == (0.0, -math.inf)
    with pytest.raises(ValidationError):
        f_and_fprime(-1, 4, 10, 0.5)


def test_waiting_factor_limit():
    beta = 0.7
    for y in (1e-6, 1e-9, 1e-12):
        _, d = f_and_fprime(y, 0, 1, beta)
        tau = tau_of_y(y, 0, 1, beta)
        assert d - tau == pytest.approx(1 / beta, rel=1e-5)


@given(st.floats(-20, 60), st.floats(0.5, 120), st.floats(0.01, 5), st.integers(0, 2**31))
def test_fprime_increasing(l, T, beta, seed):
    ys = np.sort(np.random.default_rng(seed).uniform(1e-6, 2 * T, size=50))
    vals = [fprime(y, l, T, beta) for y in ys]
    assert all(a <= b for a, b in zip(vals, vals[1:]))


def test_fprime_matches_central_differences(rng):
    for _ in range(200):
        l, T, beta = rng.uniform(-5, 60), rng.uniform(0.5, 120), rng.uniform(0.02, 3)
        y = rng.uniform(0.05, 2) * T
        h = 1e-5 * y
        fd = (f_and_fprime(y + h, l, T, beta)[0] - f_and_fprime(y - h, l, T, beta)[0]) / (2 * h)
        assert fd == pytest.approx(fprime(y, l, T, beta), rel=1e-6, abs=1e-6)


def test_g_inverse_roundtrip(rng):
    for _ in range(200):
        l, T, beta = rng.uniform(0, 60), rng.uniform(0.5, 120), rng.uniform(0.02, 3)
        y = rng.uniform(1e-3, 2) * T
        assert g_inverse(fprime(y, l, T, beta), l, T, beta) == pytest.approx(y, abs=1e-9 * max(1, y))


def test_g_inverse_monotone_and_vanishing():
    mus = np.linspace(-200, 50, 200)
    ys = [g_inverse(m, 10, 60, 0.5) for m in mus]
    assert all(0 < a <= b for a, b in zip(ys, ys[1:]))
    assert g_inverse(-1e4, 10, 60, 0.5) < 1e-300


def test_symmetric_instance_inverse():
    alloc = solve_logit_allocation([3, 3, 3], 9, 0.4)
    for _ in range(3):
        assert g_inverse(alloc.mu, 3, 9, 0.4) == pytest.approx(3, abs=1e-9)


def _check(alloc: LogitAllocation, ls, T, beta):
    y = np.asarray(alloc.jumps)
    assert math.fsum(y) == pytest.approx(T, abs=1e-9)
    assert np.all(y > 0)
    for yi, li in zip(y, ls):
        assert fprime(yi, li, T, beta) == pytest.approx(alloc.mu, abs=1e-8 * max(1, abs(alloc.mu)))
    assert np.abs(alloc.probabilities.as_array() - y / T).max() <= 1e-12


def test_fig6_instance():
    alloc = solve_logit_allocation([0, 0], 1, 20)
    assert alloc.jumps == pytest.approx((0.5, 0.5), abs=1e-8)
    assert alloc.measure == pytest.approx(FIG6_MEASURE, abs=1e-12)
    _check(alloc, [0, 0], 1, 20)


def test_single_route():
    alloc = solve_logit_allocation([7], 10, 0.3)
    assert alloc.jumps == (10,)
    assert alloc.measure == pytest.approx(12, abs=1e-12)


def test_symmetric_closed_form():
    b, T, n, l = 0.22, 60, 4, 10
    expected = l + T / (2 * n) + math.log((1 - math.exp(-b * T / n)) / (1 - math.exp(-b * T))) / b
    assert logit_lineplan_measure([l] * n, T, b) == pytest.approx(expected, abs=1e-10)


def test_large_beta_approaches_sp():
    assert abs(logit_lineplan_measure([20, 30, 15, 10], 60, 1000) - 1465.625 / 60) <= 1e-3


def test_small_period_approaches_route_set():
    ls, b = [20, 30, 15, 10], 0.22
    rs = measure_closed_form(ls, Logit(b), PerceivedTravelTime(b))
    assert abs(logit_lineplan_measure(ls, 1e-6, b) - rs) <= 1e-6


def test_allocation_random(rng):
    for _ in range(60):
        n = int(rng.integers(1, 7))
        ls, T, b = rng.uniform(0, 60, size=n), rng.uniform(1, 120), rng.uniform(0.05, 1.0)
        _check(solve_logit_allocation(ls, T, b), ls, T, b)


def test_convexity_probe(rng):
    for _ in range(200):
        n = int(rng.integers(2, 6))
        ls, T, b = rng.uniform(0, 60, size=n), rng.uniform(1, 120), rng.uniform(0.05, 1.0)
        y1, y2 = rng.dirichlet(np.ones(n)) * T, rng.dirichlet(np.ones(n)) * T
        a = rng.uniform()
        mix = jump_objective(a * y1 + (1 - a) * y2, ls, T, b)
        assert mix <= a * jump_objective(y1, ls, T, b) + (1 - a) * jump_objective(y2, ls, T, b) + 1e-9


def test_departure_parametrization_not_convex():
    def by_first_gap(d1):
        return timetable_measure(make_timetable([0, 0], 1, [0, 1 - d1]), LogitPerceived(20))

    xs = np.arange(1, 1000) / 1000
    v = np.array([by_first_gap(x) for x in xs])
    assert (v[:-2] + v[2:] - 2 * v[1:-1]).min() < 0


def test_optimal_allocation_beats_random_feasible(rng):
    for _ in range(30):
        n = int(rng.integers(2, 6))
        ls, T, b = rng.uniform(0, 60, size=n), rng.uniform(1, 120), rng.uniform(0.05, 1.0)
        best = solve_logit_allocation(ls, T, b).measure
        for y in rng.dirichlet(np.ones(n), size=50) * T:
            assert jump_objective(y, ls, T, b) >= best - 1e-10


def test_construct_examples():
    tt = construct_logit_timetable([0, 0], 1, 20)
    assert tt.departures == pytest.approx((0, 0.5), abs=1e-9)
    ls, T, b = [20, 30, 15, 10], 60, 0.22
    alloc = solve_logit_allocation(ls, T, b)
    a = construct_logit_timetable(ls, T, b, alloc, order=[0, 1, 2, 3])
    c = construct_logit_timetable(ls, T, b, alloc, order=[2, 0, 3, 1])
    assert a.departures != c.departures
    for tt in (a, c):
        assert timetable_measure(tt, LogitPerceived(b)) == pytest.approx(alloc.measure, abs=1e-7)


def test_construct_refuses_non_stationary():
    ls, T, b = [20, 30, 15, 10], 60, 0.22
    alloc = solve_logit_allocation(ls, T, b)
    bad = LogitAllocation((15.0, 15.0, 15.0, 15.0), alloc.mu, alloc.measure, alloc.probabilities)
    with pytest.raises(ValidationError):
        construct_logit_timetable(ls, T, b, bad)


def test_round_trip_properties(rng):
    for _ in range(40):
        n = int(rng.integers(1, 7))
        ls, T, b = rng.uniform(0, 60, size=n), rng.uniform(1, 120), rng.uniform(0.05, 1.0)
        alloc = solve_logit_allocation(ls, T, b)
        order = rng.permutation(n)
        tt = construct_logit_timetable(ls, T, b, alloc, order=order)
        rep = representation(tt, LogitPerceived(b))
        assert np.abs(np.array(rep.jump) - alloc.jumps).max() <= 1e-7
        taus = [tau_of_y(y, l, T, b) for y, l in zip(alloc.jumps, ls)]
        assert np.abs(np.array(rep.at_departure) - taus).max() <= 1e-7
        assert min(departure_gaps(alloc.jumps, b, order)) > 0
        assert min(rep.headway) >= 0
        assert rep.headway_form() == pytest.approx(alloc.measure, abs=1e-7)
        for i in range(n):
            for j in range(n):
                if i != j:
                    assert taus[i] + alloc.jumps[i] - taus[j] > 0


def test_probability_reformulation(rng):
    for _ in range(60):
        n = int(rng.integers(1, 7))
        ls, T, b = rng.uniform(0, 60, size=n), rng.uniform(1, 120), rng.uniform(0.05, 1.0)
        y = rng.dirichlet(np.ones(n)) * T
        assert probability_form(y / T, ls, T, b) == pytest.approx(jump_objective(y, ls, T, b), abs=1e-10)


def test_strict_monotone(rng):
    for _ in range(40):
        n = int(rng.integers(1, 5))
        ls, T, b = rng.uniform(0, 30, size=n), rng.uniform(1, 60), rng.uniform(0.05, 1.0)
        m = logit_lineplan_measure(ls, T, b)
        shorter = ls.copy()
        shorter[rng.integers(0, n)] -= rng.uniform(1e-3, 5)
        assert logit_lineplan_measure(shorter, T, b) < m - 1e-10
        assert logit_lineplan_measure(np.append(ls, rng.uniform(0, 30)), T, b) < m - 1e-10


def test_gaps_positive_for_negligible_routes():
    # long routes get jumps far below the resolution of the departure times
    ls, T, b = [12.3, 23.0, 18.0, 57.5, 51.8, 10.0, 53.1, 35.4], 39.85, 0.96
    alloc = solve_logit_allocation(ls, T, b)
    assert min(alloc.jumps) < 1e-13
    for seed in range(20):
        order = np.random.default_rng(seed).permutation(len(ls))
        gaps = departure_gaps(alloc.jumps, b, order)
        assert min(gaps) > 0
        assert math.fsum(gaps) == pytest.approx(T, abs=1e-9)
        tt = construct_logit_timetable(ls, T, b, alloc, order)
        assert timetable_measure(tt, LogitPerceived(b)) == pytest.approx(alloc.measure, abs=1e-7)
