"""Line plan measure under shortest path routing with travel time evaluation.

The best timetable spaces departures so that route ``i`` is the best option
for a window of ``x_i`` minutes before it departs. The spacings solve a
quadratic resource allocation problem whose optimum is ``x_i = max(0, mu - l_i)``
for a multiplier ``mu`` found by sweeping the sorted route lengths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (PeriodicTimetable, RouteSet, RoutingProbabilities, ValidationError,
                   check_period)
from .timetable import SpTravelTime, representation

STANDARD_TOL = 1e-9


@dataclass(frozen=True)
class SpAllocation:
    spacing: tuple[float, ...]
    mu: float
    measure: float
    probabilities: RoutingProbabilities


def _as_routes(routes) -> RouteSet:
    return routes if isinstance(routes, RouteSet) else RouteSet(tuple(routes))


def _multiplier(lengths: np.ndarray, period: float) -> float:
    """Solve ``sum(max(0, mu - l)) = period`` for ``mu``.

    Between consecutive sorted lengths the left-hand side is linear with slope
    equal to the number of active routes, so each segment gives the candidate
    ``(period + sum of active lengths) / active``. The first candidate that
    does not pass the next breakpoint is the root; past the last breakpoint
    all routes are active.
    """
    ls = np.sort(lengths)
    n = len(ls)
    running = 0.0
    for k in range(n):
        running += ls[k]
        mu = (period + running) / (k + 1)
        if k + 1 == n or mu <= ls[k + 1]:
            return float(mu)
    raise AssertionError("unreachable")


def spacing_objective(spacing, lengths, period: float) -> float:
    x = np.asarray(spacing, dtype=float)
    l = np.asarray(lengths, dtype=float)
    return float((0.5 * x * x + x * l).sum() / period)


def solve_sp_allocation(routes, period: float) -> SpAllocation:
    r = _as_routes(routes)
    T = check_period(period)
    l = r.lengths
    mu = _multiplier(l, T)
    x = np.maximum(0.0, mu - l)
    return SpAllocation(
        spacing=tuple(float(v) for v in x),
        mu=mu,
        measure=spacing_objective(x, l, T),
        probabilities=RoutingProbabilities.from_weights(x),
    )


def sp_lineplan_measure(routes, period: float) -> float:
    """Travel time of the best timetable for a route set and period."""
    return solve_sp_allocation(routes, period).measure


def _check_order(order, n: int) -> list[int]:
    order = [int(i) for i in order]
    if sorted(order) != list(range(n)):
        raise ValidationError(f"{order} is not a permutation of 0..{n - 1}")
    return order


def construct_sp_timetable(routes, period: float, alloc: SpAllocation | None = None,
                           order: Sequence[int] | None = None) -> PeriodicTimetable:
    """Build an optimal timetable with departures in the given cyclic order.

    Each route departs ``spacing`` minutes after its predecessor in the order.
    The first route departs at 0. If it carries no spacing, the cycle is
    started instead at the next route in the order that does, which leaves the
    cyclic order unchanged and keeps every departure inside the period.
    """
    r = _as_routes(routes)
    T = check_period(period)
    if alloc is None:
        alloc = solve_sp_allocation(r, T)
    order = _check_order(range(r.n) if order is None else order, r.n)
    x = alloc.spacing
    start = next((k for k, i in enumerate(order) if x[i] > STANDARD_TOL * T), 0)
    order = order[start:] + order[:start]
    theta = [0.0] * r.n
    t = 0.0
    for i in order[1:]:
        t += x[i]
        theta[i] = t
    return PeriodicTimetable(r, T, tuple(theta))


def is_standard(tt: PeriodicTimetable, tol: float = STANDARD_TOL) -> bool:
    """Check that every departure with a positive headway is a best option.

    Simultaneous departures are judged as a group: ties are arbitrary, so
    the group passes when its shortest member is optimal at the departure.
    """
    rep = representation(tt, SpTravelTime())
    l = tt.routes.durations
    order = rep.order.order
    theta = tt.departures
    k = 0
    while k < tt.n:
        head = order[k]
        end = k
        while end + 1 < tt.n and theta[order[end + 1]] == theta[head]:
            end += 1
        group_best = min(l[order[m]] for m in range(k, end + 1))
        if rep.headway[head] > tol and abs(rep.at_departure[head] - group_best) > tol:
            return False
        k = end + 1
    return True


def simpson_form(probabilities, lengths, period: float) -> float:
    """Expected travel time plus expected waiting ``T/2 * sum(p^2)``."""
    p = np.asarray(probabilities, dtype=float)
    l = np.asarray(lengths, dtype=float)
    return float(l @ p + 0.5 * period * math.fsum(p * p))
