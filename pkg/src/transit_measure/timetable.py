"""Measures for periodic timetables.

A traveler arriving at time ``t`` sees every route lengthened by the waiting
time until its next departure. The timetable measure averages the route set
measure of that observed route set over one period. For shortest path and
logit routing the observed measure decreases with slope -1 between
departures, so the average reduces to a finite sum over departures.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import PeriodicTimetable, RouteSet, ValidationError, check_beta, mod_period
from .routeset import logsumexp_neg


@dataclass(frozen=True)
class SpTravelTime:
    pass


@dataclass(frozen=True)
class LogitPerceived:
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", check_beta(self.beta))


BaseMeasure = Union[SpTravelTime, LogitPerceived]


def route_set_value(lengths, base: BaseMeasure) -> float:
    """Shortest path travel time or logit perceived travel time of a route set."""
    if isinstance(base, SpTravelTime):
        return float(np.min(lengths))
    if isinstance(base, LogitPerceived):
        return -logsumexp_neg(lengths, base.beta) / base.beta
    raise TypeError(f"unknown base measure {base!r}")


def _waits(tt: PeriodicTimetable, t: float) -> np.ndarray:
    return np.array([mod_period(theta - t, tt.period) for theta in tt.departures])


def observed_route_set(tt: PeriodicTimetable, t: float) -> RouteSet:
    if not 0 <= t < tt.period:
        raise ValidationError(f"arrival time {t} outside [0, {tt.period})")
    return RouteSet(tuple(tt.routes.lengths + _waits(tt, t)))


def observed_measure(tt: PeriodicTimetable, t: float, base: BaseMeasure) -> float:
    return route_set_value(observed_route_set(tt, t).lengths, base)


@dataclass(frozen=True)
class CyclicOrder:
    """Routes sorted by departure time, with cyclic neighbours.

    ``predecessor[i]`` and ``successor[i]`` are route indices.
    """

    order: tuple[int, ...]
    predecessor: tuple[int, ...]
    successor: tuple[int, ...]

    @classmethod
    def from_order(cls, order) -> "CyclicOrder":
        order = tuple(int(i) for i in order)
        n = len(order)
        pred = [0] * n
        succ = [0] * n
        for k, i in enumerate(order):
            pred[i] = order[k - 1]
            succ[i] = order[(k + 1) % n]
        return cls(order, tuple(pred), tuple(succ))


def departure_order(tt: PeriodicTimetable) -> CyclicOrder:
    order = sorted(range(tt.n), key=lambda i: (tt.departures[i], i))
    return CyclicOrder.from_order(order)


@dataclass(frozen=True)
class Representation:
    """Sawtooth encoding of the observed measure over one period.

    headway[i]   time since the previous departure (predecessor) of route i
    at_departure[i]  observed measure just before route i departs
    jump[i]      increase of the observed measure when route i departs
    """

    headway: tuple[float, ...]
    at_departure: tuple[float, ...]
    jump: tuple[float, ...]
    period: float
    order: CyclicOrder

    def headway_form(self) -> float:
        d = np.asarray(self.headway)
        tau = np.asarray(self.at_departure)
        return float((0.5 * d * d + d * tau).sum() / self.period)

    def jump_form(self) -> float:
        d = np.asarray(self.jump)
        tau = np.asarray(self.at_departure)
        return float((0.5 * d * d + d * tau).sum() / self.period)


def representation(tt: PeriodicTimetable, base: BaseMeasure) -> Representation:
    """Compute headways, at-departure values and jumps of a timetable.

    Routes departing simultaneously are handled one at a time in departure
    order: each already handled co-departing route has missed its departure
    and waits a full period.
    """
    cyc = departure_order(tt)
    T = tt.period
    theta = tt.departures
    l = tt.routes.lengths
    n = tt.n
    order = cyc.order

    headway = [0.0] * n
    first, last = order[0], order[-1]
    headway[first] = theta[first] + T - theta[last]
    for k in range(1, n):
        i = order[k]
        headway[i] = theta[i] - theta[order[k - 1]]

    tau = [0.0] * n
    k = 0
    while k < n:
        t = theta[order[k]]
        observed = l + _waits(tt, t)
        group_end = k
        while group_end + 1 < n and theta[order[group_end + 1]] == t:
            group_end += 1
        for m in range(k, group_end + 1):
            i = order[m]
            tau[i] = route_set_value(observed, base)
            observed[i] += T
        k = group_end + 1

    jump = [0.0] * n
    for i in range(n):
        s = cyc.successor[i]
        jump[i] = tau[s] + headway[s] - tau[i]
    return Representation(tuple(headway), tuple(tau), tuple(jump), T, cyc)


def timetable_measure(tt: PeriodicTimetable, base: BaseMeasure) -> float:
    """Average observed route set measure for uniformly arriving travelers."""
    return representation(tt, base).headway_form()


def rotate(tt: PeriodicTimetable, shift: float) -> PeriodicTimetable:
    """Shift every departure by ``shift`` modulo the period."""
    return PeriodicTimetable(
        tt.routes, tt.period,
        tuple(mod_period(theta + shift, tt.period) for theta in tt.departures),
    )

