"""Line plan measure under logit routing with perceived travel time evaluation.

Optimizing the departure times directly is not convex. Optimizing instead
over the jumps ``y_i`` of the observed measure at each departure is: the
objective separates into strictly convex terms ``f_i(y_i)`` under the single
constraint ``sum(y) = T``. Stationarity gives ``f_i'(y_i) = mu`` for all
routes, so an outer bisection on ``mu`` with an inner bisection inverting each
``f_i'`` solves it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import (PeriodicTimetable, RouteSet, RoutingProbabilities, ValidationError,
                   check_beta, check_period)

SUM_TOL = 1e-10
INNER_TOL = 1e-12
STATIONARITY_TOL = 1e-8
_MAX_ITER = 400


def log1mexp(z: float) -> float:
    """``log(1 - exp(-z))`` for ``z > 0``."""
    if z <= 0:
        raise ValueError("log1mexp needs z > 0")
    if z < math.log(2):
        return math.log(-math.expm1(-z))
    return math.log1p(-math.exp(-z))


def tau_of_y(y: float, length: float, period: float, beta: float) -> float:
    """Observed measure just before a departure whose jump is ``y``."""
    if y <= 0:
        raise ValidationError(f"jump must be positive, got {y}")
    return length + (log1mexp(beta * y) - log1mexp(beta * period)) / beta


def _waiting_factor(y: float, beta: float) -> float:
    # y / (1 - exp(-beta*y)), which tends to 1/beta at y = 0
    z = beta * y
    if z == 0:
        return 1.0 / beta
    return y / -math.expm1(-z)


def f_and_fprime(y: float, length: float, period: float, beta: float) -> tuple[float, float]:
    """Per-route objective term and its derivative.

    ``f(y) = y^2/2 + y*tau(y)``, ``f'(y) = tau(y) + y / (1 - exp(-beta*y))``.
    At ``y = 0`` the term is 0 and the derivative is ``-inf``.
    """
    if y < 0:
        raise ValidationError(f"jump must be nonnegative, got {y}")
    if y == 0:
        return 0.0, -math.inf
    tau = tau_of_y(y, length, period, beta)
    return 0.5 * y * y + y * tau, tau + _waiting_factor(y, beta)


def fprime(y: float, length: float, period: float, beta: float) -> float:
    return f_and_fprime(y, length, period, beta)[1]


def _bisect_inverse(mu, length, period, beta, lo, hi):
    tol = INNER_TOL * max(1.0, abs(mu))
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        v = fprime(mid, length, period, beta)
        if abs(v - mu) <= tol:
            return mid
        if v < mu:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def g_inverse(mu: float, length: float, period: float, beta: float,
              bracket: tuple[float, float] | None = None) -> float:
    """Jump ``y > 0`` at which the derivative of the route term equals ``mu``.

    Without a bracket, a lower guess is halved and an upper guess doubled
    until they enclose the root.
    """
    mu = float(mu)
    if not math.isfinite(mu):
        raise ValidationError("multiplier must be finite")
    if bracket is None:
        lo = hi = period
        while fprime(lo, length, period, beta) > mu:
            # stop before beta*y underflows to zero
            if beta * (lo / 2) == 0:
                return lo
            lo /= 2
        while fprime(hi, length, period, beta) < mu:
            hi *= 2
    else:
        lo, hi = bracket
    return _bisect_inverse(mu, length, period, beta, lo, hi)


def route_term(y: float, length: float, period: float, beta: float) -> float:
    return f_and_fprime(y, length, period, beta)[0]


def jump_objective(jumps, lengths, period: float, beta: float) -> float:
    """Timetable measure expressed through the jumps ``y``."""
    return math.fsum(route_term(y, l, period, beta)
                     for y, l in zip(jumps, lengths)) / period


def probability_form(probabilities, lengths, period: float, beta: float) -> float:
    """Same objective written over route use probabilities ``p = y / T``."""
    p = np.asarray(probabilities, dtype=float)
    l = np.asarray(lengths, dtype=float)
    extra = 0.0
    for pi in p:
        if pi > 0:
            extra += pi * (log1mexp(beta * period * pi) - log1mexp(beta * period))
    return float(l @ p + 0.5 * period * (p @ p) + extra / beta)


@dataclass(frozen=True)
class LogitAllocation:
    jumps: tuple[float, ...]
    mu: float
    measure: float
    probabilities: RoutingProbabilities


def solve_logit_allocation(routes, period: float, beta: float) -> LogitAllocation:
    r = routes if isinstance(routes, RouteSet) else RouteSet(tuple(routes))
    T = check_period(period)
    b = check_beta(beta)
    l = r.durations
    n = r.n
    share = T / n

    step = 1.0
    mu_lo = fprime(share, min(l), T, b)
    mu_hi = fprime(share, max(l), T, b)

    def total(mu):
        return math.fsum(g_inverse(mu, li, T, b) for li in l)

    while total(mu_lo) > T:
        mu_lo -= step
        step *= 2
    step = 1.0
    while total(mu_hi) < T:
        mu_hi += step
        step *= 2

    # inner brackets shrink with the outer one since every g_i is increasing
    y_lo = [g_inverse(mu_lo, li, T, b) for li in l]
    y_hi = [g_inverse(mu_hi, li, T, b) for li in l]
    mu, y = mu_lo, y_lo
    for _ in range(_MAX_ITER):
        mu = 0.5 * (mu_lo + mu_hi)
        y = [g_inverse(mu, li, T, b, bracket=(a, c)) if a < c else a
             for li, a, c in zip(l, y_lo, y_hi)]
        s = math.fsum(y)
        if abs(s - T) <= 1e-3 * SUM_TOL * T or not mu_lo < mu < mu_hi:
            break
        if s < T:
            mu_lo, y_lo = mu, y
        else:
            mu_hi, y_hi = mu, y
    if abs(math.fsum(y) - T) > SUM_TOL * T:
        raise ArithmeticError("bisection on the multiplier did not converge")
    return LogitAllocation(
        jumps=tuple(y),
        mu=mu,
        measure=jump_objective(y, l, T, b),
        probabilities=RoutingProbabilities.from_weights(y),
    )


def logit_lineplan_measure(routes, period: float, beta: float) -> float:
    """Perceived travel time of the best timetable for a route set and period."""
    return solve_logit_allocation(routes, period, beta).measure


def _excess_wait(y: float, beta: float) -> float:
    # y / (1 - exp(-beta*y)) - 1/beta without cancellation for small beta*y
    z = beta * y
    if z < 1e-3:
        return (z / 2 + z * z / 12 - z ** 4 / 720) / beta
    return y / -math.expm1(-z) - 1.0 / beta


def departure_gaps(jumps, beta: float, order: Sequence[int]) -> tuple[float, ...]:
    """Headway of each route to its predecessor in the cyclic order.

    At a stationary allocation ``tau_i = mu - y_i / (1 - exp(-beta*y_i))``, so
    the gap ``tau_p - tau_c + y_p`` becomes a difference of waiting terms.
    That form stays positive for jumps far below the resolution of ``tau``.
    """
    gaps = [0.0] * len(jumps)
    for k, cur in enumerate(order):
        prev = order[k - 1]
        gaps[cur] = (_excess_wait(jumps[cur], beta) - _excess_wait(jumps[prev], beta)
                     + jumps[prev])
    return tuple(gaps)


def construct_logit_timetable(routes, period: float, beta: float,
                              alloc: LogitAllocation | None = None,
                              order: Sequence[int] | None = None) -> PeriodicTimetable:
    """Build an optimal timetable with departures in the given cyclic order.

    Route ``j`` following route ``i`` departs ``tau_i(y_i) - tau_j(y_j) + y_i``
    minutes after it; the first route of the order departs at 0. Gaps below
    the float resolution of the departure times collapse into ties.
    """
    r = routes if isinstance(routes, RouteSet) else RouteSet(tuple(routes))
    T = check_period(period)
    b = check_beta(beta)
    if alloc is None:
        alloc = solve_logit_allocation(r, T, b)
    order = [int(i) for i in (range(r.n) if order is None else order)]
    if sorted(order) != list(range(r.n)):
        raise ValidationError(f"{order} is not a permutation of 0..{r.n - 1}")
    y = alloc.jumps
    l = r.durations
    if len(y) != r.n or min(y) <= 0:
        raise ValidationError("allocation does not match the route set")
    slopes = [fprime(yi, li, T, b) for yi, li in zip(y, l)]
    if max(slopes) - min(slopes) > STATIONARITY_TOL * max(1.0, abs(alloc.mu)):
        raise ValidationError("allocation is not stationary, refusing to build a timetable")

    gaps = departure_gaps(y, b, order)
    theta = [0.0] * r.n
    for k in range(1, r.n):
        theta[order[k]] = min(math.fsum(gaps[order[m]] for m in range(1, k + 1)),
                              math.nextafter(T, 0.0))
    return PeriodicTimetable(r, T, tuple(theta))
