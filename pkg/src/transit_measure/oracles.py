"""Slow, independent reference computations.

Nothing here uses the headway/jump bookkeeping or the allocation solvers;
everything is computed from the definitions (quadrature over arrival times,
exhaustive grids, sampling) so it can check those paths.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core import PeriodicTimetable, RouteSet, ValidationError, check_beta
from .routeset import (Dispersion, EvaluationFunction, Logit, PerceivedTravelTime,
                       RoutingModel, ShortestPath, TravelTime, Uniform, evaluate, measure)
from .timetable import BaseMeasure, LogitPerceived, SpTravelTime

EULER_GAMMA = 0.5772156649015329
_CHUNK = 200_000


def _observed_lengths(lengths, departures, period, t):
    """Observed route lengths for an array of arrival times, shape (len(t), n)."""
    waits = np.mod(np.asarray(departures)[None, :] - np.asarray(t)[:, None], period)
    return np.asarray(lengths)[None, :] + waits


def _row_value(obs: np.ndarray, base: BaseMeasure) -> np.ndarray:
    if isinstance(base, SpTravelTime):
        return obs.min(axis=1)
    b = base.beta
    lo = obs.min(axis=1)
    return lo - np.log(np.exp(-b * (obs - lo[:, None])).sum(axis=1)) / b


def integrate_timetable_measure(tt: PeriodicTimetable, base: BaseMeasure,
                                step: float) -> float:
    """Midpoint-rule average of the observed measure over one period.

    Waiting times only jump at departures, so the period is first cut at the
    departure times and each piece gets its own cells of width at most
    ``step``. No cell then straddles a discontinuity.
    """
    T = tt.period
    if not 0 < step <= T / (10 * tt.n):
        raise ValidationError(f"step must be in (0, T/(10n)] = (0, {T / (10 * tt.n)}]")
    cuts = np.unique(np.concatenate([[0.0, T], tt.departures]))
    total = 0.0
    for a, b in zip(cuts[:-1], cuts[1:]):
        cells = int(math.ceil((b - a) / step))
        h = (b - a) / cells
        for start in range(0, cells, _CHUNK):
            k = np.arange(start, min(cells, start + _CHUNK))
            t = a + (k + 0.5) * h
            obs = _observed_lengths(tt.routes.lengths, tt.departures, T, t)
            total += h * math.fsum(_row_value(obs, base))
    return total / T


def _grid_scores(lengths, period, theta: np.ndarray, base: BaseMeasure) -> np.ndarray:
    """Timetable measure of many candidate timetables at once.

    Uses the explicit sum over departures: the gap to the previous departure
    times (gap/2 + observed value at the departure). Members of a tie after
    the first have a zero gap, so their value does not matter.
    """
    l = np.asarray(lengths, dtype=float)
    idx = np.argsort(theta, axis=1, kind="stable")
    srt = np.take_along_axis(theta, idx, axis=1)
    gaps = np.diff(srt, axis=1, prepend=(srt[:, -1] - period)[:, None])
    # observed lengths at each departure: obs[m, i, j] = l_j + wait_j at theta_i
    waits = np.mod(srt[:, None, :] - srt[:, :, None], period)
    obs = l[idx][:, None, :] + waits
    if isinstance(base, SpTravelTime):
        at_dep = obs.min(axis=2)
    else:
        b = base.beta
        lo = obs.min(axis=2)
        at_dep = lo - np.log(np.exp(-b * (obs - lo[..., None])).sum(axis=2)) / b
    return (0.5 * gaps * gaps + gaps * at_dep).sum(axis=1) / period


def brute_force_lineplan(routes, period: float, base: BaseMeasure,
                         grid: float) -> tuple[tuple[float, ...], float]:
    """Best timetable on a regular grid, with the first route fixed at 0."""
    r = routes if isinstance(routes, RouteSet) else RouteSet(tuple(routes))
    if r.n > 3:
        raise ValidationError("brute force search is limited to 3 routes")
    T = float(period)
    steps = int(round(T / grid))
    if steps < 1 or not math.isclose(steps * grid, T, rel_tol=1e-9):
        raise ValidationError(f"grid {grid} does not divide the period {T}")
    points = np.arange(steps) * (T / steps)
    if r.n == 1:
        theta = np.zeros((1, 1))
        best = _grid_scores(r.lengths, T, theta, base)
        return (0.0,), float(best[0])
    best_val, best_theta = math.inf, None
    combos = itertools.product(points, repeat=r.n - 1)
    while True:
        chunk = list(itertools.islice(combos, _CHUNK))
        if not chunk:
            break
        free = np.asarray(chunk, dtype=float)
        theta = np.hstack([np.zeros((len(free), 1)), free])
        scores = _grid_scores(r.lengths, T, theta, base)
        k = int(np.argmin(scores))
        if scores[k] < best_val:
            best_val, best_theta = float(scores[k]), tuple(float(v) for v in theta[k])
    return best_theta, best_val


@dataclass(frozen=True)
class MonteCarloReport:
    shares: tuple[float, ...]
    standard_errors: tuple[float, ...]
    samples: int
    seed: int
    mean_measure: float
    mean_measure_error: float


def _report(counts, samples, seed, values) -> MonteCarloReport:
    shares = np.asarray(counts, dtype=float) / samples
    se = np.sqrt(shares * (1 - shares) / samples)
    return MonteCarloReport(
        shares=tuple(float(s) for s in shares),
        standard_errors=tuple(float(s) for s in se),
        samples=samples,
        seed=seed,
        mean_measure=float(np.mean(values)),
        mean_measure_error=float(np.std(values) / math.sqrt(samples)),
    )


def monte_carlo_shares(tt: PeriodicTimetable, model: RoutingModel, samples: int,
                       seed: int) -> MonteCarloReport:
    """Route use frequencies of travelers arriving uniformly over the period.

    ``mean_measure`` is the average observed measure: the chosen duration for
    shortest path routing, the logit perceived travel time otherwise.
    """
    if samples < 10_000:
        raise ValidationError("at least 10^4 samples are required")
    if not isinstance(model, (ShortestPath, Logit)):
        raise ValidationError("only shortest path and logit routing are supported")
    rng = np.random.default_rng(seed)
    T = tt.period
    t = rng.uniform(0.0, T, size=samples)
    obs = _observed_lengths(tt.routes.lengths, tt.departures, T, t)
    n = tt.n
    if isinstance(model, ShortestPath):
        choice = obs.argmin(axis=1)
        values = obs[np.arange(samples), choice]
    else:
        b = model.beta
        w = np.exp(-b * (obs - obs.min(axis=1, keepdims=True)))
        cdf = np.cumsum(w, axis=1)
        u = rng.uniform(size=samples) * cdf[:, -1]
        choice = np.minimum((cdf < u[:, None]).sum(axis=1), n - 1)
        values = _row_value(obs, LogitPerceived(b))
    counts = np.bincount(choice, minlength=n)
    return _report(counts, samples, seed, values)


@dataclass(frozen=True)
class GumbelReport:
    estimate: float
    standard_error: float
    shares: tuple[float, ...]
    share_errors: tuple[float, ...]
    samples: int
    seed: int


def gumbel_ptt_estimate(routes, beta: float, samples: int, seed: int) -> GumbelReport:
    """Expected minimum perceived duration ``l - eps/beta`` with Gumbel ``eps``.

    Standard Gumbel errors have mean gamma, which shifts the expectation by
    ``-gamma/beta``; the estimate adds it back.
    """
    r = routes if isinstance(routes, RouteSet) else RouteSet(tuple(routes))
    b = check_beta(beta)
    if samples < 100_000:
        raise ValidationError("at least 10^5 samples are required")
    rng = np.random.default_rng(seed)
    l = r.lengths
    counts = np.zeros(r.n, dtype=np.int64)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < samples:
        m = min(_CHUNK, samples - done)
        u = rng.uniform(size=(m, r.n))
        eps = -np.log(-np.log(u))
        chi = l[None, :] - eps / b
        k = chi.argmin(axis=1)
        mins = chi[np.arange(m), k]
        counts += np.bincount(k, minlength=r.n)
        total += mins.sum()
        total_sq += (mins * mins).sum()
        done += m
    mean = total / samples
    var = max(total_sq / samples - mean * mean, 0.0)
    shares = counts / samples
    return GumbelReport(
        estimate=float(mean + EULER_GAMMA / b),
        standard_error=math.sqrt(var / samples),
        shares=tuple(float(s) for s in shares),
        share_errors=tuple(float(s) for s in np.sqrt(shares * (1 - shares) / samples)),
        samples=samples,
        seed=seed,
    )


def consistent_model(evaluation: EvaluationFunction) -> RoutingModel:
    if isinstance(evaluation, Dispersion):
        return Uniform()
    if isinstance(evaluation, TravelTime):
        return ShortestPath()
    if isinstance(evaluation, PerceivedTravelTime):
        return Logit(evaluation.beta)
    raise TypeError(f"unknown evaluation function {evaluation!r}")


def simplex_consistency_probe(routes, evaluation: EvaluationFunction, trials: int,
                              seed: int, model: RoutingModel | None = None) -> float:
    """Smallest ``evaluate(p) - measure`` over random simplex points.

    With the consistent routing (the default) the gap is never negative.
    Passing another routing model turns this into a search for an
    inconsistency witness.
    """
    if trials < 1000:
        raise ValidationError("at least 10^3 trials are required")
    r = routes if isinstance(routes, RouteSet) else RouteSet(tuple(routes))
    if model is None:
        model = consistent_model(evaluation)
    target = measure(r, model, evaluation)
    rng = np.random.default_rng(seed)
    points = rng.dirichlet(np.ones(r.n), size=trials)
    gaps = []
    for p in points:
        gaps.append(evaluate(r, p / p.sum(), evaluation) - target)
    # vertices are on the simplex too and are where shortest path routing lives
    for i in range(r.n):
        e = np.zeros(r.n)
        e[i] = 1.0
        gaps.append(evaluate(r, e, evaluation) - target)
    return float(min(gaps))
