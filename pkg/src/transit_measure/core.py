"""Domain types and cyclic arithmetic shared by every measure.

All times are in minutes by convention. Route indices are zero-based in code;
the CLI presents them one-based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

SIMPLEX_TOL = 1e-12


class ValidationError(ValueError):
    """Raised when an input violates a domain invariant."""


def _finite(value, what: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ValidationError(f"{what} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise ValidationError(f"{what} must be finite, got {value!r}")
    return value


def check_beta(beta) -> float:
    """Validate a logit scale parameter (1/minutes) and return it as float."""
    beta = _finite(beta, "beta")
    if beta <= 0:
        raise ValidationError(f"beta must be positive, got {beta}")
    return beta


def check_period(period) -> float:
    period = _finite(period, "period")
    if period <= 0:
        raise ValidationError(f"period must be positive, got {period}")
    return period


def mod_period(x: float, period: float) -> float:
    """Map ``x`` onto ``[0, period)`` by adding a multiple of ``period``."""
    x = _finite(x, "x")
    period = check_period(period)
    r = x - period * math.floor(x / period)
    # floor() can leave r == period when x is a tiny negative number
    if r >= period or r < 0:
        r = 0.0
    return r


@dataclass(frozen=True)
class RouteSet:
    durations: tuple[float, ...]

    def __post_init__(self):
        durations = tuple(_finite(d, "duration") for d in self.durations)
        if not durations:
            raise ValidationError("a route set needs at least one route")
        object.__setattr__(self, "durations", durations)

    @property
    def n(self) -> int:
        return len(self.durations)

    @property
    def lengths(self) -> np.ndarray:
        return np.asarray(self.durations, dtype=float)

    def __len__(self) -> int:
        return len(self.durations)


def make_route_set(durations: Iterable[float]) -> RouteSet:
    return RouteSet(tuple(durations))


@dataclass(frozen=True)
class PeriodicTimetable:
    routes: RouteSet
    period: float
    departures: tuple[float, ...]

    def __post_init__(self):
        period = check_period(self.period)
        departures = tuple(_finite(t, "departure") for t in self.departures)
        if len(departures) != self.routes.n:
            raise ValidationError(
                f"expected {self.routes.n} departures, got {len(departures)}"
            )
        for i, t in enumerate(departures):
            if not 0 <= t < period:
                raise ValidationError(
                    f"departure of route {i + 1} is {t}, outside [0, {period})"
                )
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "departures", departures)

    @property
    def n(self) -> int:
        return self.routes.n


def make_timetable(routes: RouteSet | Sequence[float], period: float,
                   departures: Sequence[float]) -> PeriodicTimetable:
    if not isinstance(routes, RouteSet):
        routes = make_route_set(routes)
    return PeriodicTimetable(routes, period, tuple(departures))


@dataclass(frozen=True)
class RoutingProbabilities:
    probabilities: tuple[float, ...]

    def __post_init__(self):
        p = tuple(_finite(v, "probability") for v in self.probabilities)
        if not p:
            raise ValidationError("empty probability vector")
        if any(v < 0 for v in p):
            raise ValidationError("probabilities must be nonnegative")
        if abs(math.fsum(p) - 1.0) > SIMPLEX_TOL:
            raise ValidationError(f"probabilities sum to {math.fsum(p)!r}, not 1")
        object.__setattr__(self, "probabilities", p)

    @classmethod
    def from_weights(cls, weights) -> "RoutingProbabilities":
        """Normalize nonnegative weights onto the simplex."""
        w = np.asarray(weights, dtype=float)
        return cls(tuple(w / w.sum()))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.probabilities, dtype=float)

    def __len__(self) -> int:
        return len(self.probabilities)

    def __getitem__(self, i):
        return self.probabilities[i]


@dataclass(frozen=True)
class ODWeighting:
    """Measure values of several OD pairs with their demand weights."""

    entries: tuple[tuple[float, float], ...]

    def __post_init__(self):
        entries = tuple(
            (_finite(m, "measure value"), _finite(w, "weight")) for m, w in self.entries
        )
        if not entries:
            raise ValidationError("at least one OD entry is required")
        if any(w < 0 for _, w in entries):
            raise ValidationError("weights must be nonnegative")
        if math.fsum(w for _, w in entries) <= 0:
            raise ValidationError("weights must not all be zero")
        object.__setattr__(self, "entries", entries)


def aggregate_weighted(weighting: ODWeighting | Iterable[tuple[float, float]]) -> float:
    """Demand-weighted average of per-OD measure values."""
    if not isinstance(weighting, ODWeighting):
        weighting = ODWeighting(tuple(weighting))
    total = math.fsum(w for _, w in weighting.entries)
    return math.fsum(m * w for m, w in weighting.entries) / total
