"""Route choice models, evaluation functions and the nine route set measures."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from .core import RouteSet, RoutingProbabilities, check_beta


@dataclass(frozen=True)
class Uniform:
    pass


@dataclass(frozen=True)
class ShortestPath:
    pass


@dataclass(frozen=True)
class Logit:
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", check_beta(self.beta))


RoutingModel = Union[Uniform, ShortestPath, Logit]


@dataclass(frozen=True)
class Dispersion:
    pass


@dataclass(frozen=True)
class TravelTime:
    pass


@dataclass(frozen=True)
class PerceivedTravelTime:
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "beta", check_beta(self.beta))


EvaluationFunction = Union[Dispersion, TravelTime, PerceivedTravelTime]


class Dominance(enum.Enum):
    STRICT = "strict"
    WEAK = "weak"
    NONE = "none"


def _lengths(routes) -> np.ndarray:
    if isinstance(routes, RouteSet):
        return routes.lengths
    return RouteSet(tuple(routes)).lengths


def logsumexp_neg(lengths, beta: float) -> float:
    """``log(sum(exp(-beta * l)))`` shifted by the shortest length."""
    l = np.asarray(lengths, dtype=float)
    lmin = l.min()
    return float(-beta * lmin + np.log(np.exp(-beta * (l - lmin)).sum()))


def logit_probabilities(lengths, beta: float) -> np.ndarray:
    l = np.asarray(lengths, dtype=float)
    w = np.exp(-beta * (l - l.min()))
    return w / w.sum()


def _xlogx(p: np.ndarray) -> np.ndarray:
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def routing(routes, model: RoutingModel) -> RoutingProbabilities:
    l = _lengths(routes)
    n = len(l)
    if isinstance(model, Uniform):
        p = np.full(n, 1.0 / n)
    elif isinstance(model, ShortestPath):
        p = np.zeros(n)
        p[int(np.argmin(l))] = 1.0  # argmin returns the lowest index on ties
    elif isinstance(model, Logit):
        p = logit_probabilities(l, model.beta)
    else:
        raise TypeError(f"unknown routing model {model!r}")
    return RoutingProbabilities.from_weights(p)


def evaluate(routes, probabilities, evaluation: EvaluationFunction) -> float:
    """Score a route set for the given route use probabilities.

    Zero probabilities contribute nothing to the entropy terms.
    """
    l = _lengths(routes)
    if not isinstance(probabilities, RoutingProbabilities):
        probabilities = RoutingProbabilities(tuple(probabilities))
    p = probabilities.as_array()
    if len(p) != len(l):
        raise ValueError("probability vector does not match the route set")
    if isinstance(evaluation, Dispersion):
        return float(_xlogx(p).sum())
    if isinstance(evaluation, TravelTime):
        return float(l @ p)
    if isinstance(evaluation, PerceivedTravelTime):
        return float(l @ p + _xlogx(p).sum() / evaluation.beta)
    raise TypeError(f"unknown evaluation function {evaluation!r}")


def measure(routes, model: RoutingModel, evaluation: EvaluationFunction) -> float:
    return evaluate(routes, routing(routes, model), evaluation)


def measure_closed_form(routes, model: RoutingModel,
                        evaluation: EvaluationFunction) -> float:
    """Evaluate a measure through its closed-form expression.

    For logit routing with perceived travel time under two different scale
    parameters, the general identity ``sum(p*l)(1 - b_r/b_e) - lse/b_e`` is
    used; it reduces to ``-lse/b`` when both parameters agree.
    """
    l = _lengths(routes)
    n = len(l)
    if isinstance(model, Uniform):
        if isinstance(evaluation, Dispersion):
            return -float(np.log(n))
        if isinstance(evaluation, TravelTime):
            return float(l.mean())
        if isinstance(evaluation, PerceivedTravelTime):
            return float(l.mean() - np.log(n) / evaluation.beta)
    elif isinstance(model, ShortestPath):
        if isinstance(evaluation, Dispersion):
            return 0.0
        if isinstance(evaluation, (TravelTime, PerceivedTravelTime)):
            return float(l.min())
    elif isinstance(model, Logit):
        b = model.beta
        lse = logsumexp_neg(l, b)
        mean_len = float(logit_probabilities(l, b) @ l)
        if isinstance(evaluation, Dispersion):
            return -b * mean_len - lse
        if isinstance(evaluation, TravelTime):
            return mean_len
        if isinstance(evaluation, PerceivedTravelTime):
            be = evaluation.beta
            if be == b:
                return -lse / b
            return mean_len * (1.0 - b / be) - lse / be
    raise TypeError(f"unsupported combination {model!r} / {evaluation!r}")


def dominance(routes, other) -> Dominance:
    """Check whether ``routes`` dominates ``other``.

    Weak dominance holds when every route of ``other`` can be matched to a
    distinct route of ``routes`` that is no longer. The sorted greedy matching
    decides this. It is strict when some matched pair is strictly shorter or
    ``routes`` has extra routes.
    """
    a = np.sort(_lengths(routes))
    b = np.sort(_lengths(other))
    if len(a) < len(b) or np.any(a[: len(b)] > b):
        return Dominance.NONE
    if len(a) > len(b) or np.any(a[: len(b)] < b):
        return Dominance.STRICT
    return Dominance.WEAK


def dominates(routes, other, strict: bool = False) -> bool:
    d = dominance(routes, other)
    if strict:
        return d is Dominance.STRICT
    return d is not Dominance.NONE
