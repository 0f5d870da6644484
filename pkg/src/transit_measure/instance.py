"""JSON instance files for the command line tool.

    {"routes": [{"id": "r1", "duration_min": 20.0}, ...],
     "period_min": 60.0,
     "departures_min": {"r1": 5.0, ...},
     "beta": 0.22,
     "od_weight": 1.0}

Only ``routes`` is required.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, replace
from typing import Optional

from .core import PeriodicTimetable, RouteSet, ValidationError


class InstanceError(ValidationError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f"line {line}, column {column}: " if line is not None else ""
        super().__init__(where + message)


@dataclass(frozen=True)
class InstanceFile:
    ids: tuple[str, ...]
    durations: tuple[float, ...]
    period: Optional[float] = None
    departures: Optional[dict] = field(default=None, hash=False)
    beta: Optional[float] = None
    od_weight: float = 1.0

    @property
    def routes(self) -> RouteSet:
        return RouteSet(self.durations)

    def index_of(self, route_id: str) -> int:
        return self.ids.index(route_id)

    def timetable(self) -> PeriodicTimetable:
        if self.period is None or self.departures is None:
            raise ValidationError("the instance has no timetable (period_min and departures_min)")
        return PeriodicTimetable(self.routes, self.period,
                                 tuple(self.departures[i] for i in self.ids))

    def require_period(self) -> float:
        if self.period is None:
            raise ValidationError("a period is required (period_min or --period)")
        return self.period

    def require_beta(self) -> float:
        if self.beta is None:
            raise ValidationError("logit commands need beta (in the file or --beta)")
        return self.beta

    def with_overrides(self, period=None, beta=None) -> "InstanceFile":
        inst = self
        if period is not None:
            inst = replace(inst, period=_positive(period, "period", None))
        if beta is not None:
            inst = replace(inst, beta=_positive(beta, "beta", None))
        return inst

    def to_json(self) -> str:
        doc = {"routes": [{"id": i, "duration_min": d} for i, d in zip(self.ids, self.durations)]}
        if self.period is not None:
            doc["period_min"] = self.period
        if self.departures is not None:
            doc["departures_min"] = {i: self.departures[i] for i in self.ids}
        if self.beta is not None:
            doc["beta"] = self.beta
        doc["od_weight"] = self.od_weight
        return json.dumps(doc, indent=2)


def _locate(text: str | None, key: str):
    """Line and column of the first occurrence of a JSON key, if any."""
    if text is None:
        return None, None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    if not m:
        return None, None
    line = text.count("\n", 0, m.start()) + 1
    col = m.start() - (text.rfind("\n", 0, m.start()) + 1) + 1
    return line, col


def _number(value, key, text):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InstanceError(f"{key} must be a number, got {value!r}", *_locate(text, key))
    value = float(value)
    if not math.isfinite(value):
        raise InstanceError(f"{key} must be finite", *_locate(text, key))
    return value


def _positive(value, key, text):
    value = _number(value, key, text)
    if value <= 0:
        raise InstanceError(f"{key} must be positive, got {value}", *_locate(text, key))
    return value


def instance_from_dict(doc, text: str | None = None) -> InstanceFile:
    if not isinstance(doc, dict):
        raise InstanceError("top level must be a JSON object", 1, 1)
    unknown = set(doc) - {"routes", "period_min", "departures_min", "beta", "od_weight"}
    if unknown:
        key = sorted(unknown)[0]
        raise InstanceError(f"unknown field {key!r}", *_locate(text, key))
    routes = doc.get("routes")
    if not isinstance(routes, list) or not routes:
        raise InstanceError("routes must be a nonempty list", *_locate(text, "routes"))
    ids, durations = [], []
    for k, entry in enumerate(routes):
        if not isinstance(entry, dict) or "id" not in entry or "duration_min" not in entry:
            raise InstanceError(f"route {k + 1} needs 'id' and 'duration_min'",
                                *_locate(text, "routes"))
        rid = str(entry["id"])
        if rid in ids:
            raise InstanceError(f"duplicate route id {rid!r}", *_locate(text, "routes"))
        ids.append(rid)
        durations.append(_number(entry["duration_min"], "duration_min", text))

    period = doc.get("period_min")
    if period is not None:
        period = _positive(period, "period_min", text)

    departures = doc.get("departures_min")
    if departures is not None:
        if period is None:
            raise InstanceError("departures_min requires period_min",
                                *_locate(text, "departures_min"))
        if not isinstance(departures, dict):
            raise InstanceError("departures_min must map route ids to times",
                                *_locate(text, "departures_min"))
        missing = [i for i in ids if i not in departures]
        extra = [i for i in departures if i not in ids]
        if missing or extra:
            raise InstanceError(
                f"departures_min must list every route exactly (missing {missing}, unknown {extra})",
                *_locate(text, "departures_min"))
        parsed = {}
        for rid in ids:
            t = _number(departures[rid], rid, text)
            if not 0 <= t < period:
                raise InstanceError(f"departure of {rid!r} is {t}, outside [0, {period})",
                                    *_locate(text, rid))
            parsed[rid] = t
        departures = parsed

    beta = doc.get("beta")
    if beta is not None:
        beta = _positive(beta, "beta", text)
    weight = doc.get("od_weight", 1.0)
    weight = _number(weight, "od_weight", text)
    if weight < 0:
        raise InstanceError("od_weight must be nonnegative", *_locate(text, "od_weight"))
    return InstanceFile(tuple(ids), tuple(durations), period, departures, beta, weight)


def parse_instance(text: str) -> InstanceFile:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(exc.msg, exc.lineno, exc.colno) from None
    return instance_from_dict(doc, text)


FIGURE3 = InstanceFile(
    ids=("1", "2", "3", "4"),
    durations=(20.0, 30.0, 15.0, 10.0),
    period=60.0,
    departures={"1": 5.0, "2": 10.0, "3": 20.0, "4": 50.0},
    beta=0.22,
)
