"""Command line interface: ``transit-measure <command> ...``.

Exit codes: 0 success, 1 invalid input, 2 a verification check failed.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
from pathlib import Path

import numpy as np

from . import lineplan_logit as lpl
from . import lineplan_sp as lps
from . import oracles
from .core import ValidationError
from .instance import FIGURE3, InstanceFile, parse_instance
from .routeset import (Dispersion, Logit, PerceivedTravelTime, ShortestPath, TravelTime,
                       Uniform, measure, measure_closed_form, routing)
from .timetable import LogitPerceived, SpTravelTime, representation, timetable_measure

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2

MODELS = ("uniform", "sp", "logit")
EVALS = ("disp", "tt", "ptt")
EVAL_LABELS = {"disp": "Dispersion", "tt": "Travel Time", "ptt": "Perceived Travel Time"}
MEASURES = tuple(f"{m}_{e}" for m in MODELS for e in EVALS) + (
    "timetable_sp", "timetable_logit", "lineplan_sp", "lineplan_logit")


def _routing(name, beta):
    if name == "uniform":
        return Uniform()
    if name == "sp":
        return ShortestPath()
    if beta is None:
        raise ValidationError("logit routing needs beta (in the file or --beta)")
    return Logit(beta)


def _evaluation(name, beta):
    if name == "disp":
        return Dispersion()
    if name == "tt":
        return TravelTime()
    if beta is None:
        raise ValidationError("perceived travel time needs beta (in the file or --beta)")
    return PerceivedTravelTime(beta)


def _base(model, inst: InstanceFile):
    if model == "sp":
        return SpTravelTime()
    return LogitPerceived(inst.require_beta())


def _fmt(v: float) -> str:
    return repr(float(v))


def _load(path) -> InstanceFile:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc.strerror}") from None
    return parse_instance(text)


def named_measure(inst: InstanceFile, name: str) -> float:
    if name not in MEASURES:
        raise ValidationError(f"unknown measure {name!r}; choose from {', '.join(MEASURES)}")
    kind, _, which = name.partition("_")
    if kind in MODELS:
        return measure(inst.routes, _routing(kind, inst.beta), _evaluation(which, inst.beta))
    if kind == "timetable":
        return timetable_measure(inst.timetable(), _base(which, inst))
    T = inst.require_period()
    if which == "sp":
        return lps.sp_lineplan_measure(inst.routes, T)
    return lpl.logit_lineplan_measure(inst.routes, T, inst.require_beta())


def cmd_routeset(args, inst: InstanceFile, out) -> int:
    if args.all:
        if inst.beta is None:
            raise ValidationError("--all needs beta for the logit and perceived cells")
        width = max(len(v) for v in EVAL_LABELS.values())
        print(f"{'':{width}}  " + "  ".join(f"{m:>20}" for m in ("Uniform", "Shortest Path", "Logit")),
              file=out)
        for e in EVALS:
            vals = [measure(inst.routes, _routing(m, inst.beta), _evaluation(e, inst.beta))
                    for m in MODELS]
            print(f"{EVAL_LABELS[e]:{width}}  " + "  ".join(f"{v:>20.10g}" for v in vals), file=out)
        return EXIT_OK
    if args.model is None or args.eval is None:
        raise ValidationError("routeset needs --model and --eval (or --all)")
    value = measure(inst.routes, _routing(args.model, inst.beta), _evaluation(args.eval, inst.beta))
    print(_fmt(value), file=out)
    return EXIT_OK


def cmd_timetable(args, inst: InstanceFile, out) -> int:
    tt = inst.timetable()
    rep = representation(tt, _base(args.model, inst))
    print(_fmt(rep.headway_form()), file=out)
    print("route,departure,headway,at_departure,jump", file=out)
    for i in rep.order.order:
        print(f"{inst.ids[i]},{tt.departures[i]:.10g},{rep.headway[i]:.10g},"
              f"{rep.at_departure[i]:.10g},{rep.jump[i]:.10g}", file=out)
    return EXIT_OK


def cmd_lineplan(args, inst: InstanceFile, out) -> int:
    T = inst.require_period()
    if args.model == "sp":
        alloc = lps.solve_sp_allocation(inst.routes, T)
        spacing = alloc.spacing
    else:
        alloc = lpl.solve_logit_allocation(inst.routes, T, inst.require_beta())
        spacing = alloc.jumps
    print(f"measure: {_fmt(alloc.measure)}", file=out)
    print(f"mu: {_fmt(alloc.mu)}", file=out)
    print("route,duration,spacing,probability", file=out)
    for rid, l, x, p in zip(inst.ids, inst.durations, spacing, alloc.probabilities):
        print(f"{rid},{l:.10g},{x:.10g},{p:.10g}", file=out)
    return EXIT_OK


def parse_order(text: str | None, inst: InstanceFile) -> list[int]:
    """Route ids, or one-based positions, separated by commas."""
    if text is None:
        return list(range(len(inst.ids)))
    order = []
    for tok in (t.strip() for t in text.split(",")):
        if tok in inst.ids:
            order.append(inst.index_of(tok))
        elif tok.isdigit() and 1 <= int(tok) <= len(inst.ids):
            order.append(int(tok) - 1)
        else:
            raise ValidationError(f"unknown route {tok!r} in --order")
    if sorted(order) != list(range(len(inst.ids))):
        raise ValidationError("--order must list every route exactly once")
    return order


def cmd_construct(args, inst: InstanceFile, out) -> int:
    T = inst.require_period()
    order = parse_order(args.order, inst)
    if args.model == "sp":
        tt = lps.construct_sp_timetable(inst.routes, T, order=order)
    else:
        tt = lpl.construct_logit_timetable(inst.routes, T, inst.require_beta(), order=order)
    result = InstanceFile(inst.ids, inst.durations, T,
                          dict(zip(inst.ids, tt.departures)), inst.beta, inst.od_weight)
    print(result.to_json(), file=out)
    return EXIT_OK


def parse_range(text: str) -> list[float]:
    try:
        lo, hi, step = (float(v) for v in text.split(":"))
    except ValueError:
        raise ValidationError(f"--range must be lo:hi:step, got {text!r}") from None
    if not (math.isfinite(lo) and math.isfinite(hi) and math.isfinite(step)):
        raise ValidationError("--range values must be finite")
    if not lo < hi or step <= 0:
        raise ValidationError("--range needs lo < hi and step > 0")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + k * step, 12) for k in range(count)]


def _with_param(inst: InstanceFile, param: str, value: float) -> InstanceFile:
    if param == "beta":
        return inst.with_overrides(beta=value)
    if param == "period":
        return inst.with_overrides(period=value)
    if param.startswith("l") and param[1:].isdigit():
        k = int(param[1:]) - 1
        if not 0 <= k < len(inst.ids):
            raise ValidationError(f"{param}: route index out of range")
        durations = list(inst.durations)
        durations[k] = value
        return InstanceFile(inst.ids, tuple(durations), inst.period, inst.departures,
                            inst.beta, inst.od_weight)
    raise ValidationError(f"--param must be l<i>, beta or period, got {param!r}")


def cmd_sweep(args, inst: InstanceFile, out) -> int:
    values = parse_range(args.range)
    rows = [(v, named_measure(_with_param(inst, args.param, v), args.measure)) for v in values]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["param", "value"])
    for p, v in rows:
        writer.writerow([repr(p), repr(v)])
    if args.csv:
        Path(args.csv).write_text(buf.getvalue(), encoding="utf-8")
    else:
        out.write(buf.getvalue())
    return EXIT_OK


def _within(est, expected, se, k=3.0, floor=1e-12):
    return abs(est - expected) <= k * se + floor


def verification_checks(inst: InstanceFile, seed: int, samples: int):
    """Yield ``(name, passed, detail)`` for every oracle check the instance allows."""
    beta = inst.beta if inst.beta is not None else 0.22
    r = inst.routes
    worst = 0.0
    for m in (Uniform(), ShortestPath(), Logit(beta)):
        for e in (Dispersion(), TravelTime(), PerceivedTravelTime(beta)):
            worst = max(worst, abs(measure(r, m, e) - measure_closed_form(r, m, e)))
    yield "closed_form_nine_cells", worst <= 1e-10, f"max diff {worst:.3g}"

    for e in (Dispersion(), TravelTime(), PerceivedTravelTime(beta)):
        gap = oracles.simplex_consistency_probe(r, e, 1000, seed)
        yield f"consistency_{type(e).__name__}", gap >= -1e-12, f"min gap {gap:.3g}"

    if inst.period is not None and inst.departures is not None:
        tt = inst.timetable()
        for name, base in (("sp", SpTravelTime()), ("logit", LogitPerceived(beta))):
            rep = representation(tt, base)
            ok = (abs(rep.headway_form() - rep.jump_form()) <= 1e-9
                  and abs(math.fsum(rep.headway) - tt.period) <= 1e-9
                  and abs(math.fsum(rep.jump) - tt.period) <= 1e-9
                  and min(rep.jump) >= -1e-9)
            yield f"duality_{name}", ok, f"forms {rep.headway_form():.12g} / {rep.jump_form():.12g}"
            quad = oracles.integrate_timetable_measure(tt, base, 1e-4 * tt.period)
            diff = abs(quad - rep.headway_form())
            yield f"quadrature_{name}", diff <= 1e-3, f"diff {diff:.3g}"

    if inst.period is not None:
        T = inst.period
        alloc = lps.solve_sp_allocation(r, T)
        tt = lps.construct_sp_timetable(r, T, alloc)
        yield "sp_standard_form", lps.is_standard(tt), ""
        diff = abs(timetable_measure(tt, SpTravelTime()) - alloc.measure)
        yield "sp_construction_measure", diff <= 1e-9, f"diff {diff:.3g}"
        rep = oracles.monte_carlo_shares(tt, ShortestPath(), samples, seed)
        p = alloc.probabilities.as_array()
        se = np.maximum(rep.standard_errors, np.sqrt(p * (1 - p) / samples))
        ok = all(_within(a, b, s) for a, b, s in zip(rep.shares, p, se))
        yield "sp_route_shares", ok, f"shares {np.round(rep.shares, 4).tolist()}"
        if r.n <= 3:
            grid = T / 600
            _, best = oracles.brute_force_lineplan(r, T, SpTravelTime(), grid)
            ok = -1e-9 <= best - alloc.measure <= grid
            yield "sp_brute_force", ok, f"grid best {best:.6g} vs {alloc.measure:.6g}"

        la = lpl.solve_logit_allocation(r, T, beta)
        ltt = lpl.construct_logit_timetable(r, T, beta, la)
        lrep = representation(ltt, LogitPerceived(beta))
        ok = (max(abs(a - b) for a, b in zip(lrep.jump, la.jumps)) <= 1e-7
              and abs(lrep.headway_form() - la.measure) <= 1e-7
              and min(lrep.headway) > 0)
        yield "logit_round_trip", ok, f"measure {la.measure:.10g}"
        rep = oracles.monte_carlo_shares(ltt, Logit(beta), samples, seed)
        p = la.probabilities.as_array()
        se = np.maximum(rep.standard_errors, np.sqrt(p * (1 - p) / samples))
        ok = all(_within(a, b, s) for a, b, s in zip(rep.shares, p, se))
        yield "logit_route_shares", ok, f"shares {np.round(rep.shares, 4).tolist()}"

    g = oracles.gumbel_ptt_estimate(r, beta, max(samples, 100_000), seed)
    target = measure_closed_form(r, Logit(beta), PerceivedTravelTime(beta))
    yield "gumbel_expected_minimum", _within(g.estimate, target, g.standard_error), \
        f"estimate {g.estimate:.6g} vs {target:.6g}"
    probs = routing(r, Logit(beta)).as_array()
    se = np.maximum(g.share_errors, np.sqrt(probs * (1 - probs) / g.samples))
    ok = all(_within(a, b, s) for a, b, s in zip(g.shares, probs, se))
    yield "gumbel_choice_shares", ok, ""


def cmd_verify(args, inst: InstanceFile, out) -> int:
    failed = 0
    for name, ok, detail in verification_checks(inst, args.seed, args.samples):
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip(), file=out)
    print(f"{'all checks passed' if not failed else f'{failed} check(s) failed'}", file=out)
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="transit-measure",
        description="Service quality measures for route sets, timetables and line plans.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, file_required=True):
        if file_required:
            p.add_argument("file", help="instance JSON file")
        p.add_argument("--beta", type=float, help="logit scale parameter (1/min), overrides the file")
        p.add_argument("--period", type=float, help="cycle time (min), overrides the file")

    p = sub.add_parser("routeset", help="route set measures")
    common(p)
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--eval", choices=EVALS)
    p.add_argument("--all", action="store_true", help="print all nine measures")

    p = sub.add_parser("timetable", help="timetable measure and its representation")
    common(p)
    p.add_argument("--model", choices=("sp", "logit"), required=True)

    p = sub.add_parser("lineplan", help="line plan measure and optimal allocation")
    common(p)
    p.add_argument("--model", choices=("sp", "logit"), required=True)

    p = sub.add_parser("construct", help="optimal timetable for a departure order")
    common(p)
    p.add_argument("--model", choices=("sp", "logit"), required=True)
    p.add_argument("--order", help="comma separated route ids or 1-based positions")

    p = sub.add_parser("sweep", help="evaluate a measure over a parameter range")
    common(p)
    p.add_argument("--param", required=True, help="l<i> (1-based route), beta or period")
    p.add_argument("--range", required=True, help="lo:hi:step")
    p.add_argument("--measure", required=True, help=", ".join(MEASURES))
    p.add_argument("--csv", help="write CSV here instead of stdout")

    p = sub.add_parser("verify", help="check analytic results against the oracles")
    common(p, file_required=False)
    p.add_argument("file", nargs="?", help="instance JSON file")
    p.add_argument("--builtin", action="store_true", help="use the built-in example instance")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=100_000)
    return parser


COMMANDS = {
    "routeset": cmd_routeset,
    "timetable": cmd_timetable,
    "lineplan": cmd_lineplan,
    "construct": cmd_construct,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
}


def run(argv=None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        if args.command == "verify" and (args.builtin or args.file is None):
            if not args.builtin:
                raise ValidationError("verify needs an instance file or --builtin")
            inst = FIGURE3
        else:
            inst = _load(args.file)
        inst = inst.with_overrides(period=args.period, beta=args.beta)
        return COMMANDS[args.command](args, inst, out)
    except (ValidationError, ValueError, ArithmeticError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INVALID


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
