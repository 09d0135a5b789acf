"""Command-line front end.

    sircontrol simulate [--scenario FILE] [--out DIR] [--step DAYS]
    sircontrol optimize [--scenario FILE] [--out DIR] [--tol DAYS]
    sircontrol scan     [--scenario FILE] [--out DIR] [--tol DAYS] [--workers N]
    sircontrol figure {fig1,fig2,fig3,fig4} [--out DIR]

Omitted scenario keys take the reference values (beta 0.6, gamma 0.2,
S0 0.9999, I0 0.0001).  Results go to ``--out``, or ``$SIRCONTROL_OUT``, or
``./out``.  Exit status: 0 success, 2 parse or validation error, 3 numeric
failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import os
import sys
from pathlib import Path

from .bounds import herd_immunity_time
from .controls import ZERO, costs
from .core import integrate, peak_prevalence, total_incidence
from .errors import (
    InvalidControlError,
    InvalidParamsError,
    InvalidStateError,
    SIRControlError,
)
from .figures import FIGURES, write_figure
from .optimizer import budget_level_scan, optimal_lockdown
from .scenario import Scenario, ScenarioError, format_scenario, load_scenario

log = logging.getLogger("sircontrol")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERIC = 3
OUT_ENV = "SIRCONTROL_OUT"
VALIDATION_ERRORS = (
    ScenarioError, InvalidStateError, InvalidParamsError, InvalidControlError, FileNotFoundError,
)


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUT_ENV) or "out")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scenario(args) -> Scenario:
    sc = load_scenario(args.scenario) if args.scenario else Scenario()
    if getattr(args, "step", None) is not None:
        try:
            solver = dataclasses.replace(sc.solver, step=args.step)
        except ValueError as exc:
            raise ScenarioError(str(exc), key="--step") from None
        sc = dataclasses.replace(sc, solver=solver)
    return sc


def _emit(record: dict) -> None:
    print(json.dumps(record, sort_keys=True))


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    strategy = sc.strategy or ZERO
    traj = integrate(sc.params, sc.initial, strategy, sc.solver)
    out = _out_dir(args) / "trajectory.csv"
    with out.open("w", newline="") as fh:
        traj.to_csv(fh)
    report = costs(strategy, sc.params, sc.initial, sc.solver)
    t_h = herd_immunity_time(traj)
    _emit({
        "strategy": strategy.kind,
        "incidence": total_incidence(sc.params, sc.initial, strategy, sc.solver),
        "peak": peak_prevalence(traj),
        "l1": report.l1,
        "l0": report.l0,
        "sup": report.sup,
        "herd_immunity_time": t_h if t_h != float("inf") else None,
        "trajectory": str(out),
    })
    return EXIT_OK


def _single_budget(sc: Scenario) -> tuple[float, float]:
    if len(sc.c1) != 1 or len(sc.c_inf) != 1:
        raise ScenarioError("optimize needs exactly one budget.c1 and one budget.c_inf value",
                            key="budget")
    return sc.c1[0], sc.c_inf[0]


def cmd_optimize(args) -> int:
    sc = _scenario(args)
    c1, c_inf = _single_budget(sc)
    res = optimal_lockdown(sc.params, sc.initial, c1, c_inf, args.tol, sc.solver)
    out = _out_dir(args) / "optimal.scenario"
    fragment = dataclasses.replace(sc, strategy=res.strategy, c1=(), c_inf=())
    out.write_text(format_scenario(fragment))
    _emit({
        "c1": c1,
        "c_inf": c_inf,
        "start": res.start_time,
        "duration": res.duration,
        "incidence": res.incidence,
        "peak": res.peak,
        "evaluations": res.evaluations,
        "bracket": res.bracket,
        "scenario": str(out),
    })
    return EXIT_OK


def cmd_scan(args) -> int:
    sc = _scenario(args)
    if not sc.c1 or not sc.c_inf:
        raise ScenarioError("scan needs budget.c1 and budget.c_inf lists", key="budget")
    scan = budget_level_scan(sc.params, sc.initial, sc.c1, sc.c_inf, args.tol, sc.solver,
                             args.workers)
    out = _out_dir(args) / "scan.csv"
    with out.open("w", newline="") as fh:
        scan.to_csv(fh)
    _emit({"rows": len(scan.rows), "scan": str(out)})
    return EXIT_OK


def cmd_figure(args) -> int:
    sc = _scenario(args)
    paths = write_figure(args.name, _out_dir(args), sc.params, sc.initial, sc.solver,
                         args.tol, args.workers)
    _emit({"figure": args.name, "files": [str(p) for p in paths]})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sircontrol", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, tol=False, workers=False):
        p.add_argument("--scenario", help="scenario file (key = value lines)")
        p.add_argument("--out", help=f"output directory (default ${OUT_ENV} or ./out)")
        p.add_argument("--step", type=float, help="integration step in days")
        if tol:
            p.add_argument("--tol", type=float, default=0.01, help="start-time tolerance in days")
        if workers:
            p.add_argument("--workers", type=int, default=1, help="processes for grid scans")

    p = sub.add_parser("simulate", help="simulate one strategy and write its trajectory")
    common(p)
    p.set_defaults(func=cmd_simulate)
    p = sub.add_parser("optimize", help="optimal single lockdown for one budget")
    common(p, tol=True)
    p.set_defaults(func=cmd_optimize)
    p = sub.add_parser("scan", help="optimal lockdowns over a budget/level grid")
    common(p, tol=True, workers=True)
    p.set_defaults(func=cmd_scan)
    p = sub.add_parser("figure", help="data and plot for one numerical experiment")
    p.add_argument("name", choices=FIGURES)
    common(p, tol=True, workers=True)
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except VALIDATION_ERRORS as exc:
        log.error("invalid input: %s", exc)
        return EXIT_INVALID
    except SIRControlError as exc:
        log.error("numeric failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
