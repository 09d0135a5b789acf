"""Flat ``key = value`` scenario files.

Example::

    # reference values apply to every key left out
    beta = 0.6
    gamma = 0.2
    s0 = 0.9999
    i0 = 0.0001
    step = 0.01
    strategy.kind = single_lockdown
    strategy.start = 23.6
    strategy.duration = 20
    strategy.level = 0.75
    budget.c1 = 7.5, 15, 30
    budget.c_inf = 0.75

Lists are comma separated.  Strategy fields other than ``strategy.kind`` are
passed to the strategy constructor; ``r0`` defaults to ``beta/gamma``.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .controls import KINDS, ControlStrategy
from .core import REFERENCE_PARAMS, REFERENCE_STATE, EpidemicParams, EpidemicState, SolverOptions
from .errors import SIRControlError

SCALAR_KEYS = {"beta", "gamma", "s0", "i0", "step", "horizon", "extinction_threshold"}
LIST_KEYS = {"budget.c1", "budget.c_inf"}
LIST_FIELDS = {"times", "levels"}


class ScenarioError(SIRControlError, ValueError):
    def __init__(self, message: str, line: int | None = None, key: str | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"field {key!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


@dataclass(frozen=True)
class Scenario:
    params: EpidemicParams = REFERENCE_PARAMS
    initial: EpidemicState = REFERENCE_STATE
    solver: SolverOptions = field(default_factory=SolverOptions)
    strategy: ControlStrategy | None = None
    c1: tuple[float, ...] = ()
    c_inf: tuple[float, ...] = ()


def _float(text: str, line: int, key: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ScenarioError(f"expected a number, got {text!r}", line, key) from None


def _floats(text: str, line: int, key: str) -> tuple[float, ...]:
    return tuple(_float(x.strip(), line, key) for x in text.split(",") if x.strip())


def parse_scenario(text: str) -> Scenario:
    values: dict[str, tuple[str, int]] = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].strip()
        if not content:
            continue
        if "=" not in content:
            raise ScenarioError(f"expected 'key = value', got {content!r}", n)
        key, value = (p.strip() for p in content.split("=", 1))
        if not (key in SCALAR_KEYS or key in LIST_KEYS or key.startswith("strategy.")):
            raise ScenarioError("unknown key", n, key)
        if key in values:
            raise ScenarioError(f"duplicate key (first set on line {values[key][1]})", n, key)
        values[key] = (value, n)

    def num(key, default):
        if key not in values:
            return default
        text, n = values[key]
        return _float(text, n, key)

    def build(key, fn):
        line = values[key][1] if key in values else None
        try:
            return fn()
        except ScenarioError:
            raise
        except (SIRControlError, ValueError, TypeError) as exc:
            raise ScenarioError(f"{type(exc).__name__}: {exc}", line, key) from None

    params = build("beta", lambda: EpidemicParams(num("beta", REFERENCE_PARAMS.beta),
                                                   num("gamma", REFERENCE_PARAMS.gamma)))
    initial = build("s0", lambda: EpidemicState(num("s0", REFERENCE_STATE.s),
                                                 num("i0", REFERENCE_STATE.i)))
    defaults = SolverOptions()
    solver = build("step", lambda: SolverOptions(
        num("step", defaults.step),
        num("horizon", defaults.horizon),
        num("extinction_threshold", defaults.extinction_threshold),
    ))

    strategy = None
    fields = {k[len("strategy."):]: v for k, v in values.items() if k.startswith("strategy.")}
    if fields:
        if "kind" not in fields:
            raise ScenarioError("strategy record needs strategy.kind", next(iter(fields.values()))[1])
        kind, kline = fields.pop("kind")
        if kind not in KINDS:
            raise ScenarioError(f"unknown strategy kind {kind!r}; one of {sorted(KINDS)}",
                                kline, "strategy.kind")
        cls = KINDS[kind]
        names = {f.name for f in dataclasses.fields(cls)}
        kwargs = {}
        for name, (text, n) in fields.items():
            key = "strategy." + name
            if name not in names:
                raise ScenarioError(f"{kind} has no field {name!r}", n, key)
            kwargs[name] = _floats(text, n, key) if name in LIST_FIELDS else _float(text, n, key)
        if "r0" in names and "r0" not in kwargs:
            kwargs["r0"] = params.r0
        try:
            strategy = cls(**kwargs)
        except (SIRControlError, ValueError, TypeError) as exc:
            culprit = next((k for k in fields if str(exc).startswith(k + " ")), "kind")
            line = fields[culprit][1] if culprit in fields else kline
            raise ScenarioError(f"{type(exc).__name__}: {exc}", line, "strategy." + culprit) from None

    c1 = _floats(*values["budget.c1"], "budget.c1") if "budget.c1" in values else ()
    c_inf = _floats(*values["budget.c_inf"], "budget.c_inf") if "budget.c_inf" in values else ()
    return Scenario(params, initial, solver, strategy, c1, c_inf)


def load_scenario(path: str | Path) -> Scenario:
    return parse_scenario(Path(path).read_text())


def format_scenario(sc: Scenario) -> str:
    """Scenario text that :func:`parse_scenario` reads back exactly."""
    lines = [
        f"beta = {sc.params.beta!r}",
        f"gamma = {sc.params.gamma!r}",
        f"s0 = {sc.initial.s!r}",
        f"i0 = {sc.initial.i!r}",
        f"step = {sc.solver.step!r}",
        f"horizon = {sc.solver.horizon!r}",
        f"extinction_threshold = {sc.solver.extinction_threshold!r}",
    ]
    if sc.strategy is not None:
        for key, value in sc.strategy.to_record().items():
            lines.append(f"strategy.{key} = {value}")
    if sc.c1:
        lines.append("budget.c1 = " + ", ".join(repr(x) for x in sc.c1))
    if sc.c_inf:
        lines.append("budget.c_inf = " + ", ".join(repr(x) for x in sc.c_inf))
    return "\n".join(lines) + "\n"

