"""Optimal lockdown timing, parameter scans and the peak-minimizing comparison.

With a cost budget ``c1`` and a level cap ``c_inf``, total incidence is
minimized by one lockdown at level ``c_inf`` lasting ``c1 / c_inf`` days, so
only the start time is left to choose.  The start-time objective has a unique
minimizer; it is located with a 1-day coarse grid followed by golden-section
refinement around the best grid point.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import IO, Callable, Sequence

import numpy as np

from .bounds import herd_immunity_time
from .controls import ZERO, MaintainFeedback, SingleLockdown, Zero
from .core import (
    DEFAULT_OPTIONS,
    EpidemicParams,
    EpidemicState,
    SolverOptions,
    advance_state,
    final_size,
    integrate,
    peak_prevalence,
    run_segment,
    terminal_state,
)
from .errors import BudgetInfeasibleError, InvalidControlError, NoOutbreakError

INV_PHI = (math.sqrt(5) - 1) / 2
SIGMA_MARGIN = 50.0


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float):
    """Minimize a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x), width)`` where ``width <= tol`` is the final bracket
    and ``x`` the best probe inside it.
    """
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    x, fx = (c, fc) if fc <= fd else (d, fd)
    return x, fx, b - a


class LockdownObjective:
    """Total incidence of a fixed-shape lockdown as a function of its start.

    The uncontrolled run is integrated once; every evaluation restarts from
    the grid sample just before the start, which reproduces a full run from
    zero step for step.
    """

    def __init__(self, params: EpidemicParams, initial: EpidemicState, level: float,
                 duration: float, options: SolverOptions = DEFAULT_OPTIONS):
        self.params = params
        self.initial = initial
        self.level = level
        self.duration = duration
        self.options = options
        self.uncontrolled = integrate(params, initial, ZERO, options)
        self.j0 = 1.0 - final_size(params, initial) / initial.s
        self.evaluations = 0

    def strategy(self, start: float) -> SingleLockdown | Zero:
        if self.duration <= 0:
            return ZERO
        return SingleLockdown(start, self.duration, self.level)

    def __call__(self, start: float) -> float:
        self.evaluations += 1
        if self.duration <= 0:
            return self.j0
        traj = self.uncontrolled
        step = self.options.step
        k = int(math.floor(start / step + 1e-7))
        if k >= len(traj) - 1:
            # prevalence is already below the extinction threshold
            return self.j0
        opts = replace(self.options, horizon=max(self.options.horizon, start + self.duration + step))
        _, end = terminal_state(self.params, traj.state(k), self.strategy(start), k * step, opts)
        return 1.0 - final_size(self.params, end) / self.initial.s


@dataclass(frozen=True)
class OptimizationResult:
    start_time: float
    duration: float
    level: float
    incidence: float
    peak: float
    evaluations: int
    bracket: float

    @property
    def strategy(self) -> SingleLockdown | Zero:
        if self.duration <= 0:
            return ZERO
        return SingleLockdown(self.start_time, self.duration, self.level)


def _require_outbreak(params: EpidemicParams) -> None:
    if params.r0 <= 1:
        raise NoOutbreakError(f"R0 = {params.r0:.4g} <= 1: no outbreak to control")


def optimal_lockdown(
    params: EpidemicParams,
    initial: EpidemicState,
    c1: float,
    c_inf: float,
    tol: float = 0.01,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> OptimizationResult:
    """Best single lockdown with cost ``c1`` and level ``c_inf``."""
    _require_outbreak(params)
    if not (math.isfinite(c1) and c1 >= 0):
        raise InvalidControlError(f"budget must be finite and >= 0, got {c1!r}")
    if not 0 < c_inf <= 1:
        raise InvalidControlError(f"level cap must lie in (0, 1], got {c_inf!r}")
    duration = c1 / c_inf
    obj = LockdownObjective(params, initial, c_inf, duration, options)
    if duration <= 0:
        return OptimizationResult(0.0, 0.0, c_inf, obj.j0, peak_prevalence(obj.uncontrolled), 0, 0.0)

    sigma_max = herd_immunity_time(obj.uncontrolled) + duration + SIGMA_MARGIN
    grid = np.arange(0.0, math.floor(sigma_max) + 1.0)
    values = [obj(s) for s in grid]
    k = int(np.argmin(values))
    a, b = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    start, j, width = golden_section(obj, float(a), float(b), tol)
    if values[k] < j:
        start, j = float(grid[k]), values[k]

    opts = replace(options, horizon=max(options.horizon, start + duration + 1.0))
    traj = integrate(params, initial, obj.strategy(start), opts)
    return OptimizationResult(
        start_time=start,
        duration=duration,
        level=c_inf,
        incidence=j,
        peak=peak_prevalence(traj),
        evaluations=obj.evaluations,
        bracket=width,
    )


def start_time_sweep(
    params: EpidemicParams,
    initial: EpidemicState,
    level: float,
    duration: float,
    starts: Sequence[float],
    options: SolverOptions = DEFAULT_OPTIONS,
) -> list[tuple[float, float]]:
    obj = LockdownObjective(params, initial, level, duration, options)
    return [(float(s), obj(float(s))) for s in starts]


@dataclass(frozen=True)
class ScanRow:
    c1: float
    c_inf: float
    start: float
    incidence: float


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[ScanRow, ...]

    def to_csv(self, fh: IO[str]) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["c1", "c_inf", "start", "incidence"])
        for row in self.rows:
            w.writerow([format(x, ".17g") for x in (row.c1, row.c_inf, row.start, row.incidence)])

    def for_budget(self, c1: float) -> list[ScanRow]:
        return [r for r in self.rows if r.c1 == c1]


def _scan_point(args) -> ScanRow:
    params, initial, c1, c_inf, tol, options = args
    res = optimal_lockdown(params, initial, c1, c_inf, tol, options)
    return ScanRow(c1, c_inf, res.start_time, res.incidence)


def budget_level_scan(
    params: EpidemicParams,
    initial: EpidemicState,
    c1_list: Sequence[float],
    c_inf_grid: Sequence[float],
    tol: float = 0.01,
    options: SolverOptions = DEFAULT_OPTIONS,
    workers: int = 1,
) -> ScanResult:
    """Optimal lockdown for every ``(c1, c_inf)`` pair, rows in grid order."""
    if not c1_list or not c_inf_grid:
        raise ValueError("scan grids must be nonempty")
    jobs = [(params, initial, float(c1), float(c), tol, options) for c1 in c1_list for c in c_inf_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_scan_point, jobs))
    else:
        rows = [_scan_point(j) for j in jobs]
    return ScanResult(tuple(rows))


@dataclass(frozen=True)
class PeakMinResult:
    """Calibrated wait-maintain-relax strategy."""

    start: float
    duration: float
    peak: float
    incidence: float
    cost: float
    maintained_level: float
    strategy: MaintainFeedback


class _PeakMinProblem:
    def __init__(self, params, initial, options):
        self.params = params
        self.initial = initial
        self.options = options
        self.uncontrolled = integrate(params, initial, ZERO, options)
        self.k_peak = int(np.argmax(self.uncontrolled.i))

    def start_for(self, p: float) -> tuple[float, EpidemicState]:
        """First time the uncontrolled prevalence reaches ``p``."""
        traj = self.uncontrolled
        k = int(np.argmax(traj.i[: self.k_peak + 1] >= p))
        if k == 0:
            return 0.0, self.initial
        t0, state0 = float(traj.t[k - 1]), traj.state(k - 1)
        lo, hi = 0.0, self.options.step
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if advance_state(self.params, state0, t0, t0 + mid, options=self.options).i >= p:
                hi = mid
            else:
                lo = mid
        t1 = t0 + hi
        return t1, advance_state(self.params, state0, t0, t1, options=self.options)

    def maintain(self, p: float):
        t1, state1 = self.start_for(p)
        # S falls at rate gamma * p while I is held at p, so this end is never binding
        end = t1 + state1.s / (self.params.gamma * p) + 1.0
        control = MaintainFeedback(t1, end, self.params.r0)
        opts = replace(self.options, horizon=max(self.options.horizon, end + 1.0))
        t_stop, y = run_segment(self.params, state1, control, t1, opts)
        return t1, t_stop, y


def calibrate_peak_min(
    params: EpidemicParams,
    initial: EpidemicState,
    c1: float,
    tol: float = 1e-6,
    options: SolverOptions = DEFAULT_OPTIONS,
    max_iter: int = 60,
) -> PeakMinResult:
    """Wait-maintain-relax strategy spending exactly ``c1``.

    Waits until prevalence reaches a level ``p``, holds it there with
    ``u = 1 - gamma/(beta S)`` until S reaches ``gamma/beta``, then relaxes.
    ``p`` is bisected on ``[I(0), uncontrolled peak]`` until the cost matches
    ``c1`` within ``tol``; cost decreases as ``p`` grows.
    """
    _require_outbreak(params)
    if not c1 > 0:
        raise InvalidControlError(f"budget must be positive, got {c1!r}")
    prob = _PeakMinProblem(params, initial, options)
    lo, hi = initial.i, float(prob.uncontrolled.i[prob.k_peak])
    _, _, y = prob.maintain(lo)
    if y[3] < c1 - tol:
        raise BudgetInfeasibleError(
            f"maintaining I(0) costs only {y[3]:.6g} < {c1}; budget cannot be spent"
        )
    p = 0.5 * (lo + hi)
    for _ in range(max_iter):
        p = 0.5 * (lo + hi)
        _, _, y = prob.maintain(p)
        if abs(y[3] - c1) <= tol:
            break
        if y[3] > c1:
            lo = p
        else:
            hi = p
    t1, t_stop, y = prob.maintain(p)
    strategy = MaintainFeedback(t1, t_stop, params.r0)
    end_state = EpidemicState(float(y[0]), float(y[1]), max(float(y[2]), 0.0))
    opts = replace(options, horizon=max(options.horizon, t_stop + 1.0))
    traj = integrate(params, initial, strategy, opts)
    return PeakMinResult(
        start=t1,
        duration=float(y[4]),
        peak=peak_prevalence(traj),
        incidence=1.0 - final_size(params, end_state) / initial.s,
        cost=float(y[3]),
        maintained_level=p,
        strategy=strategy,
    )
