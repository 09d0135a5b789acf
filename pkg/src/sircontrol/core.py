"""Controlled SIR dynamics.

The epidemic evolves as

    S' = -(1 - u) beta S I
    I' =  (1 - u) beta S I - gamma I
    R' =  gamma I

with an intervention level ``u(t)`` in ``[0, 1]``.  Integration uses classical
fixed-step RK4 on the grid ``k * step``.  Control discontinuities in time are
honoured exactly by splitting the step that contains them, and discontinuities
triggered by the susceptible share crossing a level are located by bisection
on the sub-step length, so the scheme keeps its fourth-order accuracy across
switches.

Nothing is ever integrated "to infinity": once a control has stopped acting,
the limit S(inf) follows from the conserved quantity
``S + I - (gamma/beta) log S`` (see :func:`final_size`).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import IO, Iterator

import numpy as np

from . import _kernel
from .errors import (
    BelowMinimumError,
    DomainError,
    HorizonTooShortError,
    IntegrationDivergedError,
    InvalidControlError,
    InvalidParamsError,
    InvalidStateError,
    UnboundedCostError,
)

STATE_TOL = 1e-9


@dataclass(frozen=True)
class EpidemicParams:
    """Transmission rate ``beta`` and recovery rate ``gamma``, both per day."""

    beta: float
    gamma: float

    def __post_init__(self):
        for name in ("beta", "gamma"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise InvalidParamsError(f"{name} must be positive and finite, got {v!r}")

    @property
    def r0(self) -> float:
        return self.beta / self.gamma

    @property
    def herd_immunity_level(self) -> float:
        """Susceptible share ``gamma/beta`` below which prevalence cannot grow."""
        return self.gamma / self.beta


@dataclass(frozen=True)
class EpidemicState:
    """Shares of susceptible, infectious and recovered individuals.

    ``r`` defaults to ``1 - s - i``.
    """

    s: float
    i: float
    r: float = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.r is None:
            object.__setattr__(self, "r", max(0.0, 1.0 - self.s - self.i))
        for name in ("s", "i", "r"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise InvalidStateError(f"{name} must be a finite non-negative share, got {v!r}")
        if self.s + self.i + self.r > 1 + STATE_TOL:
            raise InvalidStateError(
                f"shares sum to {self.s + self.i + self.r!r} > 1 (s={self.s}, i={self.i}, r={self.r})"
            )


@dataclass(frozen=True)
class SolverOptions:
    step: float = 0.01
    horizon: float = 1000.0
    extinction_threshold: float = 1e-12

    def __post_init__(self):
        if not (math.isfinite(self.step) and self.step > 0):
            raise ValueError(f"step must be positive, got {self.step!r}")
        if not (math.isfinite(self.horizon) and self.horizon > 0):
            raise ValueError(f"horizon must be positive, got {self.horizon!r}")
        if not 0 < self.extinction_threshold < 1:
            raise ValueError("extinction_threshold must lie in (0, 1)")

    @property
    def n_grid(self) -> int:
        """Number of grid points in ``[0, horizon]``."""
        return int(math.floor(self.horizon / self.step + _kernel.GRID_EPS)) + 1


REFERENCE_PARAMS = EpidemicParams(beta=0.6, gamma=0.2)
REFERENCE_STATE = EpidemicState(s=0.9999, i=0.0001)
DEFAULT_OPTIONS = SolverOptions()


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Grid samples of a controlled epidemic.

    Arrays share one length; ``cost`` is the running integral of ``u``.
    ``active`` is the measure of ``{u > 0}`` and ``u_max`` the largest level
    seen at any RK stage, both over the whole run.
    """

    params: EpidemicParams
    step: float
    t: np.ndarray
    s: np.ndarray
    i: np.ndarray
    r: np.ndarray
    u: np.ndarray
    cost: np.ndarray
    active: float = 0.0
    u_max: float = 0.0
    end_time: float = field(default=float("nan"))

    def __len__(self) -> int:
        return len(self.t)

    @property
    def horizon(self) -> float:
        return float(self.t[-1])

    @property
    def total_cost(self) -> float:
        return float(self.cost[-1])

    def state(self, k: int) -> EpidemicState:
        return EpidemicState(float(self.s[k]), float(self.i[k]), float(self.r[k]))

    @property
    def final_state(self) -> EpidemicState:
        return self.state(-1)

    def samples(self) -> Iterator[tuple[float, EpidemicState, float]]:
        for k in range(len(self)):
            yield float(self.t[k]), self.state(k), float(self.u[k])

    def to_csv(self, fh: IO[str]) -> None:
        """Write ``t,S,I,R,u`` rows with 17 significant digits."""
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "S", "I", "R", "u"])
        for row in zip(self.t, self.s, self.i, self.r, self.u):
            w.writerow([format(float(x), ".17g") for x in row])


def _law_args(law) -> tuple[int, float, float, float]:
    if isinstance(law, tuple):  # Maintain(r0, cap)
        return _kernel.MAINTAIN, 0.0, float(law[0]), float(law[1])
    level = float(law)
    if not 0.0 <= level <= 1.0:
        raise InvalidControlError(f"control level {level!r} outside [0, 1]")
    return _kernel.CONSTANT, level, 1.0, 1.0


def _snap(times, step: float) -> list[float]:
    out = []
    for b in times:
        k = round(b / step)
        out.append(k * step if abs(b / step - k) < _kernel.GRID_EPS else float(b))
    return out


def _locate_crossing(y, t, t_end, step, beta, gamma, law, level):
    """Advance ``y`` from ``t`` to the point where S first reaches ``level``."""
    k = math.floor(t / step + _kernel.GRID_EPS)
    dt = min((k + 1) * step, t_end) - t
    lo, hi = 0.0, dt
    trial = np.empty_like(y)
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        trial[:] = y
        _kernel.advance(trial, t, t + mid, step, beta, gamma, *law, -1.0, 0.0, _kernel.EMPTY_RECORD)
        if trial[0] <= level:
            hi = mid
        else:
            lo = mid
    t_hit = t + hi if hi < dt else min((k + 1) * step, t_end)
    return t_hit


def _run(params, control, y, t0, t_end, step, rec=_kernel.EMPTY_RECORD, i_stop=0.0,
         stop_when_finished=True):
    """Drive the kernel across control pieces; returns ``(status, t)``."""
    beta, gamma = params.beta, params.gamma
    pieces = sorted(b for b in _snap(control.breakpoints(), step) if t0 < b < t_end)
    pieces.append(t_end)
    levels = sorted(control.switch_levels(), reverse=True)
    tol = _kernel.GRID_EPS * step
    t = t0
    for b in pieces:
        while t < b - tol:
            if stop_when_finished and control.finished(t, y[0]):
                return _kernel.DONE, t
            law = _law_args(control.law(0.5 * (t + b), y[0]))
            s_switch = next((lv for lv in levels if lv < y[0]), -1.0)
            status, t = _kernel.advance(y, t, b, step, beta, gamma, *law, s_switch, i_stop, rec)
            if status == _kernel.DIVERGED:
                raise IntegrationDivergedError(
                    f"state left the feasible region near t={t:.6g}; reduce the step (currently {step})"
                )
            if status == _kernel.EXTINCT:
                return status, t
            if status == _kernel.CROSSED:
                t_hit = _locate_crossing(y, t, b, step, beta, gamma, law, s_switch)
                status, t = _kernel.advance(y, t, t_hit, step, beta, gamma, *law, -1.0, 0.0, rec)
    return _kernel.DONE, t


def _state_vector(state: EpidemicState) -> np.ndarray:
    return np.array([state.s, state.i, state.r, 0.0, 0.0, 0.0])


def _check_support(control, horizon: float) -> float:
    end = float(control.support_end)
    if not math.isfinite(end):
        raise UnboundedCostError(f"{type(control).__name__} has unbounded support")
    if end > horizon + _kernel.GRID_EPS:
        raise HorizonTooShortError(f"control support ends at {end} > horizon {horizon}")
    return end


def integrate(
    params: EpidemicParams,
    initial: EpidemicState,
    control,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> Trajectory:
    """Simulate the controlled epidemic on the grid ``k * options.step``.

    Integration runs while the control acts, then continues uncontrolled
    until the infectious share drops below ``options.extinction_threshold``
    or the horizon is reached.
    """
    from .controls import ZERO, evaluate

    end = _check_support(control, options.horizon)
    step = options.step
    rec = np.full((options.n_grid, 5), np.nan)
    rec[0] = initial.s, initial.i, initial.r, evaluate(control, 0.0, initial), 0.0
    y = _state_vector(initial)
    status, t = _run(params, control, y, 0.0, end, step, rec)
    status, t = _run(params, ZERO, y, t, options.horizon, step, rec,
                     i_stop=options.extinction_threshold, stop_when_finished=False)
    n = int(math.floor(t / step + _kernel.GRID_EPS)) + 1
    rec = rec[:n]
    return Trajectory(
        params=params,
        step=step,
        t=np.arange(n) * step,
        s=rec[:, 0].copy(),
        i=rec[:, 1].copy(),
        r=rec[:, 2].copy(),
        u=rec[:, 3].copy(),
        cost=rec[:, 4].copy(),
        active=float(y[4]),
        u_max=float(y[5]),
        end_time=t,
    )


def run_segment(
    params: EpidemicParams,
    state: EpidemicState,
    control,
    t0: float = 0.0,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> tuple[float, np.ndarray]:
    """Integrate from ``(t0, state)`` until ``control`` stops acting.

    Returns the stopping time and the vector ``[S, I, R, cost, active,
    u_max]`` accumulated from ``t0``.  Steps stay on the global grid, so a
    restart from a recorded sample reproduces a run from zero exactly.
    """
    end = _check_support(control, options.horizon)
    y = _state_vector(state)
    _, t = _run(params, control, y, t0, max(end, t0), options.step)
    return t, y


def advance_state(
    params: EpidemicParams,
    state: EpidemicState,
    t0: float,
    t1: float,
    control=None,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> EpidemicState:
    """State at ``t1`` starting from ``state`` at ``t0`` (uncontrolled by default)."""
    from .controls import ZERO

    y = _state_vector(state)
    _run(params, ZERO if control is None else control, y, t0, t1, options.step,
         stop_when_finished=False)
    return EpidemicState(float(y[0]), float(y[1]), max(float(y[2]), 0.0))


def terminal_state(
    params: EpidemicParams,
    state: EpidemicState,
    control,
    t0: float = 0.0,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> tuple[float, EpidemicState]:
    """Like :func:`run_segment` but returns only the epidemic state."""
    t, y = run_segment(params, state, control, t0, options)
    return t, EpidemicState(float(y[0]), float(y[1]), max(float(y[2]), 0.0))


def vulnerability(params: EpidemicParams, state: EpidemicState) -> float:
    """``S + I - (gamma/beta) log S``, conserved while no control acts."""
    if state.s <= 0:
        raise DomainError("vulnerability needs a positive susceptible share")
    return state.s + state.i - math.log(state.s) / params.r0


def invert_special(rho: float, y: float) -> float:
    """Inverse of ``x - log(x)/rho`` restricted to ``(0, 1/rho]``.

    The function decreases on that interval from +inf to its minimum
    ``(1 + log rho)/rho``.  Bisection runs to full double precision.
    """
    if not rho > 0:
        raise DomainError(f"rho must be positive, got {rho!r}")
    y0 = (1.0 + math.log(rho)) / rho
    if y < y0:
        if y0 - y > 1e-13 * max(1.0, abs(y0)):
            raise BelowMinimumError(f"y={y!r} is below the minimum {y0!r}")
        return 1.0 / rho
    hi = 1.0 / rho
    # f(exp(-rho y)) = exp(-rho y) + y > y, so the root lies above this point
    lo = math.exp(-rho * y)
    if lo == 0.0:
        lo = 5e-324
        if lo - math.log(lo) / rho <= y:
            return lo
    while True:
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        if mid - math.log(mid) / rho > y:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def final_size(params: EpidemicParams, state: EpidemicState) -> float:
    """Limit of the susceptible share once no control acts from ``state`` on."""
    if not state.s > 0:
        raise InvalidStateError("final size needs S > 0")
    if state.i < 0:
        raise InvalidStateError("final size needs I >= 0")
    if state.i == 0:
        return state.s
    return invert_special(params.r0, vulnerability(params, state))


def total_incidence(
    params: EpidemicParams,
    initial: EpidemicState,
    control,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> float:
    """Share of the initially susceptible who are eventually infected."""
    _, end = terminal_state(params, initial, control, 0.0, options)
    return 1.0 - final_size(params, end) / initial.s


def peak_prevalence(trajectory: Trajectory) -> float:
    return float(np.max(trajectory.i))
