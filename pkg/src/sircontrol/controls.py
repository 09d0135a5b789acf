"""Intervention strategies, their costs, and the bang-bang quantizer.

Every strategy is an immutable value with finite support.  Open-loop kinds
are piecewise constant in time on left-open pieces ``(a, b]``; feedback kinds
additionally read the susceptible share.  The integrator in
:mod:`sircontrol.core` consumes strategies through four hooks:

``breakpoints()``
    times at which the level may jump;
``switch_levels()``
    susceptible shares at which the level may jump or kink (S only decreases,
    so each is crossed at most once);
``law(t, s)``
    the rule in force on the piece containing ``t``, either a constant level
    or :class:`Maintain`;
``finished(t, s)``
    whether the strategy has stopped acting for good.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass
from typing import Callable, ClassVar, NamedTuple

import numpy as np
from scipy import integrate as spi

from .core import (
    DEFAULT_OPTIONS,
    EpidemicParams,
    EpidemicState,
    SolverOptions,
    Trajectory,
    integrate,
    run_segment,
)
from .errors import (
    AmplitudeTooSmallError,
    InvalidControlError,
    UnboundedCostError,
)


class Maintain(NamedTuple):
    """Feedback ``u = 1 - 1/(r0 S)`` clamped to ``[0, cap]``; holds I' = 0."""

    r0: float
    cap: float = 1.0

    def level(self, s: float) -> float:
        if s <= 0:
            return 0.0
        return min(self.cap, max(0.0, 1.0 - 1.0 / (self.r0 * s)))


def _check_level(name: str, v: float, *, allow_zero: bool = True) -> None:
    ok = (0.0 <= v <= 1.0) if allow_zero else (0.0 < v <= 1.0)
    if not (math.isfinite(v) and ok):
        rng = "[0, 1]" if allow_zero else "(0, 1]"
        raise InvalidControlError(f"{name} must lie in {rng}, got {v!r}")


def _check_time(name: str, v: float) -> None:
    if not (math.isfinite(v) and v >= 0):
        raise InvalidControlError(f"{name} must be a finite non-negative time, got {v!r}")


class ControlStrategy:
    kind: ClassVar[str]
    feedback: ClassVar[bool] = False

    @property
    def support_end(self) -> float:
        raise NotImplementedError

    def breakpoints(self) -> tuple[float, ...]:
        return ()

    def switch_levels(self) -> tuple[float, ...]:
        return ()

    def law(self, t: float, s: float):
        raise NotImplementedError

    def finished(self, t: float, s: float) -> bool:
        return t >= self.support_end

    def to_record(self) -> dict:
        raise NotImplementedError


class OpenLoop(ControlStrategy):
    """Strategies that depend on time only."""

    def pieces(self) -> list[tuple[float, float, float]]:
        """Non-zero pieces ``(a, b, level)`` with level on ``(a, b]``."""
        raise NotImplementedError

    def __call__(self, t: float) -> float:
        return float(self.law(t, 1.0))

    def integral(self, a: float, b: float) -> float:
        return sum((c * max(0.0, min(b, hi) - max(a, lo)) for lo, hi, c in self.pieces()), 0.0)

    @property
    def l1(self) -> float:
        return sum((c * (hi - lo) for lo, hi, c in self.pieces()), 0.0)

    @property
    def l0(self) -> float:
        return sum((hi - lo for lo, hi, c in self.pieces() if c > 0), 0.0)

    @property
    def sup(self) -> float:
        return max((c for _, _, c in self.pieces()), default=0.0)


@dataclass(frozen=True)
class Zero(OpenLoop):
    kind: ClassVar[str] = "zero"

    @property
    def support_end(self) -> float:
        return 0.0

    def law(self, t, s):
        return 0.0

    def pieces(self):
        return []

    def to_record(self):
        return {"kind": self.kind}


ZERO = Zero()


@dataclass(frozen=True)
class PiecewiseConstant(OpenLoop):
    """``levels[k]`` on ``(times[k], times[k+1]]``, zero elsewhere."""

    times: tuple[float, ...]
    levels: tuple[float, ...]
    kind: ClassVar[str] = "piecewise_constant"

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(float(x) for x in self.times))
        object.__setattr__(self, "levels", tuple(float(x) for x in self.levels))
        if len(self.times) != len(self.levels) + 1:
            raise InvalidControlError("need exactly one more switch time than levels")
        for t in self.times:
            _check_time("switch time", t)
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise InvalidControlError("switch times must be strictly increasing")
        for c in self.levels:
            _check_level("level", c)

    @classmethod
    def from_pieces(cls, pieces) -> PiecewiseConstant | Zero:
        """Build from ``(a, b, level)`` triples, merging touching equal pieces."""
        times: list[float] = []
        levels: list[float] = []
        for a, b, c in pieces:
            if b <= a:
                continue
            if not times:
                times.append(a)
            elif a > times[-1]:
                levels.append(0.0)
                times.append(a)
            if levels and levels[-1] == c:
                times[-1] = b
            else:
                levels.append(c)
                times.append(b)
        while levels and levels[-1] == 0.0:
            levels.pop()
            times.pop()
        while levels and levels[0] == 0.0:
            levels.pop(0)
            times.pop(0)
        if not levels:
            return ZERO
        return cls(tuple(times), tuple(levels))

    @property
    def support_end(self) -> float:
        return self.times[-1]

    def breakpoints(self):
        return self.times

    def law(self, t, s):
        k = bisect.bisect_left(self.times, t)
        if k == 0 or k == len(self.times):
            return 0.0
        return self.levels[k - 1]

    def pieces(self):
        return [(a, b, c) for a, b, c in zip(self.times, self.times[1:], self.levels) if c > 0]

    def to_record(self):
        return {
            "kind": self.kind,
            "times": ", ".join(repr(x) for x in self.times),
            "levels": ", ".join(repr(x) for x in self.levels),
        }


@dataclass(frozen=True)
class SingleLockdown(OpenLoop):
    """Wait, suppress at ``level`` for ``duration`` days from ``start``, relax."""

    start: float
    duration: float
    level: float
    kind: ClassVar[str] = "single_lockdown"

    def __post_init__(self):
        _check_time("start", self.start)
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise InvalidControlError(f"duration must be positive, got {self.duration!r}")
        _check_level("level", self.level, allow_zero=False)

    @property
    def end(self) -> float:
        return self.start + self.duration

    @property
    def support_end(self) -> float:
        return self.end

    def breakpoints(self):
        return (self.start, self.end)

    def law(self, t, s):
        return self.level if self.start < t <= self.end else 0.0

    def pieces(self):
        return [(self.start, self.end, self.level)]

    def to_record(self):
        return {"kind": self.kind, "start": repr(self.start),
                "duration": repr(self.duration), "level": repr(self.level)}


@dataclass(frozen=True)
class MaintainFeedback(ControlStrategy):
    """Hold prevalence constant from ``start`` until herd immunity or ``end``.

    The level is ``1 - 1/(r0 S)`` clamped to ``[0, cap]``; it vanishes by
    itself once S reaches ``1/r0``.  ``end`` is a hard stop that keeps the
    support finite.
    """

    start: float
    end: float
    r0: float
    cap: float = 1.0
    kind: ClassVar[str] = "maintain_feedback"
    feedback: ClassVar[bool] = True

    def __post_init__(self):
        _check_time("start", self.start)
        _check_time("end", self.end)
        if self.end < self.start:
            raise InvalidControlError("end precedes start")
        if not self.r0 > 0:
            raise InvalidControlError("r0 must be positive")
        _check_level("cap", self.cap)

    @property
    def support_end(self) -> float:
        return self.end

    def breakpoints(self):
        return (self.start, self.end)

    def switch_levels(self):
        return (1.0 / self.r0,)

    def law(self, t, s):
        if self.start < t <= self.end:
            return Maintain(self.r0, self.cap)
        return 0.0

    def finished(self, t, s):
        return t >= self.end or (t >= self.start and s <= 1.0 / self.r0)

    def to_record(self):
        return {"kind": self.kind, "start": repr(self.start), "end": repr(self.end),
                "r0": repr(self.r0), "cap": repr(self.cap)}


@dataclass(frozen=True)
class WaitMaintainSuppressRelax(ControlStrategy):
    """Zero on ``(0, t1]``, maintain on ``(t1, t2]``, suppress on ``(t2, t3]``."""

    t1: float
    t2: float
    t3: float
    r0: float
    suppress_level: float = 1.0
    cap: float = 1.0
    kind: ClassVar[str] = "wait_maintain_suppress_relax"
    feedback: ClassVar[bool] = True

    def __post_init__(self):
        for name in ("t1", "t2", "t3"):
            _check_time(name, getattr(self, name))
        if not self.t1 <= self.t2 <= self.t3:
            raise InvalidControlError("need t1 <= t2 <= t3")
        if not self.r0 > 0:
            raise InvalidControlError("r0 must be positive")
        _check_level("suppress_level", self.suppress_level)
        _check_level("cap", self.cap)

    @property
    def support_end(self) -> float:
        return self.t3

    def breakpoints(self):
        return (self.t1, self.t2, self.t3)

    def switch_levels(self):
        return (1.0 / self.r0,)

    def law(self, t, s):
        if self.t1 < t <= self.t2:
            return Maintain(self.r0, self.cap)
        if self.t2 < t <= self.t3:
            return self.suppress_level
        return 0.0

    def to_record(self):
        return {"kind": self.kind, "t1": repr(self.t1), "t2": repr(self.t2),
                "t3": repr(self.t3), "r0": repr(self.r0),
                "suppress_level": repr(self.suppress_level), "cap": repr(self.cap)}


@dataclass(frozen=True)
class ReffThreshold(ControlStrategy):
    """Intervene at ``level`` while the uncontrolled reproduction number
    ``r0 * S`` exceeds ``threshold``, within ``(start, end]``.

    A comparison heuristic only.
    """

    level: float
    threshold: float
    r0: float
    end: float
    start: float = 0.0
    kind: ClassVar[str] = "reff_threshold"
    feedback: ClassVar[bool] = True

    def __post_init__(self):
        _check_level("level", self.level)
        _check_time("start", self.start)
        _check_time("end", self.end)
        if self.end < self.start:
            raise InvalidControlError("end precedes start")
        if not (self.threshold >= 0 and self.r0 > 0):
            raise InvalidControlError("threshold must be >= 0 and r0 > 0")

    @property
    def _s_level(self) -> float:
        return self.threshold / self.r0

    @property
    def support_end(self) -> float:
        return self.end

    def breakpoints(self):
        return (self.start, self.end)

    def switch_levels(self):
        return (self._s_level,)

    def law(self, t, s):
        if self.start < t <= self.end and s > self._s_level:
            return self.level
        return 0.0

    def finished(self, t, s):
        return t >= self.end or (t >= self.start and s <= self._s_level)

    def to_record(self):
        return {"kind": self.kind, "level": repr(self.level), "threshold": repr(self.threshold),
                "r0": repr(self.r0), "end": repr(self.end), "start": repr(self.start)}


KINDS = {
    cls.kind: cls
    for cls in (Zero, PiecewiseConstant, SingleLockdown, MaintainFeedback,
                WaitMaintainSuppressRelax, ReffThreshold)
}


def evaluate(control: ControlStrategy, t: float, state: EpidemicState | None = None) -> float:
    """Level of ``control`` at time ``t`` in ``state``.

    ``state`` is only read by feedback kinds.
    """
    s = state.s if state is not None else 1.0
    law = control.law(t, s)
    if isinstance(law, Maintain):
        if state is None:
            raise InvalidControlError(f"{control.kind} needs the epidemic state")
        return law.level(s)
    return float(law)


@dataclass(frozen=True)
class CostReport:
    l1: float
    l0: float
    sup: float


def costs(
    control: ControlStrategy,
    params: EpidemicParams | None = None,
    initial: EpidemicState | None = None,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> CostReport:
    """Total cost, duration and maximum level of ``control``.

    Open-loop kinds use closed forms.  Feedback kinds are co-integrated with
    the epidemic, so ``params`` and ``initial`` are required for them.
    """
    if not math.isfinite(control.support_end):
        raise UnboundedCostError(f"{control.kind} has unbounded support")
    if isinstance(control, OpenLoop):
        return CostReport(control.l1, control.l0, control.sup)
    if params is None or initial is None:
        raise ValueError(f"{control.kind} costs depend on the trajectory; pass params and initial")
    traj = integrate(params, initial, control, options)
    return CostReport(traj.total_cost, traj.active, traj.u_max)


def realize(trajectory: Trajectory) -> PiecewiseConstant | Zero:
    """Open-loop replay of the control recorded in ``trajectory``.

    Each grid step gets the mean level over that step, so the total cost is
    preserved exactly.
    """
    h = trajectory.step
    mean = np.clip(np.diff(trajectory.cost) / h, 0.0, 1.0)
    t = trajectory.t
    return PiecewiseConstant.from_pieces(
        (float(t[k]), float(t[k + 1]), float(mean[k])) for k in range(len(mean))
    )


def quantize(
    control: OpenLoop | Callable[[float], float],
    amplitude: float,
    wavelength: float,
    support_end: float | None = None,
) -> PiecewiseConstant | Zero:
    """Frequency-modulated bang-bang version of ``control``.

    Time is cut into windows ``((k-1)h, kh]``.  In each window the output is
    0 and then ``amplitude`` for the last ``tau_k`` days, where ``tau_k`` is
    the window's integral of ``control`` divided by ``amplitude``, so every
    window keeps its cost.  Plain callables are integrated with adaptive
    quadrature and need ``support_end``.
    """
    b, h = float(amplitude), float(wavelength)
    if not 0 < b <= 1:
        raise InvalidControlError(f"amplitude must lie in (0, 1], got {b!r}")
    if not h > 0:
        raise ValueError("wavelength must be positive")
    if isinstance(control, ControlStrategy):
        if not isinstance(control, OpenLoop):
            raise TypeError(f"{control.kind} is state feedback; quantize realize(trajectory) instead")
        if control.sup > b:
            raise AmplitudeTooSmallError(f"amplitude {b} below the control's maximum {control.sup}")
        end = control.support_end if support_end is None else support_end
        window = control.integral
    else:
        if support_end is None:
            raise ValueError("support_end is required for plain callables")
        end = support_end

        def window(a, c):
            return spi.quad(control, a, c, epsabs=1e-10, epsrel=1e-10, limit=200)[0]

    if not math.isfinite(end):
        raise UnboundedCostError("quantization needs a finite support")
    n = math.ceil(end / h - 1e-9)
    pieces = []
    for k in range(1, n + 1):
        tau = window((k - 1) * h, k * h) / b
        if tau > h * (1 + 1e-9):
            raise AmplitudeTooSmallError(f"window {k} needs {tau} > {h} days at amplitude {b}")
        tau = min(tau, h)
        if tau > 0:
            pieces.append((k * h - tau, k * h, b))
    return PiecewiseConstant.from_pieces(pieces)


def maintain_until_budget(
    params: EpidemicParams,
    initial: EpidemicState,
    start: float,
    budget: float,
    cap: float = 1.0,
    options: SolverOptions = DEFAULT_OPTIONS,
) -> MaintainFeedback:
    """Maintain feedback from ``start`` that stops when ``budget`` is spent.

    Herd immunity ends the maintain phase first if it comes earlier; the
    unspent budget is then simply left over.
    """
    probe = MaintainFeedback(start, options.horizon, params.r0, cap)
    traj = integrate(params, initial, probe, options)
    over = np.nonzero(traj.cost >= budget)[0]
    if len(over) == 0:
        return MaintainFeedback(start, min(traj.end_time, options.horizon), params.r0, cap)
    k = int(over[0])
    if k == 0:
        return MaintainFeedback(start, start, params.r0, cap)
    lo, hi = max(float(traj.t[k - 1]), start), float(traj.t[k])
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        _, y = run_segment(params, initial, MaintainFeedback(start, mid, params.r0, cap), 0.0, options)
        if y[3] < budget:
            lo = mid
        else:
            hi = mid
    return MaintainFeedback(start, hi, params.r0, cap)
