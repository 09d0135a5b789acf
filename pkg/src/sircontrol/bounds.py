"""Universal incidence bounds and herd-immunity timing."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import EpidemicParams, EpidemicState, Trajectory, final_size
from .errors import InvalidStateError


@dataclass(frozen=True)
class IncidenceBounds:
    """Range of total incidence reachable by any finite-cost intervention."""

    lower: float
    upper: float

    def __contains__(self, j: float) -> bool:
        return self.lower <= j <= self.upper


def incidence_bounds(params: EpidemicParams, initial: EpidemicState) -> IncidenceBounds:
    """Lower bound ``1 - gamma/(beta S0)``, upper bound the uncontrolled incidence."""
    if not (initial.s > 0 and initial.i > 0):
        raise InvalidStateError("incidence bounds need S(0) > 0 and I(0) > 0")
    lower = max(0.0, 1.0 - params.herd_immunity_level / initial.s)
    upper = 1.0 - final_size(params, initial) / initial.s
    return IncidenceBounds(lower, upper)


def herd_immunity_time(trajectory: Trajectory) -> float:
    """First time S drops to ``gamma/beta``, interpolated between samples.

    Returns ``math.inf`` if the trajectory never gets there.
    """
    level = trajectory.params.herd_immunity_level
    s = trajectory.s
    hit = np.nonzero(s <= level)[0]
    if len(hit) == 0:
        return math.inf
    k = int(hit[0])
    if k == 0:
        return 0.0
    t0, t1 = trajectory.t[k - 1], trajectory.t[k]
    s0, s1 = s[k - 1], s[k]
    return float(t0 + (s0 - level) / (s0 - s1) * (t1 - t0))


def herd_immunity_time_bound(params: EpidemicParams, initial: EpidemicState, l1: float) -> float:
    """Upper bound on the herd-immunity time of any control with cost ``l1``.

    Valid for ``S(0) > gamma/beta`` and ``I(0) > 0``.
    """
    if not (initial.s > params.herd_immunity_level and initial.i > 0):
        raise InvalidStateError("bound needs S(0) > gamma/beta and I(0) > 0")
    return l1 + math.log(params.r0 * initial.s) / (params.beta * initial.i) * math.exp(params.gamma * l1)


def tail_integral(params: EpidemicParams, trajectory: Trajectory) -> np.ndarray:
    """``int_t^inf I`` at every sample.

    ``(S + I)' = -gamma I`` under any control, so the tail is
    ``(S + I - S(inf)) / gamma`` with the limit taken from the final sample,
    which must lie after the control has stopped.
    """
    s_inf = final_size(params, trajectory.final_state)
    return (trajectory.s + trajectory.i - s_inf) / params.gamma
