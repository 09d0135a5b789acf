"""Shared fixtures and random strategy generators."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from sircontrol import (
    REFERENCE_PARAMS,
    REFERENCE_STATE,
    MaintainFeedback,
    PiecewiseConstant,
    ReffThreshold,
    SingleLockdown,
    WaitMaintainSuppressRelax,
    quantize,
)


@pytest.fixture
def params():
    return REFERENCE_PARAMS


@pytest.fixture
def initial():
    return REFERENCE_STATE


def extinction_oracle(params, s, i, i_stop=1e-14):
    """S at extinction from a tight-tolerance adaptive solve of the uncontrolled model.

    Independent of the package's RK4 kernel and of the final-size inversion.
    """
    def rhs(t, y):
        inf = params.beta * y[0] * y[1]
        return [-inf, inf - params.gamma * y[1]]

    def gone(t, y):
        return y[1] - i_stop

    gone.terminal = True
    sol = solve_ivp(rhs, (0.0, 20000.0), [s, i], method="DOP853", rtol=1e-12, atol=1e-16,
                    events=gone)
    return float(sol.y[0, -1])


def random_piecewise(rng, max_l1=30.0, horizon=60.0, max_level=1.0, n_max=5):
    """Random piecewise-constant control with cost at most ``max_l1``."""
    n = int(rng.integers(1, n_max + 1))
    times = np.sort(rng.choice(np.arange(1, int(horizon * 10)), size=n + 1, replace=False)) / 10.0
    levels = rng.uniform(0.0, max_level, size=n)
    cost = float(np.sum(levels * np.diff(times)))
    if cost > max_l1:
        levels *= max_l1 / cost
    return PiecewiseConstant(tuple(times), tuple(levels))


def random_strategy(rng, params, max_l1=30.0, max_level=1.0):
    """One finite-cost strategy of a randomly chosen kind, cost at most ``max_l1``."""
    kind = int(rng.integers(0, 6))
    if kind == 0:
        level = rng.uniform(0.05, max_level)
        duration = rng.uniform(0.5, max_l1 / level)
        return SingleLockdown(round(rng.uniform(0, 60), 2), duration, level)
    if kind == 1:
        return random_piecewise(rng, max_l1, max_level=max_level)
    if kind == 2:
        u = random_piecewise(rng, max_l1, max_level=max_level)
        return quantize(u, max_level, float(rng.choice([1.0, 0.5, 0.1])))
    # feedback kinds: level <= cap over a window of length <= max_l1 / cap keeps cost <= max_l1
    cap = rng.uniform(0.1, max_level)
    start = rng.uniform(0, 40)
    end = start + rng.uniform(1, max_l1 / cap)
    if kind == 3:
        return MaintainFeedback(start, end, params.r0, cap)
    if kind == 4:
        return ReffThreshold(cap, rng.uniform(1.0, 2.5), params.r0, end, start)
    t2 = rng.uniform(start, end)
    return WaitMaintainSuppressRelax(start, t2, end, params.r0, suppress_level=cap, cap=cap)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[k][1])
