"""Acceptance criteria, one test per criterion.

Each criterion returns a list of named checks.  The pytest run prints one
PASS/FAIL line per criterion in the terminal summary; running this file
directly prints the same lines.
"""

import numpy as np
import pytest

from conftest import extinction_oracle, random_piecewise, random_strategy
from sircontrol import (
    REFERENCE_PARAMS as P,
    REFERENCE_STATE as X,
    ZERO,
    EpidemicState,
    PiecewiseConstant,
    ReffThreshold,
    SingleLockdown,
    SolverOptions,
    calibrate_peak_min,
    costs,
    final_size,
    herd_immunity_time,
    herd_immunity_time_bound,
    incidence_bounds,
    integrate,
    maintain_until_budget,
    optimal_lockdown,
    peak_prevalence,
    quantize,
    total_incidence,
)
from sircontrol.core import terminal_state

LONG = SolverOptions(horizon=2000)
RESULTS: dict[int, tuple[bool, str]] = {}


class Check:
    """One named comparison inside a criterion."""

    def __init__(self, name, ok, detail):
        self.name, self.ok, self.detail = name, bool(ok), detail

    @classmethod
    def near(cls, name, value, target, tol):
        return cls(name, abs(value - target) <= tol, f"{name}={value:.6g} (target {target} +/- {tol})")

    @classmethod
    def at_most(cls, name, value, limit):
        return cls(name, value <= limit, f"{name}={value:.3g} (<= {limit:.3g})")


def criterion_1():
    traj = integrate(P, X, ZERO)
    return [
        Check.near("incidence", total_incidence(P, X, ZERO), 0.940, 1e-3),
        Check.near("peak", peak_prevalence(traj), 0.300, 2e-3),
    ]


def criterion_2():
    b = incidence_bounds(P, X)
    rng = np.random.default_rng(20)
    worst = 0.0
    for _ in range(60):
        j = total_incidence(P, X, random_strategy(rng, P), LONG)
        worst = max(worst, b.lower - j, j - b.upper)
    return [
        Check.near("lower", b.lower, 0.666, 1e-3),
        Check.near("upper", b.upper, 0.940, 1e-3),
        Check.at_most("worst violation over 60 strategies", worst, 1e-6),
    ]


def criterion_3():
    res = optimal_lockdown(P, X, 15.0, 0.75)
    return [
        Check.near("start", res.start_time, 23.6, 0.1),
        Check.near("incidence", res.incidence, 0.758, 2e-3),
    ]


def criterion_4():
    early = total_incidence(P, X, SingleLockdown(16.6, 27.0, 0.75))
    res = optimal_lockdown(P, X, 0.75 * 27.0, 0.75)
    return [
        Check.near("incidence at start 16.6", early, 0.907, 2e-3),
        Check.near("optimal start", res.start_time, 23.4, 0.1),
        Check.near("optimal incidence", res.incidence, 0.723, 2e-3),
    ]


def criterion_5():
    t_h = herd_immunity_time(integrate(P, X, ZERO))
    res = optimal_lockdown(P, X, 30.0, 1.0)
    return [
        Check.near("optimal start", res.start_time, 24.94, 0.1),
        Check.near("start minus herd-immunity time", res.start_time - t_h, 0.0, 0.1),
    ]


def criterion_6():
    pm = calibrate_peak_min(P, X, 15.0)
    best = optimal_lockdown(P, X, 15.0, 0.75)
    return [
        Check.near("peak-min start", pm.start, 17.0, 0.3),
        Check.near("peak-min duration", pm.duration, 36.6, 0.5),
        Check.near("peak-min peak", pm.peak, 0.075, 2e-3),
        Check.near("peak-min incidence", pm.incidence, 0.843, 3e-3),
        Check.near("optimal lockdown peak", best.peak, 0.289, 2e-3),
    ]


def criterion_7():
    rng = np.random.default_rng(70)
    l1_err = 0.0
    for _ in range(100):
        u = random_piecewise(rng, max_level=0.9)
        q = quantize(u, float(rng.uniform(0.9, 1.0)), float(rng.choice([1.0, 0.5, 0.1])))
        l1_err = max(l1_err, abs(q.l1 - u.l1))
    b = 0.75
    ratio = 0.0
    for _ in range(5):
        u = random_piecewise(rng, max_l1=15.0, max_level=b)
        base = integrate(P, X, u, LONG)
        for h in (1.0, 0.5, 0.1):
            tq = integrate(P, X, quantize(u, b, h), LONG)
            n = min(len(base), len(tq))
            dev = np.abs(base.i[:n] - tq.i[:n])
            bound = 3 * P.beta * b * h * np.exp((P.beta + P.gamma) * base.t[:n])
            ratio = max(ratio, float(np.max(dev / bound)))
    return [
        Check.at_most("max L1 error over 100 controls", l1_err, 1e-9),
        Check.at_most("max deviation / bound", ratio, 1.0),
    ]


def criterion_8():
    rng = np.random.default_rng(80)
    worst = -np.inf
    for _ in range(100):
        u1 = random_piecewise(rng, max_l1=20.0, horizon=50.0)
        t1 = u1.support_end + rng.uniform(0.0, 30.0)
        u2 = PiecewiseConstant.from_pieces(
            list(u1.pieces()) + [(t1, t1 + rng.uniform(0.1, 30.0), rng.uniform(0.05, 1.0))])
        s1 = final_size(P, terminal_state(P, X, u1)[1])
        s2 = final_size(P, terminal_state(P, X, u2)[1])
        worst = max(worst, s1 - s2)
    return [Check.at_most("max S1(inf) - S2(inf) over 100 pairs", worst, 1e-9)]


def criterion_9():
    rng = np.random.default_rng(90)
    worst = -np.inf
    n = 0
    for i0 in (1e-4, 1e-3, 1e-2, 0.1):
        initial = EpidemicState(1 - i0, i0)
        for _ in range(15):
            u = random_strategy(rng, P, max_l1=30.0)
            l1 = costs(u, P, initial, LONG).l1
            t_h = herd_immunity_time(integrate(P, initial, u, LONG))
            worst = max(worst, t_h - herd_immunity_time_bound(P, initial, l1))
            n += 1
    return [Check.at_most(f"max t_H - bound over {n} controls", worst, 0.0)]


def _feasible_strategies(rng, c1, c_inf, n):
    out = []
    for k in range(n):
        kind = k % 4
        if kind == 0:
            out.append(random_piecewise(rng, max_l1=c1, max_level=c_inf))
        elif kind == 1:
            out.append(quantize(random_piecewise(rng, max_l1=c1, max_level=c_inf), c_inf,
                                float(rng.choice([1.0, 0.5, 0.1]))))
        elif kind == 2:
            out.append(maintain_until_budget(P, X, rng.uniform(0, 40), c1, cap=c_inf))
        else:
            level = rng.uniform(0.1, c_inf)
            start = rng.uniform(0, 40)
            out.append(ReffThreshold(level, rng.uniform(1.0, 2.5), P.r0, start + c1 / level, start))
    return out


def criterion_10():
    c1, c_inf = 15.0, 0.75
    best = optimal_lockdown(P, X, c1, c_inf)
    rng = np.random.default_rng(100)
    margin = np.inf
    over_budget = 0.0
    kinds = set()
    for u in _feasible_strategies(rng, c1, c_inf, 24):
        r = costs(u, P, X, LONG)
        over_budget = max(over_budget, r.l1 - c1, r.sup - c_inf)
        kinds.add(u.kind)
        margin = min(margin, total_incidence(P, X, u, LONG) - best.incidence)
    return [
        Check.at_most("strategies exceeding budget or cap", over_budget, 1e-9),
        Check("strategy kinds", len(kinds) >= 3, f"kinds={sorted(kinds)}"),
        Check("min J(u) - J(opt) over 24 strategies >= -1e-4", margin >= -1e-4,
              f"margin={margin:.3g}"),
    ]


def criterion_11():
    fine = SolverOptions(step=0.005)
    pm = calibrate_peak_min(P, X, 15.0)
    controls = [
        ZERO,
        SingleLockdown(23.6, 20.0, 0.75),
        SingleLockdown(16.6, 27.0, 0.75),
        optimal_lockdown(P, X, 15.0, 0.75).strategy,
        optimal_lockdown(P, X, 20.25, 0.75).strategy,
        pm.strategy,
    ]
    halving = max(abs(total_incidence(P, X, u) - total_incidence(P, X, u, fine)) for u in controls)
    rng = np.random.default_rng(110)
    states = [X] + [EpidemicState(s, rng.uniform(1e-5, 1 - s))
                    for s in rng.uniform(0.05, 0.99, size=10)]
    oracle_err = max(abs(final_size(P, st) - extinction_oracle(P, st.s, st.i)) for st in states)
    return [
        Check.at_most("max step-halving change", halving, 1e-6),
        Check.at_most("max final_size vs oracle", oracle_err, 1e-6),
    ]


CRITERIA = {
    1: ("uncontrolled epidemic", criterion_1),
    2: ("incidence bounds and sandwich", criterion_2),
    3: ("optimal 20-day lockdown", criterion_3),
    4: ("27-day lockdown timing", criterion_4),
    5: ("full lockdown waits for herd immunity", criterion_5),
    6: ("peak-minimizing comparison", criterion_6),
    7: ("quantizer properties", criterion_7),
    8: ("prolongation monotonicity", criterion_8),
    9: ("herd-immunity-time bound", criterion_9),
    10: ("single lockdown dominance", criterion_10),
    11: ("numerics", criterion_11),
}


def evaluate_criterion(number):
    title, fn = CRITERIA[number]
    checks = fn()
    ok = all(c.ok for c in checks)
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: " + "; ".join(
        c.detail for c in checks)
    RESULTS[number] = (ok, line)
    return ok, line


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    ok, line = evaluate_criterion(number)
    print(line)
    assert ok, line


if __name__ == "__main__":
    for k in sorted(CRITERIA):
        print(evaluate_criterion(k)[1])
