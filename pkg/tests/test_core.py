import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import trapezoid

from conftest import extinction_oracle
from sircontrol import (
    ZERO,
    EpidemicParams,
    EpidemicState,
    MaintainFeedback,
    PiecewiseConstant,
    SingleLockdown,
    SolverOptions,
    final_size,
    integrate,
    invert_special,
    peak_prevalence,
    quantize,
    total_incidence,
    vulnerability,
)
from sircontrol.errors import (
    BelowMinimumError,
    HorizonTooShortError,
    IntegrationDivergedError,
    InvalidControlError,
    InvalidParamsError,
    InvalidStateError,
    UnboundedCostError,
)


def test_uncontrolled_incidence_and_peak(params, initial):
    traj = integrate(params, initial, ZERO)
    assert total_incidence(params, initial, ZERO) == pytest.approx(0.940, abs=1e-3)
    assert peak_prevalence(traj) == pytest.approx(0.300, abs=2e-3)


def test_full_lockdown_freezes_susceptibles(params, initial):
    traj = integrate(params, initial, SingleLockdown(0.0, 30.0, 1.0))
    during = traj.t <= 30.0
    assert np.allclose(traj.s[during], initial.s, atol=1e-15)
    expected = initial.i * np.exp(-params.gamma * traj.t[during])
    assert np.allclose(traj.i[during], expected, rtol=1e-9)


def test_no_infection_is_stationary(params):
    state = EpidemicState(0.7, 0.0)
    traj = integrate(params, state, ZERO, SolverOptions(horizon=50))
    assert np.all(traj.s == 0.7) and np.all(traj.i == 0.0)
    assert final_size(params, state) == 0.7


def test_conservation_and_monotonicity(params, initial):
    u = PiecewiseConstant((10.0, 20.0, 35.0), (0.4, 0.9))
    traj = integrate(params, initial, u)
    assert np.max(np.abs(traj.s + traj.i + traj.r - 1.0)) < 1e-9
    assert np.all(np.diff(traj.s) <= 0)
    assert np.all(np.diff(traj.r) >= 0)
    assert np.all(traj.i >= 0)


@pytest.mark.parametrize("control", [ZERO, SingleLockdown(23.6, 20.0, 0.75)])
def test_incidence_matches_infection_integral(params, initial, control):
    traj = integrate(params, initial, control)
    integral = trapezoid(traj.i, traj.t) + traj.i[-1] / params.gamma
    j = total_incidence(params, initial, control)
    # S(0) + I(0) - S(inf) = gamma * int I
    assert params.gamma * integral == pytest.approx(initial.s + initial.i - initial.s * (1 - j),
                                                    abs=1e-6)
    assert params.gamma * integral / initial.s - initial.i / initial.s == pytest.approx(j, abs=1e-6)


def test_incidence_close_to_infection_integral_small_seed(params):
    initial = EpidemicState(1 - 1e-6, 1e-6)
    traj = integrate(params, initial, ZERO)
    integral = trapezoid(traj.i, traj.t)
    assert params.gamma * integral / initial.s == pytest.approx(
        total_incidence(params, initial, ZERO), abs=1e-4)


@pytest.mark.parametrize("control", [
    ZERO,
    SingleLockdown(23.6, 20.0, 0.75),
    PiecewiseConstant((5.0, 12.5, 40.0), (0.2, 0.55)),
])
def test_step_halving(params, initial, control):
    a = total_incidence(params, initial, control, SolverOptions(step=0.01))
    b = total_incidence(params, initial, control, SolverOptions(step=0.005))
    assert abs(a - b) < 1e-6


def test_final_size_matches_extinction_oracle(params, initial):
    assert final_size(params, initial) == pytest.approx(
        extinction_oracle(params, initial.s, initial.i), abs=1e-6)


@settings(max_examples=30, deadline=None)
@given(s=st.floats(0.01, 0.999), frac=st.floats(1e-4, 1.0))
def test_final_size_random_states(s, frac):
    params = EpidemicParams(0.6, 0.2)
    i = frac * (1 - s)
    assert final_size(params, EpidemicState(s, i)) == pytest.approx(
        extinction_oracle(params, s, i), abs=1e-6)


def test_final_size_below_threshold_is_below_s(params):
    state = EpidemicState(0.2, 0.05)
    s_inf = final_size(params, state)
    assert 0 < s_inf < 0.2


def test_invert_special_minimum_and_domain():
    rho = 3.0
    y0 = (1 + math.log(rho)) / rho
    assert invert_special(rho, y0) == pytest.approx(1 / rho, rel=1e-7)
    with pytest.raises(BelowMinimumError):
        invert_special(rho, y0 - 1e-3)


@settings(max_examples=100, deadline=None)
@given(rho=st.floats(1.05, 20.0), x=st.floats(1e-6, 1.0))
def test_invert_special_round_trip(rho, x):
    x = min(x, 1 / rho)
    y = x - math.log(x) / rho
    g = invert_special(rho, y)
    assert 0 < g <= 1 / rho
    assert g - math.log(g) / rho == pytest.approx(y, abs=1e-10)


def test_invert_special_example():
    x = invert_special(3.0, 1.0)
    assert x - math.log(x) / 3 == pytest.approx(1.0, abs=1e-10)
    assert x == pytest.approx(extinction_free_root(), abs=1e-12)


def extinction_free_root():
    from scipy.optimize import brentq
    return brentq(lambda x: x - math.log(x) / 3 - 1.0, 1e-6, 1 / 3, xtol=1e-15)


def test_invert_special_decreasing():
    ys = np.linspace(0.8, 5.0, 50)
    xs = [invert_special(3.0, y) for y in ys]
    assert np.all(np.diff(xs) < 0)


def test_vulnerability_example(params):
    third = 1 / 3
    assert vulnerability(params, EpidemicState(third, 0.0)) == pytest.approx(0.6995, abs=1e-4)
    assert vulnerability(params, EpidemicState(0.5, 0.2)) == pytest.approx(0.9310490602, abs=1e-9)
    assert vulnerability(params, EpidemicState(0.9999, 0.0001)) == pytest.approx(
        1.0 - math.log(0.9999) / 3, abs=1e-12)


def test_vulnerability_conserved_without_control(params, initial):
    traj = integrate(params, initial, ZERO)
    v = traj.s + traj.i - np.log(traj.s) / params.r0
    assert np.max(np.abs(v - v[0])) < 1e-10


def test_constant_control_invariant(params, initial):
    c = 0.4
    traj = integrate(params, initial, SingleLockdown(0.0, 40.0, c))
    on = (traj.t > 0) & (traj.t <= 40.0)
    w = (1 - c) * (traj.s[on] + traj.i[on]) - np.log(traj.s[on]) / params.r0
    assert np.max(np.abs(w - w[0])) < 1e-10


def test_csv_output(params, initial):
    traj = integrate(params, initial, SingleLockdown(1.0, 2.0, 0.5), SolverOptions(horizon=3))
    buf = io.StringIO()
    traj.to_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "t,S,I,R,u"
    assert len(lines) == len(traj) + 1
    row = lines[1].split(",")
    assert float(row[1]) == initial.s
    assert row[1] == format(initial.s, ".17g")


def test_divergent_step_is_reported(params, initial):
    with pytest.raises(IntegrationDivergedError):
        integrate(EpidemicParams(500.0, 0.2), EpidemicState(0.5, 0.5), ZERO,
                  SolverOptions(step=1.0, horizon=50))


def test_horizon_too_short(params, initial):
    with pytest.raises(HorizonTooShortError):
        integrate(params, initial, SingleLockdown(10.0, 100.0, 0.5), SolverOptions(horizon=50))


def test_unbounded_support_rejected(params, initial):
    with pytest.raises(InvalidControlError):
        MaintainFeedback(10.0, math.inf, params.r0)
    with pytest.raises(UnboundedCostError):
        quantize(lambda t: 0.5, 1.0, 1.0, support_end=math.inf)


@pytest.mark.parametrize("s,i", [(-0.1, 0.1), (0.9, -0.1), (0.9, 0.2)])
def test_invalid_state(s, i):
    with pytest.raises(InvalidStateError):
        EpidemicState(s, i)


@pytest.mark.parametrize("beta,gamma", [(0.0, 0.2), (0.6, -1.0), (math.nan, 0.2)])
def test_invalid_params(beta, gamma):
    with pytest.raises(InvalidParamsError):
        EpidemicParams(beta, gamma)
