"""Compiled fixed-step RK4 loop for the controlled SIR system.

The loop advances a state vector ``y = [S, I, R, cost, active, umax]`` on the
global grid ``k * h``: steps always end on grid points, except for a partial
first step when starting off-grid and a partial last step when ``t_end`` is
off-grid.  Within one call the control law is fixed, either a constant level
(``mode == CONSTANT``) or the maintain feedback ``1 - 1/(r0 S)`` clamped to
``[0, cap]`` (``mode == MAINTAIN``), evaluated at every RK stage.
"""

import math

import numpy as np
from numba import njit

CONSTANT = 0
MAINTAIN = 1

DONE = 0
DIVERGED = 1
CROSSED = 2
EXTINCT = 3

# Tolerance, in grid-index units, for deciding that a time sits on the grid.
GRID_EPS = 1e-7
# Levels at or below this count as "no intervention" for the duration measure.
ACTIVE_EPS = 1e-12
DOMAIN_TOL = 1e-9

EMPTY_RECORD = np.empty((0, 5))


@njit(cache=True)
def _level(mode, level, r0, cap, s):
    if mode == CONSTANT:
        return level
    if s <= 0.0:
        return 0.0
    u = 1.0 - 1.0 / (r0 * s)
    if u < 0.0:
        return 0.0
    if u > cap:
        return cap
    return u


@njit(cache=True)
def advance(y, t, t_end, h, beta, gamma, mode, level, r0, cap, s_switch, i_stop, rec):
    """Advance ``y`` in place from ``t`` to ``t_end``.

    Returns ``(status, t)``.  On ``CROSSED`` the state is left at the start of
    the step whose end would put S at or below ``s_switch``; the caller
    locates the crossing.  ``rec`` rows are written at grid indices when
    ``rec`` is non-empty: ``S, I, R, u, cost``.
    """
    record = rec.shape[0] > 0
    tol = GRID_EPS * h
    s = y[0]
    i = y[1]
    r = y[2]
    cost = y[3]
    active = y[4]
    umax = y[5]
    status = DONE
    while t < t_end - tol:
        k = math.floor(t / h + GRID_EPS)
        tg = (k + 1) * h
        on_grid = tg <= t_end + tol
        tn = tg if on_grid else t_end
        dt = tn - t

        u1 = _level(mode, level, r0, cap, s)
        a1 = (1.0 - u1) * beta * s * i
        s2 = s - 0.5 * dt * a1
        i2 = i + 0.5 * dt * (a1 - gamma * i)
        u2 = _level(mode, level, r0, cap, s2)
        a2 = (1.0 - u2) * beta * s2 * i2
        s3 = s - 0.5 * dt * a2
        i3 = i + 0.5 * dt * (a2 - gamma * i2)
        u3 = _level(mode, level, r0, cap, s3)
        a3 = (1.0 - u3) * beta * s3 * i3
        s4 = s - dt * a3
        i4 = i + dt * (a3 - gamma * i3)
        u4 = _level(mode, level, r0, cap, s4)
        a4 = (1.0 - u4) * beta * s4 * i4

        inc = dt / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4)
        rec_ = dt / 6.0 * gamma * (i + 2.0 * i2 + 2.0 * i3 + i4)
        sn = s - inc
        i_n = i + inc - rec_
        # the exact flow keeps S and I in [0, 1]; leaving it means the step is unstable
        if not (math.isfinite(sn) and math.isfinite(i_n)) or sn < -DOMAIN_TOL or i_n < -DOMAIN_TOL \
                or sn > s + DOMAIN_TOL:
            status = DIVERGED
            break
        if s_switch >= 0.0 and sn <= s_switch:
            status = CROSSED
            break
        s = sn
        i = i_n
        r = r + rec_
        cost = cost + dt / 6.0 * (u1 + 2.0 * u2 + 2.0 * u3 + u4)
        um = max(max(u1, u2), max(u3, u4))
        if um > ACTIVE_EPS:
            active = active + dt
        if um > umax:
            umax = um
        if on_grid:
            t = tg
            if record and k + 1 < rec.shape[0]:
                rec[k + 1, 0] = s
                rec[k + 1, 1] = i
                rec[k + 1, 2] = r
                rec[k + 1, 3] = _level(mode, level, r0, cap, s)
                rec[k + 1, 4] = cost
            if i_stop > 0.0 and i < i_stop:
                status = EXTINCT
                break
        else:
            t = tn
    y[0] = s
    y[1] = i
    y[2] = r
    y[3] = cost
    y[4] = active
    y[5] = umax
    return status, t
