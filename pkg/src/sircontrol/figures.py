"""Data and static plots for the four numerical experiments.

Each ``figN_data`` function returns plain tables (lists of dicts or a
:class:`~sircontrol.optimizer.ScanResult`); ``render_figN`` turns them into an
SVG.  ``write_figure`` does both and writes CSV next to the plot.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .bounds import incidence_bounds  # noqa: E402
from .controls import ZERO, SingleLockdown  # noqa: E402
from .core import (  # noqa: E402
    DEFAULT_OPTIONS,
    REFERENCE_PARAMS,
    REFERENCE_STATE,
    EpidemicParams,
    EpidemicState,
    SolverOptions,
    integrate,
    total_incidence,
)
from .optimizer import (  # noqa: E402
    budget_level_scan,
    calibrate_peak_min,
    optimal_lockdown,
    start_time_sweep,
)

FIGURES = ("fig1", "fig2", "fig3", "fig4")
FIG1_BUDGETS = (7.5, 15.0, 30.0)
FIG1_LEVELS = tuple(round(0.05 * k, 2) for k in range(1, 21))
LEVEL = 0.75
BUDGET = 15.0
EARLY_START = 16.6
TIME_SERIES_END = 150.0
TIME_SERIES_EVERY = 0.1
SVG_META = {"Date": None}


def _write_rows(path: Path, header: list[str], rows) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([x if isinstance(x, str) else format(float(x), ".17g") for x in row])


def _resample(traj, times: np.ndarray) -> dict[str, np.ndarray]:
    """Sample ``traj`` at ``times``, holding the last value past its end."""
    idx = np.minimum(np.rint(times / traj.step).astype(int), len(traj) - 1)
    s0 = traj.s[0]
    return {"cum": 1.0 - traj.s[idx] / s0, "I": traj.i[idx], "u": traj.u[idx]}


def fig1_data(params=REFERENCE_PARAMS, initial=REFERENCE_STATE, budgets=FIG1_BUDGETS,
              levels=FIG1_LEVELS, tol=0.01, options=DEFAULT_OPTIONS, workers=1):
    return budget_level_scan(params, initial, budgets, levels, tol, options, workers)


def fig2_data(params=REFERENCE_PARAMS, initial=REFERENCE_STATE, options=DEFAULT_OPTIONS,
              starts=None):
    duration = BUDGET / LEVEL
    if starts is None:
        starts = np.round(np.arange(0.0, 60.0 + 1e-9, 0.1), 10)
    return start_time_sweep(params, initial, LEVEL, duration, starts, options)


def fig3_data(params=REFERENCE_PARAMS, initial=REFERENCE_STATE, options=DEFAULT_OPTIONS, tol=0.01):
    """Optimal 20-day lockdown, the same lockdown started a week early, and
    the optimally timed 27-day lockdown."""
    best20 = optimal_lockdown(params, initial, BUDGET, LEVEL, tol, options)
    end = best20.start_time + best20.duration
    early = SingleLockdown(EARLY_START, end - EARLY_START, LEVEL)
    best27 = optimal_lockdown(params, initial, LEVEL * early.duration, LEVEL, tol, options)
    rows = [
        {"name": "optimal", "start": best20.start_time, "end": end, "level": LEVEL,
         "incidence": best20.incidence},
        {"name": "early", "start": early.start, "end": early.end, "level": LEVEL,
         "incidence": total_incidence(params, initial, early, options)},
        {"name": "optimal_long", "start": best27.start_time,
         "end": best27.start_time + best27.duration, "level": LEVEL, "incidence": best27.incidence},
        {"name": "none", "start": 0.0, "end": 0.0, "level": 0.0,
         "incidence": total_incidence(params, initial, ZERO, options)},
    ]
    return rows


def fig4_data(params=REFERENCE_PARAMS, initial=REFERENCE_STATE, options=DEFAULT_OPTIONS, tol=0.01):
    """Incidence-optimal lockdown (a), peak-minimizing strategy (b), no control (c)."""
    best = optimal_lockdown(params, initial, BUDGET, LEVEL, tol, options)
    pm = calibrate_peak_min(params, initial, BUDGET, options=options)
    strategies = {"a": best.strategy, "b": pm.strategy, "c": ZERO}
    times = np.round(np.arange(0.0, TIME_SERIES_END + 1e-9, TIME_SERIES_EVERY), 10)
    series = {"t": times}
    summary = []
    for name, strategy in strategies.items():
        traj = integrate(params, initial, strategy, options)
        for key, col in _resample(traj, times).items():
            series[f"{key}_{name}"] = col
        summary.append({
            "name": name,
            "start": {"a": best.start_time, "b": pm.start, "c": 0.0}[name],
            "duration": {"a": best.duration, "b": pm.duration, "c": 0.0}[name],
            "cost": traj.total_cost,
            "peak": float(np.max(traj.i)),
            "incidence": total_incidence(params, initial, strategy, options),
        })
    return series, summary


def _bound_lines(ax, params, initial):
    b = incidence_bounds(params, initial)
    for y in (b.lower, b.upper):
        ax.axhline(y, color="grey", lw=0.8, ls="--")


def render_fig1(scan, path: Path, params=REFERENCE_PARAMS, initial=REFERENCE_STATE) -> None:
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(6, 7), sharex=True)
    for c1 in dict.fromkeys(r.c1 for r in scan.rows):
        rows = scan.for_budget(c1)
        x = [r.c_inf for r in rows]
        top.plot(x, [r.incidence for r in rows], marker=".", label=f"c1 = {c1:g}")
        bottom.plot(x, [r.start for r in rows], marker=".", label=f"c1 = {c1:g}")
    _bound_lines(top, params, initial)
    top.set_ylabel("minimum total incidence")
    bottom.set_ylabel("optimal start time (days)")
    bottom.set_xlabel("maximum intervention level c_inf")
    top.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=SVG_META)
    plt.close(fig)


def render_fig2(sweep, path: Path, params=REFERENCE_PARAMS, initial=REFERENCE_STATE) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    starts, values = zip(*sweep)
    ax.plot(starts, values)
    k = int(np.argmin(values))
    ax.plot([starts[k]], [values[k]], "o")
    _bound_lines(ax, params, initial)
    ax.set_xlabel("lockdown start time (days)")
    ax.set_ylabel("total incidence")
    fig.tight_layout()
    fig.savefig(path, metadata=SVG_META)
    plt.close(fig)


def render_fig3(rows, path: Path, params=REFERENCE_PARAMS, initial=REFERENCE_STATE,
                options=DEFAULT_OPTIONS) -> None:
    fig, ax = plt.subplots(figsize=(6, 4))
    colors = {"optimal": "tab:blue", "early": "tab:red", "none": "black"}
    times = np.arange(0.0, TIME_SERIES_END, TIME_SERIES_EVERY)
    for row in rows:
        if row["name"] not in colors:
            continue
        strategy = ZERO if row["name"] == "none" else SingleLockdown(
            row["start"], row["end"] - row["start"], row["level"])
        traj = integrate(params, initial, strategy, options)
        ax.plot(times, _resample(traj, times)["cum"], color=colors[row["name"]],
                label=f"{row['name']}: {row['incidence']:.3f}")
        if row["name"] != "none":
            ax.axvspan(row["start"], row["end"], color=colors[row["name"]], alpha=0.1)
    ax.set_xlabel("time (days)")
    ax.set_ylabel("cumulative incidence")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata=SVG_META)
    plt.close(fig)


def render_fig4(series, path: Path) -> None:
    fig, axes = plt.subplots(3, 1, figsize=(6, 8), sharex=True)
    colors = {"a": "tab:blue", "b": "tab:red", "c": "black"}
    for name, color in colors.items():
        for ax, key in zip(axes, ("cum", "I", "u")):
            ax.plot(series["t"], series[f"{key}_{name}"], color=color, label=name)
    axes[0].set_ylabel("cumulative incidence")
    axes[1].set_ylabel("prevalence")
    axes[2].set_ylabel("intervention level")
    axes[2].set_xlabel("time (days)")
    axes[0].legend()
    fig.tight_layout()
    fig.savefig(path, metadata=SVG_META)
    plt.close(fig)


def write_figure(name: str, out_dir: Path, params: EpidemicParams = REFERENCE_PARAMS,
                 initial: EpidemicState = REFERENCE_STATE,
                 options: SolverOptions = DEFAULT_OPTIONS, tol: float = 0.01,
                 workers: int = 1) -> list[Path]:
    """Write ``<name>.csv`` (plus extras) and ``<name>.svg``; returns the paths."""
    if name not in FIGURES:
        raise ValueError(f"unknown figure {name!r}; one of {', '.join(FIGURES)}")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path, svg_path = out_dir / f"{name}.csv", out_dir / f"{name}.svg"
    written = [csv_path, svg_path]
    if name == "fig1":
        scan = fig1_data(params, initial, tol=tol, options=options, workers=workers)
        with csv_path.open("w", newline="") as fh:
            scan.to_csv(fh)
        render_fig1(scan, svg_path, params, initial)
    elif name == "fig2":
        sweep = fig2_data(params, initial, options)
        _write_rows(csv_path, ["start", "incidence"], sweep)
        render_fig2(sweep, svg_path, params, initial)
    elif name == "fig3":
        rows = fig3_data(params, initial, options, tol)
        _write_rows(csv_path, ["name", "start", "end", "level", "incidence"],
                    ([r["name"], r["start"], r["end"], r["level"], r["incidence"]] for r in rows))
        render_fig3(rows, svg_path, params, initial, options)
    else:
        series, summary = fig4_data(params, initial, options, tol)
        keys = list(series)
        _write_rows(csv_path, keys, zip(*(series[k] for k in keys)))
        summary_path = out_dir / "fig4_summary.csv"
        cols = ["name", "start", "duration", "cost", "peak", "incidence"]
        _write_rows(summary_path, cols, ([r[c] for c in cols] for r in summary))
        written.append(summary_path)
        render_fig4(series, svg_path)
    return written
