"""Figure rendering for run artifacts: every report gets a PNG next to its CSV."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (7.5, 4.6),
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
}


def _new_fig(nrows=1, ncols=1):
    with plt.rc_context(_STYLE):
        return plt.subplots(nrows, ncols, constrained_layout=True)


def _save(fig, path):
    fig.savefig(path)
    plt.close(fig)


def trajectory_figure(traj, path: str):
    """Final-state profiles plus conserved-quantity drift curves."""
    fig, (ax1, ax2) = _new_fig(1, 2)
    state = traj.final_state
    x = state.grid.x
    if hasattr(state, "u1"):
        ax1.plot(x, np.abs(state.u1.values), label="|u1|")
        ax1.plot(x, np.abs(state.u2.values), label="|u2|")
        ax1.plot(x, np.real(state.v.values), label="v")
    else:
        ax1.plot(x, np.abs(state.u.values), label="|u|")
        ax1.plot(x, np.real(state.v1.values), label="v1")
        ax1.plot(x, np.real(state.v2.values), label="v2")
    ax1.set_xlabel("x")
    ax1.set_title(f"final state, t = {state.t:.3g} ({traj.status.value})")
    ax1.legend()

    times = [r.time for r in traj.reports]
    floor = 1e-17
    ax2.semilogy(times, [max(r.drift_energy, floor) for r in traj.reports],
                 label="energy")
    ax2.semilogy(times, [max(r.drift_momentum, floor) for r in traj.reports],
                 label="momentum")
    for i in range(len(traj.reports[0].drift_masses)):
        ax2.semilogy(times, [max(r.drift_masses[i], floor) for r in traj.reports],
                     label=f"mass {i + 1}")
    ax2.set_xlabel("t")
    ax2.set_ylabel("relative drift")
    ax2.legend()
    _save(fig, path)


def profile_figure(x, columns: dict, path: str, title: str = ""):
    fig, ax = _new_fig()
    for label, values in columns.items():
        ax.plot(x, np.real(values), label=label)
    ax.set_xlabel("x")
    if title:
        ax.set_title(title)
    ax.legend()
    _save(fig, path)


def minimizer_figure(result, path: str):
    fig, ax = _new_fig()
    x = result.w.grid.x
    ax.plot(x, np.abs(result.phi1.values), label="|phi1|")
    ax.plot(x, np.abs(result.phi2.values), label="|phi2|")
    ax.plot(x, np.real(result.w.values), label="w")
    ax.set_xlabel("x")
    ax.set_title(
        f"value = {result.value:.6g}, sigma = ({result.sigma1:.4g}, "
        f"{result.sigma2:.4g}), c = {result.c:.4g}"
    )
    ax.legend()
    _save(fig, path)


def stability_figure(record, path: str):
    fig, ax = _new_fig()
    ax.plot(record.times, record.distances, label="orbit distance d(t)")
    if record.delta > 0:
        ax.axhline(record.delta, ls="--", c="gray", label="delta")
    ax.set_xlabel("t")
    ax.set_ylabel("d")
    ax.set_title(f"verdict: {record.verdict} (ratio {record.ratio:.3g})")
    ax.legend()
    _save(fig, path)
