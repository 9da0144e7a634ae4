"""Static figures written next to the CSV outputs (Agg backend, no display)."""

from __future__ import annotations

from pathlib import Path

import numpy as np

RC = {
    "figure.figsize": (6.4, 4.0),
    "figure.dpi": 110,
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.4,
    "savefig.bbox": "tight",
}

METHOD_STYLE = {
    "SA": dict(color="0.55", ls=":"),
    "IASA": dict(color="tab:blue", ls="--"),
    "KSA": dict(color="black", ls="-."),
    "IAKSA": dict(color="tab:orange", ls="-"),
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def figure_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".png")


def plot_landscape(table, path, title: str | None = None) -> Path:
    """U and H on a shared x axis (two y scales, since H is in units of 1/eps)."""
    plt = _pyplot()
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        ax.plot(table.x, table.u, color="black", label="U")
        ax.set_xlabel("x")
        ax.set_ylabel("U(x)")
        ax2 = ax.twinx()
        ax2.plot(table.x, table.h, color="tab:orange", ls="--", label="H")
        ax2.set_ylabel("H(x)")
        handles = ax.get_lines() + ax2.get_lines()
        ax.legend(handles, [h.get_label() for h in handles], loc="upper left")
        if title:
            ax.set_title(title)
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_curves(curves, path, delta: float | None = None) -> Path:
    """log10 failure probability against log10 time, running-min and instantaneous panels.

    Zero proportions are drawn at log10(1/(2R)) so they stay on the log axis.
    """
    plt = _pyplot()
    with plt.rc_context(RC):
        fig, axes = plt.subplots(1, 2, figsize=(10, 3.8), sharey=True)
        for curve in curves:
            t = np.asarray(curve.theta, dtype=float)
            keep = t > 0
            floor = 1.0 / (2.0 * max(curve.n_replicas, 1))
            style = METHOD_STYLE.get(curve.method, {})
            for ax, p in zip(axes, (curve.p_runmin, curve.p_inst)):
                p = np.maximum(np.asarray(p, dtype=float), floor)
                ax.plot(np.log10(t[keep]), np.log10(p[keep]), label=curve.method, **style)
        suffix = "" if delta is None else f" > U_min + {delta:g}"
        axes[0].set_ylabel("log10 P")
        axes[0].set_title("running minimum" + suffix)
        axes[1].set_title("current value" + suffix)
        for ax in axes:
            ax.set_xlabel("log10 t")
        axes[0].legend()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_density(density, path, title: str | None = None) -> Path:
    plt = _pyplot()
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        xs = density.grid.xs
        ax.plot(xs, density.density, color="tab:blue", label="mu")
        ax.set_xlabel("x")
        ax.set_ylabel("density")
        ax2 = ax.twinx()
        ax2.plot(xs, density.grid.us, color="0.6", lw=0.8, label="U")
        ax2.set_ylabel("U(x)")
        if title:
            ax.set_title(title)
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_trajectory(traj, path) -> Path:
    plt = _pyplot()
    with plt.rc_context(RC):
        fig, ax = plt.subplots()
        t = np.asarray(traj.theta)
        keep = t > 0
        ax.plot(t[keep], traj.u[keep], color="0.6", lw=0.8, label="U(X_t)")
        ax.plot(t[keep], traj.runmin[keep], color="tab:orange", label="running min")
        ax.set_xscale("log")
        ax.set_xlabel("t")
        ax.legend()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)
