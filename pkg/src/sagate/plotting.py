"""Static figures for sweep outputs.

Figures are built on a bare :class:`matplotlib.figure.Figure` with the Agg
canvas, so nothing touches pyplot's global state and rendering is safe from
worker threads.
"""

from __future__ import annotations

import math
from collections import defaultdict

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

GOLDEN = (math.sqrt(5) - 1.0) / 2.0


def new_figure(width: float = 5.0, height: float = None) -> tuple:
    fig = Figure(figsize=(width, height or width * GOLDEN), dpi=150)
    FigureCanvasAgg(fig)
    ax = fig.add_subplot(1, 1, 1)
    return fig, ax


def _theta_label(theta0: float) -> str:
    frac = theta0 / math.pi
    if abs(frac - 1.0) < 1e-9:
        return r"$\theta_0=\pi$"
    return rf"$\theta_0={frac:.3g}\pi$"


def plot_cost_sweep(rows, path, closed_curve: bool = True):
    """Energy cost against ``omega * tau``, one series per ``theta0``.

    ``rows`` are mappings with ``theta0``, ``tau_omega``, ``sigma_numeric``
    and ``sigma_closed``.  Markers show the numeric quadrature, lines the
    closed form.
    """
    series = defaultdict(list)
    for r in rows:
        series[r["theta0"]].append(r)
    fig, ax = new_figure()
    for theta0 in sorted(series):
        pts = sorted(series[theta0], key=lambda r: r["tau_omega"])
        x = [r["tau_omega"] for r in pts]
        line = None
        if closed_curve:
            line, = ax.plot(x, [r["sigma_closed"] for r in pts], lw=1.2, label=_theta_label(theta0))
        ax.plot(x, [r["sigma_numeric"] for r in pts], "o", ms=3.5,
                color=line.get_color() if line is not None else None,
                label=None if line is not None else _theta_label(theta0))
    ax.axhline(2.0, color="0.5", ls=":", lw=0.8)
    ax.set_xscale("log")
    ax.set_xlabel(r"$\omega\tau$")
    ax.set_ylabel(r"$\Sigma(\tau)\ [\hbar\omega]$")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    return fig


def plot_qsl(rows, path):
    """Evolution time against the Margolus-Levitin bound time."""
    fig, ax = new_figure()
    x = [r["tau_omega"] for r in rows]
    ax.loglog(x, x, "k-", lw=0.8, label=r"$\omega\tau$")
    ax.loglog(x, [max(r["bound_time"], 1e-300) for r in rows], "o-", ms=3.5, label="bound time")
    ax.set_xlabel(r"$\omega\tau$")
    ax.set_ylabel(r"time $[1/\omega]$")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    fig.savefig(path)
    return fig
