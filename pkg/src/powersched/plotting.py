"""Render the energy/makespan trade-off curve and its derivatives to PNG files."""

from __future__ import annotations

import os

from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

from .core import InvalidArgumentError
from .curve import Frontier, derivative, second_derivative


def render_frontier_plots(
    frontier: Frontier,
    samples: list[tuple[float, float]],
    out_dir: str,
) -> list[str]:
    """Write energy_makespan.png, energy_dmakespan.png and energy_d2makespan.png.

    The curve is drawn from the given (energy, makespan) samples; the two
    derivative plots are evaluated at the same energies. Breakpoints falling
    inside the sampled range appear as dashed vertical lines. Returns the
    paths written.
    """
    if not samples:
        raise InvalidArgumentError("no samples to plot")
    os.makedirs(out_dir, exist_ok=True)
    energies = [e for e, _ in samples]
    e_lo, e_hi = min(energies), max(energies)
    marks = [b for b in frontier.breakpoints if e_lo < b < e_hi]

    panels = [
        ("energy_makespan.png", "makespan", [m for _, m in samples]),
        ("energy_dmakespan.png", "d makespan / d energy",
         [derivative(frontier, e) for e in energies]),
        ("energy_d2makespan.png", "d2 makespan / d energy2",
         [second_derivative(frontier, e) for e in energies]),
    ]
    written = []
    for filename, ylabel, values in panels:
        fig = Figure(figsize=(6.4, 4.0), dpi=120)
        FigureCanvasAgg(fig)
        ax = fig.add_subplot(111)
        ax.plot(energies, values, color="tab:blue", linewidth=1.5)
        for b in marks:
            ax.axvline(b, color="tab:gray", linestyle="--", linewidth=0.8)
        ax.set_xlabel("energy budget")
        ax.set_ylabel(ylabel)
        ax.grid(True, alpha=0.3)
        fig.tight_layout()
        path = os.path.join(out_dir, filename)
        fig.savefig(path)
        written.append(path)
    return written
