"""Figure rendering for the four CSV kinds the simulator CLI emits.

Kinds: ``heatmap`` (population over qubit frequency x rise time, with dashed
markers at the mode frequencies), ``traces`` (per-rise-time line cuts offset
vertically for visibility), ``lzcurve`` (final population vs rise time with
the analytic overlay) and ``fockscan`` (per-photon-number traces, offset
vertically).  Rendering is read-only over its inputs and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .csvio import FigureError, Table, read_table, require_columns

KINDS = ("heatmap", "traces", "lzcurve", "fockscan")

SWEEP_COLUMNS = ["t_rise_ns", "t_ns", "omega_q_GHz", "P_q"]
CURVE_COLUMNS = ["t_rise_ns", "P_q_sim", "P_q_formula"]
FOCK_COLUMNS = ["n", "t_ns", "P_q"]

#: Vertical shift between neighboring traces, per figure kind.
TRACE_OFFSET = 1.0
FOCKSCAN_OFFSET = 0.25


@dataclass
class FigureJob:
    kind: str
    input: str
    output: str
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise FigureError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")

    @classmethod
    def from_dict(cls, data: dict) -> "FigureJob":
        unknown = set(data) - {"kind", "input", "output", "options"}
        if unknown:
            raise FigureError(f"unknown job key(s): {', '.join(sorted(unknown))}")
        for key in ("kind", "input", "output"):
            if key not in data:
                raise FigureError(f"figure job is missing {key!r}")
        return cls(
            kind=data["kind"], input=data["input"], output=data["output"],
            options=dict(data.get("options", {})),
        )


def _mode_markers(ax, table: Table, vertical: bool = True):
    for freq in table.mode_frequencies_ghz():
        if vertical:
            ax.axvline(freq, color="tab:orange", linestyle="--", linewidth=1.0)
        else:
            ax.axhline(freq, color="tab:orange", linestyle="--", linewidth=1.0)


def _fig_heatmap(table: Table, options: dict):
    require_columns(table, SWEEP_COLUMNS, "heatmap")
    groups = list(table.groups("t_rise_ns"))
    omega = table.column("omega_q_GHz")
    bins = int(options.get("omega_bins", 401))
    omega_grid = np.linspace(float(np.min(omega)), float(np.max(omega)), bins)
    rise_times = np.array([value for value, _ in groups])
    image = np.empty((len(groups), bins))
    for i, (_, rows) in enumerate(groups):
        image[i] = np.interp(omega_grid, rows[:, 2], rows[:, 3])

    fig, ax = plt.subplots(figsize=options.get("figsize", (6.0, 4.0)))
    # pcolormesh takes bin edges on both axes; pad a degenerate single-row map
    half = 0.5 * (omega_grid[1] - omega_grid[0])
    omega_edges = np.concatenate([omega_grid - half, [omega_grid[-1] + half]])
    if len(rise_times) > 1:
        rise_edges = np.concatenate(
            [[rise_times[0] - 0.5 * (rise_times[1] - rise_times[0])],
             0.5 * (rise_times[1:] + rise_times[:-1]),
             [rise_times[-1] + 0.5 * (rise_times[-1] - rise_times[-2])]]
        )
    else:
        rise_edges = np.array([rise_times[0] * 0.9, rise_times[0] * 1.1])
    mesh = ax.pcolormesh(
        omega_edges, rise_edges, image, cmap=options.get("cmap", "viridis"),
        vmin=0.0, vmax=1.0,
    )
    _mode_markers(ax, table)
    ax.set_xlabel(r"$\omega_q/2\pi$ (GHz)")
    ax.set_ylabel(r"$t_\mathrm{rise}$ (ns)")
    fig.colorbar(mesh, ax=ax, label=r"$P_q$")
    ax.set_title(options.get("title", "qubit population during the sweep"))
    return fig


def _fig_traces(table: Table, options: dict):
    require_columns(table, SWEEP_COLUMNS, "traces")
    offset = float(options.get("offset", TRACE_OFFSET))
    fig, ax = plt.subplots(figsize=options.get("figsize", (6.0, 4.5)))
    for k, (t_rise, rows) in enumerate(table.groups("t_rise_ns")):
        ax.plot(rows[:, 2], rows[:, 3] + k * offset, label=f"{t_rise:g} ns")
    _mode_markers(ax, table)
    ax.set_xlabel(r"$\omega_q/2\pi$ (GHz)")
    ax.set_ylabel(r"$P_q$ (traces offset by {:g})".format(offset))
    ax.legend(title=r"$t_\mathrm{rise}$", fontsize=8)
    ax.set_title(options.get("title", "population traces"))
    return fig


def _fig_lzcurve(table: Table, options: dict):
    require_columns(table, CURVE_COLUMNS, "lzcurve")
    fig, ax = plt.subplots(figsize=options.get("figsize", (5.5, 4.0)))
    ax.plot(table.column("t_rise_ns"), table.column("P_q_sim"), "o", label="simulation")
    ax.plot(table.column("t_rise_ns"), table.column("P_q_formula"), "-", label="survival product")
    if options.get("log_y"):
        ax.set_yscale("log")
    else:
        ax.set_ylim(-0.02, 1.02)
    ax.set_xlabel(r"$t_\mathrm{rise}$ (ns)")
    ax.set_ylabel(r"final $P_q$")
    ax.legend()
    ax.set_title(options.get("title", "final population vs rise time"))
    return fig


def _fig_fockscan(table: Table, options: dict):
    require_columns(table, FOCK_COLUMNS, "fockscan")
    offset = float(options.get("offset", FOCKSCAN_OFFSET))
    fig, ax = plt.subplots(figsize=options.get("figsize", (6.0, 4.5)))
    for k, (n, rows) in enumerate(table.groups("n")):
        ax.plot(rows[:, 1], rows[:, 2] + k * offset, label=f"n={int(n)}")
    ax.set_xlabel("t (ns)")
    ax.set_ylabel(r"$P_q$ (traces offset by {:g})".format(offset))
    ax.legend(fontsize=8)
    ax.set_title(options.get("title", "initial Fock number scan"))
    return fig


_RENDERERS = {
    "heatmap": _fig_heatmap,
    "traces": _fig_traces,
    "lzcurve": _fig_lzcurve,
    "fockscan": _fig_fockscan,
}


def render_figure(job: FigureJob):
    """Build the matplotlib Figure for a job (no file output)."""
    table = read_table(job.input)
    return _RENDERERS[job.kind](table, job.options)


def render(job: FigureJob) -> Path:
    """Render a job to its output image file and return the path."""
    fig = render_figure(job)
    out = Path(job.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out, dpi=int(job.options.get("dpi", 150)))
    plt.close(fig)
    return out
