"""Figure assembly: CSV columns in, matplotlib figures out.

Branch coloring convention: the upper branch (nu_plus / dnu_plus) is
black, the lower branch (nu_minus / dnu_minus) is red, throughout.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .errors import FigsError
from .reader import CsvTable, read_csv

FIGURE_IDS = (2, 4, 5, 6)

BRANCH_PLUS_COLOR = "black"
BRANCH_MINUS_COLOR = "red"

_RC = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "svg.hashsalt": "epgrav-figs",
}


@dataclass(frozen=True)
class FigureSpec:
    """Which figure to build, from which CSV directory, to which file."""

    figure: int
    in_dir: str
    out_path: str

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise FigsError(f"unknown figure id {self.figure} "
                            f"(known: {FIGURE_IDS})")

    def input_paths(self) -> list[str]:
        names = {
            2: ["fig2_X.csv"],
            4: ["fig4_X.csv", "fig4_Y.csv", "fig4_Z.csv"],
            5: ["fig5.csv"],
            6: ["fig6.csv"],
        }[self.figure]
        return [os.path.join(self.in_dir, n) for n in names]


def _load(spec: FigureSpec) -> list[CsvTable]:
    tables = []
    for path in spec.input_paths():
        if not os.path.exists(path):
            raise FigsError(f"input CSV not found: {path}")
        tables.append(read_csv(path))
    return tables


def _fig_coalescence(table: CsvTable):
    table.require("alpha_in", "nu_plus", "nu_minus", "ups_plus", "ups_minus")
    a = table.column("alpha_in")
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(4.2, 5.4), sharex=True)
    ax1.plot(a, table.column("nu_plus"), color=BRANCH_PLUS_COLOR,
             label=r"$\nu_+$")
    ax1.plot(a, table.column("nu_minus"), color=BRANCH_MINUS_COLOR,
             label=r"$\nu_-$")
    ax1.set_ylabel(r"$\nu_\pm$  [$\omega_r$]")
    ax1.legend(loc="best")
    ax2.plot(a, table.column("ups_plus"), color=BRANCH_PLUS_COLOR,
             label=r"$\Upsilon_+$")
    ax2.plot(a, table.column("ups_minus"), color=BRANCH_MINUS_COLOR,
             label=r"$\Upsilon_-$")
    ax2.set_ylabel(r"$\Upsilon_\pm$  [$\omega_r$]")
    ax2.set_xlabel(r"$\alpha_{in}$  [$\omega_r^{1/2}$]")
    ax2.legend(loc="best")
    alpha_ep = table.comments.get("alpha_ep")
    if alpha_ep is not None:
        for ax in (ax1, ax2):
            ax.axvline(float(alpha_ep), color="gray", linestyle=":",
                       linewidth=0.8)
    case = table.comments.get("case", "?")
    ax1.set_title(f"eigenvalue coalescence, case {case}")
    fig.tight_layout()
    return fig


def _shift_columns(table: CsvTable) -> list[int]:
    ks = []
    k = 0
    while f"dnu_plus_{k}" in table.columns:
        table.require(f"dnu_minus_{k}")
        ks.append(k)
        k += 1
    if not ks:
        # raise with the first missing name for a precise message
        table.require("dnu_plus_0")
    return ks


def _fig_shifts(tables: list[CsvTable]):
    fig, axes = plt.subplots(1, len(tables), figsize=(3.4 * len(tables), 3.2),
                             sharey=False)
    if len(tables) == 1:
        axes = [axes]
    styles = ["-", "--", ":", "-."]
    for ax, table in zip(axes, tables):
        table.require("alpha_in")
        a = table.column("alpha_in")
        labels = [s.strip() for s in
                  table.comments.get("delta_omegas", "").split(";")]
        for k in _shift_columns(table):
            label = labels[k] if k < len(labels) else f"series {k}"
            ls = styles[k % len(styles)]
            ax.plot(a, table.column(f"dnu_plus_{k}"),
                    color=BRANCH_PLUS_COLOR, linestyle=ls,
                    label=rf"$\Delta\nu_+$, $\delta\omega$={label}")
            ax.plot(a, table.column(f"dnu_minus_{k}"),
                    color=BRANCH_MINUS_COLOR, linestyle=ls,
                    label=rf"$\Delta\nu_-$, $\delta\omega$={label}")
        alpha_ep = table.comments.get("alpha_ep")
        if alpha_ep is not None:
            ax.axvline(float(alpha_ep), color="gray", linestyle=":",
                       linewidth=0.8)
        ax.set_xlabel(r"$\alpha_{in}$  [$\omega_r^{1/2}$]")
        ax.set_title(f"case {table.comments.get('case', '?')}")
        ax.legend(fontsize=5, loc="best")
    axes[0].set_ylabel(r"$\Delta\nu_\pm$  [$\omega_r$]")
    fig.tight_layout()
    return fig


def _fig_gamma(table: CsvTable):
    table.require("case", "delta_omega", "gamma")
    cases = table.string_column("case")
    dws = table.column("delta_omega")
    gammas = table.column("gamma")
    order = sorted(set(cases), key=cases.index)
    markers = {name: m for name, m in zip(order, ("o", "s", "^", "D"))}
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    for name in order:
        sel = [i for i, c in enumerate(cases) if c == name]
        x = [abs(dws[i]) for i in sel]
        y = [gammas[i] for i in sel]
        pairs = sorted(zip(x, y))
        ax.plot([p[0] for p in pairs], [p[1] for p in pairs],
                marker=markers[name], label=f"case {name}")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(r"$|\delta\omega|$  [$\omega_r$]")
    ax.set_ylabel(r"$\Gamma$")
    ax.legend(loc="best")
    ax.set_title("enhancement ratio vs perturbation strength")
    fig.tight_layout()
    return fig


def _fig_g_curves(table: CsvTable):
    table.require("G")
    g = table.column("G")
    curve_names = [c for c in table.columns if c.startswith("dnu_minus_")]
    if not curve_names:
        table.require("dnu_minus_tungsten")
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.2, 3.2))
    for name in curve_names:
        ax1.plot(g, table.column(name), label=name[len("dnu_minus_"):])
    ax1.set_xlabel(r"$G$  [m$^3$ kg$^{-1}$ s$^{-2}$]")
    ax1.set_ylabel(r"$|\Delta\nu_-|$  [s$^{-1}$]")
    ax1.legend(loc="best")
    ax1.set_title("shift vs G per density")

    dense = curve_names[-1]
    ax2.plot(g, table.column(dense), color=BRANCH_MINUS_COLOR,
             label=dense[len("dnu_minus_"):])
    lo = table.comments.get("codata_interval_lo")
    hi = table.comments.get("codata_interval_hi")
    if lo is None or hi is None:
        raise FigsError(f"{table.path}: comment block lacks "
                        "codata_interval_lo/hi")
    ax2.axvspan(float(lo), float(hi), color="orange", alpha=0.3,
                label="recommended-G interval")
    ax2.set_xlabel(r"$G$  [m$^3$ kg$^{-1}$ s$^{-2}$]")
    ax2.legend(loc="best")
    ax2.set_title("reference interval")
    fig.tight_layout()
    return fig


def build_figure(spec: FigureSpec):
    """Assemble the matplotlib Figure for a spec (no file output)."""
    tables = _load(spec)
    with plt.rc_context(_RC):
        if spec.figure == 2:
            return _fig_coalescence(tables[0])
        if spec.figure == 4:
            return _fig_shifts(tables)
        if spec.figure == 5:
            return _fig_gamma(tables[0])
        return _fig_g_curves(tables[0])


def render(spec: FigureSpec) -> str:
    """Render the figure to spec.out_path; deterministic byte output."""
    fig = build_figure(spec)
    try:
        out_dir = os.path.dirname(os.path.abspath(spec.out_path))
        os.makedirs(out_dir, exist_ok=True)
        # strip producer metadata so identical inputs give identical bytes
        ext = os.path.splitext(spec.out_path)[1].lower()
        metadata = {"Software": None} if ext == ".png" else \
            {"Date": None, "Creator": None}
        fig.savefig(spec.out_path, metadata=metadata)
    finally:
        plt.close(fig)
    return spec.out_path
