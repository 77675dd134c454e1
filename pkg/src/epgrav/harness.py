"""Deterministic, exportable reproductions of the numerical studies:
eigenvalue coalescence, shift sweeps for the three operating cases,
the EP-enhancement ratio study, and the shift-vs-G curves.

All case parameters are quoted in units of omega_r (drive amplitudes in
omega_r^(1/2)); sweeps run on omega_r = 1 internally.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import __version__
from .errors import GridMiss, HarnessError
from .gravity import G_CODATA_2014, G_CODATA_2014_SIGMA, shift_magnitude_vs_G
from .params import SystemParams
from .spectra import ep_drive_amplitude


@dataclass(frozen=True)
class CaseDefinition:
    """Named operating point (eta1, eta2, epsilon, gamma_m in omega_r units)."""

    name: str
    eta1: float
    eta2: float
    epsilon: float
    gamma_m: float
    alpha_ep: Optional[float] = None

    def __post_init__(self):
        derived = ep_drive_amplitude(self.system())
        if self.alpha_ep is None:
            object.__setattr__(self, "alpha_ep", derived)
        elif abs(self.alpha_ep - derived) > 1e-12 * derived:
            raise ValueError(
                f"stored alpha_ep {self.alpha_ep} inconsistent with derived "
                f"{derived}")

    def system(self, alpha_in: float = 0.0) -> SystemParams:
        return SystemParams(omega_r=1.0, gamma_m=self.gamma_m,
                            epsilon=self.epsilon, eta1=self.eta1,
                            eta2=self.eta2, alpha_in=alpha_in)


CASE_X = CaseDefinition("X", eta1=1e-6, eta2=2e-6, epsilon=1e-2, gamma_m=1e-4)
CASE_Y = CaseDefinition("Y", eta1=3e-7, eta2=7e-7, epsilon=1e-3, gamma_m=1e-3)
CASE_Z = CaseDefinition("Z", eta1=1e-5, eta2=4e-5, epsilon=3e-3, gamma_m=2e-3)
CASES = {"X": CASE_X, "Y": CASE_Y, "Z": CASE_Z}

#: Sphere densities used for the shift-vs-G curves (kg/m^3).
DENSITIES = (("steel", 9.8e3), ("lead", 11.3e3), ("tungsten", 19.35e3))

DEFAULT_GRID_POINTS = 2001


def default_grid(case: CaseDefinition,
                 n_points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    """Drive grid spanning [0.1, 2] * alpha_EP."""
    return np.linspace(0.1 * case.alpha_ep, 2.0 * case.alpha_ep, n_points)


def _degenerate_arrays(case: CaseDefinition, alphas: np.ndarray):
    """Vectorized eigenvalue pair over a drive grid (omega_r = 1)."""
    a2 = alphas**2
    center = 1.0 - 0.25j * (2.0 * case.gamma_m + (case.eta1 + case.eta2) * a2)
    radicand = (case.epsilon**2
                - a2 * a2 * (case.eta2 - case.eta1) ** 2 / 16.0).astype(complex)
    root = np.sqrt(radicand)
    return center + root, center - root


def _closed_form_shift_arrays(case: CaseDefinition, alphas: np.ndarray,
                              delta_omega: float):
    a2 = alphas**2
    d_eta = case.eta2 - case.eta1
    base = (case.epsilon**2 - a2 * a2 * d_eta**2 / 16.0).astype(complex)
    pert = base + (delta_omega**2 - 1j * delta_omega * a2 * d_eta) / 4.0
    dnu_p = (0.5 * delta_omega + np.sqrt(pert) - np.sqrt(base)).real
    dnu_m = (0.5 * delta_omega - np.sqrt(pert) + np.sqrt(base)).real
    return dnu_p, dnu_m


@dataclass(frozen=True)
class SweepResult:
    """Tabulated spectrum (and optional shifts) over a drive grid."""

    case: CaseDefinition
    alpha_in: np.ndarray
    nu_plus: np.ndarray
    nu_minus: np.ndarray
    ups_plus: np.ndarray
    ups_minus: np.ndarray
    # delta_omega -> (dnu_plus, dnu_minus) arrays
    shifts: Mapping[float, tuple[np.ndarray, np.ndarray]] = \
        field(default_factory=dict)
    # delta_omega -> grid index of extremal |dnu_minus|
    extremal_index: Mapping[float, int] = field(default_factory=dict)
    reorder_indices: tuple[int, ...] = ()

    def __post_init__(self):
        if np.any(np.diff(self.alpha_in) <= 0):
            raise ValueError("grid must be strictly increasing")
        for arr in (self.nu_plus, self.nu_minus, self.ups_plus,
                    self.ups_minus):
            if arr.shape != self.alpha_in.shape:
                raise ValueError("row count must equal grid size")


def _require_grid_spans_ep(case: CaseDefinition, grid: np.ndarray) -> None:
    if grid.size < 2 or not (grid[0] <= case.alpha_ep <= grid[-1]):
        raise GridMiss(
            f"alpha_EP = {case.alpha_ep:g} outside grid "
            f"[{grid[0]:g}, {grid[-1]:g}]" if grid.size else "empty grid")


def run_coalescence(case: CaseDefinition, grid: np.ndarray) -> SweepResult:
    """Eigenfrequencies and dissipations across the EP (coalescence study).

    Verifies on the fly: near-degeneracy at the grid point closest to
    alpha_EP, the below/above-EP regime split, and that the trace identity
    holds on every row.
    """
    grid = np.asarray(grid, dtype=float)
    _require_grid_spans_ep(case, grid)
    tau_p, tau_m = _degenerate_arrays(case, grid)

    # Trace identity, re-verified row by row.
    trace = 2.0 - 0.5j * (2.0 * case.gamma_m
                          + (case.eta1 + case.eta2) * grid**2)
    if np.max(np.abs(tau_p + tau_m - trace) / np.abs(trace)) > 1e-12:
        raise HarnessError("trace identity violated in sweep")

    i_ep = int(np.argmin(np.abs(grid - case.alpha_ep)))
    gap = abs(tau_p[i_ep] - tau_m[i_ep])
    step = grid[1] - grid[0]
    # Local coalescence bound: the square-root gap grows like sqrt of the
    # distance to the EP, so within half a grid step of alpha_EP:
    d_eta = abs(case.eta2 - case.eta1)
    bound = 2.0 * math.sqrt(case.alpha_ep**3 * d_eta**2 / 4.0
                            * (0.5 * step + 1e-15)) + 1e-12
    if gap > bound:
        raise HarnessError(f"no coalescence near alpha_EP (gap {gap:g})")

    below = grid < case.alpha_ep
    above = grid > case.alpha_ep
    if np.any(tau_p[below].imag != tau_m[below].imag):
        raise HarnessError("dissipations split below the EP")
    if np.any(tau_p[above].real != tau_m[above].real):
        raise HarnessError("eigenfrequencies split above the EP")

    reorder = (i_ep,) if grid[0] < case.alpha_ep < grid[-1] else ()
    return SweepResult(case=case, alpha_in=grid,
                       nu_plus=tau_p.real, nu_minus=tau_m.real,
                       ups_plus=tau_p.imag, ups_minus=tau_m.imag,
                       reorder_indices=reorder)


def run_shift_sweep(case: CaseDefinition, delta_omegas: Sequence[float],
                    grid: np.ndarray) -> SweepResult:
    """Eigenfrequency shifts versus drive for each perturbation strength."""
    grid = np.asarray(grid, dtype=float)
    _require_grid_spans_ep(case, grid)
    for dw in delta_omegas:
        if dw == 0.0:
            raise ValueError("delta_omega values must be nonzero")
    tau_p, tau_m = _degenerate_arrays(case, grid)
    shifts = {}
    extremal = {}
    for dw in delta_omegas:
        dnu_p, dnu_m = _closed_form_shift_arrays(case, grid, dw)
        shifts[dw] = (dnu_p, dnu_m)
        extremal[dw] = int(np.argmax(np.abs(dnu_m)))
    return SweepResult(case=case, alpha_in=grid,
                       nu_plus=tau_p.real, nu_minus=tau_m.real,
                       ups_plus=tau_p.imag, ups_minus=tau_m.imag,
                       shifts=shifts, extremal_index=extremal)


@dataclass(frozen=True)
class GammaEntry:
    case: str
    delta_omega: float
    gamma: float
    alpha_at_min: float
    grid_points: int
    grid_span: tuple[float, float]


@dataclass(frozen=True)
class GammaReport:
    entries: tuple[GammaEntry, ...]

    def by_case(self, name: str) -> list[GammaEntry]:
        return [e for e in self.entries if e.case == name]

    def to_json(self) -> str:
        payload = {
            "generator": f"epgrav {__version__}",
            "entries": [
                {
                    "case": e.case,
                    "delta_omega": e.delta_omega,
                    "gamma": e.gamma,
                    "alpha_at_min": e.alpha_at_min,
                    "grid_points": e.grid_points,
                    "grid_span": list(e.grid_span),
                }
                for e in self.entries
            ],
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def run_gamma_study(cases: Iterable[CaseDefinition],
                    delta_omegas: Sequence[float],
                    n_points: int = DEFAULT_GRID_POINTS) -> GammaReport:
    """EP-enhancement ratios Gamma = |dnu_-|_EP / |dnu_-|_min per (case, dw).

    The minimum is taken over the sweep window [0.1, 2] * alpha_EP (the
    window is recorded in every entry).  Within each case Gamma must be
    strictly decreasing in |dw|; a violation raises HarnessError.
    """
    entries = []
    for case in cases:
        grid = default_grid(case, n_points)
        _require_grid_spans_ep(case, grid)
        gammas = []
        for dw in sorted(delta_omegas, key=abs):
            _, dnu_m = _closed_form_shift_arrays(case, grid, dw)
            mag = np.abs(dnu_m)
            _, dnu_m_ep = _closed_form_shift_arrays(
                case, np.array([case.alpha_ep]), dw)
            at_ep = abs(dnu_m_ep[0])
            i_min = int(np.argmin(mag))
            gamma = at_ep / mag[i_min]
            if gamma < 1.0 - 1e-9:
                raise HarnessError(
                    f"Gamma < 1 for case {case.name}, dw={dw:g}")
            gammas.append(gamma)
            entries.append(GammaEntry(
                case=case.name, delta_omega=dw, gamma=gamma,
                alpha_at_min=float(grid[i_min]), grid_points=n_points,
                grid_span=(float(grid[0]), float(grid[-1]))))
        if any(gammas[i] <= gammas[i + 1] for i in range(len(gammas) - 1)):
            raise HarnessError(
                f"Gamma not strictly decreasing in |dw| for case {case.name}")
    return GammaReport(entries=tuple(entries))


@dataclass(frozen=True)
class GCurveTable:
    """|dnu_minus|(G) per density, for the shift-vs-G figure."""

    g_values: np.ndarray
    densities: tuple[tuple[str, float], ...]
    curves: Mapping[str, np.ndarray]
    omega_r: float
    epsilon: float
    codata_interval: tuple[float, float] = (
        G_CODATA_2014 - G_CODATA_2014_SIGMA,
        G_CODATA_2014 + G_CODATA_2014_SIGMA,
    )


def run_g_curves(densities: Sequence[tuple[str, float]],
                 g_range: np.ndarray, omega_r: float,
                 epsilon: float) -> GCurveTable:
    g_range = np.asarray(g_range, dtype=float)
    if g_range.size and np.any(g_range <= 0):
        raise ValueError("g_range must be positive")
    curves = {}
    for label, rho in densities:
        curves[label] = np.array(
            [shift_magnitude_vs_G(g, rho, omega_r, epsilon) for g in g_range])
    return GCurveTable(g_values=g_range, densities=tuple(densities),
                       curves=curves, omega_r=omega_r, epsilon=epsilon)


# ---------------------------------------------------------------------------
# CSV export


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _fmt(x: float) -> str:
    return format(x, ".17g")


def _comment_block(config: Mapping[str, object]) -> list[str]:
    lines = [f"# generator: epgrav {__version__}"]
    for key in sorted(config):
        lines.append(f"# {key}: {config[key]}")
    return lines


def write_coalescence_csv(result: SweepResult, path: str) -> None:
    case = result.case
    lines = _comment_block({
        "study": "coalescence",
        "case": case.name,
        "eta1": case.eta1, "eta2": case.eta2,
        "epsilon": case.epsilon, "gamma_m": case.gamma_m,
        "alpha_ep": case.alpha_ep,
        "units": "alpha_in in omega_r^(1/2); nu, ups in omega_r",
    })
    lines.append("alpha_in,nu_plus,nu_minus,ups_plus,ups_minus")
    for i in range(result.alpha_in.size):
        lines.append(",".join(_fmt(v) for v in (
            result.alpha_in[i], result.nu_plus[i], result.nu_minus[i],
            result.ups_plus[i], result.ups_minus[i])))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_shift_csv(result: SweepResult, path: str) -> None:
    case = result.case
    dws = list(result.shifts)
    lines = _comment_block({
        "study": "shift_sweep",
        "case": case.name,
        "eta1": case.eta1, "eta2": case.eta2,
        "epsilon": case.epsilon, "gamma_m": case.gamma_m,
        "alpha_ep": case.alpha_ep,
        "delta_omegas": "; ".join(_fmt(dw) for dw in dws),
        "units": "alpha_in in omega_r^(1/2); dnu in omega_r",
    })
    header = ["alpha_in"]
    for k, dw in enumerate(dws):
        header += [f"dnu_plus_{k}", f"dnu_minus_{k}"]
    lines.append(",".join(header))
    for i in range(result.alpha_in.size):
        row = [_fmt(result.alpha_in[i])]
        for dw in dws:
            dnu_p, dnu_m = result.shifts[dw]
            row += [_fmt(dnu_p[i]), _fmt(dnu_m[i])]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_gamma_csv(report: GammaReport, path: str) -> None:
    lines = _comment_block({
        "study": "gamma_ratios",
        "definition": "gamma = |dnu_minus|_EP / |dnu_minus|_min over window",
    })
    lines.append("case,delta_omega,gamma,alpha_at_min,grid_points,"
                 "grid_lo,grid_hi")
    for e in report.entries:
        lines.append(",".join([
            e.case, _fmt(e.delta_omega), _fmt(e.gamma), _fmt(e.alpha_at_min),
            str(e.grid_points), _fmt(e.grid_span[0]), _fmt(e.grid_span[1])]))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_g_curves_csv(table: GCurveTable, path: str) -> None:
    labels = [label for label, _ in table.densities]
    lines = _comment_block({
        "study": "shift_vs_G",
        "omega_r": table.omega_r,
        "epsilon": table.epsilon,
        "densities": "; ".join(f"{la}={_fmt(rho)}"
                               for la, rho in table.densities),
        "codata_interval_lo": _fmt(table.codata_interval[0]),
        "codata_interval_hi": _fmt(table.codata_interval[1]),
        "units": "G in m^3 kg^-1 s^-2; dnu in rad/s",
    })
    lines.append(",".join(["G"] + [f"dnu_minus_{la}" for la in labels]))
    for i in range(table.g_values.size):
        row = [_fmt(table.g_values[i])]
        row += [_fmt(table.curves[la][i]) for la in labels]
        lines.append(",".join(row))
    _atomic_write(path, "\n".join(lines) + "\n")


def write_all_figures(out_dir: str,
                      delta_omegas: Sequence[float] = (-1e-4, -1e-5, -1e-6),
                      omega_r: float = 2e9,
                      epsilon_over_omega_r: float = 1e-2,
                      n_points: int = DEFAULT_GRID_POINTS) -> list[str]:
    """Emit every figure-reproduction CSV into out_dir; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    for case in (CASE_X, CASE_Y, CASE_Z):
        grid = default_grid(case, n_points)
        path = os.path.join(out_dir, f"fig2_{case.name}.csv")
        write_coalescence_csv(run_coalescence(case, grid), path)
        written.append(path)
        path = os.path.join(out_dir, f"fig4_{case.name}.csv")
        write_shift_csv(run_shift_sweep(case, delta_omegas, grid), path)
        written.append(path)
    report = run_gamma_study((CASE_X, CASE_Y, CASE_Z), delta_omegas, n_points)
    path = os.path.join(out_dir, "fig5.csv")
    write_gamma_csv(report, path)
    written.append(path)
    json_path = os.path.join(out_dir, "fig5_gamma.json")
    _atomic_write(json_path, report.to_json() + "\n")
    written.append(json_path)
    g_lo = G_CODATA_2014 - 20 * G_CODATA_2014_SIGMA
    g_hi = G_CODATA_2014 + 20 * G_CODATA_2014_SIGMA
    table = run_g_curves(DENSITIES, np.linspace(g_lo, g_hi, 201),
                         omega_r, epsilon_over_omega_r * omega_r)
    path = os.path.join(out_dir, "fig6.csv")
    write_g_curves_csv(table, path)
    written.append(path)
    return written
