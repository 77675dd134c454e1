"""Command-line interface.

Subcommands: eigen, ep, sweep, gamma, gravity, invert-g, simulate,
figures.  Dimensional inputs must carry an explicit unit suffix
("1e-2 w_r", "2e9 rad_s", "200 w_r^1/2", "19350 kg_m3", ...); silent unit
defaults are rejected.  Config files are JSON with the same keys as the
long flags (underscores for dashes); flags override file values.

Exit codes: 0 ok, 2 config error, 3 numeric/domain error, 4 I/O error.
On failure a machine-readable JSON error record is printed to stderr.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import __version__, dynamics, harness
from .errors import ConfigError, EpgravError, GridMiss, UnitError
from .gravity import (GEstimate, SourceSphere, frequency_shift,
                      gravitational_force, invert_g)
from .harness import CASES, CaseDefinition
from .params import SystemParams
from .spectra import eigenvalues_degenerate, ep_drive_amplitude

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


@dataclass(frozen=True)
class Quantity:
    """A numeric value with an explicit unit suffix."""

    value: float
    unit: str

    def __str__(self):
        return f"{self.value:.17g} {self.unit}"


_KNOWN_UNITS = {
    "w_r", "rad_s", "w_r^1/2", "rad_s^1/2",
    "kg_m3", "m", "kg", "s", "m3_kg_s2", "dimensionless",
}


def parse_quantity(text: str, flag: str) -> Quantity:
    parts = str(text).split()
    if len(parts) != 2:
        raise UnitError(
            f"{flag}: expected '<value> <unit>', got {text!r} "
            f"(unit suffix is mandatory)")
    try:
        value = float(parts[0])
    except ValueError:
        raise UnitError(f"{flag}: cannot parse value in {text!r}") from None
    if parts[1] not in _KNOWN_UNITS:
        raise UnitError(f"{flag}: unknown unit {parts[1]!r} "
                        f"(known: {sorted(_KNOWN_UNITS)})")
    return Quantity(value, parts[1])


def _rate_in_wr(q: Quantity, flag: str,
                omega_r: Optional[float] = None) -> float:
    """Angular rate in omega_r units."""
    if q.unit == "w_r":
        return q.value
    if q.unit == "rad_s":
        if omega_r is None:
            raise UnitError(f"{flag}: rad_s needs --omega-r to convert")
        return q.value / omega_r
    raise UnitError(f"{flag}: expected a rate unit (w_r or rad_s), "
                    f"got {q.unit!r}")


def _rate_abs(q: Quantity, flag: str,
              omega_r: Optional[float] = None) -> float:
    """Angular rate in rad/s."""
    if q.unit == "rad_s":
        return q.value
    if q.unit == "w_r":
        if omega_r is None:
            raise UnitError(f"{flag}: w_r needs --omega-r to convert")
        return q.value * omega_r
    raise UnitError(f"{flag}: expected a rate unit, got {q.unit!r}")


def _drive_in_wr(q: Quantity, flag: str) -> float:
    if q.unit == "w_r^1/2":
        return q.value
    raise UnitError(f"{flag}: expected drive unit w_r^1/2, got {q.unit!r}")


def _simple(q: Quantity, unit: str, flag: str) -> float:
    if q.unit != unit:
        raise UnitError(f"{flag}: expected unit {unit!r}, got {q.unit!r}")
    return q.value


_MODES = ("eigen", "ep", "sweep", "gamma", "gravity", "invert-g",
          "simulate", "figures")

# Option keys accepted by each mode (beyond the globals).
_MODE_KEYS = {
    "eigen": {"alpha_in", "epsilon", "gamma_m", "eta1", "eta2"},
    "ep": {"epsilon", "gamma_m", "eta1", "eta2"},
    "sweep": {"grid", "delta_omegas"},
    "gamma": {"cases", "delta_omegas", "grid_points"},
    "gravity": {"rho", "radius", "a1", "a2", "m1", "m2", "omega_r"},
    "invert-g": {"shift", "sigma_shift", "rho", "omega_r", "epsilon"},
    "simulate": {"alpha_in", "g", "kappa", "delta1", "delta2",
                 "t_end", "tol", "n_samples"},
    "figures": {"delta_omegas", "omega_r", "epsilon", "grid_points"},
}
_GLOBAL_KEYS = {"mode", "case", "out", "format", "quiet", "seed"}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; all values canonical and unit-resolved."""

    mode: str
    case: Optional[str] = None
    out: str = "."
    format: str = "csv"
    quiet: bool = False
    seed: int = 0
    options: tuple[tuple[str, str], ...] = ()

    def opt(self, key: str, default: Optional[str] = None) -> Optional[str]:
        for k, v in self.options:
            if k == key:
                return v
        return default

    def to_json(self) -> str:
        payload = {"mode": self.mode, "case": self.case, "out": self.out,
                   "format": self.format, "quiet": self.quiet,
                   "seed": self.seed}
        payload.update({k: v for k, v in self.options})
        return json.dumps(payload, indent=2, sort_keys=True)


def parse_config(mode: str, flag_items: dict, config_path: Optional[str],
                 quiet: bool = False) -> RunConfig:
    """Merge config-file values and flags (flags win) into a RunConfig.

    Unknown keys are rejected by name; no computation happens before this
    validation completes.
    """
    if mode not in _MODES:
        raise ConfigError(f"unknown mode {mode!r}")
    merged: dict = {}
    if config_path is not None:
        try:
            with open(config_path) as fh:
                data = json.load(fh)
        except OSError as e:
            raise ConfigError(f"config {config_path}: {e}") from None
        except json.JSONDecodeError as e:
            raise ConfigError(f"config {config_path}: line {e.lineno}: "
                              f"{e.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {config_path}: top level must be "
                              "an object")
        merged.update(data)
    conflicts = [k for k, v in flag_items.items()
                 if v is not None and k in merged and merged[k] != v]
    merged.update({k: v for k, v in flag_items.items() if v is not None})

    allowed = _GLOBAL_KEYS | _MODE_KEYS[mode]
    unknown = set(merged) - allowed
    if unknown:
        raise ConfigError(
            f"unknown config key(s) for mode {mode!r}: "
            f"{', '.join(sorted(unknown))}")
    file_mode = merged.pop("mode", mode)
    if file_mode != mode:
        raise ConfigError(f"config mode {file_mode!r} conflicts with "
                          f"subcommand {mode!r}")

    case = merged.pop("case", None)
    if case is not None and case not in CASES and case != "custom":
        raise ConfigError(f"unknown case {case!r} (expected X, Y or Z)")
    out = merged.pop("out", None) or os.environ.get("EPGRAV_OUT", ".")
    fmt = merged.pop("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"unknown format {fmt!r}")
    quiet = bool(merged.pop("quiet", quiet))
    seed = int(merged.pop("seed", 0))
    options = tuple(sorted((k, str(v)) for k, v in merged.items()))
    cfg = RunConfig(mode=mode, case=case, out=out, format=fmt, quiet=quiet,
                    seed=seed, options=options)
    if conflicts and not quiet:
        print(f"note: flags override config file for: "
              f"{', '.join(sorted(conflicts))}", file=sys.stderr)
    return cfg


def parse_config_json(text: str) -> RunConfig:
    """Round-trip entry point: parse a serialized RunConfig."""
    data = json.loads(text)
    mode = data.pop("mode", None)
    if mode is None:
        raise ConfigError("config must carry a mode")
    return parse_config(mode, data, None)


def _case_from_config(cfg: RunConfig) -> CaseDefinition:
    if cfg.case in CASES:
        return CASES[cfg.case]
    required = {"epsilon", "gamma_m", "eta1", "eta2"}
    missing = required - {k for k, _ in cfg.options}
    if missing:
        raise ConfigError(
            f"need --case X|Y|Z or all of {sorted(required)}; "
            f"missing {sorted(missing)}")
    try:
        return CaseDefinition(
            name="custom",
            eta1=_rate_in_wr(parse_quantity(cfg.opt("eta1"), "eta1"), "eta1"),
            eta2=_rate_in_wr(parse_quantity(cfg.opt("eta2"), "eta2"), "eta2"),
            epsilon=_rate_in_wr(parse_quantity(cfg.opt("epsilon"), "epsilon"),
                                "epsilon"),
            gamma_m=_rate_in_wr(parse_quantity(cfg.opt("gamma_m"), "gamma_m"),
                                "gamma_m"),
        )
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _parse_grid(text: str, case: CaseDefinition) -> np.ndarray:
    """'lo,hi,n' (in w_r^1/2) or a single value (degenerate grid)."""
    parts = [p.strip() for p in str(text).split(",")]
    try:
        if len(parts) == 1:
            return np.array([float(parts[0])])
        if len(parts) == 3:
            lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
            return np.linspace(lo, hi, n)
    except ValueError:
        pass
    raise ConfigError(f"grid: expected 'lo,hi,n' or a single value, "
                      f"got {text!r}")


def _parse_delta_omegas(text: Optional[str]) -> list[float]:
    if not text:
        return []
    out = []
    for item in str(text).split(";"):
        q = parse_quantity(item.strip(), "delta-omega")
        out.append(_rate_in_wr(q, "delta-omega"))
    return out


def _emit(cfg: RunConfig, line: str) -> None:
    if not cfg.quiet:
        print(line)


# ---------------------------------------------------------------------------
# Subcommand handlers


def _cmd_ep(cfg: RunConfig) -> int:
    case = _case_from_config(cfg)
    alpha = ep_drive_amplitude(case.system())
    if cfg.format == "json":
        _emit(cfg, json.dumps({"case": case.name, "alpha_ep": alpha}))
    else:
        _emit(cfg, f"alpha_ep = {alpha:g} w_r^1/2")
    return EXIT_OK


def _cmd_eigen(cfg: RunConfig) -> int:
    case = _case_from_config(cfg)
    alpha_raw = cfg.opt("alpha_in")
    if alpha_raw is None:
        raise ConfigError("eigen requires --alpha-in")
    alpha = _drive_in_wr(parse_quantity(alpha_raw, "alpha-in"), "alpha-in")
    spec = eigenvalues_degenerate(case.system(alpha))
    payload = {
        "case": case.name, "alpha_in": alpha,
        "nu_plus": spec.nu_plus, "nu_minus": spec.nu_minus,
        "ups_plus": spec.ups_plus, "ups_minus": spec.ups_minus,
    }
    if cfg.format == "json":
        _emit(cfg, json.dumps(payload, sort_keys=True))
    else:
        _emit(cfg, f"nu_pm = {spec.nu_plus:.12g}, {spec.nu_minus:.12g} w_r; "
                   f"ups_pm = {spec.ups_plus:.12g}, {spec.ups_minus:.12g} w_r")
    return EXIT_OK


def _cmd_sweep(cfg: RunConfig) -> int:
    case = _case_from_config(cfg)
    grid_raw = cfg.opt("grid")
    grid = (_parse_grid(grid_raw, case) if grid_raw is not None
            else harness.default_grid(case))
    dws = _parse_delta_omegas(cfg.opt("delta_omegas"))
    os.makedirs(cfg.out, exist_ok=True)
    result = harness.run_coalescence(case, grid)
    path2 = os.path.join(cfg.out, f"fig2_{case.name}.csv")
    harness.write_coalescence_csv(result, path2)
    written = [path2]
    if dws:
        shifted = harness.run_shift_sweep(case, dws, grid)
        path4 = os.path.join(cfg.out, f"fig4_{case.name}.csv")
        harness.write_shift_csv(shifted, path4)
        written.append(path4)
    _emit(cfg, f"case {case.name}: alpha_ep = {case.alpha_ep:g} w_r^1/2; "
               f"wrote {', '.join(written)}")
    return EXIT_OK


def _cmd_gamma(cfg: RunConfig) -> int:
    names = [s.strip() for s in (cfg.opt("cases") or "X,Y,Z").split(",")]
    try:
        cases = [CASES[n] for n in names]
    except KeyError as e:
        raise ConfigError(f"unknown case {e.args[0]!r}") from None
    dws = _parse_delta_omegas(cfg.opt("delta_omegas")) \
        or [-1e-4, -1e-5, -1e-6]
    n_points = int(cfg.opt("grid_points", str(harness.DEFAULT_GRID_POINTS)))
    report = harness.run_gamma_study(cases, dws, n_points)
    os.makedirs(cfg.out, exist_ok=True)
    harness.write_gamma_csv(report, os.path.join(cfg.out, "fig5.csv"))
    json_path = os.path.join(cfg.out, "fig5_gamma.json")
    harness._atomic_write(json_path, report.to_json() + "\n")
    summary = "; ".join(f"{e.case}@{e.delta_omega:g}: {e.gamma:.4g}"
                        for e in report.entries)
    _emit(cfg, f"Gamma: {summary}")
    return EXIT_OK


def _sphere_from_config(cfg: RunConfig) -> SourceSphere:
    def need(key, unit):
        raw = cfg.opt(key)
        if raw is None:
            raise ConfigError(f"gravity requires --{key.replace('_', '-')}")
        return _simple(parse_quantity(raw, key), unit, key)

    try:
        return SourceSphere(rho=need("rho", "kg_m3"), R=need("radius", "m"),
                            a1=need("a1", "m"), a2=need("a2", "m"),
                            m1=need("m1", "kg"), m2=need("m2", "kg"))
    except ValueError as e:
        raise ConfigError(str(e)) from None


def _cmd_gravity(cfg: RunConfig) -> int:
    sphere = _sphere_from_config(cfg)
    omega_raw = cfg.opt("omega_r")
    if omega_raw is None:
        raise ConfigError("gravity requires --omega-r")
    omega_r = _rate_abs(parse_quantity(omega_raw, "omega-r"), "omega-r")
    payload = {"M": sphere.M}
    for j in (1, 2):
        payload[f"force_{j}"] = gravitational_force(sphere, j)
        payload[f"delta_omega_{j}"] = frequency_shift(sphere, omega_r, j)
    if cfg.format == "json":
        _emit(cfg, json.dumps(payload, sort_keys=True))
    else:
        _emit(cfg, f"M = {payload['M']:.6g} kg; "
                   f"F = {payload['force_1']:.6g}, {payload['force_2']:.6g} N; "
                   f"delta_omega = {payload['delta_omega_1']:.6g}, "
                   f"{payload['delta_omega_2']:.6g} rad_s")
    return EXIT_OK


def _cmd_invert_g(cfg: RunConfig) -> int:
    def need(key):
        raw = cfg.opt(key)
        if raw is None:
            raise ConfigError(f"invert-g requires --{key.replace('_', '-')}")
        return raw

    omega_r = _rate_abs(parse_quantity(need("omega_r"), "omega-r"), "omega-r")
    shift = _rate_abs(parse_quantity(need("shift"), "shift"), "shift", omega_r)
    rho = _simple(parse_quantity(need("rho"), "rho"), "kg_m3", "rho")
    epsilon = _rate_abs(parse_quantity(need("epsilon"), "epsilon"), "epsilon",
                        omega_r)
    sigma_raw = cfg.opt("sigma_shift")
    sigma = (_rate_abs(parse_quantity(sigma_raw, "sigma-shift"),
                       "sigma-shift", omega_r)
             if sigma_raw is not None else None)
    est: GEstimate = invert_g(shift, rho, omega_r, epsilon, sigma)
    if cfg.format == "json":
        _emit(cfg, json.dumps({"G": est.G, "sigma_G": est.sigma_G,
                               "iterations": est.iterations}))
    else:
        sig = f" +- {est.sigma_G:.3g}" if est.sigma_G is not None else ""
        _emit(cfg, f"G = {est.G:.6e}{sig} m3_kg_s2")
    return EXIT_OK


def _cmd_simulate(cfg: RunConfig) -> int:
    case = _case_from_config(cfg)
    alpha = cfg.opt("alpha_in")
    alpha_in = (_drive_in_wr(parse_quantity(alpha, "alpha-in"), "alpha-in")
                if alpha is not None else 0.0)

    def rate(key, default):
        raw = cfg.opt(key)
        if raw is None:
            return default
        return _rate_in_wr(parse_quantity(raw, key), key)

    try:
        p = SystemParams(omega_r=1.0, gamma_m=case.gamma_m,
                         epsilon=case.epsilon, eta1=case.eta1,
                         eta2=case.eta2, alpha_in=alpha_in,
                         g=rate("g", 0.0), kappa=rate("kappa", 1.0),
                         delta1=rate("delta1", 0.0),
                         delta2=rate("delta2", 0.0))
    except ValueError as e:
        raise ConfigError(str(e)) from None
    t_end = float(cfg.opt("t_end", "1000"))
    tol = float(cfg.opt("tol", "1e-9"))
    n_samples = int(cfg.opt("n_samples", "2001"))
    traj = dynamics.integrate(p, t_end=t_end, tol=tol, n_samples=n_samples)
    os.makedirs(cfg.out, exist_ok=True)
    path = os.path.join(cfg.out, f"trajectory_{case.name}.csv")
    traj.write_csv(path)
    _emit(cfg, f"integrated to t = {t_end:g} "
               f"({traj.stats.steps} steps, {traj.stats.rejected} rejected); "
               f"wrote {path}")
    return EXIT_OK


def _cmd_figures(cfg: RunConfig) -> int:
    dws = _parse_delta_omegas(cfg.opt("delta_omegas")) \
        or [-1e-4, -1e-5, -1e-6]
    omega_raw = cfg.opt("omega_r")
    omega_r = (_rate_abs(parse_quantity(omega_raw, "omega-r"), "omega-r")
               if omega_raw is not None else 2e9)
    n_points = int(cfg.opt("grid_points", str(harness.DEFAULT_GRID_POINTS)))
    written = harness.write_all_figures(cfg.out, delta_omegas=dws,
                                        omega_r=omega_r, n_points=n_points)
    _emit(cfg, f"wrote {len(written)} files to {cfg.out}")
    return EXIT_OK


_HANDLERS = {
    "ep": _cmd_ep,
    "eigen": _cmd_eigen,
    "sweep": _cmd_sweep,
    "gamma": _cmd_gamma,
    "gravity": _cmd_gravity,
    "invert-g": _cmd_invert_g,
    "simulate": _cmd_simulate,
    "figures": _cmd_figures,
}


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, metavar="PATH")
    common.add_argument("--out", default=None, metavar="DIR")
    common.add_argument("--case", default=None, choices=["X", "Y", "Z"])
    common.add_argument("--quiet", action="store_true")
    common.add_argument("--format", default=None, choices=["csv", "json"])
    common.add_argument("--seed", type=int, default=None)

    parser = argparse.ArgumentParser(prog="epgrav", description=__doc__)
    parser.add_argument("--version", action="version",
                        version=f"epgrav {__version__}")
    sub = parser.add_subparsers(dest="mode", required=True)

    p = sub.add_parser("eigen", parents=[common])
    p.add_argument("--alpha-in", dest="alpha_in")
    for key in ("epsilon", "gamma_m", "eta1", "eta2"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)

    p = sub.add_parser("ep", parents=[common])
    for key in ("epsilon", "gamma_m", "eta1", "eta2"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)

    p = sub.add_parser("sweep", parents=[common])
    p.add_argument("--grid", dest="grid")
    p.add_argument("--delta-omegas", dest="delta_omegas",
                   help="semicolon-separated rates, e.g. '-1e-4 w_r;-1e-5 w_r'")

    p = sub.add_parser("gamma", parents=[common])
    p.add_argument("--cases", dest="cases")
    p.add_argument("--delta-omegas", dest="delta_omegas")
    p.add_argument("--grid-points", dest="grid_points")

    p = sub.add_parser("gravity", parents=[common])
    for key in ("rho", "radius", "a1", "a2", "m1", "m2", "omega_r"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)

    p = sub.add_parser("invert-g", parents=[common])
    for key in ("shift", "sigma_shift", "rho", "omega_r", "epsilon"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)

    p = sub.add_parser("simulate", parents=[common])
    for key in ("alpha_in", "g", "kappa", "delta1", "delta2", "t_end",
                "tol", "n_samples"):
        p.add_argument(f"--{key.replace('_', '-')}", dest=key)

    p = sub.add_parser("figures", parents=[common])
    p.add_argument("--delta-omegas", dest="delta_omegas")
    p.add_argument("--omega-r", dest="omega_r")
    p.add_argument("--grid-points", dest="grid_points")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK

    flag_items = {k: v for k, v in vars(ns).items()
                  if k not in ("mode", "config", "quiet") and v is not None}
    if ns.quiet:
        flag_items["quiet"] = True
    try:
        cfg = parse_config(ns.mode, flag_items, ns.config, quiet=ns.quiet)
        return _HANDLERS[cfg.mode](cfg)
    except ConfigError as e:
        _error_json(e, EXIT_CONFIG)
        return EXIT_CONFIG
    except (EpgravError, ValueError, ZeroDivisionError,
            FloatingPointError) as e:
        _error_json(e, EXIT_NUMERIC)
        return EXIT_NUMERIC
    except OSError as e:
        _error_json(e, EXIT_IO)
        return EXIT_IO


def _error_json(exc: BaseException, code: int) -> None:
    print(json.dumps({"error": type(exc).__name__, "message": str(exc),
                      "exit_code": code}), file=sys.stderr)


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
