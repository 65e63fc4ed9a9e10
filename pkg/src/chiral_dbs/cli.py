"""Command-line front end: every command writes one data file.

CSV outputs start with a single ``# {json}`` line holding the fully resolved
configuration, so any file can be regenerated from itself.
"""
from __future__ import annotations

import argparse
import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import blockade, entanglement, lindblad, single_excitation, spectra
from .errors import ChiralDBSError, ConfigError, NoBoundState, NumericalFailure, UniqueSteadyStateRequiresDrive
from .model import DRIVE_FIELDS, PARAM_FIELDS, DriveParams, SystemParams, params_from_dict

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
DEFAULT_T_MAX = 50.0  # in units of 1/kappa; transients are then below e^-25

PHASE_ALIASES = {"fw_plus": single_excitation.Branch.PLUS, "fw_minus": single_excitation.Branch.MINUS}


@dataclass(frozen=True)
class GridSpec:
    start: float
    stop: float
    count: int

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)

    def to_dict(self) -> dict:
        return {"start": self.start, "stop": self.stop, "count": self.count}


@dataclass(frozen=True)
class SweepSpec:
    name: str
    grid: GridSpec

    def to_dict(self) -> dict:
        return {"name": self.name, **self.grid.to_dict()}


@dataclass
class RunConfig:
    params: SystemParams
    drive: Optional[DriveParams] = None
    section: dict = field(default_factory=dict)
    phi_alias: Optional[str] = None

    def to_dict(self, command: str) -> dict:
        out = self.params.to_dict()
        if self.phi_alias:
            out["phi_alias"] = self.phi_alias
        if self.drive is not None:
            out.update(self.drive.to_dict())
        out[command] = self.section
        return out


def _grid(raw, what: str, default: Optional[GridSpec] = None) -> GridSpec:
    if raw is None:
        if default is None:
            raise ConfigError(f"{what}: grid is required")
        return default
    if not isinstance(raw, dict):
        raise ConfigError(f"{what}: expected an object with start, stop, count")
    try:
        start, stop, count = float(raw["start"]), float(raw["stop"]), raw["count"]
    except KeyError as exc:
        raise ConfigError(f"{what}: missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError):
        raise ConfigError(f"{what}: start and stop must be numbers") from None
    if isinstance(count, bool) or not isinstance(count, int) or count < 2:
        raise ConfigError(f"{what}.count: need an integer >= 2, got {count!r}")
    if not (math.isfinite(start) and math.isfinite(stop)) or not stop > start:
        raise ConfigError(f"{what}: need finite start < stop")
    return GridSpec(start, stop, count)


def _positive(section: dict, key: str, default: float) -> float:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
        raise ConfigError(f"{key}: must be a positive number, got {value!r}")
    return float(value)


def _resolve_phi(data: dict) -> tuple[dict, Optional[str]]:
    phi = data.get("phi")
    if not isinstance(phi, str):
        return data, None
    if phi not in PHASE_ALIASES:
        raise ConfigError(f"phi: unknown alias {phi!r} (use a number, 'fw_plus' or 'fw_minus')")
    g = float(data.get("g", 1.0))
    kappa = float(data.get("kappa", 1.0))
    try:
        value = single_excitation.fw_phase(g, kappa, PHASE_ALIASES[phi])
    except NoBoundState as exc:
        raise ConfigError(f"phi: {exc}") from None
    return {**data, "phi": value}, phi


def load_config(command: str, args: argparse.Namespace) -> RunConfig:
    data: dict = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"config: cannot read {args.config!r}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config: malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
        if not isinstance(data, dict):
            raise ConfigError("config: top level must be a JSON object")
    for name in ("g", "kappa", "phi"):
        value = getattr(args, name)
        if value is not None:
            data[name] = value
    data, alias = _resolve_phi(data)
    params, drive = params_from_dict(data)
    section = data.get(command, {})
    if not isinstance(section, dict):
        raise ConfigError(f"{command}: section must be an object")
    section = dict(section)
    if args.nmax is not None:
        section["n_max"] = args.nmax
    return RunConfig(params, drive, section, alias)


def _phi_arg(text: str):
    if text in PHASE_ALIASES:
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number or fw_plus/fw_minus: {text!r}") from None


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def fmt(x) -> str:
    return format(float(x), ".12g")


def write_csv(header: dict, columns: list[str], rows) -> str:
    buf = io.StringIO()
    buf.write("# " + json.dumps(header, sort_keys=True) + "\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _sweep(section: dict) -> Optional[SweepSpec]:
    raw = section.get("sweep")
    if raw is None:
        return None
    if not isinstance(raw, dict) or raw.get("name") not in PARAM_FIELDS:
        name = raw.get("name") if isinstance(raw, dict) else raw
        raise ConfigError(f"sweep.name: {name!r} is not a parameter field {PARAM_FIELDS}")
    return SweepSpec(raw["name"], _grid(raw, "sweep"))


def cmd_spectrum(cfg: RunConfig, threads: int = 1) -> str:
    """S(omega) rows; with a sweep, one block per swept parameter value."""
    sec = cfg.section
    omega = _grid(sec.get("omega"), "spectrum.omega", GridSpec(*_default_span(cfg.params), spectra.DEFAULT_GRID_POINTS))
    sweep = _sweep(sec)
    sec["omega"] = omega.to_dict()
    if sweep:
        sec["sweep"] = sweep.to_dict()
    values = sweep.grid.values() if sweep else [None]
    rows = []
    w = omega.values()
    for v in values:
        p = cfg.params if v is None else cfg.params.with_(**{sweep.name: float(v)})
        s = spectra.se_spectrum(w, p).values
        det = p.omega_0 - p.omega_c
        rows.extend((det, wi, si) for wi, si in zip(w, s))
    return write_csv(cfg.to_dict("spectrum"), ["detuning", "omega", "S"], rows)


def _default_span(params: SystemParams) -> tuple[float, float]:
    g = spectra.default_grid(params, 2)
    return float(g[0]), float(g[-1])


def cmd_dynamics(cfg: RunConfig, threads: int = 1) -> str:
    """Populations after exciting the emitter at t = 0."""
    sec = cfg.section
    t_max = _positive(sec, "t_max", DEFAULT_T_MAX / cfg.params.kappa)
    count = _grid({"start": 0.0, "stop": t_max, "count": sec.get("count", 401)}, "dynamics").count
    sec.update(t_max=t_max, count=count)
    t = np.linspace(0.0, t_max, count)
    amps = single_excitation.evolve(single_excitation.build_mc(cfg.params), np.array([1.0, 0, 0], complex), t)
    pop = np.abs(amps) ** 2
    standing = np.abs(amps @ single_excitation.TRAVELING_TO_STANDING.T) ** 2
    rows = (
        (ti, p[0], p[1], p[2], s[1], s[2], p.sum())
        for ti, p, s in zip(t, pop, standing)
    )
    return write_csv(cfg.to_dict("dynamics"), ["t", "p_qe", "p_ccw", "p_cw", "p_c1", "p_c2", "p_total"], rows)


def cmd_dbs_find(cfg: RunConfig, threads: int = 1) -> str:
    p = cfg.params
    vac = single_excitation.vacancy_condition(p)
    vacancy = {"is_vacancy": vac.is_vacancy, "qe_resonant": vac.qe_resonant}
    if vac.is_vacancy:
        vacancy["energy"] = vac.energy
        vacancy["eigenstate_standing"] = [[float(z.real), float(z.imag)] for z in vac.eigenstate]
    sols = single_excitation.fw_solutions(p.g, p.kappa, p.omega_c)
    fw = (
        [
            {
                "branch": s.branch.value,
                "omega_fw": s.omega_fw,
                "phi_fw": s.phi_fw,
                "coincides_with_vacancy": s.coincides_with_vacancy,
            }
            for s in sols
        ]
        or "none"
    )
    out = {"config": cfg.to_dict("dbs-find"), "vacancy": vacancy, "fw": fw}
    return json.dumps(out, sort_keys=True, indent=2) + "\n"


def cmd_entangle(cfg: RunConfig, threads: int = 1) -> str:
    sec = cfg.section
    t_max = _positive(sec, "t_max", DEFAULT_T_MAX / cfg.params.kappa)
    count = _grid({"start": 0.0, "stop": t_max, "count": sec.get("count", 401)}, "entangle").count
    sec.update(t_max=t_max, count=count)
    t = np.linspace(0.0, t_max, count)
    amps = entanglement.evolve_two_qubit(cfg.params, t)
    rows = zip(t, np.abs(amps.c_eg) ** 2, np.abs(amps.c_ge) ** 2, amps.concurrence)
    return write_csv(cfg.to_dict("entangle"), ["t", "p_eg", "p_ge", "concurrence"], rows)


def cmd_blockade(cfg: RunConfig, threads: int = 1) -> str:
    """I_c and g2(0) versus laser frequency for the chiral ring and the Lorentz baseline.

    Numeric columns use the normally ordered steady-state expectation; the
    ``*_pert`` columns are the weak-drive formulas (g2 in the published
    convention, half the normally ordered value).
    """
    drive = cfg.drive
    if drive is None or drive.Omega <= 0.0:
        raise UniqueSteadyStateRequiresDrive("blockade: Omega must be > 0 for a unique driven steady state")
    sec = cfg.section
    p = cfg.params
    grid = _grid(sec.get("omega_L"), "blockade.omega_L", GridSpec(p.omega_c - 2 * p.kappa, p.omega_c + 2 * p.kappa, 81))
    n_max = sec.get("n_max", lindblad.DEFAULT_BLOCKADE_NMAX)
    if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 1:
        raise ConfigError(f"n_max: need an integer >= 1, got {n_max!r}")
    sec.update(omega_L=grid.to_dict(), n_max=n_max)
    space = lindblad.HilbertSpace(1, n_max)
    w = grid.values()
    cep = lindblad.blockade_scan(p, drive, w, space, threads=threads)
    lor = lindblad.blockade_scan(p, drive, w, space, cascade=False, threads=threads)
    rows = []
    for wi, a, b in zip(w, cep, lor):
        pert = blockade.analytic_observables(p, DriveParams(drive.Omega, wi))
        rows.append((wi, a.I_c, a.g2, b.I_c, b.g2, pert.I_c, pert.g2))
    cols = ["omega_L", "I_c", "g2", "I_c_lorentz", "g2_lorentz", "I_c_pert", "g2_pert"]
    return write_csv(cfg.to_dict("blockade"), cols, rows)


COMMANDS: dict[str, Callable[[RunConfig, int], str]] = {
    "spectrum": cmd_spectrum,
    "dynamics": cmd_dynamics,
    "dbs-find": cmd_dbs_find,
    "entangle": cmd_entangle,
    "blockade": cmd_blockade,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chiral-dbs", description="Emitter + chiral microring bound-state toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        sp = sub.add_parser(name, help=(fn.__doc__ or "").strip().splitlines()[0] if fn.__doc__ else None)
        sp.add_argument("--config", help="JSON file with parameters and a section named after the command")
        sp.add_argument("--out", help="output file (default: stdout)")
        sp.add_argument("--threads", type=int, default=1, help="worker threads for sweeps")
        sp.add_argument("--g", type=float)
        sp.add_argument("--kappa", type=float)
        sp.add_argument("--phi", type=_phi_arg, help="number, or fw_plus / fw_minus")
        sp.add_argument("--nmax", type=int)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.command, args)
        text = COMMANDS[args.command](cfg, max(1, args.threads))
    except NumericalFailure as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ChiralDBSError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK
