"""End-to-end sweeps: configuration, parallel execution, and CSV tables."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import classical
from .entanglement import entanglement_report, entanglement_series
from .errors import ConfigError, KickedTopError
from .floquet import (DEFAULT_L, DEFAULT_OMEGA_GRID, build_floquet, diagonalize, husimi_grid,
                      husimi_map, locate_scar, propagate_series)
from .spin import SpinSystem, coherent_state

SOUTH = (math.pi / 2, -math.pi / 2)
NORTH = (math.pi / 2, math.pi / 2)


class ExperimentError(KickedTopError, RuntimeError):
    pass


# ---------------------------------------------------------------- config

@dataclass(frozen=True)
class ExperimentConfig:
    n_qubits: int = 50
    p: float = math.pi / 2
    k: float | None = None
    k_min: float = 0.0
    k_max: float = 6.8
    k_step: float | None = None
    n_kicks: int = 500
    theta: float = SOUTH[0]
    phi: float = SOUTH[1]
    scan_axis: str = "phi"
    scan_min: float | None = None
    scan_max: float | None = None
    scan_step: float = 0.01
    L: int = DEFAULT_L
    omega_grid: int = DEFAULT_OMEGA_GRID
    grid: tuple[int, int] | None = None
    average: str = "mean"
    transient: int = classical.BIFURCATION_TRANSIENT
    record: int = classical.BIFURCATION_RECORD
    offset: float = classical.BIFURCATION_OFFSET
    seeds: str = "grid"
    workers: int = 1
    out: str | None = None

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ConfigError("qubits must be >= 2")
        if self.k_min > self.k_max:
            raise ConfigError("k_min must not exceed k_max")
        if self.k_step is not None and self.k_step <= 0:
            raise ConfigError("k_step must be positive")
        if self.n_kicks < 0:
            raise ConfigError("kicks must be >= 0")
        if self.scan_axis not in ("theta", "phi"):
            raise ConfigError("scan_axis must be 'theta' or 'phi'")
        if self.scan_step <= 0:
            raise ConfigError("scan_step must be positive")
        if self.average not in ("mean", "final"):
            raise ConfigError("average must be 'mean' or 'final'")
        if self.seeds not in ("grid", "point"):
            raise ConfigError("seeds must be 'grid' or 'point'")
        if self.L < 1 or self.omega_grid < 2:
            raise ConfigError("L must be >= 1 and omega_grid >= 2")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.grid is not None and min(self.grid) < 1:
            raise ConfigError("grid sizes must be positive")

    @property
    def system(self) -> SpinSystem:
        return SpinSystem(self.n_qubits)

    def k_values(self, default_step: float = 0.1) -> np.ndarray:
        if self.k is not None:
            return np.array([float(self.k)])
        step = self.k_step if self.k_step is not None else default_step
        return classical.k_grid(self.k_min, self.k_max, step)


# config-file / CLI key -> dataclass field
KEY_TO_FIELD = {
    "qubits": "n_qubits", "n_qubits": "n_qubits",
    "kicks": "n_kicks", "n_kicks": "n_kicks",
    "omega_grid": "omega_grid",
}
for _f in fields(ExperimentConfig):
    KEY_TO_FIELD.setdefault(_f.name, _f.name)

_INT_FIELDS = {"n_qubits", "n_kicks", "L", "omega_grid", "transient", "record", "workers"}
_STR_FIELDS = {"scan_axis", "average", "seeds", "out"}
_OPT_FLOAT = {"k", "k_step", "scan_min", "scan_max"}


def parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError as exc:
        raise ConfigError(f"grid must look like 200x200, got {text!r}") from exc


def coerce(field: str, value):
    if value is None:
        return None
    if field == "grid":
        return value if isinstance(value, tuple) else parse_grid(str(value))
    if field in _STR_FIELDS:
        return str(value)
    if field in _OPT_FLOAT and str(value).lower() in ("none", ""):
        return None
    try:
        if field in _INT_FIELDS:
            return int(value)
        return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for {field}: {value!r}") from exc


def read_config_file(path) -> dict:
    """Parse `key = value` lines; `#` starts a comment. Unknown keys are errors."""
    values = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in KEY_TO_FIELD:
                raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
            field = KEY_TO_FIELD[key]
            values[field] = coerce(field, val)
    return values


def make_config(file_values: dict | None = None, overrides: dict | None = None) -> ExperimentConfig:
    merged = dict(file_values or {})
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in KEY_TO_FIELD:
            raise ConfigError(f"unknown key {key!r}")
        field = KEY_TO_FIELD[key]
        merged[field] = coerce(field, val)
    return ExperimentConfig(**merged)


# ---------------------------------------------------------------- tables

SCHEMAS = {
    "bifurcation": [("k", float), ("theta", float), ("phi", float)],
    "scar-scan": [("k", float), ("omega_peak", float), ("state_index", int), ("quasi_energy", float),
                  ("husimi_overlap", float), ("Q", float), ("negativity", float), ("eof", float)],
    "kick-evolve": [("k", float), ("pole", str), ("Q", float), ("eof", float)],
    "branch-scan": [("k", float), ("theta", float), ("phi", float), ("Q", float), ("negativity", float)],
    "husimi": [("theta", float), ("phi", float), ("value", float)],
    "spectrum": [("omega", float), ("magnitude", float)],
    "portrait": [("k", float), ("traj_id", int), ("step", int), ("theta", float), ("phi", float)],
}


@dataclass
class Table:
    kind: str
    rows: list[tuple]

    @property
    def columns(self) -> list[str]:
        return [name for name, _ in SCHEMAS[self.kind]]

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def write_table(table: Table, path) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(table.columns)
            for row in table.rows:
                w.writerow([_fmt(v) for v in row])
    except OSError as exc:
        raise ExperimentError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_table(path) -> Table:
    """Read a file written by write_table; the header identifies the schema."""
    path = Path(path)
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            body = list(reader)
    except (OSError, StopIteration) as exc:
        raise ExperimentError(f"cannot read {path}") from exc
    for kind, schema in SCHEMAS.items():
        if [n for n, _ in schema] == header:
            types = [t for _, t in schema]
            return Table(kind, [tuple(t(v) for t, v in zip(types, r)) for r in body])
    raise ExperimentError(f"{path}: unrecognized header {header}")


# ---------------------------------------------------------------- runners

def _pool_map(fn, tasks, workers: int):
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def run_bifurcation(cfg: ExperimentConfig) -> Table:
    seed = classical.SpherePoint.from_angles(cfg.theta, cfg.phi)
    ks = cfg.k_values(default_step=0.01)
    rows = []
    tasks = [(float(k), tuple(seed), cfg.transient, cfg.record, cfg.offset) for k in ks]
    for chunk in _pool_map(classical._scan_one, tasks, cfg.workers):
        rows.extend(chunk)
    return Table("bifurcation", rows)


def _scar_task(args):
    n_qubits, k, p, angles, L, omega_grid = args
    sys = SpinSystem(n_qubits)
    try:
        rec = locate_scar(sys, k, p, angles, L, omega_grid)
    except Exception as exc:
        raise ExperimentError(f"scar scan failed at k={k}: {exc}") from exc
    rep = entanglement_report(rec.state, sys)
    return (k, rec.omega_peak, rec.state_index, rec.quasi_energy, rec.husimi_overlap,
            rep.Q, rep.negativity, rep.eof)


def run_scar_scan(cfg: ExperimentConfig) -> Table:
    """Scarred eigenstate at (theta, phi) and its entanglement, per k."""
    tasks = [(cfg.n_qubits, float(k), cfg.p, (cfg.theta, cfg.phi), cfg.L, cfg.omega_grid)
             for k in cfg.k_values()]
    return Table("scar-scan", _pool_map(_scar_task, tasks, cfg.workers))


def evolved_entanglement(sys: SpinSystem, spectrum, angles, n_kicks: int, average: str):
    """Entanglement of a coherent state after n_kicks kicks.

    With average == "mean" the measures are averaged over kicks 1..n_kicks;
    with "final" only the last state counts. n_kicks == 0 gives the initial state.
    """
    psi0 = coherent_state(sys, *angles)
    if n_kicks == 0:
        rep = entanglement_report(psi0, sys)
        return {"Q": rep.Q, "negativity": rep.negativity, "concurrence": rep.concurrence, "eof": rep.eof}
    if average == "final":
        states = propagate_series(psi0, spectrum, n_kicks)[:, -1:]
    else:
        states = propagate_series(psi0, spectrum, n_kicks)
    series = entanglement_series(states, sys)
    return {name: float(np.mean(vals)) for name, vals in series.items()}


def _kick_task(args):
    n_qubits, k, p, n_kicks, average = args
    sys = SpinSystem(n_qubits)
    try:
        spec = diagonalize(build_floquet(sys, k, p))
    except Exception as exc:
        raise ExperimentError(f"kick evolution failed at k={k}: {exc}") from exc
    rows = []
    for pole, angles in (("south", SOUTH), ("north", NORTH)):
        m = evolved_entanglement(sys, spec, angles, n_kicks, average)
        rows.append((k, pole, m["Q"], m["eof"]))
    return rows


def run_kick_evolution(cfg: ExperimentConfig) -> Table:
    tasks = [(cfg.n_qubits, float(k), cfg.p, cfg.n_kicks, cfg.average) for k in cfg.k_values()]
    rows = []
    for chunk in _pool_map(_kick_task, tasks, cfg.workers):
        rows.extend(chunk)
    return Table("kick-evolve", rows)


def scan_values(cfg: ExperimentConfig) -> np.ndarray:
    lo_default, hi_default = (0.0, math.pi) if cfg.scan_axis == "theta" else (-math.pi, math.pi)
    lo = lo_default if cfg.scan_min is None else cfg.scan_min
    hi = hi_default if cfg.scan_max is None else cfg.scan_max
    return classical.k_grid(lo, hi, cfg.scan_step)


def _branch_task(args):
    n_qubits, k, p, n_kicks, average, points = args
    sys = SpinSystem(n_qubits)
    try:
        spec = diagonalize(build_floquet(sys, k, p))
    except Exception as exc:
        raise ExperimentError(f"branch scan failed at k={k}: {exc}") from exc
    rows = []
    for theta, phi in points:
        m = evolved_entanglement(sys, spec, (theta, phi), n_kicks, average)
        rows.append((k, theta, phi, m["Q"], m["negativity"]))
    return rows


def run_branch_scan(cfg: ExperimentConfig) -> Table:
    """Entanglement of evolved coherent states along a theta or phi line.

    The sweep over the scan angle is split into one task per grid point.
    """
    angles = scan_values(cfg)
    tasks = []
    for k in cfg.k_values():
        for a in angles:
            pt = (float(a), cfg.phi) if cfg.scan_axis == "theta" else (cfg.theta, float(a))
            tasks.append((cfg.n_qubits, float(k), cfg.p, cfg.n_kicks, cfg.average, [pt]))
    rows = []
    for chunk in _pool_map(_branch_task, tasks, cfg.workers):
        rows.extend(chunk)
    return Table("branch-scan", rows)


def run_husimi(cfg: ExperimentConfig) -> tuple[Table, Table]:
    """Husimi map of the located scar and the spectral density it came from."""
    if cfg.k is None:
        raise ConfigError("husimi needs a single k (--k)")
    sys = cfg.system
    n_theta, n_phi = cfg.grid or (100, 200)
    rec, dens = locate_scar(sys, cfg.k, cfg.p, (cfg.theta, cfg.phi), cfg.L, cfg.omega_grid,
                            return_density=True)
    theta, phi, vals = husimi_map(rec.state, sys, n_theta, n_phi)
    hus = [(float(t), float(f), float(vals[i, j]))
           for i, t in enumerate(theta) for j, f in enumerate(phi)]
    spec = [(float(w), float(m)) for w, m in zip(dens.omegas, dens.magnitudes)]
    return Table("husimi", hus), Table("spectrum", spec)


def _portrait_task(args):
    k, traj_id, seed, n = args
    return [(k, traj_id, step, *classical.to_angles(pt))
            for step, pt in enumerate(classical.trajectory(seed, k, n))]


def portrait_seeds(cfg: ExperimentConfig) -> list[classical.SpherePoint]:
    if cfg.seeds == "point":
        return [classical.SpherePoint.from_angles(cfg.theta, cfg.phi)]
    n_theta, n_phi = cfg.grid or (8, 5)
    theta, phi = husimi_grid(n_theta, n_phi)
    return [classical.SpherePoint.from_angles(t, f) for t in theta for f in phi]


def run_portrait(cfg: ExperimentConfig) -> Table:
    seeds = portrait_seeds(cfg)
    tasks = [(float(k), i, tuple(s), cfg.n_kicks)
             for k in cfg.k_values() for i, s in enumerate(seeds)]
    rows = []
    for chunk in _pool_map(_portrait_task, tasks, cfg.workers):
        rows.extend(chunk)
    return Table("portrait", rows)


RUNNERS = {
    "bifurcation": run_bifurcation,
    "scar-scan": run_scar_scan,
    "kick-evolve": run_kick_evolution,
    "branch-scan": run_branch_scan,
    "husimi": run_husimi,
    "portrait": run_portrait,
}


def output_paths(command: str, cfg: ExperimentConfig) -> list[Path]:
    base = Path(cfg.out) if cfg.out else Path(f"{command}.csv")
    if command == "husimi":
        stem = base.with_suffix("")
        return [stem.with_name(stem.name + "_husimi.csv"), stem.with_name(stem.name + "_spectrum.csv")]
    return [base]


def run(command: str, cfg: ExperimentConfig) -> list[Path]:
    """Run one subcommand and write its table(s); returns the written paths."""
    result = RUNNERS[command](cfg)
    tables = result if isinstance(result, tuple) else (result,)
    return [write_table(t, path) for t, path in zip(tables, output_paths(command, cfg))]


__all__ = [
    "ExperimentConfig", "ExperimentError", "Table", "SCHEMAS", "RUNNERS",
    "make_config", "read_config_file", "read_table", "write_table", "run",
    "run_bifurcation", "run_scar_scan", "run_kick_evolution", "run_branch_scan",
    "run_husimi", "run_portrait",
]
