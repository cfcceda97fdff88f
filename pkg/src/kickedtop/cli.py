"""Command-line entry point: ``kickedtop <subcommand> [options]``."""
from __future__ import annotations

import argparse
import sys
from dataclasses import fields

from .errors import KickedTopError
from .experiments import RUNNERS, ExperimentConfig, make_config, read_config_file, run

_DEFAULTS = {f.name: f.default for f in fields(ExperimentConfig)}

# (flag, config key, type, help)
_OPTIONS = [
    ("--qubits", "qubits", int, "number of qubits N (j = N/2)"),
    ("--p", "p", float, "precession angle per period"),
    ("--k", "k", float, "single kick strength; overrides the k grid"),
    ("--k-min", "k_min", float, "first k of the grid"),
    ("--k-max", "k_max", float, "last k of the grid (inclusive)"),
    ("--k-step", "k_step", float, "grid step (default 0.01 for bifurcation, 0.1 otherwise)"),
    ("--kicks", "kicks", int, "kicks per evolution / iterates per portrait trajectory"),
    ("--theta", "theta", float, "initial polar angle (coherent state or seed)"),
    ("--phi", "phi", float, "initial azimuth (coherent state or seed)"),
    ("--scan-axis", "scan_axis", str, "branch-scan axis: theta or phi"),
    ("--scan-min", "scan_min", float, "branch-scan start angle (default: full range)"),
    ("--scan-max", "scan_max", float, "branch-scan end angle (default: full range)"),
    ("--scan-step", "scan_step", float, "branch-scan angle step"),
    ("--L", "L", int, "autocorrelation range M = -L..L"),
    ("--omega-grid", "omega_grid", int, "points in the spectral omega grid"),
    ("--grid", "grid", str, "grid as <n_theta>x<n_phi> (husimi: 100x200, portrait seeds: 8x5)"),
    ("--average", "average", str, "'mean' over kicks 1..n or 'final' state only"),
    ("--transient", "transient", int, "bifurcation: discarded iterates"),
    ("--record", "record", int, "bifurcation: recorded iterates"),
    ("--offset", "offset", float, "bifurcation: seed displacement in theta (rad)"),
    ("--seeds", "seeds", str, "portrait seeds: 'grid' or 'point' (uses --theta/--phi)"),
    ("--workers", "workers", int, "worker processes"),
    ("--out", "out", str, "output CSV path (husimi: prefix for two files)"),
]

_FIELD = {"qubits": "n_qubits", "kicks": "n_kicks"}


def _add_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="file of 'key = value' lines; flags override it")
    for flag, key, typ, text in _OPTIONS:
        default = _DEFAULTS.get(_FIELD.get(key, key))
        p.add_argument(flag, dest=key, type=typ, default=None,
                       help=f"{text} (default: {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kickedtop", description="Quantum kicked top experiments.")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "bifurcation": "classical bifurcation diagram (k, theta, phi)",
        "scar-scan": "scarred eigenstate and its entanglement vs k",
        "kick-evolve": "entanglement of pole coherent states after repeated kicks",
        "branch-scan": "entanglement of evolved coherent states along an angle line",
        "husimi": "Husimi map of the scar and its spectral density",
        "portrait": "classical phase-space trajectories",
    }
    for name in RUNNERS:
        _add_options(sub.add_parser(name, help=helps[name]))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        file_values = read_config_file(args.config) if args.config else {}
        overrides = {key: getattr(args, key) for _, key, _, _ in _OPTIONS}
        cfg = make_config(file_values, overrides)
        for path in run(args.command, cfg):
            print(path)
    except (KickedTopError, OSError) as exc:
        print(f"kickedtop: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
