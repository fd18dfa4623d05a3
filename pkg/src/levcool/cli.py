"""Command-line entry point: ``levcool <subcommand> [options]``.

Settings are resolved flag > config file > built-in default.  The config
file may hold a ``sweeps`` section keyed by subcommand, e.g.::

    sweeps:
      sweep-detuning: {start: 150, stop: 350, steps: 50}

On failure the exit code is 1 and stderr carries one JSON object
``{"error": <exception class>, "message": <text>}``.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import yaml

from . import __version__
from .errors import InvalidParams
from .params import khz, load_config, operating_point, params_from_dict, params_to_dict
from .scenarios import (SweepSpec, ingest_psd, run_degeneracy_sweep, run_detuning_sweep,
                        run_error_map, run_polarisation_sweep, run_spectrum, run_thermometry)
from .spectra import write_spectrum_csv

DEFAULT_SWEEPS = {
    "sweep-detuning": (150.0, 350.0, 50),
    "sweep-polarisation": (0.25, 0.5, 9),
    "sweep-degeneracy": (44.0, 0.0, 45),
}
DEFAULT_GRIDS = {"spacing": (0.0, 60.0, 20), "g": (2.0, 40.0, 20)}

# flag name -> path in the config mapping
CONFIG_FLAGS = {
    "kappa_khz": ("cavity", "kappa_khz"),
    "detuning_khz": ("cavity", "detuning_khz"),
    "eta": ("detection", "eta"),
    "if_freq_khz": ("detection", "if_freq_khz"),
}


def _apply_set(cfg: dict, assignment: str) -> None:
    """Apply ``a.b.c=value``; a ``modes`` segment is followed by a mode label."""
    key, sep, raw = assignment.partition("=")
    if not sep:
        raise InvalidParams(f"--set expects KEY=VALUE, got {assignment!r}")
    value = yaml.safe_load(raw)
    parts = key.split(".")
    node = cfg
    for part in parts[:-1]:
        if isinstance(node, list):
            matches = [m for m in node if str(m.get("label")) == part]
            if not matches:
                raise InvalidParams(f"--set {key}: no mode labelled {part!r}")
            node = matches[0]
        else:
            node = node.setdefault(part, {})
    node[parts[-1]] = value


def resolve_config(args) -> dict:
    cfg = load_config(args.config) if args.config else params_to_dict(operating_point())
    for flag, path in CONFIG_FLAGS.items():
        v = getattr(args, flag, None)
        if v is not None:
            cfg.setdefault(path[0], {})[path[1]] = v
    for assignment in args.set or []:
        _apply_set(cfg, assignment)
    return cfg


def _sweep(args, cfg, name) -> SweepSpec:
    start, stop, steps = DEFAULT_SWEEPS[name]
    file_cfg = (cfg.get("sweeps") or {}).get(name, {})
    start = args.start if args.start is not None else file_cfg.get("start", start)
    stop = args.stop if args.stop is not None else file_cfg.get("stop", stop)
    steps = args.steps if args.steps is not None else file_cfg.get("steps", steps)
    return SweepSpec(float(start), float(stop), int(steps))


def _grid(text: str | None, cfg: dict, name: str) -> SweepSpec:
    if text is None:
        g = (cfg.get("sweeps") or {}).get("error-map", {}).get(name)
        start, stop, steps = g if g is not None else DEFAULT_GRIDS[name]
    else:
        try:
            start, stop, steps = text.split(":")
        except ValueError:
            raise InvalidParams(f"grid must be START:STOP:STEPS, got {text!r}") from None
    return SweepSpec(float(start), float(stop), int(steps))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="levcool", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"levcool {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML/JSON parameter file (kHz)")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override a config key, e.g. modes.x.g_khz=10")
    for flag in CONFIG_FLAGS:
        common.add_argument("--" + flag.replace("_", "-"), type=float, dest=flag)

    sweep = argparse.ArgumentParser(add_help=False)
    sweep.add_argument("--start", type=float)
    sweep.add_argument("--stop", type=float)
    sweep.add_argument("--steps", type=int)

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("sweep-detuning", parents=[common, sweep],
                   help="occupations vs detuning (kHz)")
    p = sub.add_parser("sweep-polarisation", parents=[common, sweep],
                       help="occupations vs polarisation angle (units of pi)")
    p.add_argument("--g-total-khz", type=float)
    p.add_argument("--residual-coupling-khz", type=float, default=0.0)
    p = sub.add_parser("sweep-degeneracy", parents=[common, sweep],
                       help="occupations vs x/y frequency spacing (kHz)")
    p.add_argument("--center-khz", type=float)
    p = sub.add_parser("error-map", parents=[common], help="thermometry error map")
    p.add_argument("--spacing", help="START:STOP:STEPS in kHz (default 0:60:20)")
    p.add_argument("--g", help="START:STOP:STEPS in kHz (default 2:40:20)")
    p.add_argument("--center-khz", type=float)
    p.add_argument("--point", action="append", default=[], metavar="SPACING/G",
                   help="measured point to record, in kHz")
    p = sub.add_parser("thermometry", parents=[common], help="sideband thermometry of a PSD file")
    p.add_argument("psd", type=Path)
    p.add_argument("--float-offset", action="store_true", help="fit the noise floor")
    p.add_argument("--renormalize", action="store_true", help="divide PSD by its median first")
    p.add_argument("--local", action="store_true", help="fit each mode separately")
    p = sub.add_parser("spectrum", parents=[common], help="synthesize a heterodyne PSD")
    p.add_argument("--n-averages", type=int, help="add measurement noise with this many averages")
    p.add_argument("--rbw-hz", type=float, default=100.0)
    return parser


def run(args) -> list[Path]:
    cfg = resolve_config(args)
    params = params_from_dict(cfg)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    cmd = args.command
    if cmd == "sweep-detuning":
        table = run_detuning_sweep(params, _sweep(args, cfg, cmd), workers=args.threads)
        return [table.write(out / "detuning_sweep.csv")]
    if cmd == "sweep-polarisation":
        g_total = khz(args.g_total_khz) if args.g_total_khz is not None else None
        table = run_polarisation_sweep(params, _sweep(args, cfg, cmd), g_total=g_total,
                                       residual_coupling=khz(args.residual_coupling_khz),
                                       workers=args.threads)
        return [table.write(out / "polarisation_sweep.csv")]
    if cmd == "sweep-degeneracy":
        center = khz(args.center_khz) if args.center_khz is not None else None
        table = run_degeneracy_sweep(params, _sweep(args, cfg, cmd), center=center,
                                     workers=args.threads)
        return [table.write(out / "degeneracy_sweep.csv")]
    if cmd == "error-map":
        points = [tuple(float(v) for v in p.split("/")) for p in args.point]
        center = khz(args.center_khz) if args.center_khz is not None else None
        _, table = run_error_map(params, _grid(args.spacing, cfg, "spacing"),
                                 _grid(args.g, cfg, "g"), workers=args.threads,
                                 center=center, points=points)
        return [table.write(out / "error_map.csv")]
    if cmd == "thermometry":
        spec = ingest_psd(args.psd, renormalize=args.renormalize)
        _, table = run_thermometry(spec, params, float_offset=args.float_offset,
                                   joint=not args.local)
        return [table.write(out / "thermometry.csv")]
    if cmd == "spectrum":
        spec = run_spectrum(params, seed=args.seed, n_averages=args.n_averages, rbw=args.rbw_hz)
        return [write_spectrum_csv(spec, out / "spectrum.csv")]
    raise InvalidParams(f"unknown command {cmd!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        for path in run(args):
            print(path)
    except Exception as exc:  # reported as JSON for scripted callers
        json.dump({"error": type(exc).__name__, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
