"""Scenario runners that reproduce the measurement sweeps and write CSV tables.

Every runner returns a :class:`Table`; ``Table.write`` emits a CSV file
whose leading ``#`` lines record the tool version, the config hash and
the scenario settings, so the same (config, seed) reproduces the same
bytes.  Frequencies in tables are in kHz unless the column says Hz.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import __version__
from .analysis import bright_dark_decompose, dark_mode_occupation
from .dynamics import build_model, mode_occupations, rate_equation_occupation
from .errors import MalformedCsv, Unstable
from .params import SystemParams, config_hash, coupling_from_polarisation, khz, to_hz, to_khz
from .spectra import (Spectrum, TransferFunction, heterodyne_psd, read_spectrum_csv,
                      synthesize_measurement, uniform_grid)
from .thermometry import ErrorMap, ThermometryResult, error_map, sideband_thermometry

SCENARIO_KINDS = ("detuning-sweep", "polarisation-sweep", "degeneracy-sweep", "error-map",
                  "thermometry", "spectrum")


@dataclass(frozen=True)
class SweepSpec:
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if self.steps < 1:
            raise ValueError("steps must be >= 1")

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.steps)


@dataclass
class Table:
    columns: list[str]
    rows: list[tuple]
    header: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])

    def to_csv(self) -> str:
        lines = [f"# {k}: {v}" for k, v in self.header.items()]
        lines.append(",".join(self.columns))
        lines += [",".join(_fmt(v) for v in row) for row in self.rows]
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_csv())
        return path


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def provenance(params: SystemParams, scenario: str, **extra) -> dict:
    head = {"tool": f"levcool {__version__}", "config_hash": config_hash(params),
            "scenario": scenario}
    head.update({k: str(v) for k, v in extra.items()})
    return head


def parallel_map(fn: Callable, items: Sequence, workers: int = 1) -> list:
    """Ordered map, optionally over a process pool; result order never depends on timing."""
    items = list(items)
    if workers <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * workers))))


def _point_occupations(params: SystemParams) -> tuple[dict, dict, str]:
    """Occupations of one sweep point; the flag is ``Unstable`` if the full model is.

    Modes cut off from every dissipation channel are reported as ``inf``
    while the rest of the system is still solved.
    """
    rate = {m.label: rate_equation_occupation(params, m.label) for m in params.modes}
    flag = "" if build_model(params).is_stable() else "Unstable"
    try:
        full = mode_occupations(params)
    except Unstable:
        full = {m.label: math.nan for m in params.modes}
    return full, rate, flag


# ---------------------------------------------------------------------------
# detuning sweep


def _detuning_point(args):
    params, delta_khz = args
    return _point_occupations(params.with_cavity(detuning=khz(delta_khz)))


def run_detuning_sweep(params: SystemParams, sweep: SweepSpec, workers: int = 1) -> Table:
    """Full and rate-equation occupations versus cavity detuning (kHz)."""
    deltas = sweep.values()
    results = parallel_map(_detuning_point, [(params, d) for d in deltas], workers)
    labels = params.labels
    cols = ["detuning_khz"] + [f"n_{l}" for l in labels] + [f"n_{l}_rate" for l in labels] \
        + ["stable", "flag"]
    rows = []
    for d, (full, rate, flag) in zip(deltas, results):
        rows.append((float(d), *(full[l] for l in labels), *(rate[l] for l in labels),
                     flag != "Unstable", flag))
    return Table(cols, rows, provenance(params, "detuning-sweep", start_khz=sweep.start,
                                        stop_khz=sweep.stop, steps=sweep.steps))


# ---------------------------------------------------------------------------
# polarisation sweep


def polarised_params(params: SystemParams, theta: float, g_total: float,
                     residual_coupling: float = 0.0, labels=("x", "y")) -> SystemParams:
    """Set the x/y couplings for polarisation angle ``theta`` (rad).

    ``residual_coupling`` (rad/s) adds in quadrature to both modes and models
    polarisation or alignment imperfections that keep a mode coupled at
    theta = 0 or pi/2.
    """
    gx, gy = coupling_from_polarisation(theta, g_total)
    if residual_coupling:
        gx, gy = math.hypot(gx, residual_coupling), math.hypot(gy, residual_coupling)
    return params.with_modes(**{labels[0]: {"g": gx}, labels[1]: {"g": gy}})


def _polarisation_point(args):
    params, theta_pi, g_total, residual = args
    p = polarised_params(params, theta_pi * math.pi, g_total, residual)
    full, rate, flag = _point_occupations(p)
    return p.mode("x").g, p.mode("y").g, full, rate, flag


def run_polarisation_sweep(params: SystemParams, sweep: SweepSpec, g_total: float | None = None,
                           residual_coupling: float = 0.0, workers: int = 1) -> Table:
    """Occupations versus polarisation angle; sweep values are theta in units of pi.

    ``g_total`` (rad/s) defaults to ``hypot(g_x, g_y)`` of ``params``.  The
    header reports whether n_y is non-increasing and n_x non-decreasing
    along the sweep.
    """
    if g_total is None:
        g_total = math.hypot(params.mode("x").g, params.mode("y").g)
    thetas = sweep.values()
    results = parallel_map(_polarisation_point,
                           [(params, t, g_total, residual_coupling) for t in thetas], workers)
    cols = ["theta_pi", "g_x_khz", "g_y_khz", "n_x", "n_y", "n_x_rate", "n_y_rate", "flag"]
    rows = [(float(t), to_khz(gx), to_khz(gy), full["x"], full["y"], rate["x"], rate["y"], flag)
            for t, (gx, gy, full, rate, flag) in zip(thetas, results)]
    nx = np.array([r[3] for r in rows])
    ny = np.array([r[4] for r in rows])
    step = np.sign(thetas[-1] - thetas[0]) if len(thetas) > 1 else 1.0
    sep_ok = bool(np.all(step * np.diff(ny) <= 0) and np.all(step * np.diff(nx) >= 0))
    head = provenance(params, "polarisation-sweep", start_pi=sweep.start, stop_pi=sweep.stop,
                      steps=sweep.steps, g_total_khz=to_khz(g_total),
                      residual_coupling_khz=to_khz(residual_coupling),
                      monotone_separation=str(sep_ok).lower())
    return Table(cols, rows, head)


# ---------------------------------------------------------------------------
# degeneracy sweep


def spaced_params(params: SystemParams, spacing: float, center: float | None = None,
                  labels=("x", "y")) -> SystemParams:
    """Place two modes symmetrically ``spacing`` apart around ``center`` (rad/s)."""
    a, b = params.mode(labels[0]), params.mode(labels[1])
    c = 0.5 * (a.omega + b.omega) if center is None else center
    return params.with_modes(**{labels[0]: {"omega": c - spacing / 2},
                                labels[1]: {"omega": c + spacing / 2}})


def _degeneracy_point(args):
    params, spacing_khz, center = args
    p = spaced_params(params, khz(spacing_khz), center)
    x, y = p.mode("x"), p.mode("y")
    mixing = bright_dark_decompose(x.g, y.g, x.omega, y.omega).mixing_rate
    try:
        nb, nd = dark_mode_occupation(p)
        occ = mode_occupations(p)
        flag = ""
    except Unstable as exc:
        occ = {"x": math.nan, "y": math.nan}
        nb = nd = math.nan
        flag = type(exc).__name__
    return occ, nb, nd, mixing, flag


def run_degeneracy_sweep(params: SystemParams, sweep: SweepSpec, center: float | None = None,
                         workers: int = 1) -> Table:
    """Occupations as the x/y spacing (kHz) shrinks towards degeneracy."""
    spacings = sweep.values()
    results = parallel_map(_degeneracy_point, [(params, s, center) for s in spacings], workers)
    cols = ["spacing_khz", "n_x", "n_y", "n_max", "n_bright", "n_dark", "mixing_khz", "flag"]
    rows = []
    for s, (occ, nb, nd, mixing, flag) in zip(spacings, results):
        rows.append((float(s), occ["x"], occ["y"], max(occ["x"], occ["y"]), nb, nd,
                     to_khz(mixing), flag))
    c = 0.5 * (params.mode("x").omega + params.mode("y").omega) if center is None else center
    return Table(cols, rows, provenance(params, "degeneracy-sweep", start_khz=sweep.start,
                                        stop_khz=sweep.stop, steps=sweep.steps,
                                        center_khz=to_khz(c)))


# ---------------------------------------------------------------------------
# error map


def run_error_map(params: SystemParams, spacing: SweepSpec, g: SweepSpec, workers: int = 1,
                  center: float | None = None,
                  points: Iterable[tuple[float, float]] = ()) -> tuple[ErrorMap, Table]:
    """Thermometry error over (spacing, g), both in kHz.

    ``points`` are optional measured (spacing_khz, g_khz) pairs; they are
    recorded in the header so a plot can overlay them on the map.
    """
    em = error_map(params, khz(spacing.values()), khz(g.values()), center=center, workers=workers)
    cols = ["spacing_Hz", "g_Hz"] + [f"dn{l}" for l in em.labels] + ["mask_reason"]
    extra = {"spacing_khz": f"{spacing.start}:{spacing.stop}:{spacing.steps}",
             "g_khz": f"{g.start}:{g.stop}:{g.steps}"}
    pts = list(points)
    if pts:
        extra["measurement_points_khz"] = ";".join(f"{s}/{gg}" for s, gg in pts)
    return em, Table(cols, list(em.rows()), provenance(params, "error-map", **extra))


# ---------------------------------------------------------------------------
# spectra and thermometry


def ingest_psd(path: str | Path, renormalize: bool = False) -> Spectrum:
    """Read a spectrum CSV; optionally divide by the median as the shot-noise floor."""
    spec = read_spectrum_csv(path)
    if np.any(spec.psd < 0):
        raise MalformedCsv("negative PSD values")
    if renormalize:
        floor = float(np.median(spec.psd))
        spec = replace(spec, psd=spec.psd / floor,
                       meta=dict(spec.meta) | {"renormalized_by": repr(floor)})
    return spec


def run_spectrum(params: SystemParams, seed: int | None = None, n_averages: int | None = None,
                 rbw: float = 100.0) -> Spectrum:
    """Heterodyne spectrum on a uniform grid of spacing ``rbw`` (Hz).

    Without ``n_averages`` the spectrum is noiseless; otherwise measurement
    noise with that many averages is added using ``seed``.
    """
    model = build_model(params)
    spec = heterodyne_psd(model, uniform_grid(model, rbw))
    spec.meta["rbw_Hz"] = repr(float(rbw))
    if n_averages is not None:
        spec = synthesize_measurement(spec, n_averages=n_averages, seed=seed)
        spec.meta["rbw_Hz"] = repr(float(rbw))
    return spec


def run_thermometry(spec: Spectrum, params: SystemParams, float_offset: bool = False,
                    joint: bool = True) -> tuple[ThermometryResult, Table]:
    """Sideband thermometry with guesses and cavity taken from ``params``."""
    guesses = [to_hz(m.omega) for m in params.modes]
    res = sideband_thermometry(spec, TransferFunction.from_params(params), guesses,
                               labels=params.labels, float_offset=float_offset, joint=joint)
    cols = ["mode", "stokes_center_Hz", "antistokes_center_Hz", "width_Hz", "stokes_amp",
            "antistokes_amp", "asymmetry", "asymmetry_sigma", "n_est", "n_sigma"]
    rows = [(m.label, m.stokes.center, m.antistokes.center, m.stokes.width, m.stokes.amplitude,
             m.antistokes.amplitude, m.asymmetry, m.asymmetry_sigma, m.n_est, m.n_sigma)
            for m in res.modes]
    head = provenance(params, "thermometry", spectrum_params_hash=spec.meta.get("params_hash", ""),
                      float_offset=str(float_offset).lower())
    return res, Table(cols, rows, head)


__all__ = [
    "SCENARIO_KINDS", "SweepSpec", "Table", "ingest_psd", "parallel_map", "polarised_params",
    "provenance", "run_degeneracy_sweep", "run_detuning_sweep", "run_error_map",
    "run_polarisation_sweep", "run_spectrum", "run_thermometry", "spaced_params",
]
