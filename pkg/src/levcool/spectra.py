"""Heterodyne spectra of the light leaking out of the cavity.

The computed object is the normal-ordered output spectrum in shot-noise
units, ``PSD(f) = 1 + eta * kappa * S_aa(2 pi f)`` with
``S_aa(w) = int dt e^{i w t} <a^dag(0) a(t)>``.  Frequencies are offsets
from the carrier (the heterodyne IF is already removed), in Hz; the
anti-Stokes sideband of a mode at Omega sits at +Omega/2pi and the Stokes
sideband at -Omega/2pi.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .dynamics import LinearModel
from .errors import MalformedCsv, NonMonotoneFrequencies, Unstable
from .params import SystemParams, to_hz

CSV_COLUMNS = ("freq_Hz", "psd_shotnoise_units")


@dataclass(frozen=True)
class TransferFunction:
    kappa: float
    detuning: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("kappa must be > 0")

    @classmethod
    def from_params(cls, params: SystemParams) -> "TransferFunction":
        return cls(params.cavity.kappa, params.cavity.detuning)


def cavity_gain(tf: TransferFunction, omega):
    """Lorentzian intensity gain of the cavity at offset ``omega`` (rad/s) from the tweezer.

    Peaks at 1 for ``omega == tf.detuning`` and halves at ``detuning +- kappa/2``.
    """
    hw2 = (tf.kappa / 2) ** 2
    return hw2 / (hw2 + (tf.detuning - np.asarray(omega, dtype=float)) ** 2)


@dataclass(frozen=True, eq=False)
class Spectrum:
    freqs: np.ndarray
    psd: np.ndarray
    meta: dict = field(default_factory=dict)
    noiseless: np.ndarray | None = None

    def __post_init__(self):
        f = np.asarray(self.freqs, dtype=float)
        p = np.asarray(self.psd, dtype=float)
        if f.ndim != 1 or f.shape != p.shape:
            raise ValueError("freqs and psd must be 1-D arrays of equal length")
        if np.any(np.diff(f) <= 0):
            raise NonMonotoneFrequencies("frequencies must be strictly increasing")
        object.__setattr__(self, "freqs", f)
        object.__setattr__(self, "psd", p)

    def window(self, lo: float, hi: float) -> "Spectrum":
        sel = (self.freqs >= lo) & (self.freqs <= hi)
        nl = None if self.noiseless is None else self.noiseless[sel]
        return replace(self, freqs=self.freqs[sel], psd=self.psd[sel], noiseless=nl)


def _base_meta(model: LinearModel) -> dict:
    return {"generator": f"levcool {__version__}", "params_hash": model.params_hash}


def intracavity_spectrum(model: LinearModel, omega) -> np.ndarray:
    """Normal-ordered intracavity spectrum ``S_aa(omega)`` (units of time)."""
    M, C = model.drift, model.noise
    n = M.shape[0]
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    # a = u . z for z = (X_c, Y_c, ...); z(w) = (-i w - M)^-1 xi(w)
    u = np.zeros(n, dtype=complex)
    u[0], u[1] = 1 / np.sqrt(2), 1j / np.sqrt(2)
    A = -1j * w[:, None, None] * np.eye(n) - M
    r = np.linalg.solve(np.swapaxes(A, 1, 2), np.broadcast_to(u, (len(w), n))[..., None])[..., 0]
    return np.einsum("wj,jk,wk->w", r.conj(), C, r).real


def heterodyne_psd(model: LinearModel, freqs=None) -> Spectrum:
    """Noiseless heterodyne PSD in shot-noise units on ``freqs`` (Hz).

    ``freqs`` defaults to :func:`sideband_grid`.  The model must be stable;
    an unstable drift has no stationary spectrum.
    """
    if not model.is_stable():
        raise Unstable("spectrum of an unstable model is undefined")
    f = sideband_grid(model) if freqs is None else np.asarray(freqs, dtype=float)
    p = model.params
    s = intracavity_spectrum(model, 2 * np.pi * f)
    psd = 1.0 + p.cavity.eta * p.cavity.kappa * s
    meta = _base_meta(model) | {"n_averages": "inf", "rbw_Hz": ""}
    return Spectrum(f, psd, meta)


def mechanical_eigenmodes(model: LinearModel) -> list[tuple[float, float]]:
    """(frequency, FWHM) in Hz of the mechanical-like eigenmodes, one per mode.

    Eigenvalues of the drift come in conjugate pairs ``-gamma/2 +- i w``;
    the pairs with the most weight on mechanical quadratures are kept.
    """
    ev, vec = np.linalg.eig(model.drift)
    mech_weight = np.sum(np.abs(vec[2:]) ** 2, axis=0) / np.sum(np.abs(vec) ** 2, axis=0)
    pos = [i for i in np.argsort(-mech_weight) if ev[i].imag > 0][: model.n_modes]
    return sorted((to_hz(ev[i].imag), to_hz(-2 * ev[i].real)) for i in pos)


def sideband_grid(model: LinearModel, n_core: int = 801, core_span: float = 60.0,
                  n_background: int = 1201) -> np.ndarray:
    """Frequency grid (Hz) that resolves every sideband.

    A uniform background grid covers ``|f| <= max(Omega) + kappa``; around
    each mechanical eigenfrequency at +-f, ``n_core`` points are spread with
    Lorentzian (tangent) spacing out to ``core_span`` linewidths.
    """
    p = model.params
    fmax = to_hz(max(m.omega for m in p.modes) + p.cavity.kappa)
    parts = [np.linspace(-fmax, fmax, n_background)]
    u = np.linspace(-np.arctan(core_span), np.arctan(core_span), n_core)
    for f0, fwhm in mechanical_eigenmodes(model):
        fwhm = max(fwhm, 1e-3)
        core = 0.5 * fwhm * np.tan(u)
        parts += [f0 + core, -f0 + core]
    return np.unique(np.concatenate(parts))


def uniform_grid(model: LinearModel, rbw: float = 100.0, margin_hz: float | None = None) -> np.ndarray:
    """Uniform grid with spacing ``rbw`` covering both sideband groups of every mode."""
    p = model.params
    omegas = [to_hz(m.omega) for m in p.modes]
    margin = to_hz(p.cavity.kappa) / 4 if margin_hz is None else margin_hz
    lo, hi = min(omegas) - margin, max(omegas) + margin
    pos = np.arange(max(lo, rbw), hi + rbw / 2, rbw)
    return np.concatenate([-pos[::-1], pos])


def synthesize_measurement(spec: Spectrum, n_averages: int = 200, rbw: float | None = None,
                           seed: int | None = None) -> Spectrum:
    """Add Welch-averaging noise to a noiseless spectrum.

    Each bin is multiplied by an independent Gamma(n_averages, 1/n_averages)
    factor (mean 1, relative spread 1/sqrt(n_averages)), the statistics of
    an average of ``n_averages`` periodograms.  With ``rbw`` the spectrum is
    first resampled onto a uniform grid of that spacing.
    """
    if n_averages < 1:
        raise ValueError("n_averages must be >= 1")
    f, p = spec.freqs, spec.psd
    if rbw is not None:
        new_f = np.arange(f[0], f[-1] + rbw / 2, rbw)
        p = np.interp(new_f, f, p)
        f = new_f
    rng = np.random.default_rng(seed)
    noisy = p * rng.gamma(shape=n_averages, scale=1.0 / n_averages, size=p.shape)
    meta = dict(spec.meta) | {"n_averages": str(n_averages),
                              "rbw_Hz": "" if rbw is None else repr(float(rbw)),
                              "seed": "" if seed is None else str(seed)}
    return Spectrum(f, noisy, meta, noiseless=p)


def sideband_weight(spec: Spectrum, center_hz: float, half_window_hz: float) -> float:
    """Integrated excess ``int (PSD - 1) df`` over ``center +- half_window`` (Hz)."""
    sel = np.abs(spec.freqs - center_hz) <= half_window_hz
    return float(np.trapezoid(spec.psd[sel] - 1.0, spec.freqs[sel]))


# ---------------------------------------------------------------------------
# CSV I/O


def format_spectrum_csv(spec: Spectrum) -> str:
    lines = [f"# {k}: {v}" for k, v in spec.meta.items()]
    lines.append(",".join(CSV_COLUMNS))
    lines += [f"{f!r},{p!r}" for f, p in zip(spec.freqs.tolist(), spec.psd.tolist())]
    return "\n".join(lines) + "\n"


def write_spectrum_csv(spec: Spectrum, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(format_spectrum_csv(spec))
    return path


def parse_spectrum_csv(text: str) -> Spectrum:
    meta = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines) and lines[i].startswith("#"):
        key, sep, value = lines[i][1:].strip().partition(":")
        if not sep:
            raise MalformedCsv(f"line {i + 1}: header comment must be '# key: value'")
        meta[key.strip()] = value.strip()
        i += 1
    if i >= len(lines) or tuple(c.strip() for c in lines[i].split(",")) != CSV_COLUMNS:
        raise MalformedCsv(f"expected column header {','.join(CSV_COLUMNS)!r}")
    freqs, psd = [], []
    for lineno, row in enumerate(csv.reader(lines[i + 1:]), start=i + 2):
        if not row:
            continue
        if len(row) != 2:
            raise MalformedCsv(f"line {lineno}: expected 2 columns, got {len(row)}")
        try:
            freqs.append(float(row[0]))
            psd.append(float(row[1]))
        except ValueError as exc:
            raise MalformedCsv(f"line {lineno}: {exc}") from None
    if not freqs:
        raise MalformedCsv("no data rows")
    f = np.array(freqs)
    bad = np.flatnonzero(np.diff(f) <= 0)
    if bad.size:
        raise NonMonotoneFrequencies(f"frequency column not strictly increasing at row {bad[0] + 2}")
    if not (np.all(np.isfinite(f)) and np.all(np.isfinite(psd))):
        raise MalformedCsv("non-finite values")
    return Spectrum(f, np.array(psd), meta)


def read_spectrum_csv(path: str | Path) -> Spectrum:
    return parse_spectrum_csv(Path(path).read_text())
