"""Sideband thermometry: recover phonon occupations from a heterodyne spectrum.

For every mode the Stokes and anti-Stokes sidebands are fitted with
Lorentzians that share one width but have independent amplitudes.  The
anti-Stokes/Stokes amplitude ratio ``R`` equals ``n/(n+1)`` times the
cavity gain ratio ``L(+Omega)/L(-Omega)``, which is inverted for ``n``.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares

from .dynamics import build_model, solve_steady_state
from .errors import FitDiverged, LevcoolError, PeaksUnresolvable, Unphysical, Unstable
from .params import SystemParams, hz, to_hz
from .spectra import Spectrum, TransferFunction, cavity_gain, heterodyne_psd

PARAMS_PER_MODE = 5  # stokes centre, anti-Stokes centre, shared FWHM, stokes amp, anti-Stokes amp


@dataclass(frozen=True)
class LorentzianFit:
    center: float  # Hz
    width: float  # FWHM, Hz
    amplitude: float  # peak height above the floor, shot-noise units


@dataclass(frozen=True, eq=False)
class SidebandFit:
    """Joint fit of all sidebands.

    ``params`` is laid out as ``[c_s, c_as, w, A_s, A_as]`` per mode,
    followed by the floor if it was fitted; ``covariance`` matches it.
    """

    labels: tuple[str, ...]
    params: np.ndarray
    covariance: np.ndarray
    offset: float
    cost: float

    def mode(self, j: int) -> tuple[LorentzianFit, LorentzianFit]:
        cs, cas, w, a_s, a_as = self.params[PARAMS_PER_MODE * j: PARAMS_PER_MODE * (j + 1)]
        return LorentzianFit(cs, w, a_s), LorentzianFit(cas, w, a_as)

    def amplitude_covariance(self, j: int) -> np.ndarray:
        i = PARAMS_PER_MODE * j + 3
        return self.covariance[i:i + 2, i:i + 2]

    def curve(self, freqs) -> np.ndarray:
        return _model(self.params, np.asarray(freqs, dtype=float), len(self.labels), self.offset)


@dataclass(frozen=True)
class ModeEstimate:
    label: str
    stokes: LorentzianFit
    antistokes: LorentzianFit
    asymmetry: float
    asymmetry_sigma: float
    n_est: float
    n_sigma: float


@dataclass(frozen=True, eq=False)
class ThermometryResult:
    modes: tuple[ModeEstimate, ...]
    fit: SidebandFit

    def __getitem__(self, label: str) -> ModeEstimate:
        for m in self.modes:
            if m.label == label:
                return m
        raise KeyError(label)

    @property
    def occupations(self) -> dict[str, float]:
        return {m.label: m.n_est for m in self.modes}


def lorentzian(f, center, width, amplitude):
    hw2 = (0.5 * width) ** 2
    return amplitude * hw2 / ((f - center) ** 2 + hw2)


def _model(theta, f, n_modes, offset):
    out = np.full_like(f, offset if offset is not None else theta[-1])
    for j in range(n_modes):
        cs, cas, w, a_s, a_as = theta[PARAMS_PER_MODE * j: PARAMS_PER_MODE * (j + 1)]
        out += lorentzian(f, cs, w, a_s) + lorentzian(f, cas, w, a_as)
    return out


def _initial_peak(f, y, floor, lo, hi):
    """Centre, FWHM and height of the largest excess inside [lo, hi]."""
    sel = np.flatnonzero((f >= lo) & (f <= hi))
    if sel.size < 3:
        raise FitDiverged(f"fewer than 3 points in window [{lo:.0f}, {hi:.0f}] Hz")
    fw, excess = f[sel], y[sel] - floor
    k = int(np.argmax(excess))  # first maximum = lowest frequency on ties
    height = excess[k]
    if not height > 0:
        raise FitDiverged(f"no excess above the floor in [{lo:.0f}, {hi:.0f}] Hz")
    center = fw[k]
    # second moment of the part above 10% of the peak; a Lorentzian cut at
    # that level has sd = 1.18 * HWHM
    core = excess >= 0.1 * height
    wts = excess[core]
    sd = math.sqrt(np.sum(wts * (fw[core] - center) ** 2) / np.sum(wts))
    width = max(2 * sd / 1.18, 2 * float(np.min(np.diff(fw))) if fw.size > 1 else 1.0)
    return center, width, height


def _windows(guesses: Sequence[float]) -> list[tuple[float, float]]:
    g = np.asarray(guesses, dtype=float)
    out = []
    for j, c in enumerate(g):
        others = np.delete(g, j)
        half = 0.25 * c
        if others.size:
            half = min(half, 0.5 * float(np.min(np.abs(others - c))))
        out.append((c - half, c + half))
    return out


def fit_sidebands(spec: Spectrum, guesses: Sequence[float], labels: Sequence[str] | None = None,
                  joint: bool = True, float_offset: bool = False) -> SidebandFit:
    """Fit ``floor + sum of Lorentzians`` to the Stokes/anti-Stokes pairs of every mode.

    Args:
        spec: spectrum with frequencies in Hz offset from the carrier.
        guesses: approximate mechanical frequency of each mode (Hz, > 0).
        labels: mode labels, defaults to ``m0, m1, ...``.
        joint: fit all sidebands at once (default); otherwise each mode
            is fitted separately on its own windows.
        float_offset: fit the shot-noise floor instead of fixing it at 1.

    Raises:
        FitDiverged: no sideband found or the optimizer failed.
        PeaksUnresolvable: fitted sidebands of two modes overlap.
    """
    guesses = [float(g) for g in guesses]
    if any(g <= 0 for g in guesses):
        raise ValueError("guesses must be positive mechanical frequencies")
    labels = tuple(labels) if labels is not None else tuple(f"m{j}" for j in range(len(guesses)))
    f, y = spec.freqs, spec.psd
    floor = float(np.median(y)) if float_offset else 1.0

    theta0 = []
    for lo, hi in _windows(guesses):
        cs, ws, hs = _initial_peak(f, y, floor, -hi, -lo)
        cas, was, has = _initial_peak(f, y, floor, lo, hi)
        theta0 += [cs, cas, 0.5 * (ws + was), hs, has]
    if float_offset:
        theta0.append(floor)
    theta0 = np.array(theta0)

    if joint:
        theta, cov, cost = _least_squares(f, y, theta0, len(guesses), float_offset)
    else:
        parts, covs, cost = [], [], 0.0
        for j, (lo, hi) in enumerate(_windows(guesses)):
            sel = (np.abs(f) >= lo) & (np.abs(f) <= hi)
            t0 = theta0[PARAMS_PER_MODE * j: PARAMS_PER_MODE * (j + 1)]
            if float_offset:
                t0 = np.append(t0, floor)
            t, c, cst = _least_squares(f[sel], y[sel], t0, 1, float_offset)
            parts.append(t[:PARAMS_PER_MODE])
            covs.append(c[:PARAMS_PER_MODE, :PARAMS_PER_MODE])
            cost += cst
        theta = np.concatenate(parts + ([[floor]] if float_offset else []))
        cov = np.zeros((theta.size, theta.size))
        for j, c in enumerate(covs):
            s = slice(PARAMS_PER_MODE * j, PARAMS_PER_MODE * (j + 1))
            cov[s, s] = c

    fit = SidebandFit(labels, theta, cov, None if float_offset else 1.0, cost)
    _check_resolved(fit)
    return fit


def _least_squares(f, y, theta0, n_modes, float_offset):
    offset = None if float_offset else 1.0
    weight = 1.0 / np.maximum(y, 1e-12)

    def resid(theta):
        return (_model(theta, f, n_modes, offset) - y) * weight

    lower = np.tile([-np.inf, 0.0, 0.0, 0.0, 0.0], n_modes)
    upper = np.tile([0.0, np.inf, np.inf, np.inf, np.inf], n_modes)
    if float_offset:
        lower, upper = np.append(lower, 0.0), np.append(upper, np.inf)
    x0 = np.clip(theta0, lower, upper)
    try:
        sol = least_squares(resid, x0, bounds=(lower, upper), x_scale="jac",
                            xtol=1e-12, ftol=1e-12, gtol=1e-12, max_nfev=2000)
    except ValueError as exc:
        raise FitDiverged(str(exc)) from exc
    if sol.status <= 0 or not np.all(np.isfinite(sol.x)):
        raise FitDiverged(f"least squares failed: {sol.message}")
    theta = sol.x
    widths = theta[2:PARAMS_PER_MODE * n_modes:PARAMS_PER_MODE]
    if np.any(widths <= 0):
        raise FitDiverged("fitted width collapsed to zero")
    dof = max(f.size - theta.size, 1)
    s2 = 2 * sol.cost / dof
    JTJ = sol.jac.T @ sol.jac
    try:
        cov = np.linalg.inv(JTJ) * s2
    except np.linalg.LinAlgError:
        cov = np.linalg.pinv(JTJ) * s2
    return theta, cov, float(sol.cost)


def _check_resolved(fit: SidebandFit) -> None:
    n = len(fit.labels)
    for j in range(n):
        st, ast = fit.mode(j)
        if not (st.amplitude > 0 and ast.amplitude >= 0):
            raise FitDiverged(f"mode {fit.labels[j]!r}: no Stokes sideband")
    for j, k in combinations(range(n), 2):
        for side in (0, 1):
            a, b = fit.mode(j)[side], fit.mode(k)[side]
            if abs(a.center - b.center) < 0.5 * (a.width + b.width):
                raise PeaksUnresolvable(
                    f"modes {fit.labels[j]!r} and {fit.labels[k]!r}: centres "
                    f"{a.center:.0f} and {b.center:.0f} Hz within their half-widths")


def occupation_from_asymmetry(R: float, omega, tf: TransferFunction) -> float:
    """Occupation from the anti-Stokes/Stokes ratio ``R`` of a mode at ``omega`` (rad/s).

    ``omega`` may be a pair ``(omega_stokes, omega_antistokes)`` of
    positive frequencies when the two fitted centres differ.
    """
    if R < 0:
        raise ValueError("asymmetry must be >= 0")
    w_s, w_as = (omega, omega) if np.ndim(omega) == 0 else omega
    r = R * float(cavity_gain(tf, -w_s) / cavity_gain(tf, w_as))
    if r >= 1:
        raise Unphysical(f"corrected sideband ratio {r:.4g} >= 1")
    return r / (1 - r)


def propagate_uncertainty(a_s: float, a_as: float, amp_cov: np.ndarray,
                          correction: float) -> tuple[float, float, float, float]:
    """First-order error propagation from the two amplitudes to ``R`` and ``n``.

    ``correction`` is the cavity factor ``L(-Omega)/L(+Omega)``.
    Returns ``(R, sigma_R, n, sigma_n)``.
    """
    R = a_as / a_s
    grad = np.array([-a_as / a_s ** 2, 1.0 / a_s])
    var_R = float(grad @ np.asarray(amp_cov) @ grad)
    sigma_R = math.sqrt(max(var_R, 0.0))
    r = R * correction
    n = r / (1 - r)
    sigma_n = correction * sigma_R / (1 - r) ** 2
    return R, sigma_R, n, sigma_n


def sideband_thermometry(spec: Spectrum, tf: TransferFunction, guesses: Sequence[float],
                         labels: Sequence[str] | None = None, **fit_kw) -> ThermometryResult:
    """Fit the spectrum and convert each mode's asymmetry into an occupation.

    The cavity correction is evaluated at the fitted sideband centres, not at
    the nominal mode frequencies.  A mode whose corrected ratio reaches 1
    raises :class:`Unphysical`.
    """
    fit = fit_sidebands(spec, guesses, labels, **fit_kw)
    out = []
    for j, label in enumerate(fit.labels):
        st, ast = fit.mode(j)
        w_s, w_as = hz(-st.center), hz(ast.center)
        corr = float(cavity_gain(tf, -w_s) / cavity_gain(tf, w_as))
        R, sR, _, sn = propagate_uncertainty(st.amplitude, ast.amplitude,
                                             fit.amplitude_covariance(j), corr)
        n = occupation_from_asymmetry(R, (w_s, w_as), tf)
        out.append(ModeEstimate(label, st, ast, R, sR, n, sn))
    return ThermometryResult(tuple(out), fit)


# ---------------------------------------------------------------------------
# systematic-error maps

DEGENERATE = "Degenerate"
UNSTABLE = "Unstable"


@dataclass(frozen=True, eq=False)
class ErrorMap:
    """Relative thermometry error over (mode spacing, coupling).

    Arrays are indexed ``[mode, spacing, g]``; ``mask`` holds an empty
    string for valid cells and ``Degenerate`` or ``Unstable`` otherwise.
    """

    spacing: np.ndarray  # Hz
    g: np.ndarray  # Hz
    labels: tuple[str, ...]
    dn: np.ndarray
    n_model: np.ndarray
    n_est: np.ndarray
    mask: np.ndarray
    details: np.ndarray = field(repr=False, default=None)

    @property
    def valid(self) -> np.ndarray:
        return self.mask == ""

    def rows(self):
        """Long-format rows ``(spacing_Hz, g_Hz, dn_<label>..., mask_reason)``."""
        for i, s in enumerate(self.spacing):
            for k, g in enumerate(self.g):
                yield (float(s), float(g), *(float(self.dn[m, i, k]) for m in range(len(self.labels))),
                       self.mask[i, k])


def relative_error(n_model: float, n_est: float) -> float:
    return abs((n_model - n_est) / n_model)


def error_map_cell(base: SystemParams, spacing: float, g: float, center: float | None = None):
    """Evaluate one (spacing, g) cell: model occupation, thermometry estimate, error.

    The two modes are placed symmetrically around ``center`` (rad/s,
    default: mean of the base frequencies) and both get coupling ``g``.
    Returns ``(n_model, n_est, dn, reason, detail)``.
    """
    x, y = base.modes[:2]
    c = 0.5 * (x.omega + y.omega) if center is None else center
    p = replace(base, modes=(replace(x, omega=c - spacing / 2, g=g),
                             replace(y, omega=c + spacing / 2, g=g)) + base.modes[2:])
    nan2 = np.full(2, np.nan)
    try:
        model = build_model(p)
        ss = solve_steady_state(model)
    except Unstable as exc:
        return nan2, nan2, nan2, UNSTABLE, str(exc)
    n_model = ss.occupations[:2]
    try:
        spec = heterodyne_psd(model)
        res = sideband_thermometry(spec, TransferFunction.from_params(p),
                                   [to_hz(p.modes[0].omega), to_hz(p.modes[1].omega)],
                                   labels=[p.modes[0].label, p.modes[1].label])
    except LevcoolError as exc:
        return n_model, nan2, nan2, DEGENERATE, f"{type(exc).__name__}: {exc}"
    n_est = np.array([res.modes[0].n_est, res.modes[1].n_est])
    dn = np.abs((n_model - n_est) / n_model)
    return n_model, n_est, dn, "", ""


def _cell(args):
    return error_map_cell(*args)


def error_map(base: SystemParams, spacing_grid, g_grid, center: float | None = None,
              workers: int = 1) -> ErrorMap:
    """Systematic thermometry error on a grid of mode spacings and couplings (rad/s).

    Each cell solves the steady state for the true occupations, synthesises
    the noiseless heterodyne spectrum, runs sideband thermometry on it and
    records ``|n_model - n_est| / n_model``.  Failing cells are masked, the
    map itself never aborts.
    """
    spacing_grid = np.asarray(spacing_grid, dtype=float)
    g_grid = np.asarray(g_grid, dtype=float)
    jobs = [(base, s, g, center) for s in spacing_grid for g in g_grid]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_cell, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_cell(j) for j in jobs]
    ns, ng = spacing_grid.size, g_grid.size
    n_model = np.empty((2, ns, ng))
    n_est = np.empty((2, ns, ng))
    dn = np.empty((2, ns, ng))
    mask = np.empty((ns, ng), dtype=object)
    details = np.empty((ns, ng), dtype=object)
    for idx, (nm, ne, d, reason, detail) in enumerate(results):
        i, k = divmod(idx, ng)
        n_model[:, i, k], n_est[:, i, k], dn[:, i, k] = nm, ne, d
        mask[i, k], details[i, k] = reason, detail
    return ErrorMap(to_hz(spacing_grid), to_hz(g_grid), tuple(m.label for m in base.modes[:2]),
                    dn, n_model, n_est, mask.astype(str), details)
