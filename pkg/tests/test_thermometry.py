import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from helpers import lorentzian_sum
from levcool import (CavityParams, MechMode, SystemParams, TransferFunction, build_model,
                     cavity_gain, operating_point, heterodyne_psd, khz, solve_steady_state,
                     synthesize_measurement)
from levcool.errors import FitDiverged, PeaksUnresolvable, Unphysical
from levcool.spectra import Spectrum, mechanical_eigenmodes
from levcool.thermometry import (error_map, error_map_cell, fit_sidebands,
                                 occupation_from_asymmetry, propagate_uncertainty,
                                 sideband_thermometry)

TF = TransferFunction(khz(330), khz(232))


def single_mode_params():
    p = operating_point()
    return SystemParams(p.cavity, p.modes[:1])


def test_pure_lorentzian_round_trip():
    peaks = [(-231e3, 2.2e3, 0.8), (229e3, 2.2e3, 2.7), (-268e3, 2.5e3, 0.7), (271e3, 2.5e3, 3.1)]
    f = np.linspace(-3.2e5, 3.2e5, 64001)
    fit = fit_sidebands(Spectrum(f, lorentzian_sum(f, peaks)), [230e3, 270e3])
    got = [(l.center, l.width, l.amplitude) for j in range(2) for l in fit.mode(j)]
    np.testing.assert_allclose(got, peaks, rtol=1e-6)


def test_single_mode_model_round_trip():
    model = build_model(single_mode_params())
    spec = heterodyne_psd(model)
    (f0, fwhm), = mechanical_eigenmodes(model)
    st_, ast = fit_sidebands(spec, [230e3]).mode(0)
    assert -st_.center == pytest.approx(f0, rel=1e-3)
    assert ast.center == pytest.approx(f0, rel=1e-3)
    assert st_.width == pytest.approx(fwhm, rel=1e-3)
    for fit, sign in ((st_, -1), (ast, 1)):
        peak = np.interp(sign * f0, spec.freqs, spec.psd) - 1
        assert fit.amplitude == pytest.approx(peak, rel=1e-3)


def test_degenerate_peaks_unresolvable():
    p = operating_point(omegas_khz=(250, 250)).with_modes(x={"gamma": khz(0.01)}, y={"gamma": khz(0.01)})
    spec = heterodyne_psd(build_model(p))
    with pytest.raises(PeaksUnresolvable):
        fit_sidebands(spec, [249e3, 251e3])


def test_flat_spectrum_diverges():
    f = np.linspace(-3e5, 3e5, 2001)
    with pytest.raises(FitDiverged):
        fit_sidebands(Spectrum(f, np.ones_like(f)), [230e3])


def test_guesses_must_be_positive():
    f = np.linspace(-3e5, 3e5, 2001)
    with pytest.raises(ValueError):
        fit_sidebands(Spectrum(f, np.ones_like(f)), [-230e3])


def test_fit_idempotent():
    spec = heterodyne_psd(build_model(operating_point()))
    fit = fit_sidebands(spec, [230e3, 270e3])
    again = fit_sidebands(Spectrum(spec.freqs, fit.curve(spec.freqs)), [230e3, 270e3])
    np.testing.assert_allclose(again.params, fit.params, rtol=1e-7)


def test_local_and_joint_fits_agree_when_separated():
    spec = heterodyne_psd(build_model(operating_point()))
    a = fit_sidebands(spec, [230e3, 270e3], joint=True)
    b = fit_sidebands(spec, [230e3, 270e3], joint=False)
    np.testing.assert_allclose(a.params, b.params, rtol=5e-3)


def test_float_offset_recovers_floor():
    peaks = [(-230e3, 2e3, 1.0), (230e3, 2e3, 3.0)]
    f = np.linspace(-3e5, 3e5, 30001)
    fit = fit_sidebands(Spectrum(f, lorentzian_sum(f, peaks, floor=1.3)), [230e3], float_offset=True)
    assert fit.params[-1] == pytest.approx(1.3, rel=1e-6)
    assert fit.mode(0)[1].amplitude == pytest.approx(3.0, rel=1e-5)


def test_asymmetry_zero_is_ground_state():
    assert occupation_from_asymmetry(0.0, khz(250), TF) == 0.0


def test_asymmetry_thermal_boundary():
    w = khz(268)
    R = float(cavity_gain(TF, w) / cavity_gain(TF, -w))
    with pytest.raises(Unphysical):
        occupation_from_asymmetry(R, w, TF)
    with pytest.raises(ValueError):
        occupation_from_asymmetry(-0.1, w, TF)


@given(st.floats(0, 9.0), st.floats(0, 9.0))
def test_asymmetry_monotone(r1, r2):
    w = khz(268)  # R_max ~ 9.72 here
    lo, hi = sorted((r1, r2))
    assert occupation_from_asymmetry(lo, w, TF) <= occupation_from_asymmetry(hi, w, TF)


def test_asymmetry_inverts_forward_model():
    w = khz(230)
    corr = float(cavity_gain(TF, -w) / cavity_gain(TF, w))
    for n in (0.01, 0.5, 3.0, 40.0):
        R = n / (n + 1) / corr
        assert occupation_from_asymmetry(R, w, TF) == pytest.approx(n, rel=1e-10)


def test_zero_covariance_zero_sigma():
    R, sR, n, sn = propagate_uncertainty(1.0, 0.5, np.zeros((2, 2)), 0.2)
    assert sR == 0 and sn == 0
    assert n == pytest.approx(0.1 / 0.9)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(1e-4, 0.1))
def test_uncorrelated_relative_errors_add_in_quadrature(a_s, a_as, eps):
    cov = np.diag([(eps * a_s) ** 2, (eps * a_as) ** 2])
    R, sR, _, _ = propagate_uncertainty(a_s, a_as, cov, 0.05)
    assert sR / R == pytest.approx(math.sqrt(2) * eps, rel=1e-9)


def test_operating_point_end_to_end_about_one_percent():
    p = operating_point()
    model = build_model(p)
    n = solve_steady_state(model).occupations
    res = sideband_thermometry(heterodyne_psd(model), TransferFunction.from_params(p),
                               [230e3, 270e3], labels=["x", "y"])
    dn = np.abs((n - np.array([res["x"].n_est, res["y"].n_est])) / n)
    assert np.all(dn < 0.02)
    assert res.occupations.keys() == {"x", "y"}


@pytest.mark.slow
def test_propagated_sigma_matches_monte_carlo():
    p = operating_point()
    model = build_model(p)
    tf = TransferFunction.from_params(p)
    from levcool.spectra import uniform_grid
    clean = heterodyne_psd(model, uniform_grid(model, rbw=100.0))
    n_est, sigmas = [], []
    for seed in range(500):
        noisy = synthesize_measurement(clean, n_averages=200, seed=seed)
        res = sideband_thermometry(noisy, tf, [230e3, 270e3], labels=["x", "y"])
        n_est.append([m.n_est for m in res.modes])
        sigmas.append([m.n_sigma for m in res.modes])
    spread = np.std(n_est, axis=0, ddof=1)
    predicted = np.median(sigmas, axis=0)
    np.testing.assert_allclose(spread, predicted, rtol=0.3)


def test_error_map_cell_and_masks():
    base = operating_point()
    nm, ne, dn, reason, _ = error_map_cell(base, khz(40), khz(5), center=khz(250))
    assert reason == "" and np.all(dn < 0.05)
    assert error_map_cell(base, 0.0, khz(5), center=khz(250))[3] == "Unstable"


def test_small_error_map():
    m = error_map(operating_point(), khz(np.array([0.0, 4.0, 40.0])), khz(np.array([5.0, 30.0])),
                  center=khz(250))
    assert m.dn.shape == (2, 3, 2)
    assert set(m.mask[0]) == {"Unstable"}
    assert m.valid[2].all()
    assert (m.mask[1] != "").any()  # close, strongly coupled modes cannot be thermometered
    rows = list(m.rows())
    assert len(rows) == 6 and len(rows[0]) == 5
