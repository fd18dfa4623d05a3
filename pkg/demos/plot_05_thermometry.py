"""
Sideband thermometry on a synthetic spectrum
============================================

Generate the heterodyne spectrum of the operating point, add the noise of a
200-fold averaged measurement, fit the four sidebands and convert the
anti-Stokes/Stokes asymmetry into occupations.
"""

import numpy as np

from levcool import TransferFunction, build_model, operating_point, heterodyne_psd, solve_steady_state
from levcool.spectra import synthesize_measurement, uniform_grid
from levcool.thermometry import sideband_thermometry

params = operating_point()
model = build_model(params)
truth = solve_steady_state(model).as_dict()
clean = heterodyne_psd(model, uniform_grid(model, rbw=100.0))
tf = TransferFunction.from_params(params)

###############################################################################
# Noiseless spectrum: the residual difference is the systematic error of the
# two-Lorentzian-pair model.

res = sideband_thermometry(clean, tf, [230e3, 270e3], labels=["x", "y"])
for m in res.modes:
    print(f"{m.label}: model {truth[m.label]:.4f}  estimate {m.n_est:.4f}  "
          f"rel. error {abs(m.n_est - truth[m.label]) / truth[m.label]:.2%}")

###############################################################################
# Noisy spectrum: the fit covariance gives the statistical uncertainty.

noisy = synthesize_measurement(clean, n_averages=200, seed=1)
res = sideband_thermometry(noisy, tf, [230e3, 270e3], labels=["x", "y"])
for m in res.modes:
    print(f"{m.label}: n = {m.n_est:.3f} +- {m.n_sigma:.3f}   R = {m.asymmetry:.3f} +- {m.asymmetry_sigma:.3f}")

peak = np.argmax(noisy.psd)
print(f"tallest bin: {noisy.freqs[peak] / 1e3:.1f} kHz, PSD {noisy.psd[peak]:.2f} shot-noise units")
