"""
Angular momentum fluctuations of a cooled rotor
===============================================

For uncorrelated thermal x and y modes, the variance of L_z = x p_y - y p_x
depends only on the two occupations and the frequency ratio.
"""

import numpy as np

from levcool.analysis import lz_variance

stats = lz_variance(0.83, 0.81, 224.0, 268.0)
print(f"sqrt(<Lz^2>) = {stats.lz_rms:.2f} hbar")
print("ground state of a symmetric trap:", lz_variance(0, 0, 1.0, 1.0).lz_sq)

for n in np.linspace(0, 2, 5):
    print(f"n_x = n_y = {n:.1f}: {lz_variance(n, n, 224.0, 268.0).lz_rms:.2f} hbar")
