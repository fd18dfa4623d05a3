"""
From two-dimensional to one-dimensional cooling
===============================================

Rotating the tweezer polarisation moves coupling from x to y
(g_x = g cos(theta), g_y = g sin(theta)).  At theta = pi/2 the x mode has no
cooling channel left and heats without bound unless a residual coupling
remains.
"""

from levcool import operating_point, khz
from levcool.scenarios import SweepSpec, run_polarisation_sweep

params = operating_point()
table = run_polarisation_sweep(params, SweepSpec(0.25, 0.5, 9))
for row in table.rows:
    theta, gx, gy, nx, ny = row[:5]
    print(f"theta={theta:.4f} pi  g_x={gx:5.2f}  g_y={gy:5.2f}  n_x={nx:8.3f}  n_y={ny:.3f}  {row[-1]}")
print("monotone separation:", table.header["monotone_separation"])

###############################################################################
# A small misalignment leaves some coupling on x.

table = run_polarisation_sweep(params, SweepSpec(0.5, 0.5, 1), residual_coupling=khz(2.0))
print("with 2 kHz residual coupling: n_x = %.1f, n_y = %.3f" % table.rows[0][3:5])
