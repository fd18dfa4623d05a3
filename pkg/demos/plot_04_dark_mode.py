"""
Heating near frequency degeneracy
=================================

When the two mode frequencies approach each other, only the bright
combination g_x x + g_y y couples to the cavity.  The orthogonal dark mode
loses its cooling channel and the occupation rises.
"""

from levcool import operating_point, khz
from levcool.analysis import bright_dark_decompose
from levcool.scenarios import SweepSpec, run_degeneracy_sweep

basis = bright_dark_decompose(14.1, 15.4, 224.0, 268.0)
print(f"bright/dark mixing rate at 44 kHz spacing: {basis.mixing_rate:.1f} kHz")

table = run_degeneracy_sweep(operating_point(), SweepSpec(44, 0, 23), center=khz(246))
for s, nx, ny, nmax, nb, nd, mix, flag in table.rows:
    print(f"spacing={s:5.1f} kHz  n_x={nx:6.3f}  n_y={ny:6.3f}  n_dark={nd:6.3f}  "
          f"mixing={mix:5.2f} kHz  {flag}")
