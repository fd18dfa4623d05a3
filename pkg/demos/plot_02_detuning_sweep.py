"""
Occupation versus cavity detuning
=================================

Sweep the detuning across both mechanical frequencies.  Cooling is best
when the cavity sits between the two modes.
"""

import numpy as np

from levcool import operating_point
from levcool.scenarios import SweepSpec, run_detuning_sweep

table = run_detuning_sweep(operating_point(), SweepSpec(150, 350, 21))
d = table.column("detuning_khz")
for col in ("n_x", "n_y"):
    n = table.column(col)
    print(f"{col}: minimum {n.min():.3f} at {d[np.argmin(n)]:.0f} kHz")

print(table.to_csv())
