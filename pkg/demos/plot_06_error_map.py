"""
Where two-mode thermometry breaks down
=====================================

Map the relative error of the thermometry estimate over mode spacing and
coupling.  Well separated, weakly coupled modes are measured accurately;
close, strongly coupled modes merge into one peak and cannot be separated.
"""

import numpy as np

from levcool import operating_point, khz
from levcool.scenarios import SweepSpec, run_error_map

emap, table = run_error_map(operating_point(), SweepSpec(0, 60, 7), SweepSpec(2, 40, 5), center=khz(250))

print("rows: spacing [kHz], columns: g [kHz]; entries: max relative error (x, y)")
print("        " + "".join(f"{g / 1e3:8.1f}" for g in emap.g))
for i, s in enumerate(emap.spacing):
    cells = []
    for k in range(emap.g.size):
        cells.append(f"{emap.mask[i, k][:6]:>8s}" if emap.mask[i, k]
                     else f"{np.max(emap.dn[:, i, k]):8.4f}")
    print(f"{s / 1e3:6.1f}  " + "".join(cells))
