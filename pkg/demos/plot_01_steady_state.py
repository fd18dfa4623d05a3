"""
Two-mode cooling at the operating point
=======================================

Build the linearized model for two transverse modes coupled to one detuned
cavity, solve for the stationary covariance and compare with the
weak-coupling rate equation.
"""

import numpy as np

from levcool import build_model, operating_point, rate_equation_occupation, solve_steady_state, validate

params = operating_point()  # kappa/2pi = 330 kHz, Delta/2pi = 232 kHz
for check in validate(params):
    print(f"{check.condition:9s} {'/'.join(check.modes):4s} ratio={check.ratio:6.3f} ok={check.satisfied}")

###############################################################################
# The drift matrix must be Hurwitz for a steady state to exist.

model = build_model(params)
print("slowest decay rate [1/s]:", -model.eigenvalues().real.max())

ss = solve_steady_state(model)
for label in params.labels:
    print(f"n_{label} = {ss.occupation(label):.3f}  (rate equation {rate_equation_occupation(params, label):.3f})")

###############################################################################
# The covariance is a valid quantum state: every symplectic eigenvalue of the
# covariance is at least the vacuum value 1/2.

J = np.kron(np.eye(3), [[0, 1], [-1, 0]])
nu = np.sort(np.abs(np.linalg.eigvals(1j * J @ ss.covariance)))[::2]
print("symplectic eigenvalues:", np.round(nu, 4))
