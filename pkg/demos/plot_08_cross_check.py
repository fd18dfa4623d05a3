"""
Cross-checking the steady state by time integration
===================================================

Integrate dV/dt = M V + V M^T + D from the vacuum with fixed-step RK4 and
watch it converge to the Lyapunov solution.
"""

import numpy as np

from levcool import build_model, operating_point, solve_steady_state, time_domain_oracle
from levcool.dynamics import relaxation_time

model = build_model(operating_point())
V = solve_steady_state(model).covariance
tau = relaxation_time(model)
traj = time_domain_oracle(model, 10 * tau, dt=0.04 / model.fastest_rate(), n_samples=10)
for t, cov, n in zip(traj.times, traj.covariances, traj.occupations):
    err = np.linalg.norm(cov - V) / np.linalg.norm(V)
    print(f"t = {t / tau:5.1f} tau   n = {np.round(n, 3)}   |V(t) - V|/|V| = {err:.2e}")
