"""Shared generators and independent reference computations for the test suite."""
import math

import numpy as np

from levcool import CavityParams, MechMode, SystemParams, build_model, khz


def random_stable_params(rng, n_modes=2, with_gamma=False, max_tries=1000):
    """Random two-mode (or n-mode) parameters whose drift is Hurwitz."""
    for _ in range(max_tries):
        kappa = khz(rng.uniform(100, 500))
        base = rng.uniform(120, 320)
        omegas = base + np.concatenate([[0.0], np.cumsum(rng.uniform(8, 60, n_modes - 1))])
        delta = khz(rng.uniform(0.5, 1.5) * omegas.mean())
        modes = []
        for j, w in enumerate(omegas):
            modes.append(MechMode(
                label=f"m{j}",
                omega=khz(w),
                g=khz(rng.uniform(2, 0.15 * kappa / khz(1))) * rng.choice([-1, 1]),
                heating=khz(rng.uniform(0.1, 5)),
                gamma=khz(rng.uniform(0, 0.5)) if with_gamma else 0.0,
                n_th=rng.uniform(0, 10) if with_gamma else 0.0,
            ))
        p = SystemParams(CavityParams(kappa, delta), tuple(modes))
        if build_model(p).is_stable():
            return p
    raise RuntimeError("no stable parameters found")


def symplectic_form(n_pairs):
    return np.kron(np.eye(n_pairs), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def symplectic_eigenvalues(V):
    """Williamson spectrum: moduli of the eigenvalues of i J V (each appears twice)."""
    J = symplectic_form(V.shape[0] // 2)
    return np.sort(np.abs(np.linalg.eigvals(1j * J @ V)))[::2]


def lorentzian_sum(f, peaks, floor=1.0):
    out = np.full_like(f, floor, dtype=float)
    for c, w, a in peaks:
        out += a * (w / 2) ** 2 / ((f - c) ** 2 + (w / 2) ** 2)
    return out


def fock_lz_variance(n_x, n_y, omega_x, omega_y, dim=30):
    """<L_z^2> for product thermal states, by brute force in a truncated Fock space (hbar = m = 1)."""
    b = np.diag(np.sqrt(np.arange(1, dim)), 1)
    eye = np.eye(dim)

    def thermal(n):
        if n == 0:
            rho = np.zeros(dim)
            rho[0] = 1.0
            return np.diag(rho)
        k = np.arange(dim)
        w = (n / (n + 1)) ** k
        return np.diag(w / w.sum())

    def xp(omega):
        x = (b + b.T) / math.sqrt(2 * omega)
        p = 1j * math.sqrt(omega / 2) * (b.T - b)
        return x, p

    x, px = xp(omega_x)
    y, py = xp(omega_y)
    L = np.kron(x, eye) @ np.kron(eye, py) - np.kron(eye, y) @ np.kron(px, eye)
    rho = np.kron(thermal(n_x), thermal(n_y))
    return float(np.sum(np.diag(rho) * np.diag(L @ L).real))
