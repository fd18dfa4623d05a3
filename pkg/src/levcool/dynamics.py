"""Linearized Langevin dynamics of one cavity mode coupled to N mechanical modes.

State ordering is ``(X_c, Y_c, x_1, p_1, ..., x_N, p_N)`` with
``x = (b + b^dag)/sqrt(2)`` and ``p = (b - b^dag)/(i sqrt(2))``, so the
vacuum has variance 1/2 in every quadrature.  In the frame rotating at the
tweezer frequency the equations of motion are::

    dX_c/dt = Delta Y_c - kappa/2 X_c
    dY_c/dt = -Delta X_c - kappa/2 Y_c - sum_j 2 g_j x_j
    dx_j/dt = Omega_j p_j
    dp_j/dt = -Omega_j x_j - gamma_j p_j - 2 g_j X_c

i.e. H = Delta a^dag a + sum_j Omega_j b_j^dag b_j + sum_j 2 g_j X_c x_j.
Positive Delta puts the cavity on the anti-Stokes side and cools.
Recoil heating enters as momentum diffusion ``D_pp = 2 Gamma`` so that a
free mode heats at exactly Gamma phonons per second.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
import scipy.linalg

from .errors import NoNetCooling, SolverFailure, StepTooLarge, Unstable
from .params import SystemParams, config_hash

# Re(lambda) must be below -STABILITY_MARGIN * kappa for the model to count as stable.
STABILITY_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class LinearModel:
    """Drift matrix ``M`` and diffusion matrix ``D`` of ``dz = M z dt + noise``.

    ``noise`` is the full (complex Hermitian) input-noise correlation
    matrix, ``<xi_i(t) xi_k(t')> = noise_ik delta(t - t')``.  Its real part
    is ``D``; the imaginary part keeps the canonical commutators intact and
    is what separates the Stokes from the anti-Stokes sideband.
    """

    basis: tuple[str, ...]
    drift: np.ndarray
    diffusion: np.ndarray
    noise: np.ndarray
    params: SystemParams
    params_hash: str

    @property
    def n_modes(self) -> int:
        return (len(self.basis) - 2) // 2

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvals(self.drift)

    def is_stable(self) -> bool:
        return bool(self.eigenvalues().real.max() < -STABILITY_MARGIN * self.params.cavity.kappa)

    def fastest_rate(self) -> float:
        p = self.params
        return max([abs(m.omega) for m in p.modes] + [p.cavity.kappa, abs(p.cavity.detuning)])

    def to_csv(self, directory) -> None:
        """Dump drift and diffusion matrices (debugging aid)."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        header = ",".join(self.basis)
        np.savetxt(d / "drift.csv", self.drift, delimiter=",", header=header)
        np.savetxt(d / "diffusion.csv", self.diffusion, delimiter=",", header=header)


@dataclass(frozen=True, eq=False)
class SteadyState:
    covariance: np.ndarray
    occupations: np.ndarray
    labels: tuple[str, ...]
    stable: bool
    residual: float = 0.0

    def occupation(self, label: str) -> float:
        return float(self.occupations[self.labels.index(label)])

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.labels, map(float, self.occupations)))


def build_model(params: SystemParams) -> LinearModel:
    cav = params.cavity
    n = len(params.modes)
    size = 2 + 2 * n
    M = np.zeros((size, size))
    D = np.zeros((size, size))
    C = np.zeros((size, size), dtype=complex)

    M[0, 0] = M[1, 1] = -cav.kappa / 2
    M[0, 1] = cav.detuning
    M[1, 0] = -cav.detuning
    D[0, 0] = D[1, 1] = cav.kappa / 2
    C[0, 1] = 0.5j * cav.kappa
    C[1, 0] = -0.5j * cav.kappa

    basis = ["X_c", "Y_c"]
    for j, m in enumerate(params.modes):
        ix, ip = 2 + 2 * j, 3 + 2 * j
        basis += [f"x_{m.label}", f"p_{m.label}"]
        M[ix, ip] = m.omega
        M[ip, ix] = -m.omega
        M[ip, ip] = -m.gamma
        M[1, ix] = -2 * m.g
        M[ip, 0] = -2 * m.g
        D[ip, ip] = 2 * m.heating + m.gamma * (2 * m.n_th + 1)
        C[ix, ip] = 0.5j * m.gamma
        C[ip, ix] = -0.5j * m.gamma
    C += D
    for a in (M, D, C):
        a.setflags(write=False)
    return LinearModel(tuple(basis), M, D, C, params, config_hash(params))


def occupations_from_covariance(V: np.ndarray) -> np.ndarray:
    """Per-mode phonon number ``(V_xx + V_pp - 1)/2`` for every mechanical mode."""
    d = np.diag(V)[2:]
    return (d[0::2] + d[1::2] - 1.0) / 2.0


def solve_steady_state(model: LinearModel) -> SteadyState:
    """Stationary covariance from the Lyapunov equation ``M V + V M^T + D = 0``."""
    M, D = model.drift, model.diffusion
    ev = np.linalg.eigvals(M)
    kappa = model.params.cavity.kappa
    if ev.real.max() >= -STABILITY_MARGIN * kappa:
        raise Unstable(f"drift matrix not Hurwitz: max Re(lambda) = {ev.real.max():.4g} rad/s")
    # Bartels-Stewart via scipy: solves M V + V M^H = Q, hence Q = -D
    V = scipy.linalg.solve_continuous_lyapunov(M, -D)
    V = 0.5 * (V + V.T)
    if not np.all(np.isfinite(V)):
        raise SolverFailure("non-finite covariance")
    R = M @ V + V @ M.T + D
    scale = np.linalg.norm(M) * np.linalg.norm(V) + np.linalg.norm(D)
    residual = float(np.linalg.norm(R) / scale)
    if residual > 1e-8:
        raise SolverFailure(f"Lyapunov residual too large ({residual:.3g})")
    labels = tuple(m.label for m in model.params.modes)
    return SteadyState(V, occupations_from_covariance(V), labels, True, residual)


def mode_occupations(params: SystemParams) -> dict[str, float]:
    """Steady-state occupations that tolerate fully isolated modes.

    A mode with ``g = 0`` and ``gamma = 0`` has no dissipation channel; it is
    removed before the Lyapunov solve and reported as ``inf`` if it is
    heated (``nan`` if its occupation is simply undetermined).  Any other
    instability still raises :class:`Unstable`.
    """
    isolated = [m for m in params.modes if m.g == 0 and m.gamma == 0]
    out = {}
    for m in isolated:
        out[m.label] = np.inf if m.heating > 0 else np.nan
    active = tuple(m for m in params.modes if m not in isolated)
    if active:
        sub = replace(params, modes=active)
        out.update(solve_steady_state(build_model(sub)).as_dict())
    return {label: out[label] for label in params.labels}


# ---------------------------------------------------------------------------
# weak-coupling rate picture


def scattering_rates(params: SystemParams, label: str) -> tuple[float, float]:
    """Anti-Stokes (cooling) and Stokes (heating) rates ``(A_minus, A_plus)`` in 1/s."""
    m = params.mode(label)
    kappa, delta = params.cavity.kappa, params.cavity.detuning
    hw2 = (kappa / 2) ** 2
    a_minus = m.g ** 2 * kappa / (hw2 + (delta - m.omega) ** 2)
    a_plus = m.g ** 2 * kappa / (hw2 + (delta + m.omega) ** 2)
    return a_minus, a_plus


def rate_equation_occupation(params: SystemParams, label: str, strict: bool = False) -> float:
    """Occupation of one mode from the sideband-cooling rate equation.

    ``n = (Gamma + gamma n_th + A_plus) / (gamma + A_minus - A_plus)``.
    Without net cooling the result is ``inf``, or :class:`NoNetCooling`
    is raised when ``strict`` is set.
    """
    m = params.mode(label)
    a_minus, a_plus = scattering_rates(params, label)
    damping = m.gamma + a_minus - a_plus
    if damping <= 0:
        if strict:
            raise NoNetCooling(f"mode {label!r}: A- = {a_minus:.4g} <= A+ = {a_plus:.4g}")
        return np.inf
    return (m.heating + m.gamma * m.n_th + a_plus) / damping


# ---------------------------------------------------------------------------
# time-domain oracle


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    covariances: np.ndarray
    occupations: np.ndarray = field(repr=False)

    @property
    def final(self) -> np.ndarray:
        return self.covariances[-1]


def _compose(a, b):
    """Affine map ``v -> P v + q``; returns ``a`` applied after ``b``."""
    return a[0] @ b[0], a[0] @ b[1] + a[1]


def _affine_power(step, k):
    size = step[0].shape[0]
    result = (np.eye(size), np.zeros(size))
    base = step
    while k:
        if k & 1:
            result = _compose(base, result)
        base = _compose(base, base)
        k >>= 1
    return result


def time_domain_oracle(model: LinearModel, t_final: float, dt: float,
                       n_samples: int = 100, V0: np.ndarray | None = None) -> Trajectory:
    """Integrate ``dV/dt = M V + V M^T + D`` with classical fixed-step RK4.

    The ODE is linear in ``vec(V)``, so one RK4 step is an affine map; it is
    applied ``t_final/dt`` times by repeated squaring, which gives the same
    iterate as a naive loop at a fraction of the cost.  ``V0`` defaults to
    the vacuum ``I/2``.
    """
    limit = 0.05 / model.fastest_rate()
    if not dt < limit:
        raise StepTooLarge(f"dt = {dt:.3g} s must be < {limit:.3g} s")
    M, D = model.drift, model.diffusion
    size = M.shape[0]
    V = np.eye(size) / 2 if V0 is None else np.array(V0, dtype=float)

    eye = np.eye(size * size)
    L = np.kron(M, np.eye(size)) + np.kron(np.eye(size), M)
    hL = dt * L
    hL2 = hL @ hL
    hL3 = hL2 @ hL
    P = eye + hL + hL2 / 2 + hL3 / 6 + hL3 @ hL / 24
    q = dt * (eye + hL / 2 + hL2 / 6 + hL3 / 24) @ D.ravel()

    n_steps = max(int(round(t_final / dt)), 1)
    n_samples = min(n_samples, n_steps)
    stride = n_steps // n_samples
    stride_map = _affine_power((P, q), stride)
    v = V.ravel()
    covs = [V]
    times = [0.0]
    done = 0
    while done < n_steps:
        k = min(stride, n_steps - done)
        mp = stride_map if k == stride else _affine_power((P, q), k)
        v = mp[0] @ v + mp[1]
        done += k
        times.append(done * dt)
        covs.append(v.reshape(size, size))
    covs = np.array(covs)
    occ = np.array([occupations_from_covariance(c) for c in covs])
    return Trajectory(np.array(times), covs, occ)


def relaxation_time(model: LinearModel) -> float:
    """1/e time of the slowest decaying eigenmode of the covariance."""
    return 1.0 / (2.0 * -np.linalg.eigvals(model.drift).real.max())
