"""Collective (bright/dark) mechanical modes and angular-momentum statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dynamics import build_model, solve_steady_state
from .errors import DarkModeDecoupled, Unstable, ZeroCoupling
from .params import SystemParams


@dataclass(frozen=True)
class BrightDarkBasis:
    """Bright mode couples to the cavity with strength ``g``; the dark mode not at all.

    ``mixing_rate`` is the residual bright-dark coupling induced by the
    frequency difference; it vanishes at degeneracy, where the dark mode
    is cut off from the only dissipation channel.
    """

    bright: tuple[float, float]
    dark: tuple[float, float]
    g: float
    omega_bright: float
    omega_dark: float
    mixing_rate: float

    @property
    def rotation(self) -> np.ndarray:
        return np.array([self.bright, self.dark])


def bright_dark_decompose(g_x: float, g_y: float, omega_x: float, omega_y: float) -> BrightDarkBasis:
    g2 = g_x * g_x + g_y * g_y
    if not g2 > 0:
        raise ZeroCoupling("bright mode undefined for g_x = g_y = 0")
    g = math.sqrt(g2)
    cb, sb = g_x / g, g_y / g
    return BrightDarkBasis(
        bright=(cb, sb),
        dark=(-sb, cb),
        g=g,
        omega_bright=cb * cb * omega_x + sb * sb * omega_y,
        omega_dark=sb * sb * omega_x + cb * cb * omega_y,
        mixing_rate=abs(omega_y - omega_x) * abs(g_x * g_y) / g2,
    )


def dark_mode_occupation(params: SystemParams, labels: tuple[str, str] = ("x", "y"),
                         rtol: float = 1e-9) -> tuple[float, float]:
    """Occupations ``(n_bright, n_dark)`` of the collective modes in steady state.

    The covariance of the two modes is rotated into the bright/dark basis,
    applying the same rotation to positions and momenta (so the collective
    ladder operators are taken at the individual mode frequencies).

    Raises:
        DarkModeDecoupled: the frequencies coincide (within ``rtol``) and the
            dark mode has no damping, so there is no steady state.
        Unstable: any other loss of stability.
    """
    a, b = params.mode(labels[0]), params.mode(labels[1])
    basis = bright_dark_decompose(a.g, b.g, a.omega, b.omega)
    try:
        ss = solve_steady_state(build_model(params))
    except Unstable as exc:
        degenerate = abs(a.omega - b.omega) <= rtol * max(a.omega, b.omega)
        if degenerate and a.gamma == 0 and b.gamma == 0:
            raise DarkModeDecoupled(
                "degenerate mechanical frequencies: dark mode has no dissipation channel") from exc
        raise
    ix = [2 + 2 * params.index(lbl) for lbl in labels]
    ip = [i + 1 for i in ix]
    V = ss.covariance
    R = basis.rotation
    vx = R @ V[np.ix_(ix, ix)] @ R.T
    vp = R @ V[np.ix_(ip, ip)] @ R.T
    n = (np.diag(vx) + np.diag(vp) - 1.0) / 2.0
    return float(n[0]), float(n[1])


@dataclass(frozen=True)
class AngularMomentumStats:
    lz_sq: float  # <L_z^2>/hbar^2
    lz_rms: float  # sqrt(<L_z^2>)/hbar


def lz_variance(n_x: float, n_y: float, omega_x: float, omega_y: float) -> AngularMomentumStats:
    """Variance of ``L_z = x p_y - y p_x`` for uncorrelated thermal x and y modes.

    ``<L_z^2>/hbar^2 = (n_x + 1/2)(n_y + 1/2)(W_x/W_y + W_y/W_x) - 1/2``;
    only the frequency ratio matters, so any common unit works.
    """
    if n_x < 0 or n_y < 0:
        raise ValueError("occupations must be >= 0")
    if not (omega_x > 0 and omega_y > 0):
        raise ValueError("frequencies must be > 0")
    lz_sq = (n_x + 0.5) * (n_y + 0.5) * (omega_x / omega_y + omega_y / omega_x) - 0.5
    lz_sq = max(lz_sq, 0.0)
    return AngularMomentumStats(lz_sq, math.sqrt(lz_sq))
