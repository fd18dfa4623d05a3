"""Physical parameters of the cavity + mechanical-mode system.

Everything inside the package is expressed in angular frequency (rad/s)
with hbar = 1.  Human-facing input and output (config files, CSV, CLI) is
in ordinary frequency, kHz for configs and Hz for spectra; the helpers
``khz``/``to_khz`` and ``hz``/``to_hz`` are the only places where the
factor 2*pi appears.

Config files are YAML (JSON is accepted as a YAML subset)::

    cavity:
      kappa_khz: 330.0
      detuning_khz: 232.0
    detection:
      eta: 1.0
      if_freq_khz: 1500.0
    modes:
      - {label: x, omega_khz: 230.0, g_khz: 14.1, heating_khz: 1.0}
      - {label: y, omega_khz: 270.0, g_khz: 15.4, heating_khz: 1.0}
    thresholds:            # optional
      resolved_ratio: 2.0
      weak_ratio: 0.2
      separation_ratio: 1.0

Each mode also accepts ``gamma_khz`` (intrinsic damping, default 0) and
``n_th`` (bath occupation for that damping, default 0).
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, replace
from itertools import combinations
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import yaml

from .errors import InvalidParams

TWO_PI = 2.0 * math.pi


def hz(f):
    """Ordinary frequency in Hz -> angular frequency in rad/s."""
    return TWO_PI * np.asarray(f, dtype=float) if np.ndim(f) else TWO_PI * float(f)


def to_hz(w):
    """Angular frequency in rad/s -> ordinary frequency in Hz."""
    return np.asarray(w, dtype=float) / TWO_PI if np.ndim(w) else float(w) / TWO_PI


def khz(f):
    """Ordinary frequency in kHz -> angular frequency in rad/s."""
    return hz(np.asarray(f, dtype=float) * 1e3) if np.ndim(f) else hz(float(f) * 1e3)


def to_khz(w):
    """Angular frequency in rad/s -> ordinary frequency in kHz."""
    return to_hz(w) / 1e3


@dataclass(frozen=True)
class MechMode:
    """One centre-of-mass mode.

    ``g`` is the linearized coupling to the cavity field (signed),
    ``heating`` the recoil heating rate in phonons per second and
    ``gamma`` an optional intrinsic damping towards a bath with ``n_th``
    phonons.  All rates in rad/s.
    """

    label: str
    omega: float
    g: float = 0.0
    heating: float = 0.0
    gamma: float = 0.0
    n_th: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise InvalidParams(f"mode {self.label!r}: omega must be > 0, got {self.omega}")
        if not math.isfinite(self.g):
            raise InvalidParams(f"mode {self.label!r}: g must be finite")
        if self.gamma < 0 or self.heating < 0 or self.n_th < 0:
            raise InvalidParams(f"mode {self.label!r}: gamma, heating and n_th must be >= 0")


@dataclass(frozen=True)
class CavityParams:
    kappa: float
    detuning: float
    eta: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise InvalidParams(f"kappa must be > 0, got {self.kappa}")
        if not math.isfinite(self.detuning):
            raise InvalidParams("detuning must be finite")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidParams(f"eta must lie in [0, 1], got {self.eta}")


@dataclass(frozen=True)
class Thresholds:
    """Numerical meaning of the approximate inequalities in the cooling conditions.

    ``resolved_ratio``: a <~ b holds when a/b <= resolved_ratio.
    ``weak_ratio``: a << b holds when a/b < weak_ratio.
    ``separation_ratio``: a >~ b holds when a/b > separation_ratio.
    """

    resolved_ratio: float = 2.0
    weak_ratio: float = 0.2
    separation_ratio: float = 1.0


DEFAULT_IF_FREQ = khz(1500.0)


@dataclass(frozen=True)
class SystemParams:
    cavity: CavityParams
    modes: tuple[MechMode, ...]
    if_freq: float = DEFAULT_IF_FREQ
    thresholds: Thresholds = field(default_factory=Thresholds)

    def __post_init__(self):
        object.__setattr__(self, "modes", tuple(self.modes))
        if not self.modes:
            raise InvalidParams("at least one mechanical mode is required")
        labels = [m.label for m in self.modes]
        if len(set(labels)) != len(labels):
            raise InvalidParams(f"mode labels must be unique, got {labels}")
        limit = max(m.omega for m in self.modes) + self.cavity.kappa
        if not self.if_freq > limit:
            raise InvalidParams(
                f"if_freq ({to_khz(self.if_freq):.1f} kHz) must exceed max(omega) + kappa "
                f"({to_khz(limit):.1f} kHz)"
            )

    @property
    def labels(self) -> list[str]:
        return [m.label for m in self.modes]

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"no mode labelled {label!r}") from None

    def mode(self, label: str) -> MechMode:
        return self.modes[self.index(label)]

    def with_cavity(self, **changes) -> "SystemParams":
        return replace(self, cavity=replace(self.cavity, **changes))

    def with_mode(self, label: str, **changes) -> "SystemParams":
        i = self.index(label)
        modes = list(self.modes)
        modes[i] = replace(modes[i], **changes)
        return replace(self, modes=tuple(modes))

    def with_modes(self, **per_label: Mapping[str, float]) -> "SystemParams":
        out = self
        for label, changes in per_label.items():
            out = out.with_mode(label, **changes)
        return out


# ---------------------------------------------------------------------------
# cooling conditions


@dataclass(frozen=True)
class ConditionCheck:
    """Outcome of one cooling-condition test.

    ``ratio`` is the dimensionless quantity compared against ``threshold``;
    ``margin`` is positive when the condition holds and negative when it is
    violated (threshold - ratio or ratio - threshold depending on direction).
    """

    condition: str
    modes: tuple[str, ...]
    ratio: float
    threshold: float
    satisfied: bool
    description: str

    @property
    def margin(self) -> float:
        if self.condition == "separated":
            return self.ratio - self.threshold
        return self.threshold - self.ratio


def validate(params: SystemParams) -> list[ConditionCheck]:
    """Evaluate the conditions for efficient multi-mode cavity cooling.

    Returns one entry per condition rather than raising: a failing
    condition means poor cooling or unreliable thermometry, not an
    invalid model.  Conditions:

    * ``resolved`` -- the cavity resolves the sidebands of every pair,
      ``|W_k - W_j| <~ kappa <~ W_j, W_k``.
    * ``weak`` -- ``|g_j| << kappa`` for every mode.
    * ``separated`` -- ``|W_k - W_j| >~ |g|`` for every pair, using the
      larger coupling of the two.
    """
    th = params.thresholds
    kappa = params.cavity.kappa
    checks = []
    for m in params.modes:
        r = abs(m.g) / kappa
        checks.append(ConditionCheck("weak", (m.label,), r, th.weak_ratio, r < th.weak_ratio,
                                     "|g| << kappa"))
        r = kappa / m.omega
        checks.append(ConditionCheck("resolved", (m.label,), r, th.resolved_ratio,
                                     r <= th.resolved_ratio, "kappa <~ Omega"))
    for a, b in combinations(params.modes, 2):
        spacing = abs(b.omega - a.omega)
        r = spacing / kappa
        checks.append(ConditionCheck("resolved", (a.label, b.label), r, th.resolved_ratio,
                                     r <= th.resolved_ratio, "|dOmega| <~ kappa"))
        gmax = max(abs(a.g), abs(b.g))
        r = spacing / gmax if gmax > 0 else math.inf
        checks.append(ConditionCheck("separated", (a.label, b.label), r, th.separation_ratio,
                                     r > th.separation_ratio, "|dOmega| >~ |g|"))
    return checks


def violations(params: SystemParams) -> list[ConditionCheck]:
    return [c for c in validate(params) if not c.satisfied]


def coupling_from_polarisation(theta: float, g_total: float) -> tuple[float, float]:
    """Split a total coupling between the x and y modes for a tweezer polarisation angle.

    The coupling of each transverse mode follows the projection of the
    polarisation axis onto the cavity axis: ``g_x = g cos(theta)`` and
    ``g_y = g sin(theta)``.  Components below 1e-12 of ``g_total`` are
    snapped to exactly zero so that theta = 0 and pi/2 decouple a mode.
    """
    if g_total < 0:
        raise InvalidParams("g_total must be >= 0")
    gx = g_total * math.cos(theta)
    gy = g_total * math.sin(theta)
    eps = 1e-12 * g_total
    return (0.0 if abs(gx) < eps else gx, 0.0 if abs(gy) < eps else gy)


# ---------------------------------------------------------------------------
# config I/O (kHz on disk)

_MODE_KEYS = {"omega_khz": "omega", "g_khz": "g", "heating_khz": "heating", "gamma_khz": "gamma"}


def params_from_dict(cfg: Mapping[str, Any]) -> SystemParams:
    """Build :class:`SystemParams` from a config mapping with frequencies in kHz."""
    try:
        cav = cfg["cavity"]
        det = cfg.get("detection", {}) or {}
        cavity = CavityParams(
            kappa=khz(cav["kappa_khz"]),
            detuning=khz(cav["detuning_khz"]),
            eta=float(det.get("eta", cav.get("eta", 1.0))),
        )
        modes = []
        for m in cfg["modes"]:
            unknown = set(m) - set(_MODE_KEYS) - {"label", "n_th"}
            if unknown:
                raise InvalidParams(f"unknown mode keys {sorted(unknown)}")
            kw = {dst: khz(m[src]) for src, dst in _MODE_KEYS.items() if src in m}
            modes.append(MechMode(label=str(m["label"]), n_th=float(m.get("n_th", 0.0)), **kw))
        if_freq = khz(det["if_freq_khz"]) if "if_freq_khz" in det else DEFAULT_IF_FREQ
        thresholds = Thresholds(**(cfg.get("thresholds") or {}))
    except (KeyError, TypeError) as exc:
        raise InvalidParams(f"malformed config: {exc!r}") from exc
    return SystemParams(cavity=cavity, modes=tuple(modes), if_freq=if_freq, thresholds=thresholds)


def params_to_dict(params: SystemParams) -> dict:
    modes = []
    for m in params.modes:
        d = {"label": m.label}
        d.update({src: to_khz(getattr(m, dst)) for src, dst in _MODE_KEYS.items()})
        d["n_th"] = m.n_th
        modes.append(d)
    return {
        "cavity": {"kappa_khz": to_khz(params.cavity.kappa),
                   "detuning_khz": to_khz(params.cavity.detuning)},
        "detection": {"eta": params.cavity.eta, "if_freq_khz": to_khz(params.if_freq)},
        "modes": modes,
        "thresholds": asdict(params.thresholds),
    }


def load_config(path: str | Path) -> dict:
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    if not isinstance(cfg, dict):
        raise InvalidParams(f"{path}: config must be a mapping")
    return cfg


def load_params(path: str | Path) -> SystemParams:
    return params_from_dict(load_config(path))


def config_hash(params: SystemParams) -> str:
    """Short stable digest of a parameter set, used as provenance in outputs."""
    blob = json.dumps(params_to_dict(params), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def operating_point(detuning_khz: float = 232.0,
                    omegas_khz: Sequence[float] = (230.0, 270.0)) -> SystemParams:
    """Operating point of the two-mode ground-state cooling measurement.

    kappa/2pi = 330 kHz, g/2pi = 14.1 and 15.4 kHz, heating/2pi = 1.0 kHz
    for both transverse modes.  Mode frequencies default to the sideband
    positions of the detuning sweep (230 and 270 kHz); the bare trap
    frequencies were 224 and 268 kHz.
    """
    wx, wy = omegas_khz
    return SystemParams(
        cavity=CavityParams(kappa=khz(330.0), detuning=khz(detuning_khz)),
        modes=(
            MechMode("x", omega=khz(wx), g=khz(14.1), heating=khz(1.0)),
            MechMode("y", omega=khz(wy), g=khz(15.4), heating=khz(1.0)),
        ),
    )
