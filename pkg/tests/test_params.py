import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from levcool import (CavityParams, MechMode, SystemParams, coupling_from_polarisation, operating_point,
                     hz, khz, to_hz, to_khz, validate)
from levcool.errors import InvalidParams
from levcool.params import (config_hash, load_params, params_from_dict, params_to_dict, violations)

finite = st.floats(-1e7, 1e7, allow_nan=False)


@given(finite)
def test_unit_round_trip(f):
    assert to_hz(hz(f)) == pytest.approx(f, rel=1e-15, abs=1e-9)
    assert to_khz(khz(f)) == pytest.approx(f, rel=1e-15, abs=1e-9)


def test_units():
    assert hz(1.0) == 2 * math.pi
    assert khz(1.0) == 2 * math.pi * 1e3


def _by(checks, condition, modes):
    return next(c for c in checks if c.condition == condition and c.modes == modes)


def test_operating_point_satisfies_all_conditions():
    assert violations(operating_point()) == []


def test_degenerate_violates_separation_with_zero_margin_ratio():
    p = operating_point(omegas_khz=(250, 250))
    c = _by(validate(p), "separated", ("x", "y"))
    assert not c.satisfied
    assert c.ratio == 0.0


def test_strong_coupling_violates_weak():
    p = operating_point().with_mode("x", g=khz(330))
    c = _by(validate(p), "weak", ("x",))
    assert c.ratio == pytest.approx(1.0)
    assert not c.satisfied and c.margin < 0


def test_validate_is_pure():
    p = operating_point()
    assert validate(p) == validate(p)


@pytest.mark.parametrize("theta,expected", [
    (0.25 * math.pi, (1 / math.sqrt(2), 1 / math.sqrt(2))),
    (0.5 * math.pi, (0.0, 1.0)),
    (0.0, (1.0, 0.0)),
])
def test_coupling_from_polarisation_examples(theta, expected):
    gx, gy = coupling_from_polarisation(theta, 2.0)
    assert gx == pytest.approx(2 * expected[0], abs=1e-15)
    assert gy == pytest.approx(2 * expected[1], abs=1e-15)


def test_coupling_exact_zero_at_right_angle():
    assert coupling_from_polarisation(0.5 * math.pi, 3.0)[0] == 0.0


@given(st.floats(0, 2 * math.pi), st.floats(0, 1e6))
def test_coupling_norm_preserved(theta, g):
    gx, gy = coupling_from_polarisation(theta, g)
    assert gx * gx + gy * gy == pytest.approx(g * g, rel=1e-10, abs=1e-18)


def test_negative_total_coupling_rejected():
    with pytest.raises(InvalidParams):
        coupling_from_polarisation(0.3, -1.0)


@pytest.mark.parametrize("kwargs", [
    dict(kappa=0.0, detuning=1.0),
    dict(kappa=1.0, detuning=math.nan),
    dict(kappa=1.0, detuning=1.0, eta=1.5),
])
def test_bad_cavity(kwargs):
    with pytest.raises(InvalidParams):
        CavityParams(**kwargs)


def test_bad_modes():
    with pytest.raises(InvalidParams):
        MechMode("x", omega=-1.0)
    with pytest.raises(InvalidParams):
        MechMode("x", omega=1.0, heating=-1.0)
    cav = CavityParams(khz(330), khz(232))
    with pytest.raises(InvalidParams):
        SystemParams(cav, (MechMode("x", khz(200)), MechMode("x", khz(250))))
    with pytest.raises(InvalidParams):
        SystemParams(cav, (MechMode("x", khz(200)),), if_freq=khz(400))


def test_config_round_trip():
    p = operating_point()
    q = params_from_dict(params_to_dict(p))
    for a, b in zip(p.modes, q.modes):
        assert a.omega == pytest.approx(b.omega, rel=1e-14)
        assert a.g == pytest.approx(b.g, rel=1e-14)
    assert config_hash(p) == config_hash(q)


def test_yaml_config(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(
        "cavity: {kappa_khz: 330, detuning_khz: 232}\n"
        "detection: {eta: 0.5}\n"
        "modes:\n"
        "  - {label: x, omega_khz: 230, g_khz: 14.1, heating_khz: 1.0}\n"
    )
    p = load_params(path)
    assert p.cavity.eta == 0.5
    assert p.mode("x").g == pytest.approx(khz(14.1))


def test_unknown_mode_key_rejected():
    cfg = params_to_dict(operating_point())
    cfg["modes"][0]["omega_hz"] = 1.0
    with pytest.raises(InvalidParams):
        params_from_dict(cfg)


def test_config_hash_sensitive():
    assert config_hash(operating_point()) != config_hash(operating_point(detuning_khz=233))


def test_with_modes():
    p = operating_point().with_modes(x={"g": 0.0}, y={"heating": 0.0})
    assert p.mode("x").g == 0.0 and p.mode("y").heating == 0.0
    assert np.isclose(p.mode("y").g, khz(15.4))
