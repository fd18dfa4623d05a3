import json

import pytest

from levcool.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_detuning_sweep_writes_csv(tmp_path, capsys):
    code, out, _ = run(capsys, "sweep-detuning", "--out", str(tmp_path), "--steps", "3")
    assert code == 0
    text = (tmp_path / "detuning_sweep.csv").read_text()
    assert out.strip() == str(tmp_path / "detuning_sweep.csv")
    assert "# config_hash:" in text and "# tool: levcool" in text
    assert len([l for l in text.splitlines() if not l.startswith("#")]) == 4


def test_reproducible_bytes(tmp_path, capsys):
    for d in ("a", "b"):
        assert run(capsys, "spectrum", "--out", str(tmp_path / d), "--seed", "11",
                   "--n-averages", "30")[0] == 0
    assert (tmp_path / "a/spectrum.csv").read_bytes() == (tmp_path / "b/spectrum.csv").read_bytes()


def test_error_json_on_failure(tmp_path, capsys):
    code, _, err = run(capsys, "thermometry", str(tmp_path / "missing.csv"), "--out", str(tmp_path))
    assert code == 1
    payload = json.loads(err)
    assert payload["error"] == "FileNotFoundError"
    code, _, err = run(capsys, "sweep-detuning", "--out", str(tmp_path), "--kappa-khz", "-1")
    assert code == 1 and json.loads(err)["error"] == "InvalidParams"


def test_flag_overrides_config(tmp_path, capsys):
    cfg = tmp_path / "c.yaml"
    cfg.write_text(
        "cavity: {kappa_khz: 330, detuning_khz: 232}\n"
        "modes:\n"
        "  - {label: x, omega_khz: 230, g_khz: 14.1, heating_khz: 1.0}\n"
        "  - {label: y, omega_khz: 270, g_khz: 15.4, heating_khz: 1.0}\n"
        "sweeps:\n"
        "  sweep-detuning: {start: 200, stop: 300, steps: 3}\n"
    )
    assert run(capsys, "sweep-detuning", "--config", str(cfg), "--out", str(tmp_path),
               "--stop", "260", "--set", "modes.x.g_khz=10")[0] == 0
    rows = [l for l in (tmp_path / "detuning_sweep.csv").read_text().splitlines()
            if l[:1].isdigit()]
    assert [float(r.split(",")[0]) for r in rows] == [200.0, 230.0, 260.0]


def test_bad_set_assignment(tmp_path, capsys):
    code, _, err = run(capsys, "sweep-detuning", "--out", str(tmp_path), "--set", "modes.z.g_khz=1")
    assert code == 1 and json.loads(err)["error"] == "InvalidParams"


def test_spectrum_then_thermometry(tmp_path, capsys):
    assert run(capsys, "spectrum", "--out", str(tmp_path))[0] == 0
    code, _, _ = run(capsys, "thermometry", str(tmp_path / "spectrum.csv"), "--out", str(tmp_path))
    assert code == 0
    text = (tmp_path / "thermometry.csv").read_text()
    assert text.splitlines()[-1].startswith("y,")


@pytest.mark.parametrize("cmd", ["sweep-polarisation", "sweep-degeneracy"])
def test_other_sweeps(tmp_path, capsys, cmd):
    assert run(capsys, cmd, "--out", str(tmp_path), "--steps", "3")[0] == 0


def test_error_map_cli(tmp_path, capsys):
    code, _, _ = run(capsys, "error-map", "--out", str(tmp_path), "--spacing", "0:40:3",
                     "--g", "5:20:2", "--point", "40/15")
    assert code == 0
    assert "mask_reason" in (tmp_path / "error_map.csv").read_text()


def test_unknown_subcommand_exits_nonzero():
    with pytest.raises(SystemExit) as exc:
        main(["bogus"])
    assert exc.value.code != 0
