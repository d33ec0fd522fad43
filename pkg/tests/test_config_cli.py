import subprocess
import sys as _sys

import numpy as np
import pytest

from maxplus_gate import cli
from maxplus_gate.bankfile import load_bank
from maxplus_gate.config import ConfigError, RunConfig, _angle, load_config, parse_config
from maxplus_gate.linalg import LinAlgError, expm_skew, pauli_string
from maxplus_gate.slices import slice_grid


def test_angle_parser():
    assert _angle("pi") == pytest.approx(np.pi)
    assert _angle("-pi/2") == pytest.approx(-np.pi / 2)
    assert _angle("0.5*pi") == pytest.approx(np.pi / 2)
    assert _angle("2pi/3") == pytest.approx(2 * np.pi / 3)
    assert _angle("1.25") == 1.25
    with pytest.raises(ValueError):
        _angle("tau")


def test_parse_config_values():
    cfg = parse_config(
        """
        # two-qubit run
        system = su4
        two_body = XX   # trailing comment
        r_ratio = 1/3
        cap = 200
        signed = no
        slice_range = pi/2
        R = 1, 1, 1, 1, 4
        """
    )
    assert cfg.system == "su4" and cfg.two_body == "XX"
    assert cfg.r_ratio == pytest.approx(1 / 3)
    assert cfg.cap == 200 and cfg.signed is False
    assert cfg.slice_range == pytest.approx(np.pi / 2)
    sys = cfg.build_system()
    assert sys.labels[-1] == "XX"
    np.testing.assert_array_equal(sys.R, [1, 1, 1, 1, 4])


@pytest.mark.parametrize(
    "text, match",
    [
        ("bogus = 1", "unknown key"),
        ("cap = 1\ncap = 2", "duplicate"),
        ("cap", "expected"),
        ("cap = many", "bad value"),
        ("signed = maybe", "bad value"),
    ],
)
def test_parse_config_errors(text, match):
    with pytest.raises(ConfigError, match=match):
        parse_config(text)


@pytest.mark.parametrize(
    "cfg",
    [
        RunConfig(system="su3"),
        RunConfig(system="custom"),
        RunConfig(system="su4", r_ratio=2.0),
        RunConfig(system="custom", hamiltonians=("X", "Z"), R=(1.0,)),
        RunConfig(system="su2", tau=-1.0),
    ],
)
def test_invalid_systems_rejected(cfg):
    with pytest.raises(ConfigError):
        cfg.build_system()


def test_defaults_and_presets():
    cfg = RunConfig()
    sys = cfg.build_system()
    assert sys.labels == ("IX", "IZ", "XI", "ZI", "XZ")
    assert sys.n_steps == 20 and sys.tau == 0.2 and sys.epsilon == 0.1
    assert sys.R[4] == pytest.approx(1.69)
    assert RunConfig(system="su2").build_system().n_steps == 6
    custom = RunConfig(system="custom", hamiltonians=("X", "Y"), n_steps=2).build_system()
    assert custom.labels == ("X", "Y") and list(custom.R) == [1.0, 1.0]
    p = cfg.prune_config()
    assert p.cap == 5000 and p.sample_count == 128 and p.protect_zero_chain
    with pytest.raises(ConfigError):
        RunConfig(prune_mode="fancy").prune_config()
    with pytest.raises(ConfigError):
        RunConfig(cap=0).prune_config()


def test_load_config_missing(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


def test_parse_target():
    np.testing.assert_array_equal(cli.parse_target("I", 4), np.eye(4))
    u = cli.parse_target("XX=0.5, YY=pi/4", 4)
    np.testing.assert_allclose(u, expm_skew(0.5 * pauli_string("XX") + np.pi / 4 * pauli_string("YY"), 1.0))
    for bad in ("XX", "XX=1", "Q=1", "X=abc"):
        with pytest.raises(ConfigError):
            cli.parse_target(bad, 2)


@pytest.fixture(scope="module")
def su2_cli_bank(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    cfgfile = d / "su2.cfg"
    cfgfile.write_text("system = su2\nn_steps = 4\nslice_gen1 = X\nslice_gen2 = Z\nslice_resolution = 5\n")
    bank = d / "su2.mpb"
    assert cli.main(["solve", "--config", str(cfgfile), "--out", str(bank), "--no-prune"]) == 0
    return cfgfile, bank


def test_solve_progress_and_bank(su2_cli_bank, capsys):
    cfgfile, _ = su2_cli_bank
    out = cfgfile.parent / "p.mpb"
    assert cli.main(["solve", "--config", str(cfgfile), "--out", str(out), "--cap", "30", "--samples", "8"]) == 0
    err = capsys.readouterr().err
    assert sum(line.startswith("step ") for line in err.splitlines()) == 4
    bank = load_bank(out)
    assert bank.step == 4 and len(bank) <= 30


def test_unpruned_solve_size(su2_cli_bank):
    bank = load_bank(su2_cli_bank[1])
    assert len(bank) < 5**4  # dedupe stays on with --no-prune
    assert bank.max_unitarity_residual() <= 1e-9


def test_eval_identity(su2_cli_bank, capsys):
    _, bank = su2_cli_bank
    assert cli.main(["eval", "--bank", str(bank), "--target", "I"]) == 0
    out = capsys.readouterr().out
    assert "value: 0.0" in out
    assert "sequence: 0 0 0 0" in out
    assert "feasible at tol 1e-06: yes" in out


def test_eval_replayed_atom(su2_cli_bank, tmp_path, capsys):
    _, path = su2_cli_bank
    bank = load_bank(path)
    target = bank.mats[17].conj().T
    f = tmp_path / "u.txt"
    np.savetxt(f, target)
    assert cli.main(["eval", "--bank", str(path), "--target-file", str(f)]) == 0
    out = capsys.readouterr().out
    residual = float(out.split("terminal residual: ")[1].split()[0])
    assert residual <= 1e-8


def test_eval_sigma_y_sequence(su2_cli_bank, capsys):
    _, bank = su2_cli_bank
    assert cli.main(["eval", "--bank", str(bank), "--target", "Y=0.5"]) == 0
    out = capsys.readouterr().out
    value = float(out.split("value: ")[1].split()[0])
    assert value > 0
    seq = out.split("sequence: ")[1].splitlines()[0].split()
    used = [s[1:] for s in seq if s != "0"]
    assert set(used) == {"X", "Z"}
    assert all(a != b for a, b in zip(used, used[1:]))


def test_feasible_command(su2_cli_bank, capsys):
    _, bank = su2_cli_bank
    assert cli.main(["feasible", "--bank", str(bank), "--target", "X=-0.4"]) == 0
    out = capsys.readouterr().out
    assert "feasible: yes" in out and "sequence: " in out
    assert cli.main(["feasible", "--bank", str(bank), "--target", "Y=1.0", "--tol", "1e-9"]) == 0
    assert "feasible: no" in capsys.readouterr().out


def test_non_unitary_target_rejected(su2_cli_bank, tmp_path, capsys):
    _, bank = su2_cli_bank
    f = tmp_path / "bad.txt"
    np.savetxt(f, 1.01 * np.eye(2))
    assert cli.main(["eval", "--bank", str(bank), "--target-file", str(f)]) == 1
    assert "not unitary" in capsys.readouterr().err


def test_slice_command(su2_cli_bank, tmp_path):
    cfgfile, bank = su2_cli_bank
    out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    assert cli.main(["slice", "--bank", str(bank), "--config", str(cfgfile), "--out", str(out1)]) == 0
    assert cli.main(["slice", "--bank", str(bank), "--config", str(cfgfile), "--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    rows = np.loadtxt(out1, delimiter=",", skiprows=1)
    assert rows.shape == (25, 3)
    assert slice_grid(rows, 5)[2, 2] == 0.0
    assert cli.main(["slice", "--bank", str(bank), "--gen1", "XX", "--gen2", "YY", "--out", str(out1)]) == 1


def test_oracle_command(capsys, tmp_path):
    cfgfile = tmp_path / "o.cfg"
    cfgfile.write_text("system = su2\nn_steps = 3\noracle_points = 10\nsamples = 8\n")
    assert cli.main(["oracle", "--config", str(cfgfile), "--cap", "10"]) == 0
    assert "verdict: PASS" in capsys.readouterr().out
    big = tmp_path / "big.cfg"
    big.write_text("system = su2\nn_steps = 12\n")
    assert cli.main(["oracle", "--config", str(big)]) == 3


def test_complexity_command(capsys):
    assert cli.main(["complexity", "--headline"]) == 0
    out = capsys.readouterr().out
    assert str(50**15) in out and str(11**20) in out and "1.695E+19" in out
    cfg_out = cli.main(["complexity", "--grid", "10", "--config", "/dev/null"])
    assert cfg_out == 0
    assert str(11**20) in capsys.readouterr().out


def test_exit_codes(tmp_path, monkeypatch, capsys):
    bad = tmp_path / "bad.cfg"
    bad.write_text("nonsense = 1\n")
    assert cli.main(["solve", "--config", str(bad)]) == 1
    assert cli.main(["eval", "--bank", str(tmp_path / "missing.mpb"), "--target", "I"]) == 1
    junk = tmp_path / "junk.mpb"
    junk.write_bytes(b"not a bank")
    assert cli.main(["eval", "--bank", str(junk), "--target", "I"]) == 1

    def boom(*a, **k):
        raise LinAlgError("no convergence", 1.0)

    monkeypatch.setattr(cli, "init_bank", boom)
    good = tmp_path / "g.cfg"
    good.write_text("system = su2\nn_steps = 1\n")
    assert cli.main(["solve", "--config", str(good), "--out", str(tmp_path / "x.mpb")]) == 2
    assert "numerical" in capsys.readouterr().err


def test_console_script_help():
    res = subprocess.run([_sys.executable, "-m", "maxplus_gate.cli", "--help"], capture_output=True, text=True)
    assert res.returncode == 0
    for sub in ("solve", "eval", "feasible", "slice", "oracle", "complexity"):
        assert sub in res.stdout
