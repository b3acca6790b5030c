import json
import subprocess
import sys

import numpy as np
import pytest

from qbm_decoherence.cli import ConfigError, main, parse_config


def _write(tmp_path, text, name="run.cfg"):
    p = tmp_path / name
    p.write_text(text)
    return p


def _data(path):
    return np.loadtxt(path, delimiter=",", comments="#", ndmin=2)


def _header_value(path, key):
    for line in path.read_text().splitlines():
        if line.startswith(f"# {key} = "):
            return float(line.split("=")[1])
    raise KeyError(key)


def test_parse_config_defaults_and_comments():
    cfg = parse_config("# comment\ng = 0.2  # inline\nreservoir = subohmic\n")
    assert cfg["g"] == 0.2 and cfg["kT"] == 100.0
    assert cfg.model().s == 0.5


@pytest.mark.parametrize("text", ["bogus = 1\n", "g = abc\n", "g = 0.1\ng = 0.2\n",
                                  "reservoir = plasma\n", "spacing = cubic\n", "kT = -1\n"])
def test_bad_configs_are_errors(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def test_unknown_key_exit_code(tmp_path):
    assert main(["coeffs", "--config", str(_write(tmp_path, "bogus = 1\n")),
                 "--out", str(tmp_path)]) == 1
    assert main(["coeffs", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert main(["nonsense"]) == 1
    assert main(["coeffs", "--threads", "0", "--out", str(tmp_path)]) == 1


def test_coeffs_single_zero_row(tmp_path):
    cfg = _write(tmp_path, "t_max = 0\n")
    assert main(["coeffs", "--config", str(cfg), "--out", str(tmp_path), "--threads", "1"]) == 0
    rows = _data(tmp_path / "coeffs.csv")
    assert rows.shape == (1, 6) and np.all(rows == 0)
    text = (tmp_path / "coeffs.csv").read_text()
    assert text.startswith("# qbm_decoherence ")
    assert "# config: t_max = 0.0" in text
    assert "# columns: t,omega_c_t,delta,gamma,heating,big_gamma" in text


def test_coeffs_reaches_markovian_value(tmp_path):
    cfg = _write(tmp_path, "reservoir = ohmic\nr = 10\nt_max = 5\nn_points = 11\n")
    assert main(["coeffs", "--config", str(cfg), "--out", str(tmp_path), "--threads", "1"]) == 0
    rows = _data(tmp_path / "coeffs.csv")
    dm = _header_value(tmp_path / "coeffs.csv", "delta_M")
    assert rows[-1, 2] == pytest.approx(dm, rel=1e-2)


def test_coeffs_markovian_mode_flag(tmp_path):
    cfg = _write(tmp_path, "t_max = 2\nn_points = 5\n")
    assert main(["coeffs", "--config", str(cfg), "--out", str(tmp_path), "--mode",
                 "markovian"]) == 0
    rows = _data(tmp_path / "coeffs.csv")
    assert np.all(rows[:, 2] == rows[0, 2]) and np.all(rows[:, 3] == rows[0, 3])
    assert "# config: mode = markovian" in (tmp_path / "coeffs.csv").read_text()


def test_fringe_without_coupling(tmp_path):
    cfg = _write(tmp_path, "g = 0\nalpha = 1\ngpt_points = 5\ngpt_spacing = linear\n")
    assert main(["fringe", "--config", str(cfg), "--out", str(tmp_path), "--regime",
                 "off"]) == 0
    rows = _data(tmp_path / "fringe.csv")
    assert np.all(rows[:, 1:] == 1.0)
    assert (tmp_path / "fringe.gp").exists()


def test_fringe_ranking_and_determinism(tmp_path, capsys):
    text = "reservoir = ohmic,subohmic,superohmic\nr = 10\nalpha = 2\ngpt_points = 40\n"
    cfg = _write(tmp_path, text)
    outs = [tmp_path / "a", tmp_path / "b"]
    for out in outs:
        assert main(["fringe", "--config", str(cfg), "--out", str(out), "--threads", "1"]) == 0
    assert "ranking (slowest decoherence first): ohmic" in capsys.readouterr().out
    for name in ("fringe.csv", "fringe.gp", "fringe_ranking.csv"):
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    header = (outs[0] / "fringe.csv").read_text().splitlines()
    cols = [l for l in header if l.startswith("# columns:")][0]
    assert "F_ohmic" in cols and "F_markovian_superohmic" in cols


def test_zeno_single_markovian_cell(tmp_path):
    cfg = _write(tmp_path, "n_r = 1\nr_max = 1\nn_tau = 1\ntau_max = 1\n")
    assert main(["zeno", "--config", str(cfg), "--out", str(tmp_path), "--mode",
                 "markovian"]) == 0
    lines = [l for l in (tmp_path / "zeno_map.csv").read_text().splitlines()
             if not l.startswith("#")]
    assert lines == ["1,1,1,boundary"]
    roots = [l for l in (tmp_path / "zeno_roots.csv").read_text().splitlines()
             if not l.startswith("#")]
    assert roots == ["1,"]
    assert "levels discrete 1.0" in (tmp_path / "zeno_map.gp").read_text()


def test_zeno_partial_failure_exit_code(tmp_path):
    cfg = _write(tmp_path, "g = 0\nn_r = 2\nn_tau = 3\n")
    assert main(["zeno", "--config", str(cfg), "--out", str(tmp_path), "--threads", "1"]) == 2
    assert "nan,missing" in (tmp_path / "zeno_map.csv").read_text()


def test_zeno_map_determinism(tmp_path):
    cfg = _write(tmp_path, "reservoir = superohmic\nn_r = 3\nr_min = 1\nr_max = 1.4\n"
                           "n_tau = 6\nn_scan = 50\n")
    for out, threads in ((tmp_path / "a", "1"), (tmp_path / "b", "2")):
        assert main(["zeno", "--config", str(cfg), "--out", str(out), "--threads", threads]) == 0
    for name in ("zeno_map.csv", "zeno_roots.csv", "zeno_map.gp"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_certify_smoke_profile(tmp_path):
    cfg = _write(tmp_path, "profile = smoke\n")
    assert main(["certify", "--config", str(cfg), "--out", str(tmp_path), "--threads", "1"]) == 0
    report = json.loads((tmp_path / "certify_report.json").read_text())
    assert report["passed"] and "generated_at" in report
    names = {s["suite"] for s in report["suites"]}
    assert names == {"fringe_off_resonant", "fringe_resonant", "zeno_rate", "n_independence"}
    for s in report["suites"]:
        assert s["max_deviation"] < 1e-12
        assert "dim_doubling_change" in s


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "qbm_decoherence", "coeffs", "--out",
                           str(tmp_path), "--threads", "1"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "coeffs.csv").exists()
