import csv
import json
import subprocess
import sys
import textwrap
from pathlib import Path

import numpy as np
import pytest

from gmhd.cli import main, sweep_values
from gmhd.config import Config, ConfigError
from gmhd.snapshot import read_snapshot

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

FIRST_CASE = """\
[special]
kind = thm_1_1
n = 3
p = 3
q = 3
gamma1 = 5.5
gamma2 = 2.5
gamma3 = 1
"""

SIM = """\
[grid]
dim = 2
n = 16

[operators]
gamma1 = 2
gamma2 = 2
gamma3 = 2

[solver]
T = 0.05
nodes = 4
picard_tol = 1e-12

[initial]
u_family = {u}
u_amplitude = {amp}
b_family = {b}
b_amplitude = {amp}
seed = 99
"""


def write(tmp_path, text, name="run.ini"):
    path = tmp_path / name
    path.write_text(textwrap.dedent(text))
    return str(path)


class TestConfigParsing:
    def test_line_anchored_errors(self):
        cfg = Config("[a]\nx = 1\ny = oops\n", "demo.ini")
        assert cfg.get_int("a", "x") == 1
        with pytest.raises(ConfigError, match=r"demo.ini:3: \[a\]"):
            cfg.get_float("a", "y")
        with pytest.raises(ConfigError, match="missing required key 'z'"):
            cfg.get_float("a", "z")

    def test_tuples_bools_comments(self):
        cfg = Config("[s]\nk = 1,-2 ; inline\nm = 1,0; 0,2\nflag = yes\n")
        assert cfg.get_int_tuple("s", "k") == (1, -2)
        assert cfg.get_int_tuples("s", "m") == [(1, 0), (0, 2)]
        assert cfg.get_bool("s", "flag") is True
        assert cfg.get_str("s", "absent", "dflt") == "dflt"

    def test_syntax_error(self):
        with pytest.raises(ConfigError, match=":2:"):
            Config("[s]\nnot a pair\n")


class TestCheck:
    def test_first_case_feasible(self, tmp_path, capsys):
        code = main(["check", "--config", write(tmp_path, FIRST_CASE), "--json", "--out", str(tmp_path / "o")])
        assert code == 0
        report = json.loads(capsys.readouterr().out)
        assert report["feasible"] and report["min_gamma1"] == pytest.approx(5.0, abs=1e-8)
        assert json.loads((tmp_path / "o" / "report.json").read_text()) == report

    def test_infeasible_exit_1(self, tmp_path):
        assert main(["check", "--config", write(tmp_path, FIRST_CASE.replace("5.5", "4.0"))]) == 1

    def test_missing_p2(self, tmp_path, capsys):
        text = """\
        [instance]
        n = 3
        r0 = 0
        r1 = 2
        r2 = 0
        p0 = 3
        p1 = 3
        gamma1 = 6
        gamma2 = 3
        gamma3 = 1
        """
        assert main(["check", "--config", write(tmp_path, text)]) == 2
        err = capsys.readouterr().err
        assert "p2" in err and "run.ini:1:" in err

    def test_bad_number_points_at_line(self, tmp_path, capsys):
        assert main(["check", "--config", write(tmp_path, FIRST_CASE.replace("q = 3", "q = three"))]) == 2
        assert "run.ini:5:" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main(["check", "--config", str(tmp_path / "absent.ini")]) == 2

    def test_shipped_configs(self, capsys):
        assert main(["check", "--config", str(CONFIGS / "thm_1_1.ini")]) == 0
        assert main(["check", "--config", str(CONFIGS / "general.ini")]) == 0


class TestSweep:
    def test_values(self):
        assert sweep_values(0.0, 1.0, 0.1) == [round(0.1 * i, 12) for i in range(11)]
        with pytest.raises(ValueError):
            sweep_values(0.0, 1.0, 0.0)

    def test_gamma3_sweep_eleven_reports(self, tmp_path, capsys):
        out = tmp_path / "sw"
        code = main(["sweep", "--config", str(CONFIGS / "sweep_gamma3.ini"), "--json", "--out", str(out)])
        assert code == 0
        reports = json.loads(capsys.readouterr().out)
        assert len(reports) == 11
        assert [r["instance"]["gamma3"] for r in reports] == pytest.approx([0.1 * i for i in range(11)])
        rows = list(csv.reader((out / "sweep.csv").open()))
        assert rows[0] == ["gamma3", "feasible", "min_gamma1", "min_gamma2"] and len(rows) == 12

    def test_unknown_parameter(self, tmp_path):
        text = FIRST_CASE + "\n[sweep]\nparameter = zeta\nstart = 0\nstop = 1\nstep = 0.5\n"
        assert main(["sweep", "--config", write(tmp_path, text)]) == 2


class TestSimulate:
    def test_zero_data(self, tmp_path):
        out = tmp_path / "z"
        assert main(["simulate", "--config", write(tmp_path, SIM.format(u="zero", b="zero", amp=1)), "--out", str(out)]) == 0
        rows = list(csv.DictReader((out / "diagnostics.csv").open()))
        assert len(rows) == 5
        assert all(float(r[k]) == 0.0 for r in rows for k in ("div_residual", "E_kin", "E_mag", "E_filtered"))
        summary = json.loads((out / "summary.json").read_text())
        assert summary["status"] == "converged"

    def test_seeded_run_is_byte_identical(self, tmp_path):
        cfg = write(tmp_path, SIM.format(u="random_band_limited", b="random_band_limited", amp=0.01))
        for tag in ("a", "b"):
            assert main(["simulate", "--config", cfg, "--out", str(tmp_path / tag)]) == 0
        for name in ("diagnostics.csv", "residuals.csv", "summary.json", "snapshots/u_0004.gmhd"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
        # a different seed changes the data
        assert main(["simulate", "--config", cfg, "--seed", "7", "--out", str(tmp_path / "c")]) == 0
        assert (tmp_path / "a" / "diagnostics.csv").read_bytes() != (tmp_path / "c" / "diagnostics.csv").read_bytes()

    def test_snapshots_match_trajectory_times(self, tmp_path):
        out = tmp_path / "s"
        main(["simulate", "--config", write(tmp_path, SIM.format(u="taylor_green_like", b="zero", amp=0.1)), "--out", str(out)])
        field, t = read_snapshot(out / "snapshots" / "u_0004.gmhd")
        assert t == pytest.approx(0.05) and field.grid.n == 16
        assert np.max(np.abs(field.coeffs)) > 0

    def test_acceptance_config(self, tmp_path):
        assert main(["simulate", "--config", str(CONFIGS / "simulate_contraction.ini"), "--out", str(tmp_path)]) == 0
        res = [float(r["residual"]) for r in csv.DictReader((tmp_path / "residuals.csv").open())]
        assert len(res) >= 3 and all(b < a for a, b in zip(res, res[1:]))

    def test_nonconvergence_exit_3(self, tmp_path):
        text = SIM.format(u="random_band_limited", b="random_band_limited", amp=5).replace("T = 0.05", "T = 0.5")
        text = text.replace("picard_tol = 1e-12", "picard_tol = 1e-12\nmax_iters = 5")
        assert main(["simulate", "--config", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 3
        assert json.loads((tmp_path / "o" / "summary.json").read_text())["status"] == "nonconvergence"

    def test_blowup_exit_4(self, tmp_path):
        text = SIM.format(u="random_band_limited", b="random_band_limited", amp=50).replace("T = 0.05", "T = 0.5")
        assert main(["simulate", "--config", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 4

    @pytest.mark.parametrize("edit", [("n = 16", "n = 15"), ("u_family = zero", "u_family = vortex"),
                                      ("T = 0.05", "T = -1"), ("gamma3 = 2", "gamma3 = 2\ng3 = cubic")])
    def test_config_errors(self, tmp_path, edit):
        text = SIM.format(u="zero", b="zero", amp=1).replace(*edit)
        assert main(["simulate", "--config", write(tmp_path, text), "--out", str(tmp_path / "o")]) == 2


class TestVerify:
    def test_semigroup_pass(self, tmp_path, capsys):
        assert main(["verify", "--config", str(CONFIGS / "verify_semigroup.ini"), "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        assert "PASS semigroup" in out
        lines = (tmp_path / "verify_semigroup.csv").read_text().splitlines()
        assert lines[0].startswith("# torus-grid proxy") and lines[1].startswith("t,")

    def test_integral_pass(self, capsys):
        assert main(["verify", "--config", str(CONFIGS / "verify_integral.ini")]) == 0
        assert "PASS integral" in capsys.readouterr().out

    def test_integral_rejects_large_exponents(self, tmp_path):
        text = "[verify]\nname = integral\na = 0.6\nb = 0.5\n"
        assert main(["verify", "--config", write(tmp_path, text)]) == 2

    def test_unknown_verifier(self, tmp_path, capsys):
        assert main(["verify", "--config", write(tmp_path, "[verify]\nname = magic\n")]) == 2
        assert "run.ini:2:" in capsys.readouterr().err

    @pytest.mark.parametrize("body,code", [
        ("name = inverse\ngamma = 2\nr = 1\np = 2\nsizes = 16,32", 0),
        ("name = inverse\ngamma = 2\ng = log\nr = 1\np = 2\nsizes = 16,32,64", 1),
        ("name = embedding\ns = 0.5\nr = 0\np = 2\nsizes = 16,32", 0),
        ("name = product\nr = 0\np = 2\np1 = 4\np2 = 4\nq1 = 4\nq2 = 4", 0),
    ])
    def test_refinement_verifiers(self, tmp_path, body, code, capsys):
        assert main(["verify", "--config", write(tmp_path, "[verify]\n" + body + "\n"), "--json"]) == code
        assert json.loads(capsys.readouterr().out)["verdict"] == ("PASS" if code == 0 else "FAIL")


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, FIRST_CASE)
    proc = subprocess.run([sys.executable, "-m", "gmhd", "check", "--config", cfg], capture_output=True, text=True)
    assert proc.returncode == 0 and "feasible: True" in proc.stdout


def test_seed_range(tmp_path):
    assert main(["check", "--config", write(tmp_path, FIRST_CASE), "--seed", str(2**64)]) == 2
