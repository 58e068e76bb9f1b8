"""CLI contract: exit codes, CSV schemas, determinism, manifests."""

import json
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from gilab import checks
from gilab.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def run_cli(args, **kw):
    return main(list(args))


class TestCheckCommand:
    def test_core_passes(self, capsys):
        assert run_cli(["check", "core"]) == 0
        out = capsys.readouterr().out
        assert "[PASS] core.wedge" in out

    def test_unknown_suite_usage_error(self):
        assert run_cli(["check", "nonsense"]) == 2

    def test_no_command_usage_error(self):
        assert run_cli([]) == 2

    def test_mutation_detected(self, monkeypatch, capsys):
        # injected sign error in hk_rotate must trip the triple-residual
        # checks of the core suite
        import gilab.checks as checks_mod
        import gilab.geom as geom_mod

        def broken(omega_check, bigOmega_check, tol=1e-8):
            om, big = geom_mod.hk_rotate(omega_check, bigOmega_check, tol)
            from gilab.geom import ComplexFormValue
            return om, ComplexFormValue(om.matrix - 1j * (-big.matrix.imag))

        monkeypatch.setattr(checks_mod, "hk_rotate", broken)
        assert run_cli(["check", "core"]) == 1
        out = capsys.readouterr().out
        assert "FAIL" in out and "triple_residuals" in out


class TestEvalCommand:
    def test_semi_flat_w_value(self, capsys):
        rc = run_cli(["eval", "--family", "semi-flat",
                      "--config", str(CONFIGS / "semiflat.cfg"),
                      "--point=-2.0,0.0,0.0,0.0"])
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        header = out[0].split(",")
        row = out[1].split(",")
        # fiber metric block g33 equals W = 0.3141593 for d=1, eps=0.1
        g33 = float(row[header.index("g33")])
        assert g33 == pytest.approx(np.pi * 0.2 / 2.0, abs=1e-9)
        assert float(row[header.index("r1")]) < 1e-10
        assert row[header.index("f_eps")] == ""

    def test_point_outside_chart_exit_1(self, capsys):
        rc = run_cli(["eval", "--family", "semi-flat",
                      "--config", str(CONFIGS / "semiflat.cfg"),
                      "--point=-0.2,0.0,0.0,0.0"])
        assert rc == 1
        assert "ChartDomain" in capsys.readouterr().err

    def test_glued_far_field_f_eps_zero(self, capsys):
        rc = run_cli(["eval", "--family", "glued",
                      "--config", str(CONFIGS / "glued.cfg"),
                      "--point=-1.5,0.3,0.1,0.1"])
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        header = out[0].split(",")
        row = out[1].split(",")
        assert abs(float(row[header.index("f_eps")])) < 1e-12


class TestFitCommand:
    def test_fit_from_csv(self, tmp_path, capsys):
        csv = tmp_path / "data.csv"
        xs = [1.0, 2.0, 4.0, 8.0]
        lines = ["x,y"] + [f"{x},{3.0 * x**2}" for x in xs]
        csv.write_text("\n".join(lines) + "\n")
        rc = run_cli(["fit", "--input", str(csv), "--x", "x", "--y", "y"])
        assert rc == 0
        out = capsys.readouterr().out.strip().splitlines()
        assert float(out[1].split(",")[0]) == pytest.approx(2.0, abs=1e-12)

    def test_schema_mismatch_exit_1(self, tmp_path, capsys):
        csv = tmp_path / "data.csv"
        csv.write_text("a,b\n1,2\n")
        rc = run_cli(["fit", "--input", str(csv), "--x", "x", "--y", "y"])
        assert rc == 1
        assert "SchemaMismatch" in capsys.readouterr().err


class TestPeriodsCommand:
    def test_monodromy_loop(self, tmp_path, capsys):
        out_csv = tmp_path / "per.csv"
        rc = run_cli(["periods", "--config", str(CONFIGS / "periods_loop.cfg"),
                      "--output", str(out_csv)])
        assert rc == 0
        manifest = json.loads((tmp_path / "per.csv.manifest.json").read_text())
        M = np.array(manifest["monodromy"], dtype=int)
        assert int(round(np.linalg.det(M))) == 1
        assert np.trace(M) == 2
        MI = M - np.eye(2, dtype=int)
        assert np.array_equal(MI @ MI, np.zeros((2, 2), dtype=int))
        header = out_csv.read_text().splitlines()[0].split(",")
        assert header == ["z_re", "z_im", "tau_re", "tau_im", "sheet",
                          "nearest_disc_root", "sk_dist_to_root"]

    def test_constant_family_tau_is_i(self, tmp_path):
        out_csv = tmp_path / "per.csv"
        rc = run_cli(["periods", "--config", str(CONFIGS / "periods_const.cfg"),
                      "--output", str(out_csv)])
        assert rc == 0
        lines = out_csv.read_text().strip().splitlines()
        header = lines[0].split(",")
        for line in lines[1:]:
            row = line.split(",")
            tau = complex(float(row[header.index("tau_re")]),
                          float(row[header.index("tau_im")]))
            assert abs(tau - 1j) < 1e-10


@pytest.mark.slow
class TestCollapseCommand:
    def _config(self, tmp_path):
        cfg = tmp_path / "c.cfg"
        cfg.write_text("""
[collapse]
kind = ray
i_start = 3
i_stop = 4
n_points = 260
limit_points = 160
k = 12
seed = 7
""")
        return cfg

    def test_csv_schema_and_determinism(self, tmp_path, capsys):
        cfg = self._config(tmp_path)
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(["collapse", "--config", str(cfg), "--output",
                        str(out1), "--canonical"]) == 0
        assert run_cli(["collapse", "--config", str(cfg), "--output",
                        str(out2), "--canonical"]) == 0
        b1, b2 = out1.read_bytes(), out2.read_bytes()
        assert b1 == b2  # byte-identical under identical (config, seed)
        header = out1.read_text().splitlines()[0]
        assert header == ("i,im_tau,c,eps,gh_lower,gh_upper,fiber_diam_max,"
                          "n_points,seed,runtime_s,error")
        assert (tmp_path / "a.csv.manifest.json").exists()

    def test_seed_changes_bytes(self, tmp_path):
        cfg = self._config(tmp_path)
        cfg2 = tmp_path / "c2.cfg"
        cfg2.write_text(cfg.read_text().replace("seed = 7", "seed = 8"))
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(["collapse", "--config", str(cfg), "--output", str(out1),
                 "--canonical"])
        run_cli(["collapse", "--config", str(cfg2), "--output", str(out2),
                 "--canonical"])
        assert out1.read_bytes() != out2.read_bytes()


class TestEntryPoint:
    def test_console_script(self):
        proc = subprocess.run([sys.executable, "-m", "gilab.cli", "check",
                               "gh"], capture_output=True, text=True)
        assert proc.returncode == 0
        assert "PASS" in proc.stdout
