import json
import math

import pytest

from bandgauss.cli import main
from bandgauss.scenario import SweepScenario, apply_overrides, scenario_from_file
from bandgauss.errors import UsageError


def read_lines(path):
    with open(path, "rb") as f:
        data = f.read()
    assert b"\r" not in data
    return data.decode().splitlines()


class TestScenario:
    def test_defaults_validate(self):
        SweepScenario().validate()

    def test_bad_steps(self):
        with pytest.raises(UsageError, match="tau_steps"):
            SweepScenario(tau_steps=1).validate()

    def test_bad_range(self):
        with pytest.raises(UsageError, match="tau_stop"):
            SweepScenario(tau_start=2.0, tau_stop=1.0).validate()

    def test_empty_list(self):
        with pytest.raises(UsageError, match="r_values"):
            SweepScenario(r_values=()).validate()

    def test_thermal_conflict(self):
        with pytest.raises(UsageError, match="beta"):
            SweepScenario(beta=3.0, low_t=True).validate()

    def test_file_roundtrip(self, tmp_path):
        cfg = tmp_path / "scenario.json"
        cfg.write_text(json.dumps({"tau_stop": 10.0, "tau_steps": 11,
                                   "r": [0.3, 0.7], "beta": 200.0,
                                   "method": "quad"}))
        sc = scenario_from_file(str(cfg)).validate()
        assert sc.tau_stop == 10.0
        assert sc.r_values == (0.3, 0.7)
        assert sc.beta == 200.0 and not sc.low_t
        assert sc.method == "quadrature"

    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "scenario.json"
        cfg.write_text(json.dumps({"tau_halt": 1.0}))
        with pytest.raises(UsageError, match="tau_halt"):
            scenario_from_file(str(cfg))

    def test_overrides_win(self):
        sc = apply_overrides(SweepScenario(), tau_stop=5.0, method="quad")
        assert sc.tau_stop == 5.0
        assert sc.method == "quadrature"


class TestCsvContract:
    def test_fig1_format_and_spot_value(self, tmp_path):
        out = tmp_path / "f1a.csv"
        assert main(["fig1", "--panel", "a", "--out", str(out),
                     "--tau-steps", "40"]) == 0
        lines = read_lines(out)
        assert lines[0] == ("panel,tau,r,j0,delta,omega_lo,"
                            "kappa_secular,kappa_full,method")
        # r = 0.9 block starts at tau = 0: kappa_secular = exp(-1.8)/2
        want = format(0.5 * math.exp(-1.8), ".17g")
        row = [l for l in lines if l.startswith("a,0,0.9")]
        assert len(row) == 1
        fields = row[0].split(",")
        assert fields[6] == want
        assert fields[7] == want  # full channel coincides at tau = 0

    def test_byte_identical_reruns(self, tmp_path):
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["fig2", "--panel", "b", "--tau-steps", "30"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_meta_sidecar(self, tmp_path):
        out = tmp_path / "f2c.csv"
        assert main(["fig2", "--panel", "c", "--out", str(out),
                     "--tau-steps", "20"]) == 0
        meta = json.loads((tmp_path / "f2c.meta").read_text())
        assert meta["log_base"] == "e"
        assert meta["version"]
        assert meta["panel"] == "c"
        assert meta["scenario"]["kappa"] == "paper"

    def test_coefficients_gamma_column(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["coefficients", "--out", str(out), "--tau-max", "2",
                     "--tau-steps", "5"]) == 0
        lines = read_lines(out)
        header = lines[0].split(",")
        last = lines[-1].split(",")
        row = dict(zip(header, last))
        assert row["tau"] == "2"
        assert float(row["gamma_int"]) == pytest.approx(1e-3 * 16.0 / 6.0, rel=1e-14)
        assert float(row["delta_gamma"]) == pytest.approx(2e-3, rel=1e-14)
        assert row["method"] == "closed-form"

    def test_coefficients_zero_row_is_all_zero(self, tmp_path):
        out = tmp_path / "c.csv"
        assert main(["coefficients", "--out", str(out), "--tau-max", "1",
                     "--tau-steps", "3"]) == 0
        lines = read_lines(out)
        header = lines[0].split(",")
        row = dict(zip(header, lines[1].split(",")))
        for key in ("gamma", "delta_coef", "pi_coef", "r_shift", "gamma_int",
                    "delta_gamma", "sec_delta_co", "sec_delta_si",
                    "sec_pi_co", "sec_pi_si"):
            assert row[key] == "0"

    def test_method_flag_switches_route(self, tmp_path):
        out_c = tmp_path / "closed.csv"
        out_q = tmp_path / "quad.csv"
        base = ["coefficients", "--tau-max", "1", "--tau-steps", "4"]
        assert main(base + ["--out", str(out_c), "--method", "closed"]) == 0
        assert main(base + ["--out", str(out_q), "--method", "quad"]) == 0
        c_lines, q_lines = read_lines(out_c), read_lines(out_q)
        assert c_lines[0] == q_lines[0]
        assert c_lines[-1].endswith("closed-form")
        assert q_lines[-1].endswith("quadrature")

    def test_evolve_initial_state(self, tmp_path):
        out = tmp_path / "e.csv"
        assert main(["evolve", "--out", str(out), "--r", "0.5", "--tau-max",
                     "1", "--tau-steps", "2", "--mode", "both"]) == 0
        lines = read_lines(out)
        header = lines[0].split(",")
        row = dict(zip(header, lines[1].split(",")))
        assert float(row["cm_11"]) == pytest.approx(math.cosh(1.0), rel=1e-15)
        assert float(row["cm_13"]) == pytest.approx(math.sinh(1.0), rel=1e-15)
        modes = {l.split(",")[5] for l in lines[1:]}
        assert modes == {"secular", "full"}


class TestFig2:
    def test_sudden_death_rows(self, tmp_path):
        out = tmp_path / "f2a.csv"
        assert main(["fig2", "--panel", "a", "--out", str(out),
                     "--tau-max", "30", "--tau-steps", "200"]) == 0
        lines = read_lines(out)
        summaries = [l for l in lines if l.startswith("sudden_death")]
        assert len(summaries) == 5  # one per squeezing value
        for line in summaries:
            tau_sd = line.split(",")[-1]
            assert tau_sd != ""
            assert float(tau_sd) == pytest.approx(math.sqrt(200.0), rel=0.02)

    def test_none_when_alive_at_horizon(self, tmp_path):
        out = tmp_path / "f2b.csv"
        assert main(["fig2", "--panel", "b", "--out", str(out),
                     "--tau-max", "30", "--tau-steps", "100"]) == 0
        lines = read_lines(out)
        row = [l for l in lines if l.startswith("sudden_death") and ",0.001," in l]
        assert len(row) == 1
        assert row[0].split(",")[-1] == "none"

    def test_negativity_spot_value(self, tmp_path):
        out = tmp_path / "f2a.csv"
        assert main(["fig2", "--panel", "a", "--out", str(out),
                     "--tau-steps", "20"]) == 0
        lines = read_lines(out)
        header = lines[0].split(",")
        row = dict(zip(header, [l for l in lines
                                if l.startswith("point,a,0,1,")][0].split(",")))
        assert float(row["e_n"]) == pytest.approx(4.0 + 2.0 * math.log(2.0),
                                                  abs=1e-12)

    def test_oracle_source_column(self, tmp_path):
        out = tmp_path / "f2c.csv"
        assert main(["fig2", "--panel", "c", "--out", str(out), "--kappa",
                     "oracle", "--mode", "full", "--tau-steps", "12"]) == 0
        lines = read_lines(out)
        assert all(",oracle,full," in l for l in lines[1:])

    def test_parallel_jobs_deterministic(self, tmp_path):
        out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
        args = ["fig2", "--panel", "c", "--tau-steps", "24"]
        assert main(args + ["--out", str(out1)]) == 0
        assert main(args + ["--out", str(out2), "--jobs", "3"]) == 0
        assert out1.read_bytes() == out2.read_bytes()


class TestSweep:
    def test_product_and_modes(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--out", str(out), "--r", "0.5,1.0", "--delta",
                     "0.01", "--kappa", "symmetric", "--mode", "both",
                     "--tau-steps", "10"]) == 0
        lines = read_lines(out)
        points = [l for l in lines if l.startswith("point")]
        assert len(points) == 2 * 2 * 10  # r-values x modes x grid
        summaries = [l for l in lines if l.startswith("sudden_death")]
        assert len(summaries) == 4

    def test_paper_source_collapses_mode(self, tmp_path):
        out = tmp_path / "s.csv"
        assert main(["sweep", "--out", str(out), "--kappa", "paper", "--mode",
                     "both", "--tau-steps", "8"]) == 0
        lines = read_lines(out)
        assert all(",secular," in l for l in lines[1:])

    def test_config_file_with_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"tau_stop": 10.0, "tau_steps": 6,
                                   "r": [0.5], "out": str(tmp_path / "x.csv")}))
        out = tmp_path / "y.csv"
        assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
        assert out.exists()
        lines = read_lines(out)
        assert len([l for l in lines if l.startswith("point")]) == 6


class TestErrors:
    def test_missing_out(self):
        assert main(["fig1", "--panel", "a"]) == 2

    def test_bad_tau_steps(self, tmp_path):
        assert main(["fig1", "--panel", "a", "--out",
                     str(tmp_path / "x.csv"), "--tau-steps", "1"]) == 2

    def test_cli_thermal_conflict_rejected(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["coefficients", "--out", str(tmp_path / "x.csv"),
                  "--low-t", "--beta", "5.0"])

    def test_config_thermal_conflict_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"beta": 5.0, "low_t": True}))
        assert main(["coefficients", "--config", str(cfg), "--out",
                     str(tmp_path / "x.csv")]) == 2

    def test_fig2_both_mode_rejected(self, tmp_path):
        assert main(["fig2", "--panel", "a", "--mode", "both", "--out",
                     str(tmp_path / "x.csv")]) == 2

    def test_invalid_panel(self, tmp_path):
        with pytest.raises(SystemExit):
            main(["fig1", "--panel", "d", "--out", str(tmp_path / "x.csv")])

    def test_regime_warning(self, tmp_path, capsys):
        out = tmp_path / "c.csv"
        assert main(["coefficients", "--out", str(out), "--beta", "5.0",
                     "--tau-max", "0.5", "--tau-steps", "3"]) == 0
        err = capsys.readouterr().err
        assert "low-temperature" in err


class TestVerifyCommand:
    def test_pass_and_csv(self, tmp_path, capsys):
        out = tmp_path / "verify.csv"
        assert main(["verify", "--out", str(out)]) == 0
        stdout = capsys.readouterr().out
        assert "[PASS]" in stdout and "[FAIL]" not in stdout
        lines = read_lines(out)
        assert lines[0].startswith("name,primary,oracle")

    def test_zero_tolerance_fails(self, capsys):
        assert main(["verify", "--tol-scale", "0"]) == 1
        stdout = capsys.readouterr().out
        assert "[PASS]" not in stdout
