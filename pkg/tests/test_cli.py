import os

import numpy as np
import pytest

from kgpoint.cli import main
from kgpoint.config import ConfigError, config_to_text, parse_config_text
from kgpoint.fields import Grid
from kgpoint.initial import GaussianSpec, gaussian_state
from kgpoint.output import (read_report, read_snapshot_csv, read_spectrum_csv,
                            read_trace_csv, write_report, write_snapshot_csv,
                            write_spectrum_csv, write_trace_csv)
from kgpoint.spectral import Window, windowed_spectrum
from kgpoint.volterra import TraceSeries

BASE_CFG = """
[model]
kind = polynomial
mass = 1.0
coefficients = 0, -1, 1

[grid]
half_extent = 40.0
n_points = 2049

[time]
T = 4.0
dt = 0.01

[initial]
kind = gaussian
amplitude_re = 0.5
width = 1.5

[run]
seed = 7
energy_tol = 0.01

[outputs]
trace = true
snapshots = 0.0, 2.0, 4.0
spectrum_windows = 1.0:4.0
report = true
"""

SOLITARY_CFG = BASE_CFG.replace("kind = gaussian", "kind = solitary").replace(
    "amplitude_re = 0.5\nwidth = 1.5", "C = 0.5\ntheta = 0.0\nbranch = plus").replace(
    "half_extent = 40.0", "half_extent = 66.0").replace(
    "n_points = 2049", "n_points = 4097")

ZERO_CFG = BASE_CFG.replace("kind = gaussian", "kind = zero")


class TestConfig:
    def test_round_trip(self):
        cfg = parse_config_text(BASE_CFG)
        text = config_to_text(cfg)
        cfg2 = parse_config_text(text)
        assert cfg2.model.coefficients == cfg.model.coefficients
        assert cfg2.T == cfg.T and cfg2.dt == cfg.dt
        assert cfg2.initial.kind == "gaussian"
        assert cfg2.snapshots == cfg.snapshots
        assert cfg2.spectrum_windows == cfg.spectrum_windows

    def test_validation_collects_all_violations(self):
        bad = BASE_CFG.replace("mass = 1.0", "mass = -1.0").replace(
            "n_points = 2049", "n_points = 2048").replace("dt = 0.01", "dt = 0.013")
        with pytest.raises(ConfigError) as err:
            parse_config_text(bad)
        msgs = err.value.errors
        assert len(msgs) >= 3
        assert any("mass" in m for m in msgs)
        assert any("n_points" in m for m in msgs)
        assert any("multiple" in m for m in msgs)

    def test_horizon_rule_enforced(self):
        bad = BASE_CFG.replace("T = 4.0", "T = 60.0").replace("dt = 0.01", "dt = 0.01")
        with pytest.raises(ConfigError) as err:
            parse_config_text(bad)
        assert any("horizon" in m for m in err.value.errors)

    def test_linear_outside_window_rejected(self):
        bad = BASE_CFG.replace(
            "kind = polynomial\nmass = 1.0\ncoefficients = 0, -1, 1",
            "kind = linear\nmass = 1.0\na = 2.5")
        with pytest.raises(ConfigError) as err:
            parse_config_text(bad)
        assert any("well-posedness" in m for m in err.value.errors)

    def test_bad_initial_kind(self):
        bad = BASE_CFG.replace("kind = gaussian", "kind = sine")
        with pytest.raises(ConfigError):
            parse_config_text(bad)


class TestRoundTrips:
    def test_trace_csv(self, tmp_path):
        dt = 0.1
        z = np.exp(-1j * 0.3 * np.arange(11) * dt) * 0.37
        trace = TraceSeries(dt=dt, z=z, f=z.copy())
        p = str(tmp_path / "trace.csv")
        write_trace_csv(p, trace, [(0.0, 1.25), (1.0, 1.2501)], [(0.0, 0.4)])
        times, z2, e_rows, q_rows = read_trace_csv(p)
        assert np.array_equal(z2, z)
        assert e_rows == [(0.0, 1.25), (1.0, 1.2501)]
        assert q_rows == [(0.0, 0.4)]

    def test_snapshot_csv(self, tmp_path):
        grid = Grid(5.0, 41)
        st = gaussian_state(grid, GaussianSpec(amplitude=0.3 + 0.1j, width=1.0,
                                               momentum=0.5, omega_bar=0.2))
        st.time = 2.5
        p = str(tmp_path / "snap.csv")
        write_snapshot_csv(p, st)
        back = read_snapshot_csv(p)
        assert back.time == 2.5
        assert back.grid.n_points == 41
        assert np.array_equal(back.psi, st.psi)
        assert np.array_equal(back.pi, st.pi)

    def test_spectrum_csv(self, tmp_path):
        tt = np.arange(0, 20, 0.01)
        trace = TraceSeries(dt=0.01, z=np.exp(-1j * tt), f=None)
        spec = windowed_spectrum(trace, 10.0, 15.0, Window.HANN)
        p = str(tmp_path / "spec.csv")
        write_spectrum_csv(p, spec)
        back = read_spectrum_csv(p)
        assert back.window is Window.HANN
        assert back.t_width == 15.0
        assert np.array_equal(back.freqs, spec.freqs)
        assert np.array_equal(back.amps, spec.amps)

    def test_report_round_trip(self, tmp_path):
        p = str(tmp_path / "report.txt")
        sections = {"solve": {"status": "completed", "steps": "100"},
                    "extra": {"x": "1.5"}}
        write_report(p, sections)
        back = read_report(p)
        assert back == sections
        # byte-stable under rewrite
        p2 = str(tmp_path / "report2.txt")
        write_report(p2, back)
        assert open(p).read() == open(p2).read()


def run_cli(tmp_path, *args):
    return main(["--out", str(tmp_path / "out"), *args])


class TestCommands:
    def test_simulate_zero_data(self, tmp_path):
        cfg = tmp_path / "zero.cfg"
        cfg.write_text(ZERO_CFG)
        code = run_cli(tmp_path, "simulate", "--config", str(cfg))
        assert code == 0
        times, z, e_rows, _ = read_trace_csv(str(tmp_path / "out" / "trace.csv"))
        assert np.max(np.abs(z)) == 0.0
        assert os.path.exists(tmp_path / "out" / "snapshot_t2.000000.csv")
        rep = read_report(str(tmp_path / "out" / "report.txt"))
        assert rep["solve"]["status"] == "completed"

    def test_simulate_deterministic_bytes(self, tmp_path):
        cfg = tmp_path / "g.cfg"
        cfg.write_text(BASE_CFG)
        assert main(["--out", str(tmp_path / "o1"), "simulate", "--config", str(cfg)]) == 0
        assert main(["--out", str(tmp_path / "o2"), "simulate", "--config", str(cfg)]) == 0
        for name in ("trace.csv", "report.txt", "snapshot_t4.000000.csv", "spectrum_0.csv"):
            b1 = (tmp_path / "o1" / name).read_bytes()
            b2 = (tmp_path / "o2" / name).read_bytes()
            assert b1 == b2

    def test_config_failure_exit_code(self, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(BASE_CFG.replace("mass = 1.0", "mass = -2.0"))
        code = run_cli(tmp_path, "simulate", "--config", str(cfg))
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_solitary_table(self, capsys):
        code = main(["solitary", "--u", "0,-1,1", "--mass", "1", "--C", "0.5"])
        assert code == 0
        out = capsys.readouterr().out
        lines = out.strip().splitlines()
        assert lines[0] == "C,kappa,omega"
        rows = [line.split(",") for line in lines[1:]]
        assert len(rows) == 2
        assert float(rows[0][1]) == pytest.approx(0.5)
        assert sorted(abs(float(r[2])) for r in rows) == pytest.approx(
            [np.sqrt(0.75)] * 2)

    def test_solitary_linear_family(self, capsys):
        code = main(["solitary", "--a", "1.0", "--mass", "1",
                     "--omega", str(np.sqrt(0.75))])
        assert code == 0
        assert "continuous family" in capsys.readouterr().out

    def test_spectrum_command(self, tmp_path):
        cfg = tmp_path / "s.cfg"
        cfg.write_text(SOLITARY_CFG)
        assert run_cli(tmp_path, "simulate", "--config", str(cfg)) == 0
        code = main(["--out", str(tmp_path / "spec_out"), "spectrum",
                     "--trace", str(tmp_path / "out" / "trace.csv"),
                     "--t-center", "2.0", "--t-width", "3.0"])
        assert code == 0
        spec = read_spectrum_csv(str(tmp_path / "spec_out" / "spectrum.csv"))
        assert len(spec.freqs) > 0

    def test_compare_command_and_refinement(self, tmp_path):
        # solitary data: both solvers cleanly second order, ratio ~ 4
        sups = []
        for label, n, dt in (("c1", 4097, 0.016), ("c2", 8193, 0.008)):
            text = SOLITARY_CFG.replace("n_points = 4097", f"n_points = {n}").replace(
                "dt = 0.01", f"dt = {dt}").replace(
                "snapshots = 0.0, 2.0, 4.0", "snapshots =").replace(
                "spectrum_windows = 1.0:4.0", "spectrum_windows =")
            cfg = tmp_path / f"{label}.cfg"
            cfg.write_text(text)
            out = tmp_path / f"out_{label}"
            assert main(["--out", str(out), "compare", "--config", str(cfg)]) == 0
            rep = read_report(str(out / "report.txt"))
            sups.append(float(rep["compare"]["sup_diff"]))
        assert sups[0] / sups[1] >= 2.0

    def test_compare_rejects_cfl_violation(self, tmp_path):
        cfg = tmp_path / "cfl.cfg"
        cfg.write_text(BASE_CFG.replace("dt = 0.01", "dt = 0.04").replace(
            "T = 4.0", "T = 4.0"))
        code = run_cli(tmp_path, "compare", "--config", str(cfg))
        assert code == 2

    def test_sweep(self, tmp_path):
        text = BASE_CFG.replace("snapshots = 0.0, 2.0, 4.0", "snapshots =").replace(
            "spectrum_windows = 1.0:4.0", "spectrum_windows =")
        cfg = tmp_path / "t.cfg"
        cfg.write_text(text)
        out = tmp_path / "sweep_out"
        code = main(["--out", str(out), "sweep", "--config", str(cfg),
                     "--vary", "run.seed=1,2", "--workers", "1"])
        assert code == 0
        lines = (out / "sweep.csv").read_text().strip().splitlines()
        assert lines[0].startswith("run.seed,")
        assert len(lines) == 3

    def test_attract(self, tmp_path):
        cfg = tmp_path / "a.cfg"
        cfg.write_text(SOLITARY_CFG)
        out = tmp_path / "att_out"
        code = main(["--out", str(out), "attract", "--config", str(cfg),
                     "--windows", "2"])
        assert code == 0
        rep = read_report(str(out / "report.txt"))
        assert rep["matched_wave"]["kind"] == "solitary"
        assert float(rep["matched_wave"]["c"]) == pytest.approx(0.5, abs=1e-3)
        lines = (out / "attract_windows.csv").read_text().strip().splitlines()
        assert len(lines) == 3

    def test_set_override(self, tmp_path):
        cfg = tmp_path / "o.cfg"
        cfg.write_text(ZERO_CFG)
        out = tmp_path / "ovr"
        code = main(["--out", str(out), "simulate", "--config", str(cfg),
                     "--set", "time.T=2.0", "--set", "outputs.snapshots=0.0",
                     "--set", "outputs.spectrum_windows=0.5:2.0"])
        assert code == 0
        times, _, _, _ = read_trace_csv(str(out / "trace.csv"))
        assert times[-1] == pytest.approx(2.0)
