"""End to end checks of the command line interface.

Every command runs in process through nvrf.cli.main, so exit codes,
written files, and printed output can be asserted without spawning
interpreters. The selftest subcommand is exercised elsewhere.
"""

from __future__ import annotations

import json

import numpy as np
import pytest

from nvrf import dataio
from nvrf.cli import main
from nvrf.model import TimeTrace

# field points reused across pipeline tests: power_mw, nu_z, nu_x, nu_dc
POINT_A = (8.8, 2.66, 35.2, -0.20)
POINT_B = (13.9, 3.24, 44.0, -0.25)


def _simulate(out, point, tau_points=900, tau_max=30.0, extra=()):
    power_mw, nu_z, nu_x, nu_dc = point
    argv = [
        "simulate",
        "--nu-z", str(nu_z),
        "--nu-x", str(nu_x),
        "--nu-dc", str(nu_dc),
        "--nu-rf", "2.0",
        "--phi0", "0.9",
        "--power-mw", str(power_mw),
        "--tau-min", "0.02",
        "--tau-max", str(tau_max),
        "--tau-points", str(tau_points),
        "--out", str(out),
    ]
    argv.extend(extra)
    return main(argv)


class TestPipeline:
    def test_two_power_reconstruction(self, tmp_path, capsys):
        fit_paths = {}
        for tag, point in (("a", POINT_A), ("b", POINT_B)):
            trace_path = tmp_path / f"trace_{tag}.csv"
            assert _simulate(trace_path, point) == 0
            fit_path = tmp_path / f"fit_{tag}.json"
            assert main(["fit", str(trace_path), "--out", str(fit_path)]) == 0
            fit_paths[tag] = fit_path

        summary_path = tmp_path / "summary.json"
        rc = main([
            "report",
            "--fit-a", str(fit_paths["a"]),
            "--fit-b", str(fit_paths["b"]),
            "--nu-transition", "2475.151",
            "--out", str(summary_path),
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "longitudinal amplitude" in out
        assert "amplitude ratio" in out

        summary = json.loads(summary_path.read_text())
        # clean traces pin the oscillation amplitude, so nu_z is exact
        assert summary["nu_z_mhz"][0] == pytest.approx(2.66, rel=1e-6)
        assert summary["nu_z_mhz"][1] == pytest.approx(3.24, rel=1e-6)
        # the two-power separation carries model error, keep these loose
        assert summary["nu_x_mhz"][0] == pytest.approx(35.2, rel=0.05)
        assert summary["nu_x_mhz"][1] == pytest.approx(44.0, rel=0.05)
        assert summary["nu_dc_mhz"][0] == pytest.approx(-0.20, rel=0.05)
        assert summary["nu_dc_mhz"][1] == pytest.approx(-0.25, rel=0.05)
        for angle in summary["angle_deg"]:
            assert 85.0 < angle < 87.0

    def test_fit_prints_parameters(self, tmp_path, capsys):
        trace_path = tmp_path / "t.csv"
        assert _simulate(trace_path, POINT_A, tau_points=600) == 0
        assert main(["fit", str(trace_path)]) == 0
        out = capsys.readouterr().out
        assert "alpha = " in out
        assert "shift_mhz = " in out
        assert "chi2_red = n/a" in out

    def test_spectrum_writes_bins_and_peaks(self, tmp_path, capsys):
        trace_path = tmp_path / "t.csv"
        assert _simulate(trace_path, POINT_A, tau_points=800) == 0
        spec_path = tmp_path / "spec.csv"
        peaks_path = tmp_path / "peaks.csv"
        rc = main([
            "spectrum", str(trace_path),
            "--out", str(spec_path),
            "--peaks", str(peaks_path),
        ])
        assert rc == 0
        out = capsys.readouterr().out
        assert "n branch freq_mhz" in out

        spec = dataio.read_spectrum(spec_path)
        assert spec.window == "rect"
        assert spec.freq_mhz.size > 800

        labels = {(a.n, a.branch) for a in dataio.read_peaks(peaks_path)}
        assert (1, "+") in labels
        assert (1, "-") in labels
        assert any(n == 2 for n, _ in labels)

    def test_peaks_without_carrier_rejected(self, tmp_path):
        # trace meta without nu_rf and no flag: peaks cannot be labeled
        tau = np.linspace(0.02, 10.0, 200)
        pops = 0.5 * (1.0 + np.cos(2.0 * np.pi * 0.7 * tau))
        trace_path = tmp_path / "bare.csv"
        dataio.write_trace(trace_path, TimeTrace(tau, pops, meta={}))
        rc = main(["spectrum", str(trace_path), "--peaks", str(tmp_path / "p.csv")])
        assert rc == 2

    @pytest.mark.usefixtures("_warm_propagator")
    def test_numeric_engine_smoke(self, tmp_path, capsys):
        trace_path = tmp_path / "num.csv"
        rc = main([
            "simulate",
            "--engine", "numeric",
            "--nu-transition", "200.0",
            "--spectator-factor", "2.0",
            "--nu-z", "1.0",
            "--nu-x", "5.0",
            "--nu-dc", "-0.1",
            "--phi0", "0.4",
            "--nu-rf", "2.0",
            "--tau-min", "0.1",
            "--tau-max", "1.0",
            "--tau-points", "4",
            "--out", str(trace_path),
        ])
        assert rc == 0
        trace = dataio.read_trace(trace_path)
        assert trace.meta["engine"] == "numeric"
        assert trace.n == 4
        assert np.all(trace.population >= 0.0)
        assert np.all(trace.population <= 1.0)

    def test_noisy_simulate_attaches_sigma(self, tmp_path):
        trace_path = tmp_path / "noisy.csv"
        rc = _simulate(
            trace_path, POINT_A, tau_points=50, tau_max=5.0,
            extra=["--noise", "--shots", "20000", "--seed", "7"],
        )
        assert rc == 0
        trace = dataio.read_trace(trace_path)
        assert trace.sigma is not None
        assert np.all(trace.sigma > 0.0)


class TestConfig:
    def test_flag_overrides_config(self, tmp_path):
        out_cfg = tmp_path / "from_config.csv"
        cfg = tmp_path / "sim.yaml"
        cfg.write_text(
            "nu_z: 1.0\nnu_rf: 2.0\nphi0: 0.3\n"
            f"tau_points: 40\ntau_max: 4.0\nout: {out_cfg}\n"
        )
        out_flag = tmp_path / "from_flag.csv"
        rc = main([
            "simulate", "--config", str(cfg),
            "--nu-z", "2.5", "--out", str(out_flag),
        ])
        assert rc == 0
        assert dataio.read_trace(out_flag).meta["nu_z"] == 2.5

        # without flags the config values apply as given
        assert main(["simulate", "--config", str(cfg)]) == 0
        trace = dataio.read_trace(out_cfg)
        assert trace.meta["nu_z"] == 1.0
        assert trace.n == 40

    def test_unknown_config_key_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "bad.yaml"
        cfg.write_text("nu_zz: 1.0\nout: unused.csv\n")
        assert main(["simulate", "--config", str(cfg)]) == 2
        assert "unknown config keys" in capsys.readouterr().err

    def test_bad_engine_via_config_rejected(self, tmp_path, capsys):
        cfg = tmp_path / "eng.yaml"
        cfg.write_text(f"engine: magic\nout: {tmp_path / 'x.csv'}\n")
        assert main(["simulate", "--config", str(cfg)]) == 2
        assert "engine" in capsys.readouterr().err

    def test_missing_config_file(self, tmp_path, capsys):
        rc = main(["simulate", "--config", str(tmp_path / "none.yaml")])
        assert rc == 2


class TestExitCodes:
    def test_missing_trace_is_io_failure(self, tmp_path, capsys):
        rc = main(["fit", str(tmp_path / "none.csv")])
        assert rc == 3

    def test_invalid_grid_is_validation_error(self, tmp_path, capsys):
        rc = main([
            "simulate", "--tau-points", "1", "--out", str(tmp_path / "x.csv"),
        ])
        assert rc == 2

    def test_missing_output_path(self, capsys):
        assert main(["simulate", "--nu-z", "1.0"]) == 2
        assert "output path" in capsys.readouterr().err

    def test_short_trace_fit_is_validation_error(self, tmp_path, capsys):
        tau = np.linspace(0.1, 1.0, 6)
        trace = TimeTrace(tau, np.full(6, 0.5), meta={"nu_rf": 2.0})
        path = tmp_path / "short.csv"
        dataio.write_trace(path, trace)
        assert main(["fit", str(path)]) == 2

    def test_unfittable_noise_is_convergence_error(self, tmp_path, capsys):
        rng = np.random.default_rng(3)
        tau = np.linspace(0.1, 20.0, 80)
        trace = TimeTrace(tau, rng.uniform(0.0, 1.0, 80), meta={"nu_rf": 2.0})
        path = tmp_path / "noise.csv"
        dataio.write_trace(path, trace)
        assert main(["fit", str(path)]) == 5
