import json
import math

import numpy as np
import pytest

from nvrf import (
    FileFormatError,
    FitResult,
    IoFailure,
    TimeTrace,
    build_dd,
    build_ramsey,
    fit_trace,
    find_peaks,
    read_fit,
    read_peaks,
    read_sequence,
    read_spectrum,
    read_trace,
    spectrum,
    write_fit,
    write_peaks,
    write_sequence,
    write_spectrum,
    write_summary,
    write_trace,
)
from nvrf.spectral import assign_harmonics


def _trace(with_sigma=True):
    tau = (np.arange(40) + 1) * 0.05
    pops = 0.5 + 0.3 * np.cos(2.0 * math.pi * 2.05 * tau + 0.4)
    sigma = np.full(40, 0.01) if with_sigma else None
    meta = {
        "nu_rf": 2.0,
        "protocol": "ramsey",
        "seed": 3,
        "t2_star": math.inf,
        "noisy": True,
        "tag": "unit",
    }
    return TimeTrace(tau, pops, sigma, meta=meta)


class TestTraceFiles:
    def test_round_trip_with_sigma(self, tmp_path):
        trace = _trace()
        path = tmp_path / "t.csv"
        write_trace(path, trace)
        back = read_trace(path)
        assert np.array_equal(back.tau_us, trace.tau_us)
        assert np.array_equal(back.population, trace.population)
        assert np.array_equal(back.sigma, trace.sigma)
        assert back.meta == trace.meta

    def test_round_trip_without_sigma(self, tmp_path):
        trace = _trace(with_sigma=False)
        path = tmp_path / "t.csv"
        write_trace(path, trace)
        back = read_trace(path)
        assert back.sigma is None
        assert np.array_equal(back.population, trace.population)

    def test_full_float_precision(self, tmp_path):
        tau = np.array([0.1, 0.2 + 1e-13, 0.3])
        tau = np.array([1.0, 2.0, 3.0]) * (1.0 / 3.0)
        pops = np.array([0.1234567890123456, 1.0 / 7.0, 0.9999999999999999])
        trace = TimeTrace(tau, pops)
        path = tmp_path / "t.csv"
        write_trace(path, trace)
        back = read_trace(path)
        assert np.array_equal(back.tau_us, trace.tau_us)
        assert np.array_equal(back.population, trace.population)

    def test_missing_column(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("# nu_rf=2.0\ntau_us,pop\n0.1,0.5\n0.2,0.5\n")
        with pytest.raises(FileFormatError):
            read_trace(path)

    def test_corrupt_cell(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("tau_us,population\n0.1,0.5\n0.2,oops\n")
        with pytest.raises(FileFormatError):
            read_trace(path)

    def test_missing_file(self):
        with pytest.raises(IoFailure):
            read_trace("/does/not/exist.csv")

    def test_unwritable_path(self):
        with pytest.raises(IoFailure):
            write_trace("/does/not/exist/t.csv", _trace())


class TestSpectrumFiles:
    def test_round_trip(self, tmp_path):
        spec = spectrum(_trace(with_sigma=False), window="hann", pad_factor=4)
        path = tmp_path / "s.csv"
        write_spectrum(path, spec)
        back = read_spectrum(path)
        assert np.array_equal(back.freq_mhz, spec.freq_mhz)
        assert np.array_equal(back.magnitude, spec.magnitude)
        assert back.window == "hann"
        assert back.pad_factor == 4
        assert back.n_samples == spec.n_samples
        assert back.meta == spec.meta


class TestPeakFiles:
    def test_round_trip(self, tmp_path):
        spec = spectrum(_trace(with_sigma=False), window="hann", pad_factor=8)
        assigned = assign_harmonics(find_peaks(spec, threshold=0.2), 2.0)
        assert assigned, "need at least one assigned line for the test"
        path = tmp_path / "p.csv"
        write_peaks(path, assigned, meta={"nu_rf": 2.0, "threshold": 0.2})
        back = read_peaks(path)
        assert len(back) == len(assigned)
        for a, b in zip(assigned, back):
            assert a.n == b.n and a.branch == b.branch
            assert a.freq_mhz == b.freq_mhz
            assert a.magnitude == b.magnitude
            assert a.shift_mhz == b.shift_mhz


class TestFitFiles:
    def test_round_trip(self, tmp_path, trace_a):
        fit = fit_trace(trace_a, protocol="ramsey")
        path = tmp_path / "f.json"
        write_fit(path, fit)
        back = read_fit(path)
        assert isinstance(back, FitResult)
        for k, v in fit.params.items():
            assert back.params[k] == pytest.approx(v, abs=0.0)
        assert back.chi2_red == fit.chi2_red
        assert back.init_source == fit.init_source
        assert back.shift_sign_ambiguous == fit.shift_sign_ambiguous
        # infinite t2_star in the meta survives the JSON round trip
        assert back.meta["t2_star"] == fit.meta["t2_star"]

    def test_corrupt_json(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text("{not json")
        with pytest.raises(FileFormatError):
            read_fit(path)

    def test_missing_keys(self, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"params": {}}))
        with pytest.raises(FileFormatError):
            read_fit(path)


class TestSequenceFiles:
    def test_round_trip_ramsey(self, tmp_path):
        seq = build_ramsey(1.3)
        path = tmp_path / "seq.json"
        write_sequence(path, seq)
        assert read_sequence(path) == seq

    def test_round_trip_dd(self, tmp_path):
        seq = build_dd(2.0, tau_pad=0.41)
        path = tmp_path / "seq.json"
        write_sequence(path, seq)
        assert read_sequence(path) == seq


class TestSummary:
    def test_written_with_nine_digits(self, tmp_path):
        path = tmp_path / "summary.txt"
        write_summary(path, {"alpha": 1.3300000001234, "note": "two-power run"})
        text = path.read_text()
        assert "1.33" in text
        assert "two-power run" in text
