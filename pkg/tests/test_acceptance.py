"""Release gates.

Each test wraps one check from nvrf.selftest and re-asserts its
headline numbers at the advertised tolerance, so a failure message
carries the measured values. The battery is intentionally end to end:
numeric stepper against closed forms, spectra against coefficient
series, and the full two-power field reconstruction.
"""

from __future__ import annotations

from nvrf import selftest


def _require(result):
    detail = ", ".join(f"{k}={v}" for k, v in sorted(result.details.items()))
    assert result.passed, f"{result.name} failed: {detail}"
    print(f"PASS {result.name} ({result.elapsed_s:.1f} s) {detail}")


def test_commuting_limit_matches_closed_form():
    r = selftest.check_commuting_limit()
    assert r.details["max_dev_ramsey"] < 1e-6
    assert r.details["max_dev_dd"] < 1e-6
    assert r.elapsed_s < 10.0
    _require(r)


def test_harmonic_comb_ratios():
    r = selftest.check_harmonic_comb()
    for n in (2, 3):
        assert r.details[f"ratio_{n}_rel_err"] < 0.03
    assert r.details["max_freq_dev_mhz"] < 0.01
    _require(r)


def test_quadratic_shift_scaled_splitting():
    r = selftest.check_quadratic_shift_scaled()
    assert r.details["rel_err"] <= 0.05
    assert r.elapsed_s < 120.0
    _require(r)


def test_quadratic_shift_reference_splitting():
    r = selftest.check_quadratic_shift_reference()
    assert r.details["rel_err"] <= 0.10
    _require(r)


def test_two_power_closure():
    r = selftest.check_two_power_closure()
    for key in ("nu_z_mhz", "nu_x_mhz", "nu_dc_mhz"):
        for tag in "ab":
            assert r.details[f"{key}_{tag}_rel_err"] <= 0.05
    for tag in "ab":
        assert 85.0 <= r.details[f"angle_deg_{tag}"] <= 87.0
    _require(r)


def test_amplitude_ratio_below_sqrt_power_law():
    r = selftest.check_amplitude_ratio()
    assert abs(r.details["measured"] - 1.22) <= 0.02
    assert r.details["sqrt_power_law"] - r.details["measured"] > 0.02
    _require(r)


def test_dd_sidebands_split_and_localized():
    r = selftest.check_dd_sidebands()
    for line in ("0+", "1-", "1+", "2-", "2+"):
        assert line in r.details["lines"]
    assert r.details["max_shift_err_mhz"] < 0.01
    _require(r)


def test_noise_calibration_coverage():
    r = selftest.check_noise_calibration()
    assert r.details["frac_within_3sigma"] >= 0.99
    assert 0.60 <= r.details["frac_within_1sigma"] <= 0.75
    assert r.details["n_failed"] == 0
    _require(r)


def test_property_battery():
    r = selftest.check_property_battery()
    _require(r)
