"""End-to-end checks runnable from the command line (`nvrf selftest`).

Each check exercises one guaranteed behavior of the package at its
stated tolerance and returns a CheckResult with the measured numbers, so
a failure shows how far off the quantity landed. The numeric kernel is
warmed up before timed sections; compilation is a one-time environment
cost, not simulation work.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .analytic import (
    PhaseModelParams,
    harmonic_decomposition,
    phase_longitudinal,
    phase_params_for,
    population_dd,
    population_ramsey,
)
from .bessel import bessel_jn
from .errors import SensorError
from .estimation import (
    PARAM_NAMES,
    amplitude_ratio_check,
    canonicalize,
    fit_trace,
    model_jacobian,
    model_population,
    two_power_summary,
)
from .model import DEFAULT_NU_TRANSITION_MHZ, DEFAULT_T2_STAR_US, RfFieldParams, SpinSystem, TimeTrace
from .noise import ReadoutModel, sample_trace
from .propagator import (
    PropagationConfig,
    StaticHamiltonian,
    auto_config,
    evolve,
    measure_numeric_shift,
    simulate_populations,
)
from .sequence import build_dd, build_ramsey, validate_sequence
from .spectral import assign_harmonics, find_peaks, spectrum
from . import dataio

NU_RF = 2.0

# Reference operating points for the closure checks: two drive powers
# with their per-component field amplitudes (MHz, mW).
POINT_A = {"power_mw": 8.8, "nu_z": 2.66, "nu_x": 35.2, "nu_dc": -0.20}
POINT_B = {"power_mw": 13.9, "nu_z": 3.24, "nu_x": 44.0, "nu_dc": -0.25}


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    elapsed_s: float = 0.0


_WARMED = False


def _warm_kernel() -> None:
    """Trigger compilation of the step kernel on a tiny problem."""
    global _WARMED
    if _WARMED:
        return
    static = StaticHamiltonian.for_transition(50.0)
    for nu_x in (0.0, 1.0):
        f = RfFieldParams(nu_z=1.0, nu_x=nu_x, nu_rf=2.0, phi0=0.3, nu_dc=0.1)
        for frame in ("rotating", "lab"):
            cfg = auto_config(static, f, frame=frame)
            evolve(static, f, build_ramsey(0.05), cfg)
    _WARMED = True


def _finish(name: str, passed: bool, details: dict, t0: float) -> CheckResult:
    rounded = {}
    for key, value in details.items():
        if isinstance(value, float):
            rounded[key] = float(f"{value:.6g}")
        else:
            rounded[key] = value
    return CheckResult(name=name, passed=passed, details=rounded, elapsed_s=time.perf_counter() - t0)


def check_commuting_limit() -> CheckResult:
    """Longitudinal-only drive: stepper matches the closed form to 1e-6."""
    _warm_kernel()
    t0 = time.perf_counter()
    f = RfFieldParams(nu_z=2.66, nu_x=0.0, nu_rf=NU_RF, phi0=0.7, nu_dc=-0.2)
    system = SpinSystem(nu_transition=DEFAULT_NU_TRANSITION_MHZ)
    static = StaticHamiltonian.for_transition(system.nu_transition)
    cfg = auto_config(static, f, frame="rotating")
    tau = np.linspace(0.0, 3.0, 301)

    num_r = simulate_populations(static, f, tau, cfg, "ramsey")
    ana_r = population_ramsey(phase_params_for(f, system, "ramsey"), f, 1, tau, math.inf)
    dev_r = float(np.max(np.abs(num_r - ana_r)))

    tau_pad = 0.37
    num_d = simulate_populations(static, f, tau, cfg, "dd", tau_pad=tau_pad)
    ana_d = population_dd(phase_params_for(f, system, "dd", tau_pad=tau_pad), f, 1, tau)
    dev_d = float(np.max(np.abs(num_d - ana_d)))

    elapsed = time.perf_counter() - t0
    passed = dev_r < 1e-6 and dev_d < 1e-6 and elapsed < 10.0
    return _finish(
        "commuting-limit",
        passed,
        {"max_dev_ramsey": dev_r, "max_dev_dd": dev_d, "budget_s": 10.0},
        t0,
    )


def check_harmonic_comb() -> CheckResult:
    """Line ratios of the harmonic comb match the coefficient series to 3%."""
    t0 = time.perf_counter()
    f = RfFieldParams(nu_z=2.66, nu_x=0.0, nu_rf=NU_RF, phi0=0.0, nu_dc=0.0)
    params = PhaseModelParams.from_rates(1.33, 0.0, 0.0)
    tau = (np.arange(600) + 1) * 0.05
    pops = population_ramsey(params, f, 1, tau, math.inf)
    trace = TimeTrace(tau, pops, meta={"nu_rf": NU_RF})
    spec = spectrum(trace, window="rect", pad_factor=8)
    assigned = assign_harmonics(find_peaks(spec, threshold=0.04), NU_RF)

    mags = {a.n: a.magnitude for a in assigned}
    freq_dev = max((abs(a.freq_mhz - a.n * NU_RF) for a in assigned), default=math.inf)
    have = all(n in mags for n in (1, 2, 3))
    details: dict = {"found": sorted(mags), "max_freq_dev_mhz": float(freq_dev)}
    # sub-bin localization; neighboring-line leakage bounds it well
    # below the 1/30 MHz raw grid but not at machine precision
    passed = have and freq_dev < 0.01
    if have:
        dec = harmonic_decomposition(1.33, 0.0)
        for n in (2, 3):
            want = abs(dec.cos_coeff[n] / dec.cos_coeff[1])
            got = mags[n] / mags[1]
            rel = abs(got - want) / want
            details[f"ratio_{n}_over_1"] = got
            details[f"ratio_{n}_expected"] = want
            details[f"ratio_{n}_rel_err"] = rel
            passed = passed and rel < 0.03
    return _finish("harmonic-comb", passed, details, t0)


def check_quadratic_shift_scaled() -> CheckResult:
    """Transverse drive at a reduced splitting shifts by nu_x^2/(2 nu_t) +- 5%."""
    _warm_kernel()
    t0 = time.perf_counter()
    static = StaticHamiltonian.for_transition(200.0)
    f = RfFieldParams(nu_z=0.0, nu_x=10.0, nu_rf=NU_RF, phi0=0.3, nu_dc=0.0)
    cfg = auto_config(static, f, frame="lab")
    tau = np.linspace(0.0, 6.0, 25)
    m = measure_numeric_shift(static, f, tau, cfg, protocol="ramsey")
    expected = 10.0**2 / (2.0 * 200.0)
    rel = abs(m.shift_mhz - expected) / expected
    elapsed = time.perf_counter() - t0
    passed = rel <= 0.05 and elapsed < 120.0
    return _finish(
        "quadratic-shift-scaled",
        passed,
        {"measured_mhz": m.shift_mhz, "expected_mhz": expected, "rel_err": rel, "budget_s": 120.0},
        t0,
    )


def check_quadratic_shift_reference() -> CheckResult:
    """Same check at the reference transition and amplitude, +- 10%."""
    _warm_kernel()
    t0 = time.perf_counter()
    static = StaticHamiltonian.for_transition(DEFAULT_NU_TRANSITION_MHZ)
    f = RfFieldParams(nu_z=0.0, nu_x=35.2, nu_rf=NU_RF, phi0=0.3, nu_dc=0.0)
    cfg = auto_config(static, f, frame="lab")
    tau = np.linspace(0.0, 3.0, 16)
    m = measure_numeric_shift(static, f, tau, cfg, protocol="ramsey")
    expected = 35.2**2 / (2.0 * DEFAULT_NU_TRANSITION_MHZ)
    rel = abs(m.shift_mhz - expected) / expected
    passed = rel <= 0.10
    return _finish(
        "quadratic-shift-reference",
        passed,
        {"measured_mhz": m.shift_mhz, "expected_mhz": expected, "rel_err": rel},
        t0,
    )


def _clean_trace(
    point: dict, tau: np.ndarray, phi0: float = 0.9, protocol: str = "ramsey"
) -> TimeTrace:
    f = RfFieldParams(
        nu_z=point["nu_z"],
        nu_x=point["nu_x"],
        nu_rf=NU_RF,
        phi0=phi0,
        nu_dc=point["nu_dc"],
        power_mw=point["power_mw"],
    )
    system = SpinSystem(nu_transition=DEFAULT_NU_TRANSITION_MHZ, t2_star=DEFAULT_T2_STAR_US)
    params = phase_params_for(f, system, protocol)
    if protocol == "ramsey":
        pops = population_ramsey(params, f, 1, tau, system.t2_star)
        t2_star = system.t2_star
    else:
        pops = population_dd(params, f, 1, tau)
        t2_star = math.inf
    meta = {
        "protocol": protocol,
        "nu_rf": NU_RF,
        "phi0": phi0,
        "t2_star": t2_star,
        "power_mw": point["power_mw"],
    }
    return TimeTrace(tau, np.asarray(pops), meta=meta)


_FIT_CACHE: dict = {}


def _reference_fits(protocol: str = "ramsey"):
    if protocol not in _FIT_CACHE:
        tau = np.linspace(0.02, 30.0, 1500)
        fits = tuple(
            fit_trace(_clean_trace(point, tau, protocol=protocol), protocol=protocol)
            for point in (POINT_A, POINT_B)
        )
        _FIT_CACHE[protocol] = fits
    return _FIT_CACHE[protocol]


def check_two_power_closure() -> CheckResult:
    """Round trip field -> echo traces -> fits -> reconstruction within 5%."""
    t0 = time.perf_counter()
    fit_a, fit_b = _reference_fits("dd")
    summary = two_power_summary(fit_a, fit_b, DEFAULT_NU_TRANSITION_MHZ)
    details: dict = {}
    passed = True
    for i, point in enumerate((POINT_A, POINT_B)):
        tag = "ab"[i]
        for key, target in (
            ("nu_z_mhz", point["nu_z"]),
            ("nu_x_mhz", point["nu_x"]),
            ("nu_dc_mhz", point["nu_dc"]),
        ):
            got = summary[key][i]
            rel = abs(got - target) / abs(target)
            details[f"{key}_{tag}"] = got
            details[f"{key}_{tag}_rel_err"] = rel
            passed = passed and rel <= 0.05
        angle = summary["angle_deg"][i]
        details[f"angle_deg_{tag}"] = angle
        passed = passed and 85.0 <= angle <= 87.0
    return _finish("two-power-closure", passed, details, t0)


def check_amplitude_ratio() -> CheckResult:
    """Fitted oscillation amplitudes give 1.22 +- 0.02, below the sqrt-power 1.26."""
    t0 = time.perf_counter()
    fit_a, fit_b = _reference_fits("ramsey")
    check = amplitude_ratio_check(
        fit_a.alpha, fit_b.alpha, POINT_A["power_mw"], POINT_B["power_mw"]
    )
    passed = (
        abs(check.measured - 1.22) <= 0.02
        and abs(check.expected - math.sqrt(POINT_B["power_mw"] / POINT_A["power_mw"])) < 1e-12
        and check.expected - check.measured > 0.02
    )
    return _finish(
        "amplitude-ratio",
        passed,
        {
            "measured": check.measured,
            "sqrt_power_law": check.expected,
            "rel_dev": check.rel_dev,
        },
        t0,
    )


def check_dd_sidebands() -> CheckResult:
    """Echo-protocol spectrum shows split lines at n*2 +- 0.05 MHz, sub-bin."""
    t0 = time.perf_counter()
    f = RfFieldParams(nu_z=2.66, nu_x=0.0, nu_rf=NU_RF, phi0=0.9, nu_dc=0.0)
    params = PhaseModelParams.from_rates(1.33, 0.05, 0.4)
    tau = (np.arange(3000) + 1) * 0.02
    pops = population_dd(params, f, 1, tau)
    trace = TimeTrace(tau, pops, meta={"nu_rf": NU_RF})
    spec = spectrum(trace, window="rect", pad_factor=8)
    assigned = assign_harmonics(find_peaks(spec, threshold=0.04), NU_RF)

    wanted = {(0, "+"), (1, "-"), (1, "+"), (2, "-"), (2, "+")}
    seen = {}
    for a in assigned:
        seen[(a.n, a.branch)] = a.shift_mhz
    details: dict = {"lines": sorted(f"{n}{b}" for n, b in seen)}
    passed = wanted <= set(seen)
    worst = 0.0
    for key in wanted:
        if key in seen:
            err = abs(seen[key] - 0.05)
            worst = max(worst, err)
            passed = passed and err < 0.01
    details["max_shift_err_mhz"] = worst
    return _finish("dd-sidebands", passed, details, t0)


def check_noise_calibration(n_runs: int = 200) -> CheckResult:
    """Fitted alpha errors are sized by the reported uncertainties."""
    t0 = time.perf_counter()
    tau = np.linspace(0.05, 20.0, 400)
    clean = _clean_trace(POINT_A, tau)
    truth_alpha = POINT_A["nu_z"] / NU_RF
    model = ReadoutModel()
    within1 = within3 = failures = 0
    for seed in range(n_runs):
        noisy = sample_trace(clean, model, seed=seed)
        try:
            fit = fit_trace(noisy, protocol="ramsey", nu_rf=NU_RF, t2_star=DEFAULT_T2_STAR_US)
        except SensorError:
            failures += 1
            continue
        z = abs(fit.alpha - truth_alpha) / fit.sigma["alpha"]
        within1 += z <= 1.0
        within3 += z <= 3.0
    frac1 = within1 / n_runs
    frac3 = within3 / n_runs
    passed = frac3 >= 0.99 and 0.60 <= frac1 <= 0.75
    return _finish(
        "noise-calibration",
        passed,
        {"frac_within_1sigma": frac1, "frac_within_3sigma": frac3, "n_failed": failures, "n_runs": n_runs},
        t0,
    )


def _battery_series(rng: np.random.Generator) -> float:
    worst = 0.0
    x = np.linspace(0.0, 4.0 * math.pi, 181)
    for _ in range(40):
        alpha = rng.uniform(-6.0, 6.0)
        phi0 = rng.uniform(0.0, 2.0 * math.pi)
        dec = harmonic_decomposition(alpha, phi0)
        exact = np.cos(alpha * (np.cos(x) - math.cos(phi0)))
        worst = max(worst, float(np.max(np.abs(dec.evaluate(x) - exact))))
    return worst


def _battery_bessel() -> float:
    worst = 0.0
    for x in (0.3, 2.5, 7.7, 19.5):
        # order 90 makes the normalization tail negligible at x <= 20
        j = bessel_jn(90, x)
        n = np.arange(1, 40)
        rec = j[n - 1] + j[n + 1] - (2.0 * n / x) * j[n]
        worst = max(worst, float(np.max(np.abs(rec))))
        total = j[0] + 2.0 * np.sum(j[2::2])
        worst = max(worst, abs(total - 1.0))
    return worst


def _battery_parseval(rng: np.random.Generator) -> float:
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(64, 301))
        tau = (np.arange(n) + 1) * 0.04
        pops = rng.uniform(0.0, 1.0, n)
        trace = TimeTrace(tau, pops)
        for window in ("rect", "hann"):
            for pad in (1, 8):
                spec = spectrum(trace, window=window, pad_factor=pad)
                x = pops - pops.mean()
                if window == "hann":
                    x = x * np.hanning(n)
                energy = float(np.sum(x**2))
                got = float(np.sum(spec.magnitude**2))
                worst = max(worst, abs(got - energy) / energy)
    return worst


def _battery_unitarity(rng: np.random.Generator) -> float:
    _warm_kernel()
    worst = 0.0
    static = StaticHamiltonian.for_transition(50.0, spectator_factor=2.0)
    for _ in range(10):
        f = RfFieldParams(
            nu_z=rng.uniform(0.0, 3.0),
            nu_x=rng.uniform(0.0, 3.0),
            nu_rf=rng.uniform(0.5, 3.0),
            phi0=rng.uniform(0.0, 2.0 * math.pi),
            nu_dc=rng.uniform(-0.3, 0.3),
        )
        frame = "lab" if rng.integers(2) else "rotating"
        cfg = auto_config(static, f, frame=frame)
        seq = build_dd(rng.uniform(0.3, 1.5), tau_pad=rng.uniform(0.0, 0.8))
        psi = evolve(static, f, seq, cfg)
        worst = max(worst, abs(float(np.linalg.norm(psi)) - 1.0))
    return worst


def _battery_frames(rng: np.random.Generator) -> float:
    _warm_kernel()
    worst = 0.0
    static = StaticHamiltonian.for_transition(50.0, spectator_factor=2.0)
    for _ in range(3):
        f = RfFieldParams(
            nu_z=rng.uniform(0.5, 2.0),
            nu_x=rng.uniform(1.0, 5.0),
            nu_rf=2.0,
            phi0=rng.uniform(0.0, 2.0 * math.pi),
            nu_dc=rng.uniform(-0.2, 0.2),
        )
        tau = np.array([0.4, 0.9, 1.7])
        pops = {}
        for frame in ("rotating", "lab"):
            cfg = auto_config(static, f, frame=frame, points_per_cycle=160)
            pops[frame] = simulate_populations(static, f, tau, cfg, "ramsey")
        worst = max(worst, float(np.max(np.abs(pops["rotating"] - pops["lab"]))))
    return worst


def _battery_canonical(rng: np.random.Generator) -> float:
    worst = 0.0
    tau = np.linspace(0.05, 12.0, 120)
    for _ in range(100):
        params = {
            "alpha": rng.uniform(-4.0, 4.0),
            "shift_mhz": rng.uniform(-1.0, 1.0),
            "delta": rng.uniform(-7.0, 7.0),
            "phi0": rng.uniform(-7.0, 7.0),
            "scale": rng.choice([-1.0, 1.0]) * rng.uniform(0.2, 2.0),
            "offset": rng.uniform(-1.0, 1.0),
        }
        canon = canonicalize(params)
        assert canon["alpha"] >= 0.0 and canon["scale"] >= 0.0
        assert 0.0 <= canon["phi0"] < math.pi
        assert -math.pi < canon["delta"] <= math.pi
        again = canonicalize(canon)
        for key in PARAM_NAMES:
            worst = max(worst, abs(again[key] - canon[key]))
        for protocol, t2 in (("ramsey", 14.0), ("dd", math.inf)):
            x0 = np.array([params[k] for k in PARAM_NAMES])
            x1 = np.array([canon[k] for k in PARAM_NAMES])
            p0 = model_population(x0, tau, protocol, 2.0, t2)
            p1 = model_population(x1, tau, protocol, 2.0, t2)
            worst = max(worst, float(np.max(np.abs(p0 - p1))))
    return worst


def _battery_jacobian(rng: np.random.Generator) -> float:
    worst = 0.0
    tau = np.linspace(0.1, 8.0, 60)
    for protocol, t2 in (("ramsey", 9.0), ("dd", math.inf)):
        for _ in range(5):
            x = np.array(
                [
                    rng.uniform(0.2, 2.5),
                    rng.uniform(-0.5, 0.5),
                    rng.uniform(-2.0, 2.0),
                    rng.uniform(0.0, math.pi),
                    rng.uniform(0.5, 1.5),
                    rng.uniform(-0.3, 0.3),
                ]
            )
            jac = model_jacobian(x, tau, protocol, 2.0, t2)
            for k in range(x.size):
                h = 1e-6 * max(1.0, abs(x[k]))
                xp = x.copy()
                xm = x.copy()
                xp[k] += h
                xm[k] -= h
                fd = (
                    model_population(xp, tau, protocol, 2.0, t2)
                    - model_population(xm, tau, protocol, 2.0, t2)
                ) / (2.0 * h)
                worst = max(worst, float(np.max(np.abs(jac[:, k] - fd))))
    return worst


def _battery_io(tmpdir, rng: np.random.Generator) -> float:
    from pathlib import Path

    worst = 0.0
    base = Path(tmpdir)
    for i in range(5):
        n = int(rng.integers(16, 64))
        tau = (np.arange(n) + 1) * float(rng.uniform(0.01, 0.1))
        pops = rng.uniform(0.0, 1.0, n)
        sigma = rng.uniform(0.001, 0.1, n) if i % 2 else None
        trace = TimeTrace(tau, pops, sigma, meta={"nu_rf": 2.0, "seed": i, "protocol": "ramsey"})
        path = base / f"trace_{i}.csv"
        dataio.write_trace(path, trace)
        back = dataio.read_trace(path)
        same = (
            np.array_equal(back.tau_us, trace.tau_us)
            and np.array_equal(back.population, trace.population)
            and (back.sigma is None) == (trace.sigma is None)
            and (back.sigma is None or np.array_equal(back.sigma, trace.sigma))
            and back.meta == trace.meta
        )
        worst = max(worst, 0.0 if same else 1.0)
    seq = build_dd(1.3, tau_pad=0.4)
    path = base / "seq.json"
    dataio.write_sequence(path, seq)
    if dataio.read_sequence(path) != seq:
        worst = 1.0
    return worst


def _battery_noise(rng: np.random.Generator) -> float:
    n = 4000
    tau = (np.arange(n) + 1) * 0.01
    trace = TimeTrace(tau, np.full(n, 0.5))
    model = ReadoutModel()
    one = sample_trace(trace, model, seed=7)
    two = sample_trace(trace, model, seed=7)
    if not np.array_equal(one.population, two.population):
        return 1.0
    expected = float(model.expected_sigma(0.5))
    rel = abs(float(np.std(one.population)) - expected) / expected
    starved = sample_trace(
        TimeTrace(tau[:16], np.zeros(16)), ReadoutModel(rate0=1e-9, rate1=0.0, shots=10), seed=1
    )
    if not np.all(starved.sigma == 0.0):
        return 1.0
    return rel if rel > 0.10 else 0.0


def _battery_tones(rng: np.random.Generator) -> float:
    worst = 0.0
    n = 256
    dt = 0.05
    tau = (np.arange(n) + 1) * dt
    df = 1.0 / (n * dt)
    for _ in range(20):
        f0 = rng.uniform(1.0, 8.0)
        phase = rng.uniform(0.0, 2.0 * math.pi)
        pops = 0.5 + 0.3 * np.cos(2.0 * math.pi * f0 * tau + phase)
        spec = spectrum(TimeTrace(tau, pops), window="hann", pad_factor=8)
        peaks = find_peaks(spec, threshold=0.5)
        if len(peaks) != 1:
            return 1.0
        worst = max(worst, abs(peaks[0].freq_mhz - f0) / df)
    return worst


def _battery_sequences() -> float:
    if validate_sequence(build_ramsey(1.0)) or validate_sequence(build_dd(1.0)):
        return 1.0
    from .sequence import PulseEvent, PulseSequence

    gap = PulseSequence(
        "custom",
        (PulseEvent("rf", 0.0, 1.0), PulseEvent("rf", 1.5, 1.0)),
    )
    codes = {r.code for r in validate_sequence(gap)}
    if "gap" not in codes:
        return 1.0
    skewed = build_dd(1.0)
    events = list(skewed.events)
    events[4] = replace(events[4], mw_phase=0.0)
    skewed = PulseSequence("dd", tuple(events))
    records = validate_sequence(skewed)
    if not any(r.code == "phase-convention" and r.severity == "warning" for r in records):
        return 1.0
    return 0.0


def _battery_pads() -> float:
    _warm_kernel()
    static = StaticHamiltonian.for_transition(50.0)
    f = RfFieldParams(nu_z=2.66, nu_x=0.0, nu_rf=2.0, phi0=0.9, nu_dc=0.0)
    tau = np.array([0.5, 1.1, 2.3])
    worst = 0.0
    for frame in ("rotating", "lab"):
        cfg = auto_config(static, f, frame=frame)
        a = simulate_populations(static, f, tau, cfg, "dd", tau_pad=0.2)
        b = simulate_populations(static, f, tau, cfg, "dd", tau_pad=0.9)
        worst = max(worst, float(np.max(np.abs(a - b))))
    return worst


def check_property_battery() -> CheckResult:
    """Deterministic invariant sweep across every module."""
    import tempfile

    t0 = time.perf_counter()
    rng = np.random.default_rng(20260816)
    details: dict = {}
    budgets = {
        "series_reconstruction": (_battery_series(rng), 1e-9),
        "bessel_identities": (_battery_bessel(), 1e-11),
        "parseval": (_battery_parseval(rng), 1e-9),
        "unitarity": (_battery_unitarity(rng), 1e-9),
        "frame_agreement": (_battery_frames(rng), 1e-3),
        "canonical_form": (_battery_canonical(rng), 1e-9),
        "jacobian_vs_fd": (_battery_jacobian(rng), 1e-6),
        "noise_model": (_battery_noise(rng), 0.5),
        "tone_location_bins": (_battery_tones(rng), 0.05),
        "sequence_checks": (_battery_sequences(), 0.5),
        "pad_independence": (_battery_pads(), 1e-9),
        "phase_zero_at_origin": (
            max(
                abs(
                    phase_longitudinal(
                        RfFieldParams(nu_z=rng.uniform(0.1, 5.0), nu_x=0.0, nu_rf=rng.uniform(0.5, 4.0), phi0=rng.uniform(0.0, 6.28)),
                        1,
                        0.0,
                    )
                )
                for _ in range(10)
            ),
            1e-12,
        ),
    }
    with tempfile.TemporaryDirectory() as tmpdir:
        budgets["io_round_trip"] = (_battery_io(tmpdir, rng), 0.5)
    passed = True
    for key, (value, bound) in budgets.items():
        details[key] = value
        passed = passed and value <= bound
    return _finish("property-battery", passed, details, t0)


ALL_CHECKS = (
    check_commuting_limit,
    check_harmonic_comb,
    check_quadratic_shift_scaled,
    check_quadratic_shift_reference,
    check_two_power_closure,
    check_amplitude_ratio,
    check_dd_sidebands,
    check_noise_calibration,
    check_property_battery,
)

_SLOW = {"quadratic-shift-reference", "noise-calibration"}


def run_all(quick: bool = False) -> list:
    """Run every check (or the fast subset) and return the results."""
    out = []
    for fn in ALL_CHECKS:
        name = fn.__name__.replace("check_", "").replace("_", "-")
        if quick and name in _SLOW:
            continue
        out.append(fn())
    return out
