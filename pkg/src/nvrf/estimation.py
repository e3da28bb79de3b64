"""Parameter estimation from population traces and field reconstruction.

The trace model has six parameters collected in the vector
x = (alpha, shift_mhz, delta, phi0, scale, offset):

    phi(tau) = alpha (cos(w_rf tau + phi0) - cos(phi0))
               + 2 pi shift tau + delta
    P(tau)   = offset + scale * base(phi, tau)

where base is (1 - exp(-tau/t2_star) cos phi) / 2 for the two-pulse
protocol and (1 + cos phi) / 2 for the echo-protected one. The carrier
frequency is treated as known.

Because the populations depend on the phase only through cos(phi), the
parameter sets (alpha, s, delta, phi0), (-alpha, -s, -delta, phi0) and
(alpha, -s, -delta, phi0 + pi) produce identical traces, as do
(scale, offset, delta) and (-scale, offset + scale, delta + pi). Fits
are reported in a canonical form (alpha >= 0, scale >= 0, phi0 in
[0, pi), delta in (-pi, pi]) and carry an ambiguity flag for the shift
sign when the mirrored solution fits essentially as well, which it
always does when alpha is near zero.

A linear solve on fitted shifts at two drive powers splits the total
into an amplitude-like part (proportional to sqrt(power)) and a
quadratic part (proportional to power); the quadratic part inverts to
the transverse amplitude and, with the oscillation amplitude, to the
field orientation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bessel import bessel_jn
from .errors import (
    DegenerateTrace,
    NegativeShift,
    NoConvergence,
    SingularSystem,
    ValidationError,
    ZeroCarrier,
    ZeroField,
    ZeroTransition,
)
from .model import TWO_PI, TimeTrace
from .spectral import assign_harmonics, find_peaks, spectrum

PARAM_NAMES = ("alpha", "shift_mhz", "delta", "phi0", "scale", "offset")

N_PARAMS = 6
MIN_POINTS = 7

PROTOCOLS = ("ramsey", "dd")


def model_population(x: np.ndarray, tau: np.ndarray, protocol: str, nu_rf: float, t2_star: float) -> np.ndarray:
    """Trace model P(tau) for parameter vector x (see module docstring)."""
    alpha, shift, delta, phi0, scale, offset = x
    arg = TWO_PI * nu_rf * tau + phi0
    phi = alpha * (np.cos(arg) - math.cos(phi0)) + TWO_PI * shift * tau + delta
    if protocol == "ramsey":
        base = 0.5 * (1.0 - np.exp(-tau / t2_star) * np.cos(phi))
    else:
        base = 0.5 * (1.0 + np.cos(phi))
    return offset + scale * base


def model_jacobian(x: np.ndarray, tau: np.ndarray, protocol: str, nu_rf: float, t2_star: float) -> np.ndarray:
    """Analytic d P / d x, shape (len(tau), 6), columns in PARAM_NAMES order."""
    alpha, shift, delta, phi0, scale, offset = x
    arg = TWO_PI * nu_rf * tau + phi0
    phi = alpha * (np.cos(arg) - math.cos(phi0)) + TWO_PI * shift * tau + delta
    if protocol == "ramsey":
        env = np.exp(-tau / t2_star)
        base = 0.5 * (1.0 - env * np.cos(phi))
        dp_dphi = 0.5 * scale * env * np.sin(phi)
    else:
        base = 0.5 * (1.0 + np.cos(phi))
        dp_dphi = -0.5 * scale * np.sin(phi)
    jac = np.empty((tau.size, N_PARAMS))
    jac[:, 0] = dp_dphi * (np.cos(arg) - math.cos(phi0))
    jac[:, 1] = dp_dphi * TWO_PI * tau
    jac[:, 2] = dp_dphi
    jac[:, 3] = dp_dphi * alpha * (math.sin(phi0) - np.sin(arg))
    jac[:, 4] = base
    jac[:, 5] = 1.0
    return jac


def canonicalize(params: dict) -> dict:
    """Map a parameter dict onto the canonical sheet of the degeneracy group.

    alpha >= 0 and scale >= 0, phi0 reduced to [0, pi), delta to
    (-pi, pi]. Every input with the same trace maps to the same output.
    """
    p = dict(params)
    if p["scale"] < 0.0:
        p["offset"] = p["offset"] + p["scale"]
        p["scale"] = -p["scale"]
        p["delta"] = p["delta"] + math.pi
    if p["alpha"] < 0.0:
        p["alpha"] = -p["alpha"]
        p["shift_mhz"] = -p["shift_mhz"]
        p["delta"] = -p["delta"]
    p["phi0"] = p["phi0"] % TWO_PI
    if p["phi0"] >= math.pi:
        p["phi0"] -= math.pi
        p["shift_mhz"] = -p["shift_mhz"]
        p["delta"] = -p["delta"]
    p["delta"] = math.pi - (math.pi - p["delta"]) % TWO_PI
    return p


def _lm(residual_jac, x0: np.ndarray, max_iter: int):
    """Damped least squares with multiplicative trust control.

    residual_jac(x) returns (r, J) with cost 0.5 r.r. Returns
    (x, cost, n_iter, converged).
    """
    x = np.asarray(x0, dtype=float).copy()
    r, jac = residual_jac(x)
    cost = 0.5 * float(r @ r)
    lam = 1e-3
    n_eval = 1
    for _ in range(max_iter):
        grad = jac.T @ r
        if np.max(np.abs(grad)) < 1e-8:
            return x, cost, n_eval, True
        hess = jac.T @ jac
        damp = np.diag(np.maximum(np.diag(hess), 1e-12))
        try:
            step = np.linalg.solve(hess + lam * damp, -grad)
        except np.linalg.LinAlgError:
            lam = min(lam * 5.0, 1e12)
            continue
        x_new = x + step
        r_new, jac_new = residual_jac(x_new)
        n_eval += 1
        cost_new = 0.5 * float(r_new @ r_new)
        if cost_new < cost:
            rel = (cost - cost_new) / max(cost, 1e-300)
            x, r, jac, cost = x_new, r_new, jac_new, cost_new
            lam = max(lam / 3.0, 1e-12)
            if rel < 1e-10:
                return x, cost, n_eval, True
        else:
            lam = min(lam * 5.0, 1e12)
    return x, cost, n_eval, False


def _invert_bessel_ratio(n_num: int, ratio: float) -> float | None:
    """Solve J_n(a) / J1(a) = ratio for a in (0, 3.8), where it is monotone."""
    lo, hi = 1e-6, 3.80

    def f(a: float) -> float:
        j = bessel_jn(n_num, a)
        return j[n_num] / j[1] - ratio

    if not (f(lo) < 0.0 < f(hi)):
        return None
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _spectral_init(trace: TimeTrace, nu_rf: float) -> tuple | None:
    """(alpha0, shift0) guess from the trace spectrum, or None.

    Peaks are matched to harmonics one at a time so a spurious noise
    peak far from any multiple of nu_rf is skipped rather than spoiling
    the whole estimate.
    """
    try:
        spec = spectrum(trace, window="hann", pad_factor=8)
        peaks = find_peaks(spec, threshold=0.05)
    except Exception:
        return None
    offsets: list = []
    weights: list = []
    mags: dict = {}
    for p in peaks:
        n = int(round(p.freq_mhz / nu_rf))
        d = p.freq_mhz - n * nu_rf
        if n < 1 or abs(d) > 0.4 * nu_rf:
            continue
        offsets.append(abs(d))
        # Squared-magnitude weights keep weak noise peaks from dragging
        # the offset estimate away from the strong harmonic lines.
        weights.append(p.magnitude**2)
        mags.setdefault(n, []).append(p.magnitude)
    if not offsets:
        return None
    shift0 = float(np.average(offsets, weights=weights))

    def branch_mag(n: int) -> float:
        return float(np.mean(mags[n])) if n in mags else 0.0

    # The magnitude ratio between harmonic lines pins the modulation
    # depth; prefer the odd pair, fall back to the stronger even pair.
    alpha0 = 1.0
    m1 = branch_mag(1)
    if m1 > 0.0:
        for n in (3, 2):
            mn = branch_mag(n)
            if mn > 0.0:
                a = _invert_bessel_ratio(n, mn / m1)
                if a is not None:
                    alpha0 = a
                    break
    return alpha0, shift0


@dataclass
class FitResult:
    """Canonical best-fit parameters with uncertainties and diagnostics.

    sigma entries come from the local curvature at the optimum; when the
    trace carries no per-point uncertainties they are rescaled by the
    reduced residual (chi2_red is then None since absolute residual
    scale is unknown).
    """

    params: dict
    sigma: dict
    residual_rms: float
    chi2_red: float | None
    n_iter: int
    init_source: str
    shift_sign_ambiguous: bool
    meta: dict = field(default_factory=dict)

    @property
    def alpha(self) -> float:
        return self.params["alpha"]

    @property
    def shift_mhz(self) -> float:
        return self.params["shift_mhz"]


def fit_trace(
    trace: TimeTrace,
    protocol: str = "ramsey",
    nu_rf: float | None = None,
    t2_star: float | None = None,
    init: dict | None = None,
    n_phase_starts: int = 8,
    max_iter: int = 500,
) -> FitResult:
    """Fit the six-parameter trace model, robust to phase degeneracies.

    nu_rf and t2_star fall back to trace.meta entries. With no user init
    the starting alpha and shift magnitude come from the trace spectrum
    when it shows assignable lines, and a grid of phi0 values crossed
    with both shift signs seeds the optimizer. Raises DegenerateTrace
    for traces shorter than the parameter count allows and NoConvergence
    when no start converges or the best fit fails the residual gate.
    """
    if protocol not in PROTOCOLS:
        raise ValidationError(f"protocol must be one of {PROTOCOLS}, got {protocol!r}")
    if nu_rf is None:
        nu_rf = trace.meta.get("nu_rf")
    if nu_rf is None or not nu_rf > 0.0:
        raise ZeroCarrier(f"need a positive carrier frequency, got {nu_rf}")
    if t2_star is None:
        t2_star = float(trace.meta.get("t2_star", math.inf))
    if not t2_star > 0.0:
        raise ValidationError(f"t2_star must be > 0, got {t2_star}")
    tau = trace.tau_us
    data = trace.population
    if tau.size < MIN_POINTS:
        raise DegenerateTrace(f"{tau.size} samples cannot constrain {N_PARAMS} parameters")

    weighted = trace.sigma is not None and np.any(trace.sigma > 0.0)
    if weighted:
        sig = trace.sigma.copy()
        sig[sig == 0.0] = sig[sig > 0.0].min()
        wgt = 1.0 / sig
    else:
        wgt = np.ones_like(data)

    def residual_jac(x: np.ndarray):
        r = (model_population(x, tau, protocol, nu_rf, t2_star) - data) * wgt
        jac = model_jacobian(x, tau, protocol, nu_rf, t2_star) * wgt[:, None]
        return r, jac

    guess = _spectral_init(trace, nu_rf) if init is None else None
    if init is not None:
        init_source = "user"
        alpha0, shift0 = init.get("alpha", 1.0), init.get("shift_mhz", 0.1)
    elif guess is not None:
        init_source = "spectral"
        alpha0, shift0 = guess
    else:
        init_source = "default"
        alpha0, shift0 = 1.0, 0.1

    starts = []
    if init is not None:
        starts.append(
            np.array(
                [
                    alpha0,
                    shift0,
                    init.get("delta", 0.0),
                    init.get("phi0", 0.0),
                    init.get("scale", 1.0),
                    init.get("offset", 0.0),
                ]
            )
        )
    else:
        phases = [k * TWO_PI / n_phase_starts for k in range(n_phase_starts)]
        meta_phi0 = trace.meta.get("phi0")
        if isinstance(meta_phi0, (int, float)):
            phases.append(float(meta_phi0))
        # A few modulation depths guard against starts trapped in the
        # wrong lobe of the Bessel-structured cost surface.
        alphas = [alpha0]
        for extra in (0.5, 1.5, 3.0):
            if all(abs(extra - a) > 0.2 for a in alphas):
                alphas.append(extra)
        for ph in phases:
            for sgn in (1.0, -1.0):
                for a0 in alphas:
                    starts.append(np.array([a0, sgn * abs(shift0), 0.0, ph, 1.0, 0.0]))

    results = []
    for x0 in starts:
        x, cost, n_eval, ok = _lm(residual_jac, x0, max_iter)
        if ok and np.all(np.isfinite(x)):
            results.append((cost, x, n_eval))
    if not results:
        raise NoConvergence(f"no start converged within {max_iter} iterations")

    results.sort(key=lambda t: t[0])
    best_cost, best_x, best_iter = results[0]

    canon = canonicalize(dict(zip(PARAM_NAMES, best_x)))
    x_fit = np.array([canon[k] for k in PARAM_NAMES])
    r_fit, jac_fit = residual_jac(x_fit)
    rms = float(np.sqrt(np.mean((model_population(x_fit, tau, protocol, nu_rf, t2_star) - data) ** 2)))

    dof = tau.size - N_PARAMS
    chi2_red = 2.0 * best_cost / dof if weighted else None
    if weighted and chi2_red > 25.0:
        raise NoConvergence(f"best fit rejected: reduced chi-square {chi2_red:.3g} > 25")
    if not weighted and rms > 0.5 * float(np.std(data)):
        raise NoConvergence(f"best fit rejected: residual rms {rms:.3g} exceeds half the data spread")

    try:
        cov = np.linalg.inv(jac_fit.T @ jac_fit)
    except np.linalg.LinAlgError:
        cov = np.full((N_PARAMS, N_PARAMS), np.nan)
    if not weighted:
        cov = cov * (2.0 * best_cost / dof)
    sig_params = dict(zip(PARAM_NAMES, np.sqrt(np.abs(np.diag(cov)))))

    # Shift-sign ambiguity: do the two canonical sign classes tie?
    cost_by_sign: dict = {}
    for cost, x, _ in results:
        c = canonicalize(dict(zip(PARAM_NAMES, x)))
        key = c["shift_mhz"] >= 0.0
        cost_by_sign[key] = min(cost_by_sign.get(key, math.inf), cost)
    ambiguous = False
    if len(cost_by_sign) == 2:
        lo, hi = sorted(cost_by_sign.values())
        # absolute term keeps the tie test meaningful when both costs
        # sit at the roundoff floor of a noise-free trace
        ambiguous = hi - lo <= 0.01 * hi + tau.size * 1e-20

    meta = dict(trace.meta)
    meta.update(protocol=protocol, nu_rf=float(nu_rf), t2_star=float(t2_star))
    return FitResult(
        params=canon,
        sigma=sig_params,
        residual_rms=rms,
        chi2_red=chi2_red,
        n_iter=best_iter,
        init_source=init_source,
        shift_sign_ambiguous=ambiguous,
        meta=meta,
    )


@dataclass(frozen=True)
class ShiftDecomposition:
    """Total secular shifts at two powers split into their two channels.

    coeff_sqrt scales like a field amplitude (MHz per sqrt(mW)),
    coeff_linear like an intensity (MHz per mW). nu_dc_mhz and nu_bs_mhz
    evaluate the channels at each input power.
    """

    powers_mw: tuple
    shifts_mhz: tuple
    coeff_sqrt: float
    coeff_linear: float
    nu_dc_mhz: tuple
    nu_bs_mhz: tuple


def separate_dc_bss(shifts_mhz, powers_mw) -> ShiftDecomposition:
    """Solve shift(p) = a sqrt(p) + b p from two (power, shift) pairs."""
    shifts = tuple(float(s) for s in shifts_mhz)
    powers = tuple(float(p) for p in powers_mw)
    if len(shifts) != 2 or len(powers) != 2:
        raise ValidationError("need exactly two shifts and two powers")
    if min(powers) <= 0.0:
        raise ValidationError(f"powers must be > 0, got {powers}")
    mat = np.array([[math.sqrt(powers[0]), powers[0]], [math.sqrt(powers[1]), powers[1]]])
    det = float(np.linalg.det(mat))
    scale = max(abs(mat).max() ** 2, 1e-300)
    if abs(det) < 1e-12 * scale:
        raise SingularSystem(f"power pair {powers} cannot separate the two channels")
    a, b = np.linalg.solve(mat, np.array(shifts))
    return ShiftDecomposition(
        powers_mw=powers,
        shifts_mhz=shifts,
        coeff_sqrt=float(a),
        coeff_linear=float(b),
        nu_dc_mhz=tuple(float(a * math.sqrt(p)) for p in powers),
        nu_bs_mhz=tuple(float(b * p) for p in powers),
    )


def invert_bss(nu_bs: float, nu_transition: float) -> float:
    """Transverse amplitude from its quadratic shift: sqrt(2 nu_t nu_bs)."""
    if nu_transition <= 0.0:
        raise ZeroTransition(f"nu_transition must be > 0, got {nu_transition}")
    if nu_bs < 0.0:
        raise NegativeShift(f"quadratic shift must be >= 0, got {nu_bs}")
    return math.sqrt(2.0 * nu_transition * nu_bs)


def estimate_angle(nu_z: float, nu_x: float) -> float:
    """Field polar angle from its two projections, in degrees [0, 180)."""
    if nu_z == 0.0 and nu_x == 0.0:
        raise ZeroField("both projections are zero; the angle is undefined")
    if nu_x < 0.0:
        raise ValidationError(f"transverse amplitude must be >= 0, got {nu_x}")
    return math.degrees(math.atan2(nu_x, nu_z))


@dataclass(frozen=True)
class RatioCheck:
    """Measured oscillation-amplitude ratio against the sqrt(power) law."""

    measured: float
    expected: float

    @property
    def rel_dev(self) -> float:
        return (self.measured - self.expected) / self.expected


def amplitude_ratio_check(alpha_a: float, alpha_b: float, power_a: float, power_b: float) -> RatioCheck:
    """Compare alpha_b / alpha_a with sqrt(power_b / power_a)."""
    if alpha_a == 0.0:
        raise ZeroField("reference amplitude is zero; ratio undefined")
    if min(power_a, power_b) <= 0.0:
        raise ValidationError(f"powers must be > 0, got {power_a}, {power_b}")
    return RatioCheck(measured=alpha_b / alpha_a, expected=math.sqrt(power_b / power_a))


def two_power_summary(fit_a: FitResult, fit_b: FitResult, nu_transition: float) -> dict:
    """Full field reconstruction from fits at two drive powers.

    Each fit must carry power_mw in its meta. Returns a flat dict with
    the per-power longitudinal, transverse and offset components, the
    field angles and the amplitude-ratio consistency check.
    """
    powers = []
    for f in (fit_a, fit_b):
        p = f.meta.get("power_mw")
        if p is None or not p > 0.0:
            raise ValidationError("each fit needs a positive power_mw in its meta")
        powers.append(float(p))
    nu_rf = (fit_a.meta.get("nu_rf"), fit_b.meta.get("nu_rf"))
    if nu_rf[0] is None or nu_rf[1] is None or abs(nu_rf[0] - nu_rf[1]) > 1e-9 * abs(nu_rf[0]):
        raise ValidationError(f"fits disagree on the carrier frequency: {nu_rf}")

    dec = separate_dc_bss((fit_a.shift_mhz, fit_b.shift_mhz), powers)
    nu_z = tuple(f.alpha * nu_rf[0] for f in (fit_a, fit_b))
    nu_x = tuple(invert_bss(v, nu_transition) for v in dec.nu_bs_mhz)
    ratio = amplitude_ratio_check(fit_a.alpha, fit_b.alpha, powers[0], powers[1])
    return {
        "powers_mw": tuple(powers),
        "nu_rf": float(nu_rf[0]),
        "nu_transition": float(nu_transition),
        "nu_z_mhz": nu_z,
        "nu_x_mhz": nu_x,
        "nu_dc_mhz": dec.nu_dc_mhz,
        "nu_bs_mhz": dec.nu_bs_mhz,
        "coeff_sqrt": dec.coeff_sqrt,
        "coeff_linear": dec.coeff_linear,
        "angle_deg": tuple(estimate_angle(z, x) for z, x in zip(nu_z, nu_x)),
        "alpha_ratio_measured": ratio.measured,
        "alpha_ratio_expected": ratio.expected,
        "alpha_ratio_rel_dev": ratio.rel_dev,
        "shift_sign_ambiguous": (fit_a.shift_sign_ambiguous, fit_b.shift_sign_ambiguous),
    }
