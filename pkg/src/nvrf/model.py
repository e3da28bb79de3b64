"""Core parameter types, unit helpers and container validation.

Unit convention: the public interface works in ordinary frequencies (MHz)
and times in microseconds, so nu * tau is a number of cycles. Phase math
happens in angular units (rad/us); `angular` and `ordinary` convert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import (
    FieldValidationError,
    NegativeTransverse,
    NonPositiveCarrier,
    NonUniformSampling,
    ValidationError,
    ZeroTransition,
)

TWO_PI = 2.0 * math.pi

# Defaults for the working transition of the sensor used throughout the
# examples and the self test: |0> <-> |-1| splitting and its dephasing time.
DEFAULT_NU_TRANSITION_MHZ = 2475.151
DEFAULT_T2_STAR_US = 22.0

# Relative tolerance for the uniform-sampling check on time grids.
UNIFORM_GRID_RTOL = 1e-6


def angular(nu):
    """Ordinary frequency (MHz) to angular rate (rad/us)."""
    return TWO_PI * np.asarray(nu) if np.ndim(nu) else TWO_PI * nu


def ordinary(omega):
    """Angular rate (rad/us) to ordinary frequency (MHz)."""
    return np.asarray(omega) / TWO_PI if np.ndim(omega) else omega / TWO_PI


@dataclass(frozen=True)
class RfFieldParams:
    """Applied field seen by the sensor, in ordinary frequency units.

    nu_z and nu_x are the longitudinal and transverse amplitudes of the
    oscillating component at carrier nu_rf with initial phase phi0;
    nu_dc is the static longitudinal component. power_mw optionally tags
    the source power the amplitudes were taken at.
    """

    nu_z: float
    nu_x: float
    nu_rf: float
    phi0: float = 0.0
    nu_dc: float = 0.0
    power_mw: Optional[float] = None


def validate_field(f: RfFieldParams) -> RfFieldParams:
    """Check every field invariant and return a copy with phi0 in [0, 2pi).

    All violations are collected before raising, so a caller sees the full
    list at once. Validation is idempotent.
    """
    violations = []
    for name in ("nu_z", "nu_x", "nu_rf", "phi0", "nu_dc"):
        v = getattr(f, name)
        if not math.isfinite(v):
            violations.append(ValidationError(f"{name} must be finite, got {v}"))
    if math.isfinite(f.nu_rf) and f.nu_rf <= 0.0:
        violations.append(NonPositiveCarrier(f"nu_rf must be > 0, got {f.nu_rf}"))
    if math.isfinite(f.nu_x) and f.nu_x < 0.0:
        violations.append(NegativeTransverse(f"nu_x must be >= 0, got {f.nu_x}"))
    if f.power_mw is not None and not (math.isfinite(f.power_mw) and f.power_mw > 0.0):
        violations.append(ValidationError(f"power_mw must be > 0 when present, got {f.power_mw}"))
    if violations:
        raise FieldValidationError(violations)
    phi0 = f.phi0 % TWO_PI
    if phi0 >= TWO_PI:  # -tiny % 2pi rounds up to exactly 2pi
        phi0 = 0.0
    return replace(f, phi0=phi0)


@dataclass(frozen=True)
class SpinSystem:
    """Working two-level pair of the spin-1 sensor.

    coherence_order is q = m - m' of the detected coherence; the pair
    |0>,|-1> used throughout has q = +1. t2_star may be math.inf for an
    undamped model.
    """

    nu_transition: float = DEFAULT_NU_TRANSITION_MHZ
    coherence_order: int = 1
    t2_star: float = DEFAULT_T2_STAR_US


def validate_system(s: SpinSystem) -> SpinSystem:
    """Check spin-system invariants; returns the system unchanged."""
    if not (math.isfinite(s.nu_transition) and s.nu_transition > 0.0):
        raise ZeroTransition(f"nu_transition must be > 0, got {s.nu_transition}")
    if s.coherence_order not in (-2, -1, 1, 2):
        raise ValidationError(
            f"coherence_order must be one of -2, -1, 1, 2, got {s.coherence_order}"
        )
    if not s.t2_star > 0.0:
        raise ValidationError(f"t2_star must be > 0 (math.inf allowed), got {s.t2_star}")
    return s


def _as_readonly(a, n_expected=None, name="array"):
    out = np.array(a, dtype=float)
    if out.ndim != 1:
        raise ValidationError(f"{name} must be one dimensional, got shape {out.shape}")
    if n_expected is not None and out.size != n_expected:
        raise ValidationError(f"{name} has {out.size} entries, expected {n_expected}")
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class TimeTrace:
    """Uniformly sampled population trace with optional per-point sigma.

    meta holds free-form key/value pairs that travel with the CSV file
    (power_mw, sequence kind, seed, ...). Noise-sampled traces widen the
    admissible population range through meta keys range_lo / range_hi.
    """

    tau_us: np.ndarray
    population: np.ndarray
    sigma: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        tau = _as_readonly(self.tau_us, name="tau_us")
        if tau.size < 2:
            raise ValidationError(f"trace needs at least 2 samples, got {tau.size}")
        pop = _as_readonly(self.population, tau.size, name="population")
        object.__setattr__(self, "tau_us", tau)
        object.__setattr__(self, "population", pop)
        if self.sigma is not None:
            sig = _as_readonly(self.sigma, tau.size, name="sigma")
            if np.any(sig < 0.0):
                raise ValidationError("every sigma must be >= 0")
            object.__setattr__(self, "sigma", sig)
        object.__setattr__(self, "meta", dict(self.meta))

        steps = np.diff(tau)
        if np.any(steps <= 0.0):
            raise ValidationError("tau_us must be strictly increasing")
        dt = steps[0]
        if np.max(np.abs(steps - dt)) > UNIFORM_GRID_RTOL * dt:
            raise NonUniformSampling(
                f"tau_us spacing varies by more than {UNIFORM_GRID_RTOL:g} relative"
            )

        lo = float(self.meta.get("range_lo", 0.0))
        hi = float(self.meta.get("range_hi", 1.0))
        eps = 1e-9
        if np.any(pop < lo - eps) or np.any(pop > hi + eps):
            raise ValidationError(
                f"population outside [{lo}, {hi}]: "
                f"min {pop.min():.6g}, max {pop.max():.6g}"
            )

    @property
    def dt(self) -> float:
        return float(self.tau_us[1] - self.tau_us[0])

    @property
    def n(self) -> int:
        return int(self.tau_us.size)


@dataclass(frozen=True)
class Spectrum:
    """One-sided magnitude spectrum of a trace.

    Magnitudes use a Parseval-preserving one-sided scaling: with a
    rectangular window the squared magnitudes sum to the squared
    mean-removed samples. n_samples is the raw (pre-padding) length,
    which find_peaks uses to separate detection from refinement.
    """

    freq_mhz: np.ndarray
    magnitude: np.ndarray
    window: str = "rect"
    pad_factor: int = 1
    n_samples: int = 0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        freq = _as_readonly(self.freq_mhz, name="freq_mhz")
        mag = _as_readonly(self.magnitude, freq.size, name="magnitude")
        object.__setattr__(self, "freq_mhz", freq)
        object.__setattr__(self, "magnitude", mag)
        object.__setattr__(self, "meta", dict(self.meta))
        if freq.size < 2:
            raise ValidationError("spectrum needs at least 2 bins")
        if np.any(np.diff(freq) <= 0.0):
            raise ValidationError("freq_mhz must be strictly increasing")
        if np.any(mag < 0.0):
            raise ValidationError("magnitudes must be >= 0")
        if self.window not in ("rect", "hann"):
            raise ValidationError(f"unknown window {self.window!r}")
        if int(self.pad_factor) < 1:
            raise ValidationError(f"pad_factor must be >= 1, got {self.pad_factor}")

    @property
    def df(self) -> float:
        return float(self.freq_mhz[1] - self.freq_mhz[0])
