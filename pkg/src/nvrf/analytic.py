"""Closed-form signal model for free-evolution sensing of an RF field.

The longitudinal field component modulates the working-transition
frequency, so during a free-evolution window of length tau_p the detected
coherence accumulates

    phi_z(tau_p) = alpha * (cos(w_rf tau_p + phi0) - cos(phi0)),
    alpha = q * nu_z / nu_rf,

with q the coherence order. The transverse component contributes a
quadratic (Bloch-Siegert) rate nu_x^2 / (2 nu_transition), which together
with any static longitudinal component forms a secular term linear in
tau_p. The full phase is

    phi_f(tau_p) = phi_z(tau_p) + shift_total * tau_p + delta.

cos(phi_z) expands into a cosine series over harmonics of the carrier
with Bessel-function coefficients; `harmonic_decomposition` returns that
series with a certified truncation bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bessel import bessel_jn
from .errors import ValidationError, ZeroCarrier, ZeroTransition
from .model import TWO_PI, RfFieldParams, SpinSystem, angular


def _maybe_scalar(x, arr):
    return float(arr) if np.ndim(x) == 0 else arr


def phase_longitudinal(f: RfFieldParams, q: int, tau_p):
    """Oscillatory phase from the longitudinal RF component, in radians.

    Accepts scalar or array tau_p (us). Zero at tau_p = 0 and periodic in
    tau_p with the carrier period for any phi0.
    """
    if f.nu_rf == 0.0:
        raise ZeroCarrier("phase_longitudinal undefined at nu_rf = 0")
    tau = np.asarray(tau_p, dtype=float)
    alpha = q * f.nu_z / f.nu_rf
    out = alpha * (np.cos(angular(f.nu_rf) * tau + f.phi0) - math.cos(f.phi0))
    return _maybe_scalar(tau_p, out)


def bloch_siegert_rate(nu_x: float, nu_transition: float) -> float:
    """Secular transition shift nu_x^2 / (2 nu_transition), in MHz."""
    if nu_transition <= 0.0:
        raise ZeroTransition(f"nu_transition must be > 0, got {nu_transition}")
    return nu_x * nu_x / (2.0 * nu_transition)


@dataclass(frozen=True)
class PhaseModelParams:
    """Secular part of the phase model: shift_total in rad/us, delta in rad.

    alpha duplicates q * nu_z / nu_rf so fits can work in this parameter
    space without carrying field objects around.
    """

    alpha: float
    shift_total: float
    delta: float

    @classmethod
    def from_rates(cls, alpha: float, shift_mhz: float, delta: float) -> "PhaseModelParams":
        return cls(alpha=alpha, shift_total=TWO_PI * shift_mhz, delta=delta)

    @property
    def shift_mhz(self) -> float:
        return self.shift_total / TWO_PI


def phase_total(p: PhaseModelParams, f: RfFieldParams, q: int, tau_p):
    """phi_f = phi_z + shift_total * tau_p + delta, in radians."""
    tau = np.asarray(tau_p, dtype=float)
    out = phase_longitudinal(f, q, tau) + p.shift_total * tau + p.delta
    return _maybe_scalar(tau_p, out)


def population_ramsey(p: PhaseModelParams, f: RfFieldParams, q: int, tau_p, t2_star: float):
    """Bright-state return probability for the two-pulse sequence.

    P = (1 - exp(-tau_p / t2_star) * cos(phi_f)) / 2; t2_star = math.inf
    gives the undamped model.
    """
    if not t2_star > 0.0:
        raise ValidationError(f"t2_star must be > 0, got {t2_star}")
    tau = np.asarray(tau_p, dtype=float)
    env = np.exp(-tau / t2_star)
    out = 0.5 * (1.0 - env * np.cos(phase_total(p, f, q, tau)))
    return _maybe_scalar(tau_p, out)


def population_dd(p: PhaseModelParams, f: RfFieldParams, q: int, tau_p):
    """Bright-state probability for the echo-protected sequence.

    The refocusing pair flips the sign of the cosine relative to the
    two-pulse readout: P = (1 + cos(phi_f)) / 2.
    """
    tau = np.asarray(tau_p, dtype=float)
    out = 0.5 * (1.0 + np.cos(phase_total(p, f, q, tau)))
    return _maybe_scalar(tau_p, out)


def phase_params_for(
    f: RfFieldParams,
    system: SpinSystem,
    protocol: str = "ramsey",
    tau_pad: float = 0.5,
    include_quadratic: bool = True,
) -> PhaseModelParams:
    """Phase-model parameters implied by a field and a spin system.

    The secular rate combines the static longitudinal offset with the
    quadratic pull of the transverse drive on the working transition;
    both ride on the coherence order. The echo-protected protocol picks
    up a constant offset from the offset field acting during the two
    wait windows of length tau_pad.
    """
    if f.nu_rf <= 0.0:
        raise ZeroCarrier(f"nu_rf must be > 0, got {f.nu_rf}")
    q = system.coherence_order
    alpha = q * f.nu_z / f.nu_rf
    shift = f.nu_dc
    if include_quadratic and f.nu_x != 0.0:
        shift += bloch_siegert_rate(f.nu_x, system.nu_transition)
    shift *= q
    if protocol == "ramsey":
        delta = 0.0
    elif protocol == "dd":
        delta = -2.0 * q * TWO_PI * f.nu_dc * tau_pad
    else:
        raise ValidationError(f"protocol must be 'ramsey' or 'dd', got {protocol!r}")
    return PhaseModelParams.from_rates(alpha, shift, delta)


@dataclass(frozen=True)
class HarmonicDecomposition:
    """Cosine series cos(phi_z) = sum_n c_n cos(n x), x = w_rf tau + phi0.

    truncation_error bounds the discarded tail of the series (absolute,
    pointwise, for any x).
    """

    alpha: float
    phi0: float
    cos_coeff: np.ndarray
    truncation_error: float

    @property
    def n_max(self) -> int:
        return int(self.cos_coeff.size - 1)

    def evaluate(self, x):
        """Series value at phase argument x (radians, scalar or array)."""
        xs = np.asarray(x, dtype=float)
        n = np.arange(self.cos_coeff.size)
        out = np.cos(np.multiply.outer(xs, n)) @ self.cos_coeff
        return _maybe_scalar(x, out)


def _tail_bound(a: float, n: int) -> float:
    """Bound on sum_{k > n} |J_k(a)| via |J_k(a)| <= (a/2)^k / k!."""
    half = 0.5 * a
    # First discarded term, computed in log space to dodge overflow.
    lt = (n + 1) * math.log(half) - math.lgamma(n + 2) if half > 0.0 else -math.inf
    if lt == -math.inf:
        return 0.0
    t = math.exp(lt)
    r = half / (n + 2)
    return t / (1.0 - r) if r < 1.0 else math.inf


def harmonic_decomposition(alpha: float, phi0: float, tol: float = 1e-10) -> HarmonicDecomposition:
    """Bessel-coefficient cosine series of cos(phi_z) with a tail bound < tol.

    The even harmonics carry weight cos(alpha cos phi0) and the odd ones
    sin(alpha cos phi0):

        c_0      = W_c J_0(a)
        c_{2m}   = W_c * 2 (-1)^m J_{2m}(a)
        c_{2m+1} = W_s * 2 (-1)^m J_{2m+1}(a)

    with a = |alpha| (the series is even in alpha because cos(phi_z) is).
    """
    if not (math.isfinite(alpha) and math.isfinite(phi0)):
        raise ValidationError(f"alpha and phi0 must be finite, got {alpha}, {phi0}")
    if not tol > 0.0:
        raise ValidationError(f"tol must be > 0, got {tol}")
    a = abs(alpha)

    n_max = max(10, math.ceil(a + 8.0 * a ** (1.0 / 3.0) + 10.0))
    # Tighten: the reconstruction error is at most 2 * tail of sum |J_k|.
    while n_max > 1 and 2.0 * _tail_bound(a, n_max - 1) < tol:
        n_max -= 1
    while 2.0 * _tail_bound(a, n_max) >= tol:
        n_max += 1

    j = bessel_jn(n_max, a)
    w_c = math.cos(a * math.cos(phi0))
    w_s = math.sin(a * math.cos(phi0))
    c = np.zeros(n_max + 1)
    c[0] = w_c * j[0]
    for n in range(1, n_max + 1):
        m, rem = divmod(n, 2)
        sgn = -1.0 if m % 2 else 1.0
        c[n] = (w_s if rem else w_c) * 2.0 * sgn * j[n]
    c.setflags(write=False)
    return HarmonicDecomposition(
        alpha=alpha, phi0=phi0, cos_coeff=c, truncation_error=2.0 * _tail_bound(a, n_max)
    )
