"""Numerical time evolution of the three-level sensor.

The model is a spin-1 manifold in the basis (|+1>, |0>, |-1>) with |0>
as the bright reference level. The static Hamiltonian is diagonal with
the working transition |0> to |-1> at nu_transition and the remaining
level parked at a configurable detuning. During sensing windows the
oscillating field couples through both spin projections,

    H(t) / 2pi = diag(levels) + (nu_z Sz + nu_x Sx) sin(w_rf t' + phi0)
                 - nu_dc Sz,

with t' measured from the window start. Microwave rotations act on the
working pair only and are treated as instantaneous.

Each step uses the interval-averaged Hamiltonian (the exact time average
of every matrix element over the step, which is the leading Magnus term)
and the matrix exponential through an eigendecomposition, so evolution
is unitary by construction and diagonal problems integrate exactly at
any step size. Time-independent or purely diagonal windows collapse to
a single step. In the rotating frame the fast phase factors move onto
the off-diagonal couplings and are averaged in closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from .errors import (
    NonUnitaryDrift,
    StepTooCoarse,
    ValidationError,
    ZeroTransition,
)
from .model import TWO_PI, RfFieldParams, validate_field
from .sequence import PulseSequence, build_dd, build_ramsey, require_valid

_SQRT1_2 = 1.0 / math.sqrt(2.0)

FRAMES = ("rotating", "lab")

# Bright working level |0> sits at index 1 of the basis (+1, 0, -1).
BRIGHT_INDEX = 1


@dataclass(frozen=True)
class StaticHamiltonian:
    """Diagonal level structure, in MHz relative to the |0> level.

    e_minus is the working-transition frequency; e_plus parks the
    spectator level. Both must be positive (the working pair is the
    lower transition and the spectator lies above the bright level).
    """

    e_plus: float
    e_minus: float

    @classmethod
    def for_transition(cls, nu_transition: float, spectator_factor: float = 50.0) -> "StaticHamiltonian":
        """Working transition at nu_transition, spectator at a multiple of it.

        The default factor keeps the spectator's quadratic pull on the
        working transition near the percent level of the main one.
        """
        if nu_transition <= 0.0:
            raise ZeroTransition(f"nu_transition must be > 0, got {nu_transition}")
        if spectator_factor <= 0.0:
            raise ValidationError(f"spectator_factor must be > 0, got {spectator_factor}")
        return cls(e_plus=spectator_factor * nu_transition, e_minus=nu_transition)

    @property
    def working_splitting(self) -> float:
        return self.e_minus

    @property
    def spectator_splitting(self) -> float:
        return self.e_plus


def validate_static(h: StaticHamiltonian) -> None:
    if not (math.isfinite(h.e_plus) and math.isfinite(h.e_minus)):
        raise ValidationError(f"levels must be finite, got {h.e_plus}, {h.e_minus}")
    if h.e_minus <= 0.0:
        raise ZeroTransition(f"working splitting must be > 0, got {h.e_minus}")
    if h.e_plus <= 0.0:
        raise ValidationError(f"spectator level must sit above |0>, got {h.e_plus}")


@dataclass(frozen=True)
class PropagationConfig:
    """Step size dt (us), frame ('rotating' or 'lab'), norm tolerance."""

    dt: float
    frame: str = "rotating"
    tolerance: float = 1e-6

    def __post_init__(self):
        if not self.dt > 0.0:
            raise ValidationError(f"dt must be > 0, got {self.dt}")
        if self.frame not in FRAMES:
            raise ValidationError(f"frame must be one of {FRAMES}, got {self.frame!r}")
        if not self.tolerance > 0.0:
            raise ValidationError(f"tolerance must be > 0, got {self.tolerance}")


def max_resolved_rate(static: StaticHamiltonian, f: RfFieldParams, frame: str) -> float:
    """Fastest rate (MHz) the step size must resolve.

    The working splitting enters whenever the dynamics leave the diagonal
    (lab frame, or any transverse drive). The spectator level is exempt:
    its effect arrives through the per-step eigenvalues, which the exact
    averaging captures without resolving its phase.
    """
    m = max(f.nu_rf, abs(f.nu_z), f.nu_x, abs(f.nu_dc))
    if frame == "lab" or f.nu_x != 0.0:
        m = max(m, static.working_splitting)
    return m


def auto_config(
    static: StaticHamiltonian,
    f: RfFieldParams,
    frame: str = "rotating",
    points_per_cycle: int = 20,
    tolerance: float = 1e-6,
) -> PropagationConfig:
    """Step size at the resolution rule dt = 1 / (points_per_cycle * rate)."""
    if points_per_cycle < 2:
        raise ValidationError(f"points_per_cycle must be >= 2, got {points_per_cycle}")
    dt = 1.0 / (points_per_cycle * max_resolved_rate(static, f, frame))
    return PropagationConfig(dt=dt, frame=frame, tolerance=tolerance)


@njit(cache=True)
def _int_exp(nu: float, t0: float, dt: float) -> complex:
    """Integral of exp(i nu t) over [t0, t0 + dt]."""
    x = nu * dt
    if abs(x) < 1e-8:
        core = complex(1.0 - x * x / 6.0, 0.5 * x)
    else:
        core = complex(math.cos(x) - 1.0, math.sin(x)) / complex(0.0, x)
    return complex(math.cos(nu * t0), math.sin(nu * t0)) * dt * core


@njit(cache=True)
def _avg_sin_exp(orf: float, phi0: float, mu: float, t_abs0: float, t0: float, dt: float) -> complex:
    """Average of sin(orf t + phi0) exp(i mu (t_abs0 + t)) over t in [t0, t0 + dt]."""
    ep = complex(math.cos(phi0), math.sin(phi0))
    ip = _int_exp(mu + orf, t0, dt)
    im = _int_exp(mu - orf, t0, dt)
    carrier = complex(math.cos(mu * t_abs0), math.sin(mu * t_abs0))
    return carrier * (ep * ip - ep.conjugate() * im) / complex(0.0, 2.0 * dt)


@njit(cache=True)
def _run_window(psi, n_steps, dt, t_start, op, om, oz, ox, odc, orf, phi0, rf_on, rotating):
    """Propagate psi across one window of n_steps equal steps.

    All rates are angular (rad/us); t_start is the absolute window start.
    The field phase is referenced to the window start. Diagonal steps
    (no transverse drive) use direct phase accumulation.
    """
    ham = np.zeros((3, 3), np.complex128)
    for k in range(n_steps):
        t0 = k * dt
        t1 = t0 + dt
        s = 0.0
        if rf_on and orf != 0.0:
            s = (math.cos(orf * t0 + phi0) - math.cos(orf * t1 + phi0)) / (orf * dt)
        dz = oz * s - odc
        if rotating:
            d0 = dz
            d2 = -dz
        else:
            d0 = op + dz
            d2 = om - dz
        if ox == 0.0 or not rf_on:
            psi[0] *= complex(math.cos(d0 * dt), -math.sin(d0 * dt))
            psi[2] *= complex(math.cos(d2 * dt), -math.sin(d2 * dt))
            continue
        if rotating:
            c01 = ox * _SQRT1_2 * _avg_sin_exp(orf, phi0, op, t_start, t0, dt)
            c12 = ox * _SQRT1_2 * _avg_sin_exp(orf, phi0, -om, t_start, t0, dt)
        else:
            c01 = complex(ox * s * _SQRT1_2, 0.0)
            c12 = c01
        ham[0, 0] = d0
        ham[1, 1] = 0.0
        ham[2, 2] = d2
        ham[0, 1] = c01
        ham[1, 0] = c01.conjugate()
        ham[1, 2] = c12
        ham[2, 1] = c12.conjugate()
        vals, vecs = np.linalg.eigh(ham)
        amp = np.conj(vecs.T) @ psi
        for j in range(3):
            ph = vals[j] * dt
            amp[j] *= complex(math.cos(ph), -math.sin(ph))
        psi[:] = vecs @ amp


def _rotation(angle: float, phase: float) -> np.ndarray:
    """Working-pair rotation, identity on the spectator level."""
    c = math.cos(0.5 * angle)
    s = math.sin(0.5 * angle)
    r = np.eye(3, dtype=np.complex128)
    r[1, 1] = c
    r[2, 2] = c
    r[1, 2] = -1j * np.exp(-1j * phase) * s
    r[2, 1] = -1j * np.exp(1j * phase) * s
    return r


def _frame_transform(static: StaticHamiltonian, t: float) -> np.ndarray:
    """exp(-i H_static t) as a diagonal matrix (angular frequencies)."""
    return np.diag(
        [
            np.exp(-1j * TWO_PI * static.e_plus * t),
            1.0 + 0.0j,
            np.exp(-1j * TWO_PI * static.e_minus * t),
        ]
    ).astype(np.complex128)


def _check_step(static: StaticHamiltonian, f: RfFieldParams, cfg: PropagationConfig) -> None:
    bound = 1.0 / (20.0 * max_resolved_rate(static, f, cfg.frame))
    if cfg.dt > bound * (1.0 + 1e-9):
        raise StepTooCoarse(
            f"dt = {cfg.dt:.6g} us does not resolve the fastest rate; need dt <= {bound:.6g} us"
        )


def evolve(
    static: StaticHamiltonian,
    f: RfFieldParams,
    seq: PulseSequence,
    cfg: PropagationConfig,
    psi0: np.ndarray | None = None,
) -> np.ndarray:
    """Apply the full sequence to psi0 (default: bright level) and return psi.

    Events are processed chronologically; coincident rotations come
    before the window that starts at the same instant. Raises
    StepTooCoarse when cfg.dt violates the resolution rule and
    NonUnitaryDrift when the final norm deviates beyond cfg.tolerance.
    """
    f = validate_field(f)
    validate_static(static)
    require_valid(seq)
    _check_step(static, f, cfg)

    if psi0 is None:
        psi = np.zeros(3, dtype=np.complex128)
        psi[BRIGHT_INDEX] = 1.0
    else:
        psi = np.asarray(psi0, dtype=np.complex128).copy()
        if psi.shape != (3,):
            raise ValidationError(f"psi0 must have shape (3,), got {psi.shape}")
        nrm = np.linalg.norm(psi)
        if not nrm > 0.0:
            raise ValidationError("psi0 must be nonzero")
        psi /= nrm

    rotating = cfg.frame == "rotating"
    op = TWO_PI * static.e_plus
    om = TWO_PI * static.e_minus
    oz = TWO_PI * f.nu_z
    ox = TWO_PI * f.nu_x
    odc = TWO_PI * f.nu_dc
    orf = TWO_PI * f.nu_rf

    order = sorted(
        range(len(seq.events)),
        key=lambda i: (seq.events[i].start, 0 if seq.events[i].kind == "mw" else 1, i),
    )
    for i in order:
        e = seq.events[i]
        if e.kind == "mw":
            r = _rotation(e.mw_angle, e.mw_phase)
            if not rotating:
                v = _frame_transform(static, e.start)
                r = v @ r @ np.conj(v.T)
            psi = r @ psi
            continue
        if e.duration <= 0.0:
            continue
        rf_on = e.kind == "rf"
        diagonal = (not rf_on) or f.nu_x == 0.0
        n_steps = 1 if diagonal else int(math.ceil(e.duration / cfg.dt))
        _run_window(
            psi, n_steps, e.duration / n_steps, e.start,
            op, om, oz, ox, odc, orf, f.phi0, rf_on, rotating,
        )

    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if drift > cfg.tolerance:
        raise NonUnitaryDrift(f"state norm drifted by {drift:.3g}, tolerance {cfg.tolerance:.3g}")
    return psi


def population_bright(psi: np.ndarray) -> float:
    """Probability of the bright working level."""
    return float(abs(psi[BRIGHT_INDEX]) ** 2)


def _build(protocol: str, tau: float, tau_pad: float) -> PulseSequence:
    if protocol == "ramsey":
        return build_ramsey(tau)
    if protocol == "dd":
        return build_dd(tau, tau_pad=tau_pad)
    raise ValidationError(f"protocol must be 'ramsey' or 'dd', got {protocol!r}")


def _with_final_phase(seq: PulseSequence, phase: float) -> PulseSequence:
    events = list(seq.events)
    events[-1] = replace(events[-1], mw_phase=events[-1].mw_phase + phase)
    return PulseSequence(kind_tag=seq.kind_tag, events=tuple(events))


def simulate_populations(
    static: StaticHamiltonian,
    f: RfFieldParams,
    tau_us: np.ndarray,
    cfg: PropagationConfig | None = None,
    protocol: str = "ramsey",
    tau_pad: float = 0.5,
    readout_phase: float = 0.0,
) -> np.ndarray:
    """Bright-level population for each sensing length in tau_us."""
    if cfg is None:
        cfg = auto_config(static, f)
    out = np.empty(len(tau_us))
    for i, tau in enumerate(np.asarray(tau_us, dtype=float)):
        seq = _build(protocol, float(tau), tau_pad)
        if readout_phase != 0.0:
            seq = _with_final_phase(seq, readout_phase)
        out[i] = population_bright(evolve(static, f, seq, cfg))
    return out


@dataclass(frozen=True)
class ShiftMeasurement:
    """Secular-rate readout from a pair of quadrature population scans.

    shift_mhz is the fitted linear rate of the interferometer phase over
    the sensing time; alpha and delta are the oscillatory amplitude and
    the constant offset picked up alongside it.
    """

    shift_mhz: float
    alpha: float
    delta: float
    residual_rms: float
    protocol: str
    tau_us: np.ndarray
    phase: np.ndarray


def measure_numeric_shift(
    static: StaticHamiltonian,
    f: RfFieldParams,
    tau_us: np.ndarray,
    cfg: PropagationConfig | None = None,
    protocol: str = "ramsey",
    tau_pad: float = 0.5,
) -> ShiftMeasurement:
    """Extract the secular frequency shift from simulated populations.

    Two scans with readout phases 0 and pi/2 give the cosine and sine of
    the accumulated phase; the unwrapped phase is then regressed on
    {1, tau, cos(w_rf tau + phi0)}. The tau grid must be fine enough
    that successive phase differences stay below 0.9 pi, otherwise the
    unwrapping is unreliable and a ValidationError is raised.
    """
    f = validate_field(f)
    tau = np.asarray(tau_us, dtype=float)
    if tau.size < 4:
        raise ValidationError(f"need at least 4 sensing lengths, got {tau.size}")
    p_c = simulate_populations(static, f, tau, cfg, protocol, tau_pad, readout_phase=0.0)
    p_s = simulate_populations(static, f, tau, cfg, protocol, tau_pad, readout_phase=0.5 * math.pi)

    if protocol == "ramsey":
        cosv = 1.0 - 2.0 * p_c
        sinv = 2.0 * p_s - 1.0
        rate_sign = 1.0
    else:
        cosv = 2.0 * p_c - 1.0
        sinv = 1.0 - 2.0 * p_s
        rate_sign = -1.0

    phase = np.unwrap(np.arctan2(sinv, cosv))
    step = np.abs(np.diff(phase))
    if step.size and step.max() >= 0.9 * math.pi:
        raise ValidationError(
            "tau grid too coarse to track the accumulated phase; "
            f"largest step {step.max():.3f} rad"
        )

    basis = np.column_stack(
        [np.ones_like(tau), tau, np.cos(TWO_PI * f.nu_rf * tau + f.phi0)]
    )
    coef, *_ = np.linalg.lstsq(basis, phase, rcond=None)
    resid = phase - basis @ coef
    return ShiftMeasurement(
        shift_mhz=rate_sign * coef[1] / TWO_PI,
        alpha=rate_sign * coef[2],
        delta=float(coef[0]),
        residual_rms=float(np.sqrt(np.mean(resid**2))),
        protocol=protocol,
        tau_us=tau,
        phase=phase,
    )
