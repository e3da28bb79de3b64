"""Pulse-sequence containers and builders.

Sequences are flat lists of timed events on a single working transition:
instantaneous microwave rotations ('mw'), field-free waits ('free', any
static offset still acts) and sensing windows ('rf') during which the
oscillating field is coupled. The sensing-field phase is referenced to
the start of each 'rf' window.

Two standard protocols are provided. The two-pulse protocol brackets one
sensing window between pi/2 rotations and reads out

    P = (1 - cos(phi_f)) / 2.

The echo-protected protocol inserts a pi pair around the sensing window,
with the second pi rotation 90 degrees out of phase with the first so the
fringe keeps the (1 + cos(phi_f)) / 2 sign. Wait windows on either side
cancel out of the phase difference up to a constant offset from any
static detuning.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import NegativeDuration, ValidationError

EVENT_KINDS = ("mw", "free", "rf")

PI = math.pi
HALF_PI = math.pi / 2.0

# Relative timing slack (fraction of total duration) for contiguity checks.
_TIME_RTOL = 1e-9


@dataclass(frozen=True)
class PulseEvent:
    """One timed element: kind, start time and duration in us.

    mw_angle and mw_phase (radians) are meaningful for 'mw' events only;
    'mw' events are instantaneous and must carry duration 0.
    """

    kind: str
    start: float
    duration: float
    mw_angle: float = 0.0
    mw_phase: float = 0.0

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class PulseSequence:
    """Ordered event list with a protocol tag ('ramsey', 'dd' or 'custom')."""

    kind_tag: str
    events: tuple = field(default_factory=tuple)

    @property
    def duration(self) -> float:
        return max((e.end for e in self.events), default=0.0)

    @property
    def sensing_duration(self) -> float:
        """Total time with the oscillating field coupled, in us."""
        return sum(e.duration for e in self.events if e.kind == "rf")

    def mw_events(self) -> list:
        return [e for e in self.events if e.kind == "mw"]


def build_ramsey(tau_p: float) -> PulseSequence:
    """pi/2 - sense(tau_p) - pi/2, both rotations about the same axis."""
    if tau_p < 0.0:
        raise NegativeDuration(f"tau_p must be >= 0, got {tau_p}")
    events = (
        PulseEvent("mw", 0.0, 0.0, mw_angle=HALF_PI, mw_phase=0.0),
        PulseEvent("rf", 0.0, tau_p),
        PulseEvent("mw", tau_p, 0.0, mw_angle=HALF_PI, mw_phase=0.0),
    )
    return PulseSequence(kind_tag="ramsey", events=events)


def build_dd(tau_p: float, tau_pad: float = 0.5) -> PulseSequence:
    """pi/2 - wait - pi - sense(tau_p) - pi(y) - wait - pi/2.

    The second pi rotation is phase-shifted by pi/2 so the readout fringe
    matches the uninverted (1 + cos) form. tau_pad sets the symmetric wait
    on both sides of the sensing window.
    """
    if tau_p < 0.0:
        raise NegativeDuration(f"tau_p must be >= 0, got {tau_p}")
    if tau_pad < 0.0:
        raise NegativeDuration(f"tau_pad must be >= 0, got {tau_pad}")
    t1 = tau_pad
    t2 = tau_pad + tau_p
    events = (
        PulseEvent("mw", 0.0, 0.0, mw_angle=HALF_PI, mw_phase=0.0),
        PulseEvent("free", 0.0, tau_pad),
        PulseEvent("mw", t1, 0.0, mw_angle=PI, mw_phase=0.0),
        PulseEvent("rf", t1, tau_p),
        PulseEvent("mw", t2, 0.0, mw_angle=PI, mw_phase=HALF_PI),
        PulseEvent("free", t2, tau_pad),
        PulseEvent("mw", t2 + tau_pad, 0.0, mw_angle=HALF_PI, mw_phase=0.0),
    )
    return PulseSequence(kind_tag="dd", events=events)


@dataclass(frozen=True)
class ValidationRecord:
    """One finding from validate_sequence: machine code plus prose."""

    code: str
    message: str
    severity: str = "error"


def _phase_delta(a: float, b: float) -> float:
    """Smallest absolute angle between two phases, in radians."""
    d = (b - a) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def validate_sequence(seq: PulseSequence) -> list:
    """Structural checks; returns ValidationRecords (empty means clean).

    Errors cover unknown kinds, negative durations, non-instantaneous mw
    events and timeline gaps or overlaps. Protocol-shape mismatches for
    tagged sequences and nonstandard refocusing phases are reported too,
    the latter as 'phase-convention' warnings since the sequence is still
    simulable, just with an inverted or shifted fringe.
    """
    out: list = []
    tol = _TIME_RTOL * max(seq.duration, 1.0)

    if seq.kind_tag not in ("ramsey", "dd", "custom"):
        out.append(ValidationRecord("unknown-tag", f"unknown kind_tag {seq.kind_tag!r}"))
    if not seq.events:
        out.append(ValidationRecord("empty", "sequence has no events"))
        return out

    for i, e in enumerate(seq.events):
        if e.kind not in EVENT_KINDS:
            out.append(ValidationRecord("unknown-kind", f"event {i}: unknown kind {e.kind!r}"))
        if e.duration < 0.0:
            out.append(ValidationRecord("negative-duration", f"event {i}: duration {e.duration} < 0"))
        if e.kind == "mw" and e.duration != 0.0:
            out.append(
                ValidationRecord("mw-duration", f"event {i}: mw events are instantaneous, got {e.duration}")
            )

    # Timeline: events must tile [0, duration] without gaps or overlaps.
    timed = sorted(seq.events, key=lambda e: (e.start, e.duration))
    if abs(timed[0].start) > tol:
        out.append(ValidationRecord("start-offset", f"first event starts at {timed[0].start}, not 0"))
    cursor = 0.0
    for i, e in enumerate(timed):
        if e.start > cursor + tol:
            out.append(ValidationRecord("gap", f"uncovered interval [{cursor}, {e.start}] before event {i}"))
        elif e.start < cursor - tol:
            out.append(ValidationRecord("overlap", f"event {i} starts at {e.start} inside [{cursor - e.duration}, {cursor}]"))
        cursor = max(cursor, e.end)

    mw = seq.mw_events()
    if seq.kind_tag == "ramsey":
        shape_ok = (
            len(mw) == 2
            and all(abs(p.mw_angle - HALF_PI) <= 1e-12 for p in mw)
            and len([e for e in seq.events if e.kind == "rf"]) == 1
        )
        if not shape_ok:
            out.append(ValidationRecord("protocol-shape", "ramsey tag expects pi/2, sense, pi/2"))
        elif _phase_delta(mw[0].mw_phase, mw[1].mw_phase) > 1e-9:
            out.append(
                ValidationRecord(
                    "phase-convention",
                    "readout pi/2 phase differs from the first; fringe is shifted "
                    f"by {_phase_delta(mw[0].mw_phase, mw[1].mw_phase):.3g} rad",
                    severity="warning",
                )
            )
    elif seq.kind_tag == "dd":
        pis = [p for p in mw if abs(p.mw_angle - PI) <= 1e-12]
        halves = [p for p in mw if abs(p.mw_angle - HALF_PI) <= 1e-12]
        if len(mw) != 4 or len(pis) != 2 or len(halves) != 2:
            out.append(ValidationRecord("protocol-shape", "dd tag expects pi/2, pi, pi, pi/2 rotations"))
        else:
            if abs(_phase_delta(pis[0].mw_phase, pis[1].mw_phase) - HALF_PI) > 1e-9:
                out.append(
                    ValidationRecord(
                        "phase-convention",
                        "refocusing pair is not 90 degrees apart; fringe sign differs "
                        "from the (1 + cos) model",
                        severity="warning",
                    )
                )
    return out


def require_valid(seq: PulseSequence) -> None:
    """Raise ValidationError on the first error-severity finding."""
    bad = [r for r in validate_sequence(seq) if r.severity == "error"]
    if bad:
        raise ValidationError("; ".join(f"{r.code}: {r.message}" for r in bad))
