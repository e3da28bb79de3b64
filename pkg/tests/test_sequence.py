import math
from dataclasses import replace

import pytest

from nvrf import PulseEvent, PulseSequence, ValidationError, build_dd, build_ramsey, require_valid, validate_sequence

HALF_PI = math.pi / 2.0


class TestBuilders:
    def test_ramsey_shape(self):
        seq = build_ramsey(1.7)
        assert seq.kind_tag == "ramsey"
        kinds = [e.kind for e in seq.events]
        assert kinds == ["mw", "rf", "mw"]
        assert math.isclose(seq.duration, 1.7)
        assert math.isclose(seq.sensing_duration, 1.7)
        first, last = seq.mw_events()[0], seq.mw_events()[-1]
        assert math.isclose(first.mw_angle, HALF_PI)
        assert math.isclose(last.mw_angle, HALF_PI)

    def test_dd_shape(self):
        seq = build_dd(2.0, tau_pad=0.5)
        kinds = [e.kind for e in seq.events]
        assert kinds == ["mw", "free", "mw", "rf", "mw", "free", "mw"]
        assert math.isclose(seq.duration, 3.0)
        assert math.isclose(seq.sensing_duration, 2.0)
        angles = [e.mw_angle for e in seq.mw_events()]
        assert angles == pytest.approx([HALF_PI, math.pi, math.pi, HALF_PI])
        # refocusing pair is phase-shifted by 90 degrees
        mw = seq.mw_events()
        assert math.isclose(abs(mw[2].mw_phase - mw[1].mw_phase), HALF_PI)

    def test_zero_sensing_window_allowed(self):
        seq = build_ramsey(0.0)
        assert not validate_sequence(seq)

    def test_negative_duration_rejected(self):
        with pytest.raises(ValidationError):
            require_valid(build_ramsey(-1.0))


class TestValidation:
    def test_clean_sequences_have_no_records(self):
        assert validate_sequence(build_ramsey(1.0)) == []
        assert validate_sequence(build_dd(1.0, tau_pad=0.3)) == []

    def test_gap_detected(self):
        seq = PulseSequence(
            "custom", (PulseEvent("rf", 0.0, 1.0), PulseEvent("rf", 1.5, 0.5))
        )
        assert any(r.code == "gap" for r in validate_sequence(seq))

    def test_overlap_detected(self):
        seq = PulseSequence(
            "custom", (PulseEvent("rf", 0.0, 1.0), PulseEvent("rf", 0.5, 1.0))
        )
        assert any(r.code == "overlap" for r in validate_sequence(seq))

    def test_unknown_kind(self):
        seq = PulseSequence("custom", (PulseEvent("laser", 0.0, 1.0),))
        records = validate_sequence(seq)
        assert any(r.code == "unknown-kind" and r.severity == "error" for r in records)

    def test_empty_sequence(self):
        assert any(r.code == "empty" for r in validate_sequence(PulseSequence("custom", ())))

    def test_dd_refocusing_phase_warning(self):
        seq = build_dd(1.0)
        events = list(seq.events)
        events[4] = replace(events[4], mw_phase=0.0)
        records = validate_sequence(PulseSequence("dd", tuple(events)))
        assert any(r.code == "phase-convention" and r.severity == "warning" for r in records)

    def test_warning_does_not_block_require_valid(self):
        seq = build_dd(1.0)
        events = list(seq.events)
        events[4] = replace(events[4], mw_phase=0.0)
        require_valid(PulseSequence("dd", tuple(events)))

    def test_require_valid_raises_on_error(self):
        seq = PulseSequence(
            "custom", (PulseEvent("rf", 0.0, 1.0), PulseEvent("rf", 0.5, 1.0))
        )
        with pytest.raises(ValidationError):
            require_valid(seq)

    def test_mw_pulse_with_duration_flagged(self):
        seq = PulseSequence("custom", (PulseEvent("mw", 0.0, 0.3, mw_angle=HALF_PI),))
        assert any(r.code == "mw-duration" for r in validate_sequence(seq))
