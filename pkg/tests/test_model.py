import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nvrf import (
    FieldValidationError,
    NonUniformSampling,
    RfFieldParams,
    SpinSystem,
    Spectrum,
    TimeTrace,
    ValidationError,
    validate_field,
    validate_system,
)

TWO_PI = 2.0 * math.pi


class TestFieldParams:
    def test_valid_field_passes_and_wraps_phase(self):
        f = validate_field(RfFieldParams(nu_z=2.66, nu_x=35.2, nu_rf=2.0, phi0=7.0))
        assert 0.0 <= f.phi0 < TWO_PI
        assert math.isclose(f.phi0, 7.0 - TWO_PI)

    def test_all_violations_collected(self):
        bad = RfFieldParams(nu_z=1.0, nu_x=-3.0, nu_rf=0.0, power_mw=-1.0)
        with pytest.raises(FieldValidationError) as err:
            validate_field(bad)
        assert len(err.value.violations) >= 3

    def test_zero_carrier_rejected(self):
        with pytest.raises(FieldValidationError):
            validate_field(RfFieldParams(nu_z=1.0, nu_x=0.0, nu_rf=0.0))

    @given(st.floats(-50.0, 50.0))
    def test_phase_wrap_preserves_angle(self, phi0):
        f = validate_field(RfFieldParams(nu_z=1.0, nu_x=0.0, nu_rf=2.0, phi0=phi0))
        assert 0.0 <= f.phi0 < TWO_PI
        assert math.isclose(math.cos(f.phi0), math.cos(phi0), abs_tol=1e-9)
        assert math.isclose(math.sin(f.phi0), math.sin(phi0), abs_tol=1e-9)


class TestSpinSystem:
    def test_defaults(self):
        s = SpinSystem(nu_transition=2475.151)
        assert s.coherence_order == 1
        assert s.t2_star > 0.0
        validate_system(s)

    def test_bad_coherence_order(self):
        with pytest.raises(ValidationError):
            validate_system(SpinSystem(nu_transition=100.0, coherence_order=3))

    def test_zero_transition(self):
        with pytest.raises(ValidationError):
            validate_system(SpinSystem(nu_transition=0.0))

    def test_negative_t2(self):
        with pytest.raises(ValidationError):
            validate_system(SpinSystem(nu_transition=100.0, t2_star=-1.0))

    def test_infinite_t2_allowed(self):
        validate_system(SpinSystem(nu_transition=100.0, t2_star=math.inf))


class TestTimeTrace:
    def test_basic_properties(self):
        tau = np.array([0.1, 0.2, 0.3, 0.4])
        tr = TimeTrace(tau, np.full(4, 0.5))
        assert tr.n == 4
        assert math.isclose(tr.dt, 0.1)
        assert not tr.tau_us.flags.writeable
        assert not tr.population.flags.writeable

    def test_too_few_samples(self):
        with pytest.raises(ValidationError):
            TimeTrace(np.array([0.1]), np.array([0.5]))

    def test_non_increasing(self):
        with pytest.raises(ValidationError):
            TimeTrace(np.array([0.2, 0.1, 0.3]), np.full(3, 0.5))

    def test_non_uniform(self):
        with pytest.raises(NonUniformSampling):
            TimeTrace(np.array([0.1, 0.2, 0.45]), np.full(3, 0.5))

    def test_population_out_of_range(self):
        with pytest.raises(ValidationError):
            TimeTrace(np.array([0.1, 0.2]), np.array([0.5, 1.5]))

    def test_meta_range_override(self):
        tr = TimeTrace(
            np.array([0.1, 0.2]),
            np.array([-0.1, 1.4]),
            meta={"range_lo": -0.2, "range_hi": 1.5},
        )
        assert tr.population[1] == 1.4

    def test_sigma_shape_checked(self):
        with pytest.raises(ValidationError):
            TimeTrace(np.array([0.1, 0.2]), np.array([0.5, 0.5]), np.array([0.01]))

    def test_negative_sigma_rejected(self):
        with pytest.raises(ValidationError):
            TimeTrace(np.array([0.1, 0.2]), np.array([0.5, 0.5]), np.array([0.01, -0.01]))


class TestSpectrum:
    def test_df_property(self):
        sp = Spectrum(
            freq_mhz=np.array([0.0, 0.5, 1.0]),
            magnitude=np.array([0.0, 1.0, 0.2]),
            window="rect",
            pad_factor=1,
            n_samples=4,
        )
        assert math.isclose(sp.df, 0.5)

    def test_negative_magnitude_rejected(self):
        with pytest.raises(ValidationError):
            Spectrum(
                freq_mhz=np.array([0.0, 0.5]),
                magnitude=np.array([0.1, -0.2]),
                window="rect",
                pad_factor=1,
                n_samples=4,
            )

    def test_unknown_window_rejected(self):
        with pytest.raises(ValidationError):
            Spectrum(
                freq_mhz=np.array([0.0, 0.5]),
                magnitude=np.array([0.1, 0.2]),
                window="flat-top",
                pad_factor=1,
                n_samples=4,
            )
