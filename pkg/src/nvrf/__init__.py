"""Simulation and inference for a single-spin RF field sensor.

The package covers the forward models (closed-form phase accumulation
and a stepped unitary propagator for a three-level system), spectrum
and peak tooling, weighted model fits with uncertainty reporting, a
photon-counting readout noise model, and file formats plus a CLI that
chain them together.
"""

from .analytic import (
    HarmonicDecomposition,
    PhaseModelParams,
    bloch_siegert_rate,
    harmonic_decomposition,
    phase_longitudinal,
    phase_params_for,
    phase_total,
    population_dd,
    population_ramsey,
)
from .bessel import bessel_jn
from .errors import (
    AmbiguousAssignment,
    ConvergenceError,
    DataShapeError,
    DegenerateTrace,
    FieldValidationError,
    FileFormatError,
    IoFailure,
    NoConvergence,
    NonUniformSampling,
    NonUnitaryDrift,
    SensorError,
    ValidationError,
)
from .estimation import (
    FitResult,
    RatioCheck,
    ShiftDecomposition,
    amplitude_ratio_check,
    canonicalize,
    estimate_angle,
    fit_trace,
    invert_bss,
    model_population,
    separate_dc_bss,
    two_power_summary,
)
from .model import (
    DEFAULT_NU_TRANSITION_MHZ,
    DEFAULT_T2_STAR_US,
    RfFieldParams,
    SpinSystem,
    Spectrum,
    TimeTrace,
    validate_field,
    validate_system,
)
from .noise import ReadoutModel, sample_trace
from .propagator import (
    PropagationConfig,
    ShiftMeasurement,
    StaticHamiltonian,
    auto_config,
    evolve,
    measure_numeric_shift,
    population_bright,
    simulate_populations,
)
from .sequence import (
    PulseEvent,
    PulseSequence,
    build_dd,
    build_ramsey,
    require_valid,
    validate_sequence,
)
from .spectral import HarmonicAssignment, Peak, assign_harmonics, find_peaks, spectrum
from .dataio import (
    read_fit,
    read_peaks,
    read_sequence,
    read_spectrum,
    read_trace,
    write_fit,
    write_peaks,
    write_sequence,
    write_spectrum,
    write_summary,
    write_trace,
)
from .selftest import CheckResult, run_all

__version__ = "0.1.0"

__all__ = [
    "AmbiguousAssignment",
    "CheckResult",
    "ConvergenceError",
    "DataShapeError",
    "DEFAULT_NU_TRANSITION_MHZ",
    "DEFAULT_T2_STAR_US",
    "DegenerateTrace",
    "FieldValidationError",
    "FileFormatError",
    "FitResult",
    "HarmonicAssignment",
    "HarmonicDecomposition",
    "IoFailure",
    "NoConvergence",
    "NonUniformSampling",
    "NonUnitaryDrift",
    "Peak",
    "PhaseModelParams",
    "PropagationConfig",
    "PulseEvent",
    "PulseSequence",
    "RatioCheck",
    "ReadoutModel",
    "RfFieldParams",
    "SensorError",
    "ShiftDecomposition",
    "ShiftMeasurement",
    "SpinSystem",
    "Spectrum",
    "StaticHamiltonian",
    "TimeTrace",
    "ValidationError",
    "amplitude_ratio_check",
    "assign_harmonics",
    "auto_config",
    "bessel_jn",
    "bloch_siegert_rate",
    "build_dd",
    "build_ramsey",
    "canonicalize",
    "estimate_angle",
    "evolve",
    "find_peaks",
    "fit_trace",
    "harmonic_decomposition",
    "invert_bss",
    "measure_numeric_shift",
    "model_population",
    "phase_longitudinal",
    "phase_params_for",
    "phase_total",
    "population_bright",
    "population_dd",
    "population_ramsey",
    "read_fit",
    "read_peaks",
    "read_sequence",
    "read_spectrum",
    "read_trace",
    "require_valid",
    "run_all",
    "sample_trace",
    "separate_dc_bss",
    "simulate_populations",
    "spectrum",
    "two_power_summary",
    "validate_field",
    "validate_sequence",
    "validate_system",
    "write_fit",
    "write_peaks",
    "write_sequence",
    "write_spectrum",
    "write_summary",
    "write_trace",
]
