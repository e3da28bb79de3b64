import math

import numpy as np
import pytest

from nvrf import RfFieldParams, SpinSystem, TimeTrace
from nvrf.analytic import phase_params_for, population_ramsey

NU_RF = 2.0
NU_TRANSITION = 2475.151
T2_STAR = 22.0

# Two reference drive powers with their per-component field amplitudes.
POINT_A = {"power_mw": 8.8, "nu_z": 2.66, "nu_x": 35.2, "nu_dc": -0.20}
POINT_B = {"power_mw": 13.9, "nu_z": 3.24, "nu_x": 44.0, "nu_dc": -0.25}


def make_clean_trace(point, tau, phi0=0.9):
    """Noise-free free-precession readout trace for one drive power."""
    f = RfFieldParams(
        nu_z=point["nu_z"],
        nu_x=point["nu_x"],
        nu_rf=NU_RF,
        phi0=phi0,
        nu_dc=point["nu_dc"],
        power_mw=point["power_mw"],
    )
    system = SpinSystem(nu_transition=NU_TRANSITION, t2_star=T2_STAR)
    params = phase_params_for(f, system, "ramsey")
    pops = population_ramsey(params, f, 1, tau, T2_STAR)
    meta = {
        "protocol": "ramsey",
        "nu_rf": NU_RF,
        "phi0": phi0,
        "t2_star": T2_STAR,
        "power_mw": point["power_mw"],
    }
    return TimeTrace(tau, np.asarray(pops), meta=meta)


@pytest.fixture(scope="session")
def trace_a():
    return make_clean_trace(POINT_A, np.linspace(0.02, 30.0, 1500))


@pytest.fixture(scope="session")
def trace_b():
    return make_clean_trace(POINT_B, np.linspace(0.02, 30.0, 1500))


@pytest.fixture(scope="session")
def exact_shifts():
    """Closed-form total shifts at both powers (static plus quadratic)."""
    out = []
    for point in (POINT_A, POINT_B):
        out.append(point["nu_dc"] + point["nu_x"] ** 2 / (2.0 * NU_TRANSITION))
    return tuple(out)


def assert_close(got, want, rel=0.0, abs_=0.0, label=""):
    tol = max(abs_, rel * abs(want))
    assert abs(got - want) <= tol, f"{label}: got {got}, want {want} (tol {tol})"


@pytest.fixture(scope="session")
def _warm_propagator():
    """Compile the numeric kernel once so timed tests stay honest."""
    from nvrf.selftest import _warm_kernel

    _warm_kernel()
