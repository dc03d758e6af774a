import numpy as np
import pytest
from dataclasses import replace

from eomtrans.constants import TWOPI
from eomtrans.params import (
    DeviceParams,
    DriveConfig,
    HeatingModel,
    apply_heating,
    default_drive,
    optomechanical_damping,
    table_defaults,
)


@pytest.fixture(scope="session")
def device():
    return table_defaults()


@pytest.fixture(scope="session")
def drive():
    return default_drive()


@pytest.fixture(scope="session")
def heated(device, drive):
    """Device constants with the default heating model applied at the
    reference drive (601 pW microwave, 625 pW optical)."""
    return apply_heating(HeatingModel(), drive, device)


@pytest.fixture(scope="session")
def fitted_point(heated, drive):
    """Reference operating point with gamma_m pinned so the conversion
    bandwidth is 2 pi * 370 Hz (the fitted linewidth at this drive)."""
    params = heated.params
    gamma_e = optomechanical_damping(params, drive, "e", params.omega_m)
    params = replace(params, gamma_m0=TWOPI * 370.0 - gamma_e)
    return params, drive, heated.t_m


def random_stable_config(rng) -> tuple[DeviceParams, DriveConfig]:
    """Draw a red-detuned configuration in the transducer regime."""
    omega_m = TWOPI * rng.uniform(5e6, 20e6)
    kappa_e = TWOPI * rng.uniform(1e6, 15e6)
    kappa_o = TWOPI * rng.uniform(0.5e9, 2e9)
    eta_e = rng.uniform(0.1, 0.9)
    eta_o = rng.uniform(0.05, 0.5)
    params = DeviceParams(
        omega_e=TWOPI * rng.uniform(5e9, 15e9),
        omega_o=TWOPI * 198e12,
        omega_m=omega_m,
        kappa_in_e=(1 - eta_e) * kappa_e,
        kappa_ex_e=eta_e * kappa_e,
        kappa_in_o=(1 - eta_o) * kappa_o,
        kappa_ex_o=eta_o * kappa_o,
        gamma_m0=TWOPI * rng.uniform(10.0, 500.0),
        g0_e=TWOPI * rng.uniform(20.0, 200.0),
        g0_o=TWOPI * rng.uniform(1e5, 1e6),
    )
    drive = DriveConfig(
        p_e=rng.uniform(1e-11, 2e-9),
        p_o=rng.uniform(1e-11, 2e-9),
        delta_e=omega_m * rng.uniform(0.5, 1.5),
        delta_o=kappa_o * rng.uniform(0.02, 0.6),
    )
    return params, drive


def assert_close(got, expect, rel=1e-9, abs_floor=1e-12):
    got = complex(got) if np.iscomplexobj(got) else float(got)
    expect = complex(expect) if np.iscomplexobj(expect) else float(expect)
    scale = max(abs(got), abs(expect))
    if scale < abs_floor:
        return
    assert abs(got - expect) / scale <= rel, f"{got} != {expect} (rel {abs(got-expect)/scale:.3e})"
