"""Classical modulator figures of merit: V_pi, drive-to-phonon transfer,
and the energy needed to imprint one bit of phase modulation.

The microwave-voltage-to-phonon chain is

    n_ph = |T31(omega)|^2 P_signal / (hbar omega_e),
    V_pi(omega) = (1/|T31(omega)|) (pi kappa_o / g0_o) sqrt(2 hbar omega_e Z_e),

where T31 is the waveguide-to-mechanics transfer amplitude, i.e. element
(3, 1) of (-i omega I - A)^{-1} B in the network state space.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import network
from .constants import HBAR, TWOPI
from .errors import DomainError
from .params import (
    DeviceParams,
    DriveConfig,
    derive,
    optomechanical_damping,
    susceptibility,
)
from .transduction import frequency_shift

V_PI_FORMS = ("full", "scenario1", "scenario2")


def theta31(params: DeviceParams, drive: DriveConfig, omega) -> complex | np.ndarray:
    """Microwave-waveguide-to-phonon transfer amplitude, closed form.

    T31(omega) = -i sqrt(kappa_ex_e) G_e chi_e chi_m / den. Equals the
    (3, 1) element of the state-space solve (see :func:`theta31_matrix`).
    """
    derived = derive(params, drive)
    chi_e = susceptibility(params, drive, "e", omega)
    chi_m = susceptibility(params, drive, "m", omega)
    den = network.response_denominator(params, drive, omega, derived)
    return -1j * math.sqrt(params.kappa_ex_e) * derived.g_e * chi_e * chi_m / den


def theta31_matrix(params: DeviceParams, drive: DriveConfig, omega: float) -> complex:
    """Same transfer amplitude via the dense matrix solve (oracle route)."""
    matrices = network.build_matrices(params, drive)
    lhs = -1j * omega * np.eye(6) - matrices.a_mat
    x = np.linalg.solve(lhs, matrices.b_mat)
    return complex(x[2, 0])


def phonon_number(params: DeviceParams, drive: DriveConfig, p_signal: float, omega: float) -> float:
    """Phonons excited by a resonant microwave signal of power ``p_signal``."""
    if p_signal < 0.0:
        raise DomainError("signal power must be >= 0")
    return abs(theta31(params, drive, omega)) ** 2 * p_signal / (HBAR * params.omega_e)


def _voltage_prefactor(params: DeviceParams) -> float:
    return (math.pi * params.kappa_o / params.g0_o) * math.sqrt(
        HBAR * params.omega_e * 2.0 * params.z_e
    )


def v_pi(
    params: DeviceParams,
    drive: DriveConfig,
    omega: float | None = None,
    form: str = "full",
) -> float:
    """Microwave voltage amplitude producing a pi optical phase shift.

    ``full`` evaluates 1/|T31(omega)| exactly. ``scenario1`` assumes both
    modes sideband-resolved and perfectly red-detuned pumps,

        V_pi = 1/2 sqrt(gamma_m/eta_e) sqrt((1+C_e+C_o)^2/C_e) * prefactor;

    ``scenario2`` additionally drops the optical damping channel (the
    operating regime of a strongly unresolved optical mode), removing C_o.
    """
    if form not in V_PI_FORMS:
        raise DomainError(f"unknown v_pi form {form!r}")
    if omega is None:
        omega = params.omega_m + frequency_shift(params, drive)
    pref = _voltage_prefactor(params)
    if form == "full":
        transfer = abs(theta31(params, drive, omega))
        if transfer == 0.0:
            raise DomainError("zero waveguide-to-phonon transfer; V_pi undefined")
        return pref / transfer
    derived = derive(params, drive)
    coop_e = derived.coop_e
    if coop_e == 0.0:
        raise DomainError("zero electromechanical cooperativity; V_pi undefined")
    coop_o = derived.coop_o if form == "scenario1" else 0.0
    gamma_m = params.gamma_m
    return (
        0.5
        * math.sqrt(gamma_m / params.eta_e)
        * math.sqrt((1.0 + coop_e + coop_o) ** 2 / coop_e)
        * pref
    )


def energy_per_bit(
    params: DeviceParams,
    drive: DriveConfig,
    form: str = "full",
    cyclic_bandwidth: bool = False,
) -> float:
    """Microwave energy to imprint one bit of phase modulation.

    E_bit = P_pi / B with P_pi = V_pi^2 / (2 Z_e) and modulation bandwidth
    B = 2 gamma_m at the matched point Gamma_e = gamma_m. The default uses
    the angular bandwidth (2 gamma_m in rad/s); ``cyclic_bandwidth=True``
    divides by 2 gamma_m / 2 pi in Hz instead (a factor 2 pi larger E_bit).
    Both conventions are reported side by side in :func:`modulator_report`.
    """
    voltage = v_pi(params, drive, form=form)
    p_pi = voltage**2 / (2.0 * params.z_e)
    bandwidth = 2.0 * params.gamma_m
    if cyclic_bandwidth:
        bandwidth = bandwidth / TWOPI
    return p_pi / bandwidth


@dataclass(frozen=True)
class ModulatorReport:
    """Headline modulator numbers plus the assumptions that produced them."""

    v_pi_v: float
    v_pi_freq_hz: float
    p_pi_w: float
    e_bit_j: float  # angular-bandwidth convention
    e_bit_cyclic_j: float  # cyclic-bandwidth convention (2 pi larger)
    theta31_mag: float
    v_pi_scenario1_v: float
    v_pi_scenario2_v: float
    assumptions: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        data = {
            "v_pi_v": self.v_pi_v,
            "v_pi_freq_hz": self.v_pi_freq_hz,
            "p_pi_w": self.p_pi_w,
            "e_bit_j": self.e_bit_j,
            "e_bit_cyclic_j": self.e_bit_cyclic_j,
            "theta31_mag": self.theta31_mag,
            "v_pi_scenario1_v": self.v_pi_scenario1_v,
            "v_pi_scenario2_v": self.v_pi_scenario2_v,
        }
        data.update({f"assume_{k}": v for k, v in self.assumptions.items()})
        return data

    def to_text(self) -> str:
        lines = [f"{key} = {value:.6g}" for key, value in self.to_dict().items()]
        return "\n".join(lines) + "\n"

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True)


def modulator_report(
    params: DeviceParams,
    drive: DriveConfig,
    scan_halfwidth_factor: float = 6.0,
    scan_points: int = 2001,
) -> ModulatorReport:
    """Evaluate the full-form V_pi over a local scan and package the report.

    The scan brackets the shifted mechanical resonance; the minimum of the
    full V_pi(omega) is reported together with both energy conventions and
    the simplified-scenario voltages.
    """
    shift = frequency_shift(params, drive)
    center = params.omega_m + shift
    gamma_e = optomechanical_damping(params, drive, "e", params.omega_m)
    halfwidth = scan_halfwidth_factor * (params.gamma_m + gamma_e)
    grid = np.linspace(center - halfwidth, center + halfwidth, scan_points)
    transfer = np.abs(theta31(params, drive, grid))
    best = int(np.argmax(transfer))
    if transfer[best] == 0.0:
        raise DomainError("zero waveguide-to-phonon transfer; V_pi undefined")
    pref = _voltage_prefactor(params)
    voltage = pref / transfer[best]
    derived = derive(params, drive)
    return ModulatorReport(
        v_pi_v=float(voltage),
        v_pi_freq_hz=float(grid[best] / TWOPI),
        p_pi_w=float(voltage**2 / (2.0 * params.z_e)),
        e_bit_j=float(voltage**2 / (2.0 * params.z_e) / (2.0 * params.gamma_m)),
        e_bit_cyclic_j=float(
            voltage**2 / (2.0 * params.z_e) / (2.0 * params.gamma_m / TWOPI)
        ),
        theta31_mag=float(transfer[best]),
        v_pi_scenario1_v=v_pi(params, drive, form="scenario1"),
        v_pi_scenario2_v=v_pi(params, drive, form="scenario2"),
        assumptions={
            "eta_e": params.eta_e,
            "gamma_m_hz": params.gamma_m / TWOPI,
            "coop_e": derived.coop_e,
            "coop_o": derived.coop_o,
            "p_e_w": drive.p_e,
            "p_o_w": drive.p_o,
        },
    )
