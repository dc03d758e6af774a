"""Added-noise budgets and output noise spectra for both waveguide ports.

The added noise at a port is defined against S_out = zeta S_in + n_add:
every co-rotating input channel contributes |coeff|^2 * n_bath and every
counter-rotating one |coeff|^2 * (n_bath + 1), with the port weights of
:func:`eomtrans.network.coefficient_upsilon_pairs`. The ten labelled
contributions sum to the total exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import network, transduction
from .constants import PICOWATT
from .errors import DomainError
from .params import DeviceParams, DriveConfig, derive, optomechanical_damping

RESONATOR_NOISE_PER_PW = 2.8e-3  # broadband microwave resonator quanta per pW of P_e


@dataclass(frozen=True)
class BathOccupancies:
    """Thermal occupancies of the five input baths."""

    n_ext_e: float = 0.0
    n_int_e: float = 0.0
    n_ext_o: float = 0.0
    n_int_o: float = 0.0
    n_m: float = 0.0

    def __post_init__(self):
        for name in ("n_ext_e", "n_int_e", "n_ext_o", "n_int_o", "n_m"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"bath occupancy {name} must be >= 0")


@dataclass(frozen=True)
class NoiseBudget:
    """Added noise quanta at both outputs with the per-bath breakdown."""

    omega: float
    n_add_e: float
    n_add_o: float
    contributions: dict = field(default_factory=dict)  # port -> label -> quanta


def _port_weights(params: DeviceParams, coeffs: network.OutputCoefficients, port: str):
    """|coefficient|^2 channel weights for one output port, keyed by the
    input-channel labels of :data:`eomtrans.network.INPUT_LABELS`."""
    eta_e, eta_o = params.eta_e, params.eta_o
    c = coeffs
    if port == "e":
        return {
            "ext_e": np.abs(eta_e * c.alpha_ee - 1.0) ** 2,
            "int_e": eta_e * (1.0 - eta_e) * np.abs(c.alpha_ee) ** 2,
            "ext_o": eta_e * eta_o * np.abs(c.alpha_eo) ** 2,
            "int_o": eta_e * (1.0 - eta_o) * np.abs(c.alpha_eo) ** 2,
            "mech": eta_e * np.abs(c.alpha_em) ** 2,
            "ext_e_amp": eta_e * eta_e * np.abs(c.alpha_t_ee) ** 2,
            "int_e_amp": eta_e * (1.0 - eta_e) * np.abs(c.alpha_t_ee) ** 2,
            "ext_o_amp": eta_e * eta_o * np.abs(c.alpha_t_eo) ** 2,
            "int_o_amp": eta_e * (1.0 - eta_o) * np.abs(c.alpha_t_eo) ** 2,
            "mech_amp": eta_e * np.abs(c.alpha_t_em) ** 2,
        }
    return {
        "ext_o": np.abs(eta_o * c.alpha_oo - 1.0) ** 2,
        "int_o": eta_o * (1.0 - eta_o) * np.abs(c.alpha_oo) ** 2,
        "ext_e": eta_o * eta_e * np.abs(c.alpha_oe) ** 2,
        "int_e": eta_o * (1.0 - eta_e) * np.abs(c.alpha_oe) ** 2,
        "mech": eta_o * np.abs(c.alpha_om) ** 2,
        "ext_o_amp": eta_o * eta_o * np.abs(c.alpha_t_oo) ** 2,
        "int_o_amp": eta_o * (1.0 - eta_o) * np.abs(c.alpha_t_oo) ** 2,
        "ext_e_amp": eta_o * eta_e * np.abs(c.alpha_t_oe) ** 2,
        "int_e_amp": eta_o * (1.0 - eta_e) * np.abs(c.alpha_t_oe) ** 2,
        "mech_amp": eta_o * np.abs(c.alpha_t_om) ** 2,
    }


_OCCUPANCY_OF_CHANNEL = {
    "ext_e": "n_ext_e", "int_e": "n_int_e", "ext_o": "n_ext_o",
    "int_o": "n_int_o", "mech": "n_m",
}


def _contributions(weights: dict, baths: BathOccupancies) -> dict:
    out = {}
    for label, weight in weights.items():
        if label.endswith("_amp"):
            occ = getattr(baths, _OCCUPANCY_OF_CHANNEL[label[:-4]]) + 1.0
        else:
            occ = getattr(baths, _OCCUPANCY_OF_CHANNEL[label])
        out[label] = weight * occ
    return out


def added_noise_full(
    params: DeviceParams,
    drive: DriveConfig,
    omega: float,
    baths: BathOccupancies,
) -> NoiseBudget:
    """Exact added noise at both outputs for the given bath occupancies."""
    coeffs = network.analytic_coefficients(params, drive, omega)
    contributions = {}
    totals = {}
    for port in ("e", "o"):
        terms = _contributions(_port_weights(params, coeffs, port), baths)
        contributions[port] = {k: float(v) for k, v in terms.items()}
        totals[port] = float(sum(terms.values()))
    return NoiseBudget(
        omega=omega,
        n_add_e=totals["e"],
        n_add_o=totals["o"],
        contributions=contributions,
    )


def added_noise_vacuum(params: DeviceParams, drive: DriveConfig, omega: float) -> tuple[float, float]:
    """Added noise with every bath at zero occupancy.

    Collapses to eta_j (|alpha~_jj|^2 + |alpha~_jk|^2 + |alpha~_jm|^2): only
    the counter-rotating (amplifying) channels contribute vacuum noise.
    """
    budget = added_noise_full(params, drive, omega, BathOccupancies())
    return budget.n_add_e, budget.n_add_o


def added_noise_simplified(params: DeviceParams, drive: DriveConfig) -> tuple[float, float]:
    """Phonon-floor form of the vacuum added noise (delta_e = omega_m regime).

    n_add_e ~= theta/eta_o * n_min
    n_add_o ~= theta/eta_e * n_min (n_min + 1) (Gamma_o / Gamma_e)
    """
    point = transduction.decompose(params, drive)
    n_min = point.n_min
    wm = params.omega_m
    gamma_e = optomechanical_damping(params, drive, "e", wm)
    gamma_o = optomechanical_damping(params, drive, "o", wm)
    n_add_e = point.theta / params.eta_o * n_min
    if gamma_e == 0.0:
        n_add_o = 0.0
    else:
        n_add_o = point.theta / params.eta_e * n_min * (n_min + 1.0) * (gamma_o / gamma_e)
    return n_add_e, n_add_o


def amplifier_referred_noise(params: DeviceParams, drive: DriveConfig) -> tuple[float, float]:
    """Quantum-limited-amplifier added noise per unit pure conversion.

    n_amp_e = n_add_e / theta ~= gain_o - 1 and n_amp_o ~= gain_e - 1,
    valid when the opposite mode is sideband-resolved.
    """
    gain_e = transduction.conversion_gain(params, drive, "e", params.omega_m)
    gain_o = transduction.conversion_gain(params, drive, "o", params.omega_m)
    return gain_o - 1.0, gain_e - 1.0


def resonator_broadband_occupancy(drive: DriveConfig) -> float:
    """Broadband microwave resonator noise occupancy, linear in P_e."""
    return RESONATOR_NOISE_PER_PW * (drive.p_e / PICOWATT)


@dataclass(frozen=True)
class OutputSpectrum:
    """Layered per-frequency output noise (quanta) for both ports."""

    omega: np.ndarray  # rad/s
    layers: dict  # port -> layer name -> array; layers sum to "total"


def output_spectrum(
    params: DeviceParams,
    drive: DriveConfig,
    omega_grid: np.ndarray,
    baths: BathOccupancies,
    setup_noise: tuple[float, float] = (0.0, 0.0),
    include_resonator_noise: bool = False,
) -> OutputSpectrum:
    """Noise quanta spectra at both outputs, including the measurement chain.

    Layers per port: flat ``background`` (1 + setup added noise), the
    broadband microwave-``resonator`` term (an extra occupancy on the
    internal microwave bath, kappa_e wide by the cavity response),
    ``mechanical`` (thermal + amplified mechanical bath), and ``other``
    (all remaining electromagnetic-bath and vacuum-gain terms). Layers sum
    to ``total`` exactly.
    """
    omega_grid = np.asarray(omega_grid, dtype=float)
    coeffs = network.analytic_coefficients(params, drive, omega_grid)
    n_res = resonator_broadband_occupancy(drive) if include_resonator_noise else 0.0

    layers = {}
    for port, n_setup in zip(("e", "o"), setup_noise):
        weights = _port_weights(params, coeffs, port)
        terms = _contributions(weights, baths)
        mechanical = terms["mech"] + terms["mech_amp"]
        total_budget = sum(terms.values())
        resonator = n_res * (weights["int_e"] + weights["int_e_amp"])
        background = np.full_like(omega_grid, 1.0 + n_setup)
        other = total_budget - mechanical
        layers[port] = {
            "background": background,
            "resonator": np.broadcast_to(resonator, omega_grid.shape).copy()
            if np.ndim(resonator)
            else np.full_like(omega_grid, resonator),
            "mechanical": np.broadcast_to(mechanical, omega_grid.shape).copy(),
            "other": np.broadcast_to(other, omega_grid.shape).copy(),
        }
        layers[port]["total"] = (
            layers[port]["background"]
            + layers[port]["resonator"]
            + layers[port]["mechanical"]
            + layers[port]["other"]
        )
    return OutputSpectrum(omega=omega_grid, layers=layers)
