"""Conversion efficiency, gain decomposition, bandwidth and line pulling.

The waveguide-to-waveguide conversion between the upper sidebands is

    zeta(omega) = | sqrt(kappa_ex_e kappa_ex_o) G_e G_o chi_e chi_o
                    (chi_m~ - chi_m) / den |^2

with den the shared response denominator from :mod:`eomtrans.network`.
``zeta`` factors into a pure-conversion Lorentzian ``theta`` times the
counter-rotating amplification gains ``G_e_gain * G_o_gain``; here
``theta`` is defined by that exact factorization (zeta / gains), while
:func:`theta_lorentzian` gives the familiar matched-Lorentzian
approximation for comparison (they agree to O(shift/omega_m)).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import network
from .errors import DomainError
from .params import (
    DeviceParams,
    DriveConfig,
    derive,
    optomechanical_damping,
    susceptibility,
)


@dataclass(frozen=True)
class ConversionPoint:
    """Conversion figures at one drive point (evaluated at ``omega``)."""

    omega: float  # rad/s
    zeta: float
    theta: float
    gain_e: float
    gain_o: float
    n_min: float
    bandwidth: float  # rad/s
    freq_shift: float  # rad/s, signed; shifted resonance = omega_m + freq_shift


def zeta_full(params: DeviceParams, drive: DriveConfig, omega) -> float | np.ndarray:
    """Bidirectional transduction efficiency |S_eo S_oe| at ``omega``."""
    derived = derive(params, drive)
    chi_e = susceptibility(params, drive, "e", omega)
    chi_o = susceptibility(params, drive, "o", omega)
    chi_m = susceptibility(params, drive, "m", omega)
    chi_mt = susceptibility(params, drive, "m", omega, mirrored=True)
    den = network.response_denominator(params, drive, omega, derived)
    amp = (
        math.sqrt(params.kappa_ex_e * params.kappa_ex_o)
        * derived.g_e
        * derived.g_o
        * chi_e
        * chi_o
        * (chi_mt - chi_m)
        / den
    )
    return np.abs(amp) ** 2


def conversion_gain(params: DeviceParams, drive: DriveConfig, mode: str, omega=None) -> float:
    """Counter-rotating amplification gain of one electromagnetic mode.

    G_gain_j(omega) = ((delta_j + omega)^2 + kappa_j^2/4) / (4 delta_j omega_m)

    Diverges as delta_j -> 0, where pure conversion vanishes; zero detuning
    is therefore a domain error rather than an infinity.
    """
    if omega is None:
        omega = params.omega_m
    delta = drive.detuning(mode)
    if delta == 0.0:
        raise DomainError(
            f"conversion gain for mode {mode!r} diverges: the factor "
            "1/(4 delta omega_m) is singular at zero pump detuning"
        )
    kappa = params.kappa_e if mode == "e" else params.kappa_o
    return ((delta + omega) ** 2 + kappa**2 / 4.0) / (4.0 * delta * params.omega_m)


def backaction_phonon_floor(params: DeviceParams, drive: DriveConfig) -> float:
    """Minimum phonon number forced by optical quantum backaction.

    n_min = ((delta_o - omega_m)^2 + kappa_o^2/4) / (4 delta_o omega_m),
    identically equal to the optical conversion gain at omega_m minus one.
    """
    if drive.delta_o == 0.0:
        raise DomainError("backaction floor diverges: 1/(4 delta_o omega_m) singular")
    wm = params.omega_m
    return ((drive.delta_o - wm) ** 2 + params.kappa_o**2 / 4.0) / (4.0 * drive.delta_o * wm)


def frequency_shift(params: DeviceParams, drive: DriveConfig) -> float:
    """Signed electro/optomechanical spring shift of the mechanical line.

    delta_shift = sum_j Im[ G_j^2 (chi_j(omega_m) - chi_j(-omega_m)*) ];
    negative (softening) for red-detuned pumps. The conversion peak sits at
    omega_m + delta_shift.
    """
    derived = derive(params, drive)
    wm = params.omega_m
    shift = 0.0
    for mode in ("e", "o"):
        chi = susceptibility(params, drive, mode, wm)
        chit = susceptibility(params, drive, mode, wm, mirrored=True)
        shift += (derived.coupling(mode) ** 2 * (chi - chit)).imag
    return shift


def shifted_mechanical_frequency(params: DeviceParams, drive: DriveConfig) -> float:
    return params.omega_m + frequency_shift(params, drive)


def bandwidth(params: DeviceParams, drive: DriveConfig) -> float:
    """Conversion bandwidth Gamma_conv = Gamma_e(omega_m) + gamma_m.

    The optical damping contribution is negligible when the optical mode is
    far outside the resolved-sideband regime; a warning flags inputs outside
    the transducer regime kappa_e < 4 omega_m < kappa_o.
    """
    if not (params.kappa_e < 4.0 * params.omega_m < params.kappa_o):
        warnings.warn(
            "bandwidth formula assumes kappa_e < 4 omega_m < kappa_o",
            stacklevel=2,
        )
    gamma_e = optomechanical_damping(params, drive, "e", params.omega_m)
    return gamma_e + params.gamma_m


def decompose(params: DeviceParams, drive: DriveConfig, omega: float | None = None) -> ConversionPoint:
    """Split zeta into pure conversion and amplification gain at ``omega``.

    Defaults to the shifted mechanical frequency (the conversion peak).
    ``theta = zeta / (gain_e gain_o)`` exactly; ``n_min`` is evaluated at
    omega_m so that ``gain_o(omega_m) - 1 == n_min`` holds identically.
    """
    shift = frequency_shift(params, drive)
    if omega is None:
        omega = params.omega_m + shift
    gain_e = conversion_gain(params, drive, "e", omega)
    gain_o = conversion_gain(params, drive, "o", omega)
    zeta = float(zeta_full(params, drive, omega))
    return ConversionPoint(
        omega=omega,
        zeta=zeta,
        theta=zeta / (gain_e * gain_o),
        gain_e=gain_e,
        gain_o=gain_o,
        n_min=backaction_phonon_floor(params, drive),
        bandwidth=bandwidth(params, drive),
        freq_shift=shift,
    )


def theta_lorentzian(params: DeviceParams, drive: DriveConfig, omega) -> float | np.ndarray:
    """Matched-Lorentzian form of the pure conversion efficiency.

    theta(omega) ~= | 2 sqrt(eta_e eta_o Gamma_e Gamma_o)
                     / (2i(omega - omega_m') + gamma_m + Gamma_e + Gamma_o) |^2

    with the damping rates evaluated at omega_m. Approximate at the
    O(freq_shift/omega_m) level; use :func:`decompose` for the exact split.
    """
    wm = params.omega_m
    gamma_e = optomechanical_damping(params, drive, "e", wm)
    gamma_o = optomechanical_damping(params, drive, "o", wm)
    w_peak = wm + frequency_shift(params, drive)
    num = 2.0 * math.sqrt(params.eta_e * params.eta_o * gamma_e * gamma_o)
    den = 2j * (np.asarray(omega) - w_peak) + params.gamma_m + gamma_e + gamma_o
    return np.abs(num / den) ** 2


def zeta_resolved_limit(eta_e: float, eta_o: float, coop_e: float, coop_o: float) -> float:
    """Sideband-resolved conversion 4 eta_e eta_o C_e C_o / (1 + C_e + C_o)^2."""
    if coop_e < 0.0 or coop_o < 0.0:
        raise DomainError("cooperativities must be >= 0")
    return 4.0 * eta_e * eta_o * coop_e * coop_o / (1.0 + coop_e + coop_o) ** 2


def fwhm_numeric(params: DeviceParams, drive: DriveConfig, span_factor: float = 12.0) -> float:
    """Full width at half maximum of zeta(omega), found by bisection."""
    w_peak = shifted_mechanical_frequency(params, drive)
    width_guess = bandwidth(params, drive) + optomechanical_damping(
        params, drive, "o", params.omega_m
    )
    peak = float(zeta_full(params, drive, w_peak))
    half = peak / 2.0

    def crossing(lo: float, hi: float) -> float:
        # f(lo) >= half >= f(hi) or vice versa; bisect on zeta - half
        flo = float(zeta_full(params, drive, lo)) - half
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fmid = float(zeta_full(params, drive, mid)) - half
            if flo * fmid <= 0.0:
                hi = mid
            else:
                lo, flo = mid, fmid
            if abs(hi - lo) < 1e-9 * width_guess:
                break
        return 0.5 * (lo + hi)

    left = crossing(w_peak - span_factor * width_guess, w_peak)
    right = crossing(w_peak + span_factor * width_guess, w_peak)
    return abs(right - left)


@dataclass(frozen=True)
class CalibratedMeasurement:
    """Result of the simulated four-power self-calibrated scheme."""

    zeta: float
    p_oe: float  # e-in -> o-out transduced power
    p_eo: float  # o-in -> e-out transduced power
    p_ee: float  # off-resonant microwave reflection power
    p_oo: float  # off-resonant optical reflection power
    reference_reflection_error: float  # |S_jj(ref offset)|^2 deviation from 1


def simulate_calibrated_measurement(
    params: DeviceParams,
    drive: DriveConfig,
    probe_powers: tuple[float, float] = (1e-15, 1e-15),
    line_gains: tuple[float, float, float, float] | None = None,
    omega: float | None = None,
    reference_offset_factor: float = 10.0,
) -> CalibratedMeasurement:
    """Four-power measurement zeta = sqrt(P_eo P_oe / (P_ee P_oo)).

    Unknown line gains (input/output, both ports) multiply every power and
    cancel exactly in the ratio, as do the probe powers. The off-resonant
    reflection references are taken as ideal (|S_jj| = 1), which is what the
    scheme assumes for |offset| >= ~10 kappa_j; the actual residual
    reflection deviation at ``reference_offset_factor * kappa_j`` is
    reported as a diagnostic.
    """
    if omega is None:
        omega = shifted_mechanical_frequency(params, drive)
    if line_gains is None:
        line_gains = (1.0, 1.0, 1.0, 1.0)
    g_in_e, g_out_e, g_in_o, g_out_o = line_gains
    p_probe_e, p_probe_o = probe_powers

    matrices = network.build_matrices(params, drive)
    network.require_stable(matrices)
    sm = network.scattering_at(matrices, omega)
    s_oe = abs(sm.upsilon[network.OUT_O, network.IN_EXT_E]) ** 2
    s_eo = abs(sm.upsilon[network.OUT_E, network.IN_EXT_O]) ** 2

    p_oe = g_out_o * s_oe * g_in_e * p_probe_e
    p_eo = g_out_e * s_eo * g_in_o * p_probe_o
    p_ee = g_out_e * g_in_e * p_probe_e
    p_oo = g_out_o * g_in_o * p_probe_o

    # diagnostic: how far from unity the real off-resonant reflections sit
    err = 0.0
    for mode, row, col in (("e", network.OUT_E, network.IN_EXT_E),
                           ("o", network.OUT_O, network.IN_EXT_O)):
        kappa = params.kappa_e if mode == "e" else params.kappa_o
        sm_off = network.scattering_at(matrices, omega + reference_offset_factor * kappa)
        err = max(err, abs(abs(sm_off.upsilon[row, col]) ** 2 - 1.0))

    zeta = math.sqrt(p_eo * p_oe / (p_ee * p_oo))
    return CalibratedMeasurement(
        zeta=zeta,
        p_oe=p_oe,
        p_eo=p_eo,
        p_ee=p_ee,
        p_oo=p_oo,
        reference_reflection_error=err,
    )
