"""Device and drive parameters plus the derived quantities everything else uses.

Conventions
-----------
* All rates and frequencies are angular (rad/s); powers in W, temperatures
  in K, impedance in ohm.
* Pump detunings are defined as ``delta_j = omega_j - omega_drive_j`` so a
  red-detuned pump has ``delta_j > 0``.
* Mode labels: ``e`` microwave resonator, ``o`` optical cavity, ``m``
  mechanical oscillator.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .constants import HBAR, KBOLTZ, PICOWATT, TWOPI
from .errors import DomainError

MODES_EM = ("e", "o")

DEFAULT_FRIDGE_FLOOR_K = 0.05


@dataclass(frozen=True)
class DeviceParams:
    """Static resonator/mechanics constants of one transducer device.

    ``gamma_m0`` is the mechanical decoherence rate of the device as built;
    heated copies produced by :func:`apply_heating` carry the elevated rate
    in the same slot (it is the operative mechanical linewidth for every
    formula in the package).
    """

    omega_e: float  # rad/s, microwave resonance
    omega_o: float  # rad/s, optical resonance
    omega_m: float  # rad/s, mechanical resonance
    kappa_in_e: float  # rad/s, microwave intrinsic loss
    kappa_ex_e: float  # rad/s, microwave waveguide coupling
    kappa_in_o: float  # rad/s, optical intrinsic loss
    kappa_ex_o: float  # rad/s, optical waveguide coupling
    gamma_m0: float  # rad/s, mechanical decoherence (see class docstring)
    g0_e: float  # rad/s, vacuum electromechanical coupling
    g0_o: float  # rad/s, vacuum optomechanical coupling
    z_e: float = 50.0  # ohm, microwave waveguide impedance

    def __post_init__(self):
        for name in (
            "omega_e", "omega_o", "omega_m",
            "kappa_in_e", "kappa_ex_e", "kappa_in_o", "kappa_ex_o",
            "gamma_m0", "g0_e", "g0_o", "z_e",
        ):
            value = getattr(self, name)
            if not (value > 0.0) or not math.isfinite(value):
                raise DomainError(f"{name} must be strictly positive, got {value!r}")
        if not (self.omega_m < self.omega_e < self.omega_o):
            warnings.warn(
                "unusual frequency ordering: expected omega_m << omega_e << omega_o",
                stacklevel=2,
            )

    @property
    def kappa_e(self) -> float:
        return self.kappa_in_e + self.kappa_ex_e

    @property
    def kappa_o(self) -> float:
        return self.kappa_in_o + self.kappa_ex_o

    @property
    def eta_e(self) -> float:
        return self.kappa_ex_e / self.kappa_e

    @property
    def eta_o(self) -> float:
        return self.kappa_ex_o / self.kappa_o

    @property
    def gamma_m(self) -> float:
        """Operative mechanical linewidth (alias of ``gamma_m0``)."""
        return self.gamma_m0


@dataclass(frozen=True)
class DriveConfig:
    """Pump powers and detunings for the two electromagnetic modes."""

    p_e: float  # W
    p_o: float  # W
    delta_e: float  # rad/s
    delta_o: float  # rad/s

    def __post_init__(self):
        if self.p_e < 0.0 or self.p_o < 0.0:
            raise DomainError("pump powers must be >= 0")

    def power(self, mode: str) -> float:
        return self.p_e if mode == "e" else self.p_o

    def detuning(self, mode: str) -> float:
        return self.delta_e if mode == "e" else self.delta_o


@dataclass(frozen=True)
class DerivedDrive:
    """Pump-induced quantities: photon numbers, enhanced couplings,
    cooperativities and dynamical damping rates (the latter evaluated at
    the frequency passed to :func:`derive`, by default ``omega_m``)."""

    n_d_e: float
    n_d_o: float
    g_e: float  # rad/s
    g_o: float  # rad/s
    coop_e: float
    coop_o: float
    gamma_opt_e: float  # rad/s
    gamma_opt_o: float  # rad/s

    def coupling(self, mode: str) -> float:
        return self.g_e if mode == "e" else self.g_o


def _mode_rates(params: DeviceParams, mode: str):
    if mode == "e":
        return params.kappa_e, params.kappa_ex_e, params.omega_e
    if mode == "o":
        return params.kappa_o, params.kappa_ex_o, params.omega_o
    raise DomainError(f"unknown electromagnetic mode {mode!r}")


def intracavity_photons(params: DeviceParams, drive: DriveConfig, mode: str) -> float:
    """Mean pump photon number n_d in mode ``e`` or ``o``.

    n_d = kappa_ex * P / (hbar * omega_drive) / (kappa^2/4 + delta^2),
    with the drive frequency omega_drive = omega_res - delta.
    """
    kappa, kappa_ex, omega_res = _mode_rates(params, mode)
    p = drive.power(mode)
    if p == 0.0:
        return 0.0
    delta = drive.detuning(mode)
    omega_drive = omega_res - delta
    if omega_drive <= 0.0:
        raise DomainError("drive frequency omega_res - delta must be positive")
    flux_sq = kappa_ex * p / (HBAR * omega_drive)
    return flux_sq / (kappa**2 / 4.0 + delta**2)


def enhanced_coupling(params: DeviceParams, drive: DriveConfig, mode: str) -> float:
    """Drive-enhanced coupling G = g0 * sqrt(n_d)."""
    n_d = intracavity_photons(params, drive, mode)
    g0 = params.g0_e if mode == "e" else params.g0_o
    return g0 * math.sqrt(n_d)


def power_for_photon_number(
    params: DeviceParams, mode: str, n_d: float, delta: float
) -> float:
    """Pump power (W) that produces ``n_d`` intracavity photons at ``delta``.

    Exact inverse of :func:`intracavity_photons`.
    """
    kappa, kappa_ex, omega_res = _mode_rates(params, mode)
    if n_d < 0.0:
        raise DomainError("photon number must be >= 0")
    omega_drive = omega_res - delta
    if omega_drive <= 0.0:
        raise DomainError("drive frequency omega_res - delta must be positive")
    return n_d * (kappa**2 / 4.0 + delta**2) * HBAR * omega_drive / kappa_ex


def optomechanical_damping(
    params: DeviceParams, drive: DriveConfig, mode: str, omega: float
) -> float:
    """Dynamical backaction damping rate of the mechanics by mode ``j``.

    Gamma_j(omega) = G_j^2 [ kappa_j/((delta_j-omega)^2 + kappa_j^2/4)
                           - kappa_j/((delta_j+omega)^2 + kappa_j^2/4) ].

    Antisymmetric in the sign of the detuning; reduces to 4 G^2/kappa in
    the sideband-resolved limit at delta = omega.
    """
    kappa, _, _ = _mode_rates(params, mode)
    g = enhanced_coupling(params, drive, mode)
    delta = drive.detuning(mode)
    lor_minus = kappa / ((delta - omega) ** 2 + kappa**2 / 4.0)
    lor_plus = kappa / ((delta + omega) ** 2 + kappa**2 / 4.0)
    return g**2 * (lor_minus - lor_plus)


def derive(params: DeviceParams, drive: DriveConfig, omega: float | None = None) -> DerivedDrive:
    """Compute all pump-derived quantities in one pass."""
    if omega is None:
        omega = params.omega_m
    n_d_e = intracavity_photons(params, drive, "e")
    n_d_o = intracavity_photons(params, drive, "o")
    g_e = params.g0_e * math.sqrt(n_d_e)
    g_o = params.g0_o * math.sqrt(n_d_o)
    coop_e = 4.0 * g_e**2 / (params.kappa_e * params.gamma_m)
    coop_o = 4.0 * g_o**2 / (params.kappa_o * params.gamma_m)
    return DerivedDrive(
        n_d_e=n_d_e,
        n_d_o=n_d_o,
        g_e=g_e,
        g_o=g_o,
        coop_e=coop_e,
        coop_o=coop_o,
        gamma_opt_e=optomechanical_damping(params, drive, "e", omega),
        gamma_opt_o=optomechanical_damping(params, drive, "o", omega),
    )


def susceptibility(
    params: DeviceParams,
    drive: DriveConfig,
    kind: str,
    omega,
    mirrored: bool = False,
):
    """Rotating-frame susceptibility of mode ``e``, ``o`` or ``m``.

    chi_j(omega) = 1 / (i(delta_j - omega) + kappa_j/2)   for j = e, o
    chi_m(omega) = 1 / (i(omega_m - omega) + gamma_m/2)

    With ``mirrored=True`` returns chi(-omega)* (the counter-rotating
    partner), i.e. 1 / (kappa/2 - i(delta + omega)).
    """
    if kind == "m":
        center, width = params.omega_m, params.gamma_m
    else:
        kappa, _, _ = _mode_rates(params, kind)
        center, width = drive.detuning(kind), kappa
    if mirrored:
        return 1.0 / (width / 2.0 - 1j * (center + omega))
    return 1.0 / (1j * (center - omega) + width / 2.0)


def bose_occupancy(temperature: float, omega: float) -> float:
    """Bose-Einstein occupancy 1/(exp(hbar*omega/kB*T) - 1); 0 at T = 0."""
    if temperature < 0.0:
        raise DomainError("temperature must be >= 0")
    if omega <= 0.0:
        raise DomainError("omega must be > 0")
    if temperature == 0.0:
        return 0.0
    return 1.0 / math.expm1(HBAR * omega / (KBOLTZ * temperature))


def _interp_anchored(anchors, p: float) -> float:
    """Interpolate a pump-power law through (power, value) anchors.

    Linear in P below the first positive anchor (so the zero-power value is
    hit exactly), linear in ln(P) between positive anchors, and continued
    with the last logarithmic slope above the table.
    """
    pts = sorted(anchors)
    if len(pts) == 1:
        return pts[0][1]
    if p <= 0.0:
        return pts[0][1]
    positive = [(pw, v) for pw, v in pts if pw > 0.0]
    if not positive:
        return pts[-1][1]
    p0, v0 = positive[0]
    if p <= p0:
        base = pts[0][1] if pts[0][0] == 0.0 else v0
        return base + (v0 - base) * (p / p0)
    for (pa, va), (pb, vb) in zip(positive, positive[1:]):
        if p <= pb:
            frac = math.log(p / pa) / math.log(pb / pa)
            return va + frac * (vb - va)
    (pa, va), (pb, vb) = positive[-2], positive[-1]
    slope = (vb - va) / math.log(pb / pa)
    return vb + slope * math.log(p / pb)


@dataclass(frozen=True)
class HeatingModel:
    """Empirical pump-induced heating of the mechanics and microwave loss.

    * ``gamma_m_po_anchors`` / ``kappa_in_e_po_anchors``: tabulated
      (P_o [W], rate [rad/s]) anchors, interpolated with
      :func:`_interp_anchored` (log-linear between positive anchors).
    * ``gamma_m_pe_slope`` / ``kappa_in_e_pe_slope``: additive linear terms
      in the microwave pump power (rad/s per W).
    * ``t_m_log``: mechanical bath temperature law
      T_m = a * ln(P_o / 1 pW) + b, clamped at ``fridge_floor_k``.
      The microwave pump does not move T_m.
    """

    gamma_m_po_anchors: tuple = (
        (0.0, TWOPI * 15.0),
        (92e-12, TWOPI * 164.0),
        (1556e-12, TWOPI * 355.0),
    )
    kappa_in_e_po_anchors: tuple = (
        (0.0, TWOPI * 1.6e6),
        (92e-12, TWOPI * 6.1e6),
        (1556e-12, TWOPI * 13.9e6),
    )
    gamma_m_pe_slope: float = 0.0  # rad/s per W
    kappa_in_e_pe_slope: float = 0.0  # rad/s per W
    t_m_log_a: float = 0.18  # K per e-fold of P_o/pW
    t_m_log_b: float = -0.47  # K
    fridge_floor_k: float = DEFAULT_FRIDGE_FLOOR_K

    @classmethod
    def linear(cls, gamma_slope_pe, gamma_slope_po, gamma_intercept,
               kappa_slope_po, kappa_intercept, **kwargs) -> "HeatingModel":
        """Build a purely linear-in-power model (slope/intercept pairs)."""
        p_ref = 2000e-12
        return cls(
            gamma_m_po_anchors=(
                (0.0, gamma_intercept),
                (p_ref, gamma_intercept + gamma_slope_po * p_ref),
            ),
            kappa_in_e_po_anchors=(
                (0.0, kappa_intercept),
                (p_ref, kappa_intercept + kappa_slope_po * p_ref),
            ),
            gamma_m_pe_slope=gamma_slope_pe,
            **kwargs,
        )

    def gamma_m(self, base: DeviceParams, drive: DriveConfig) -> float:
        value = _interp_anchored(self.gamma_m_po_anchors, drive.p_o)
        value += self.gamma_m_pe_slope * drive.p_e
        return max(value, base.gamma_m0)

    def kappa_in_e(self, base: DeviceParams, drive: DriveConfig) -> float:
        value = _interp_anchored(self.kappa_in_e_po_anchors, drive.p_o)
        value += self.kappa_in_e_pe_slope * drive.p_e
        return max(value, 0.0)

    def t_m(self, drive: DriveConfig) -> tuple[float, bool]:
        """Bath temperature and a flag marking a clamp at the fridge floor."""
        if drive.p_o <= 0.0:
            return self.fridge_floor_k, True
        value = self.t_m_log_a * math.log(drive.p_o / PICOWATT) + self.t_m_log_b
        if value < self.fridge_floor_k:
            return self.fridge_floor_k, True
        return value, False


@dataclass(frozen=True)
class HeatingResult:
    """Parameters with heated gamma_m / kappa_in_e, plus the bath temperature."""

    params: DeviceParams
    t_m: float  # K
    t_m_clamped: bool = False

    @property
    def n_m(self) -> float:
        """Mechanical bath occupancy at the heated temperature."""
        return bose_occupancy(self.t_m, self.params.omega_m)


def apply_heating(model: HeatingModel, drive: DriveConfig, base: DeviceParams) -> HeatingResult:
    """Replace gamma_m and kappa_in_e by their heated values and attach T_m."""
    heated = replace(
        base,
        gamma_m0=model.gamma_m(base, drive),
        kappa_in_e=model.kappa_in_e(base, drive),
    )
    t_m, clamped = model.t_m(drive)
    return HeatingResult(params=heated, t_m=t_m, t_m_clamped=clamped)


def table_defaults() -> DeviceParams:
    """Measured device constants used as config defaults."""
    return DeviceParams(
        omega_e=TWOPI * 10.497e9,
        omega_o=TWOPI * 198.081e12,
        omega_m=TWOPI * 11.843e6,
        kappa_in_e=TWOPI * 1.6e6,
        kappa_ex_e=TWOPI * 1.15e6,
        kappa_in_o=TWOPI * 1.42e9,
        kappa_ex_o=TWOPI * 0.18e9,
        gamma_m0=TWOPI * 15.0,
        g0_e=TWOPI * 67.0,
        g0_o=TWOPI * 662e3,
        z_e=50.0,
    )


def default_drive() -> DriveConfig:
    """Reference operating drive: both pumps red-detuned on the upper sideband."""
    return DriveConfig(
        p_e=601e-12,
        p_o=625e-12,
        delta_e=TWOPI * 11.843e6,
        delta_o=TWOPI * 126e6,
    )
