"""Sweep orchestration: per-point operating conditions and parallel rows.

Each sweep point is evaluated independently (pure functions all the way
down); a failed point produces a flagged row instead of aborting the
sweep, and rows are ordered by sweep index no matter how workers finish.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import network, noise as noise_mod, transduction
from .config import RunConfig
from .constants import TWOPI
from .errors import DomainError, EomtransError
from .params import DriveConfig, apply_heating, bose_occupancy, power_for_photon_number

SWEEP_AXES = ("p_e", "p_o", "delta_o", "delta_o_const_nd", "omega")

DEFAULT_ND_TARGET = 0.185


@dataclass(frozen=True)
class SweepSpec:
    """One-dimensional sweep: axis, range and held-fixed values."""

    axis: str
    start: float
    stop: float
    points: int
    scale: str = "lin"  # lin | log
    held: dict = field(default_factory=dict)  # e.g. {"n_d_o": 0.185}

    def __post_init__(self):
        if self.axis not in SWEEP_AXES:
            raise DomainError(f"unknown sweep axis {self.axis!r}; use one of {SWEEP_AXES}")
        if self.points < 2:
            raise DomainError("a sweep needs at least 2 points")
        if not (self.start < self.stop):
            raise DomainError("sweep range must satisfy start < stop")
        if self.scale not in ("lin", "log"):
            raise DomainError("scale must be 'lin' or 'log'")
        if self.scale == "log" and self.start <= 0.0:
            raise DomainError("log-scaled sweeps need start > 0")

    def values(self) -> np.ndarray:
        if self.scale == "log":
            return np.logspace(math.log10(self.start), math.log10(self.stop), self.points)
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class OperatingPoint:
    """Heated parameters, drive and bath temperature for one evaluation."""

    params: object  # DeviceParams after heating
    drive: DriveConfig
    t_m: float
    n_m: float


def operating_point(cfg: RunConfig, drive: DriveConfig | None = None) -> OperatingPoint:
    """Apply the heating model (when enabled) and attach the thermal bath."""
    if drive is None:
        drive = cfg.drive
    if cfg.heating_enabled:
        heated = apply_heating(cfg.heating, drive, cfg.device)
        params, t_m = heated.params, heated.t_m
    else:
        params, t_m = cfg.device, cfg.heating.fridge_floor_k
    return OperatingPoint(
        params=params,
        drive=drive,
        t_m=t_m,
        n_m=bose_occupancy(t_m, params.omega_m),
    )


def _drive_for_axis(cfg: RunConfig, axis: str, value: float, held: dict) -> DriveConfig:
    drive = cfg.drive
    if axis == "p_e":
        return replace(drive, p_e=value)
    if axis == "p_o":
        return replace(drive, p_o=value)
    if axis == "delta_o":
        return replace(drive, delta_o=value)
    if axis == "delta_o_const_nd":
        target = held.get("n_d_o", DEFAULT_ND_TARGET)
        p_o = power_for_photon_number(cfg.device, "o", target, value)
        return replace(drive, delta_o=value, p_o=p_o)
    return drive  # axis == "omega": drive untouched


_FREQUENCY_AXES = ("delta_o", "delta_o_const_nd", "omega")

SWEEP_COLUMNS = (
    "axis_value", "zeta", "zeta_incl_lower_sideband", "theta", "gain",
    "gamma_conv_hz", "n_add_e", "n_add_o", "eta_e", "gamma_m_hz", "t_m_k",
    "status",
)


def evaluate_sweep_point(cfg: RunConfig, axis: str, value: float, held: dict) -> dict:
    """One sweep row; exceptions are converted to a flagged row."""
    axis_value = value / TWOPI if axis in _FREQUENCY_AXES else value
    try:
        drive = _drive_for_axis(cfg, axis, value, held)
        point_cfg = operating_point(cfg, drive)
        params = point_cfg.params
        matrices = network.build_matrices(params, drive)
        network.require_stable(matrices)
        omega = (
            value
            if axis == "omega"
            else transduction.shifted_mechanical_frequency(params, drive)
        )
        conv = transduction.decompose(params, drive, omega)
        baths = noise_mod.BathOccupancies(n_m=point_cfg.n_m)
        budget = noise_mod.added_noise_full(params, drive, omega, baths)
        return {
            "axis_value": axis_value,
            "zeta": conv.zeta,
            "zeta_incl_lower_sideband": conv.zeta * math.sqrt(2.0),
            "theta": conv.theta,
            "gain": conv.gain_e * conv.gain_o,
            "gamma_conv_hz": conv.bandwidth / TWOPI,
            "n_add_e": budget.n_add_e,
            "n_add_o": budget.n_add_o,
            "eta_e": params.eta_e,
            "gamma_m_hz": params.gamma_m / TWOPI,
            "t_m_k": point_cfg.t_m,
            "status": "ok",
        }
    except EomtransError as exc:
        row = {name: math.nan for name in SWEEP_COLUMNS}
        row["axis_value"] = axis_value
        row["status"] = type(exc).__name__
        return row


def _point_worker(args):
    cfg, axis, value, held = args
    return evaluate_sweep_point(cfg, axis, value, held)


def run_sweep(cfg: RunConfig, spec: SweepSpec, workers: int = 1) -> list[dict]:
    """Evaluate all sweep points, optionally on a process pool.

    Rows come back ordered by sweep index regardless of completion order.
    """
    values = spec.values()
    tasks = [(cfg, spec.axis, float(v), dict(spec.held)) for v in values]
    if workers <= 1:
        return [_point_worker(task) for task in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_point_worker, tasks))
