"""INI-style configuration: sections [device], [drive], [heating] plus the
optional [setup] and [noise] sections used by the noise and calibration
paths. Keys carry unit suffixes; frequencies are cyclic (Hz) in the file
and converted to angular rates on load.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field

from .calib import SetupModel
from .constants import TWOPI
from .errors import ConfigError, DomainError
from .params import DeviceParams, DriveConfig, HeatingModel, default_drive, table_defaults

_DEVICE_KEYS = {
    "omega_e_hz", "omega_o_hz", "omega_m_hz",
    "kappa_in_e_hz", "kappa_ex_e_hz", "kappa_in_o_hz", "kappa_ex_o_hz",
    "gamma_m0_hz", "g0_e_hz", "g0_o_hz", "z_e_ohm",
}
_DRIVE_KEYS = {"p_e_w", "p_o_w", "delta_e_hz", "delta_o_hz"}
_HEATING_KEYS = {
    "enabled", "gamma_m_po_anchors", "kappa_in_e_po_anchors",
    "gamma_m_pe_slope_hz_per_w", "kappa_in_e_pe_slope_hz_per_w",
    "t_m_log_a_k", "t_m_log_b_k", "fridge_floor_k",
}
_SETUP_KEYS = {
    "gain_setup_e_db", "n_add_setup_e", "gain_setup_o_db", "n_add_setup_o",
    "eta_qe", "attenuation_in_e_db",
}
_NOISE_KEYS = {"include_resonator_noise"}


@dataclass(frozen=True)
class RunConfig:
    """Everything a CLI command needs to evaluate the model."""

    device: DeviceParams
    drive: DriveConfig
    heating: HeatingModel
    setup: SetupModel
    heating_enabled: bool = True
    include_resonator_noise: bool = True
    snapshot: dict = field(default_factory=dict)  # raw key/value view for run records


def default_config() -> RunConfig:
    return RunConfig(
        device=table_defaults(),
        drive=default_drive(),
        heating=HeatingModel(),
        setup=SetupModel(),
        snapshot=_snapshot(table_defaults(), default_drive(), HeatingModel(), SetupModel(), True, True),
    )


def _parse_anchors(text: str, scale: float) -> tuple:
    anchors = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        try:
            power, value = chunk.split(":")
            anchors.append((float(power), scale * float(value)))
        except ValueError as exc:
            raise ConfigError(f"bad anchor entry {chunk!r} (expected P_w:value_hz)") from exc
    if not anchors:
        raise ConfigError("anchor list is empty")
    return tuple(anchors)


def _format_anchors(anchors, scale: float) -> str:
    return ", ".join(f"{p:g}:{v / scale:.12g}" for p, v in anchors)


def _getfloat(section, key, fallback):
    raw = section.get(key)
    if raw is None:
        return fallback
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"key {key!r}: not a number: {raw!r}") from exc


def _check_keys(parser, section, allowed):
    if not parser.has_section(section):
        return
    unknown = set(parser[section]) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")


def load_config(path_or_text, is_text: bool = False) -> RunConfig:
    """Load a run configuration, falling back to defaults for missing keys."""
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        if is_text:
            parser.read_string(path_or_text)
        else:
            with open(path_or_text) as handle:
                parser.read_file(handle)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from exc

    for section, allowed in (
        ("device", _DEVICE_KEYS), ("drive", _DRIVE_KEYS),
        ("heating", _HEATING_KEYS), ("setup", _SETUP_KEYS), ("noise", _NOISE_KEYS),
    ):
        _check_keys(parser, section, allowed)

    dev_defaults = table_defaults()
    dev = parser["device"] if parser.has_section("device") else {}
    try:
        device = DeviceParams(
            omega_e=TWOPI * _getfloat(dev, "omega_e_hz", dev_defaults.omega_e / TWOPI),
            omega_o=TWOPI * _getfloat(dev, "omega_o_hz", dev_defaults.omega_o / TWOPI),
            omega_m=TWOPI * _getfloat(dev, "omega_m_hz", dev_defaults.omega_m / TWOPI),
            kappa_in_e=TWOPI * _getfloat(dev, "kappa_in_e_hz", dev_defaults.kappa_in_e / TWOPI),
            kappa_ex_e=TWOPI * _getfloat(dev, "kappa_ex_e_hz", dev_defaults.kappa_ex_e / TWOPI),
            kappa_in_o=TWOPI * _getfloat(dev, "kappa_in_o_hz", dev_defaults.kappa_in_o / TWOPI),
            kappa_ex_o=TWOPI * _getfloat(dev, "kappa_ex_o_hz", dev_defaults.kappa_ex_o / TWOPI),
            gamma_m0=TWOPI * _getfloat(dev, "gamma_m0_hz", dev_defaults.gamma_m0 / TWOPI),
            g0_e=TWOPI * _getfloat(dev, "g0_e_hz", dev_defaults.g0_e / TWOPI),
            g0_o=TWOPI * _getfloat(dev, "g0_o_hz", dev_defaults.g0_o / TWOPI),
            z_e=_getfloat(dev, "z_e_ohm", dev_defaults.z_e),
        )
    except DomainError as exc:
        raise ConfigError(f"invalid [device] values: {exc}") from exc

    drv_defaults = default_drive()
    drv = parser["drive"] if parser.has_section("drive") else {}
    try:
        drive = DriveConfig(
            p_e=_getfloat(drv, "p_e_w", drv_defaults.p_e),
            p_o=_getfloat(drv, "p_o_w", drv_defaults.p_o),
            delta_e=TWOPI * _getfloat(drv, "delta_e_hz", drv_defaults.delta_e / TWOPI),
            delta_o=TWOPI * _getfloat(drv, "delta_o_hz", drv_defaults.delta_o / TWOPI),
        )
    except DomainError as exc:
        raise ConfigError(f"invalid [drive] values: {exc}") from exc

    heat_defaults = HeatingModel()
    heat = parser["heating"] if parser.has_section("heating") else {}
    heating_enabled = str(heat.get("enabled", "true")).lower() in ("1", "true", "yes", "on")
    heating = HeatingModel(
        gamma_m_po_anchors=(
            _parse_anchors(heat["gamma_m_po_anchors"], TWOPI)
            if "gamma_m_po_anchors" in heat
            else heat_defaults.gamma_m_po_anchors
        ),
        kappa_in_e_po_anchors=(
            _parse_anchors(heat["kappa_in_e_po_anchors"], TWOPI)
            if "kappa_in_e_po_anchors" in heat
            else heat_defaults.kappa_in_e_po_anchors
        ),
        gamma_m_pe_slope=TWOPI * _getfloat(heat, "gamma_m_pe_slope_hz_per_w",
                                           heat_defaults.gamma_m_pe_slope / TWOPI),
        kappa_in_e_pe_slope=TWOPI * _getfloat(heat, "kappa_in_e_pe_slope_hz_per_w",
                                              heat_defaults.kappa_in_e_pe_slope / TWOPI),
        t_m_log_a=_getfloat(heat, "t_m_log_a_k", heat_defaults.t_m_log_a),
        t_m_log_b=_getfloat(heat, "t_m_log_b_k", heat_defaults.t_m_log_b),
        fridge_floor_k=_getfloat(heat, "fridge_floor_k", heat_defaults.fridge_floor_k),
    )

    setup_defaults = SetupModel()
    sup = parser["setup"] if parser.has_section("setup") else {}
    try:
        setup = SetupModel(
            gain_setup_e_db=_getfloat(sup, "gain_setup_e_db", setup_defaults.gain_setup_e_db),
            n_add_setup_e=_getfloat(sup, "n_add_setup_e", setup_defaults.n_add_setup_e),
            gain_setup_o_db=_getfloat(sup, "gain_setup_o_db", setup_defaults.gain_setup_o_db),
            n_add_setup_o=_getfloat(sup, "n_add_setup_o", setup_defaults.n_add_setup_o),
            eta_qe=_getfloat(sup, "eta_qe", setup_defaults.eta_qe),
            attenuation_in_e_db=_getfloat(sup, "attenuation_in_e_db",
                                          setup_defaults.attenuation_in_e_db),
        )
    except DomainError as exc:
        raise ConfigError(f"invalid [setup] values: {exc}") from exc

    noi = parser["noise"] if parser.has_section("noise") else {}
    include_res = str(noi.get("include_resonator_noise", "true")).lower() in (
        "1", "true", "yes", "on",
    )

    return RunConfig(
        device=device,
        drive=drive,
        heating=heating,
        setup=setup,
        heating_enabled=heating_enabled,
        include_resonator_noise=include_res,
        snapshot=_snapshot(device, drive, heating, setup, heating_enabled, include_res),
    )


def _snapshot(device, drive, heating, setup, heating_enabled, include_res) -> dict:
    return {
        "device": {
            "omega_e_hz": device.omega_e / TWOPI,
            "omega_o_hz": device.omega_o / TWOPI,
            "omega_m_hz": device.omega_m / TWOPI,
            "kappa_in_e_hz": device.kappa_in_e / TWOPI,
            "kappa_ex_e_hz": device.kappa_ex_e / TWOPI,
            "kappa_in_o_hz": device.kappa_in_o / TWOPI,
            "kappa_ex_o_hz": device.kappa_ex_o / TWOPI,
            "gamma_m0_hz": device.gamma_m0 / TWOPI,
            "g0_e_hz": device.g0_e / TWOPI,
            "g0_o_hz": device.g0_o / TWOPI,
            "z_e_ohm": device.z_e,
        },
        "drive": {
            "p_e_w": drive.p_e,
            "p_o_w": drive.p_o,
            "delta_e_hz": drive.delta_e / TWOPI,
            "delta_o_hz": drive.delta_o / TWOPI,
        },
        "heating": {
            "enabled": heating_enabled,
            "gamma_m_po_anchors": _format_anchors(heating.gamma_m_po_anchors, TWOPI),
            "kappa_in_e_po_anchors": _format_anchors(heating.kappa_in_e_po_anchors, TWOPI),
            "gamma_m_pe_slope_hz_per_w": heating.gamma_m_pe_slope / TWOPI,
            "kappa_in_e_pe_slope_hz_per_w": heating.kappa_in_e_pe_slope / TWOPI,
            "t_m_log_a_k": heating.t_m_log_a,
            "t_m_log_b_k": heating.t_m_log_b,
            "fridge_floor_k": heating.fridge_floor_k,
        },
        "setup": {
            "gain_setup_e_db": setup.gain_setup_e_db,
            "n_add_setup_e": setup.n_add_setup_e,
            "gain_setup_o_db": setup.gain_setup_o_db,
            "n_add_setup_o": setup.n_add_setup_o,
            "eta_qe": setup.eta_qe,
            "attenuation_in_e_db": setup.attenuation_in_e_db,
        },
        "noise": {"include_resonator_noise": include_res},
    }


def write_default_config(path) -> None:
    """Write a fully-commented default config file."""
    cfg = default_config()
    parser = configparser.ConfigParser()
    for section, values in cfg.snapshot.items():
        parser[section] = {k: str(v) for k, v in values.items()}
    buf = io.StringIO()
    parser.write(buf)
    with open(path, "w") as handle:
        handle.write(buf.getvalue())
