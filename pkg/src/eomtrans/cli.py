"""Command-line interface.

Subcommands: sparams | sweep | noise | fom | calibrate. Each report
command writes CSV tables, renders a PNG alongside them (disable with
--no-plot) and drops a run_record.json manifest in the output directory.

Exit codes: 0 ok, 2 config/domain error, 3 unstable configuration,
4 fit non-convergence.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import calib, network, noise as noise_mod, plots, sweeps, transduction
from .config import RunConfig, default_config, load_config, write_default_config
from .constants import TWOPI
from .errors import (
    ConfigError,
    DomainError,
    EomtransError,
    FitConvergenceError,
    InstabilityError,
)
from .fom import modulator_report, theta31, _voltage_prefactor
from .params import bose_occupancy
from .runio import RunRecord, write_table

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3
EXIT_FIT = 4


def _parse_grid(text: str | None, default_span_hz: float, default_points: int = 2001):
    """Parse 'start:stop:points[:log]' (Hz) into an offset grid (rad/s)."""
    if text is None:
        return TWOPI * np.linspace(-default_span_hz, default_span_hz, default_points)
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError("grid must be start:stop:points[:log]")
    try:
        start, stop, points = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad grid value: {exc}") from exc
    if points < 2 or not (start < stop):
        raise ConfigError("grid needs start < stop and points >= 2")
    if len(parts) == 4:
        if parts[3] != "log":
            raise ConfigError("grid scale must be 'log' when given")
        if start <= 0:
            raise ConfigError("log grid needs start > 0")
        return TWOPI * np.logspace(np.log10(start), np.log10(stop), points)
    return TWOPI * np.linspace(start, stop, points)


def _load(args) -> RunConfig:
    if args.config is None:
        return default_config()
    return load_config(args.config)


def _finish(record: RunRecord, out_dir) -> None:
    path = record.write(out_dir)
    print(f"run record: {path}")


def cmd_sparams(args) -> int:
    cfg = _load(args)
    point = sweeps.operating_point(cfg)
    params, drive = point.params, point.drive
    matrices = network.build_matrices(params, drive)
    network.require_stable(matrices)

    span = 50.0 * transduction.bandwidth(params, drive) / TWOPI
    grid = _parse_grid(args.grid, span)
    omegas = params.omega_m + grid
    ups = network.scattering_batch(matrices, omegas)
    gain_e = np.array([transduction.conversion_gain(params, drive, "e", w) for w in omegas])
    gain_o = np.array([transduction.conversion_gain(params, drive, "o", w) for w in omegas])
    zeta = np.abs(
        ups[:, network.OUT_O, network.IN_EXT_E] * ups[:, network.OUT_E, network.IN_EXT_O]
    )
    rows = []
    for i in range(omegas.size):
        rows.append(
            {
                "delta_hz": grid[i] / TWOPI,
                "s_ee_mag2": float(np.abs(ups[i, network.OUT_E, network.IN_EXT_E]) ** 2),
                "s_oo_mag2": float(np.abs(ups[i, network.OUT_O, network.IN_EXT_O]) ** 2),
                "zeta": float(zeta[i]),
                "theta": float(zeta[i] / (gain_e[i] * gain_o[i])),
                "gain": float(gain_e[i] * gain_o[i]),
            }
        )
    out = Path(args.out)
    record = RunRecord(command="sparams", config=cfg.snapshot, seed=args.seed)
    csv_path = record.add(write_table(out / "sparams.csv", list(rows[0]), rows))
    if args.dump_matrices:
        for path in network.dump_matrices_csv(matrices, out / "matrices"):
            record.add(path)
    if not args.no_plot:
        record.add(plots.render_sparams(csv_path, out / "sparams.png"))
    _finish(record, out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _load(args)
    held = {}
    if args.axis == "delta_o_const_nd":
        held["n_d_o"] = args.nd_target
    start, stop = args.start, args.stop
    if args.axis in ("delta_o", "delta_o_const_nd", "omega"):
        start, stop = TWOPI * start, TWOPI * stop
    spec = sweeps.SweepSpec(
        axis=args.axis,
        start=start,
        stop=stop,
        points=args.points,
        scale="log" if args.log else "lin",
        held=held,
    )
    rows = sweeps.run_sweep(cfg, spec, workers=args.workers)
    out = Path(args.out)
    record = RunRecord(command="sweep", config=cfg.snapshot, seed=args.seed)
    csv_path = record.add(
        write_table(out / f"sweep_{args.axis}.csv", list(sweeps.SWEEP_COLUMNS), rows)
    )
    if not args.no_plot:
        unit = "Hz" if args.axis in ("delta_o", "delta_o_const_nd", "omega") else "W"
        record.add(
            plots.render_sweep(csv_path, out / f"sweep_{args.axis}.png", f"{args.axis} ({unit})")
        )
    _finish(record, out)
    return EXIT_OK


def cmd_noise(args) -> int:
    cfg = _load(args)
    point = sweeps.operating_point(cfg)
    params, drive = point.params, point.drive
    network.require_stable(network.build_matrices(params, drive))

    span = 50.0 * transduction.bandwidth(params, drive) / TWOPI
    grid = _parse_grid(args.grid, span)
    baths = noise_mod.BathOccupancies(n_m=point.n_m)
    spectrum = noise_mod.output_spectrum(
        params,
        drive,
        params.omega_m + grid,
        baths,
        setup_noise=(cfg.setup.n_add_setup_e, cfg.setup.n_add_setup_o),
        include_resonator_noise=cfg.include_resonator_noise,
    )
    rows = []
    for i in range(grid.size):
        row = {"delta_hz": grid[i] / TWOPI}
        for port in ("e", "o"):
            for layer in ("background", "resonator", "mechanical", "other", "total"):
                row[f"{layer}_{port}"] = float(spectrum.layers[port][layer][i])
        rows.append(row)
    out = Path(args.out)
    record = RunRecord(command="noise", config=cfg.snapshot, seed=args.seed)
    csv_path = record.add(write_table(out / "noise.csv", list(rows[0]), rows))
    if not args.no_plot:
        record.add(plots.render_noise(csv_path, out / "noise.png"))
    _finish(record, out)
    return EXIT_OK


def cmd_fom(args) -> int:
    cfg = _load(args)
    point = sweeps.operating_point(cfg)
    params, drive = point.params, point.drive
    network.require_stable(network.build_matrices(params, drive))

    report = modulator_report(params, drive)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    record = RunRecord(command="fom", config=cfg.snapshot, seed=args.seed)

    json_path = out / "fom.json"
    json_path.write_text(report.to_json() + "\n")
    record.add(json_path)
    text_path = out / "fom.txt"
    text_path.write_text(report.to_text())
    record.add(text_path)

    span = 6.0 * transduction.bandwidth(params, drive) / TWOPI
    grid = _parse_grid(args.grid, span, default_points=801)
    omegas = params.omega_m + grid
    transfer = np.abs(theta31(params, drive, omegas))
    pref = _voltage_prefactor(params)
    rows = [
        {
            "delta_hz": grid[i] / TWOPI,
            "theta31_mag": float(transfer[i]),
            "v_pi_v": float(pref / transfer[i]) if transfer[i] > 0 else float("inf"),
        }
        for i in range(grid.size)
    ]
    csv_path = record.add(write_table(out / "fom_scan.csv", list(rows[0]), rows))
    if not args.no_plot:
        record.add(plots.render_fom(csv_path, out / "fom.png"))
    print(report.to_text(), end="")
    _finish(record, out)
    return EXIT_OK


def _calibrate_spectra(args, cfg, kind: str):
    """Load supplied CSV spectra or synthesize seeded ones."""
    temps = args.temps or []
    if args.input:
        if temps and len(temps) != len(args.input):
            raise ConfigError("--temps must match --input one to one")
        spectra = []
        for i, path in enumerate(args.input):
            omega, values, sigma = calib.read_spectrum_csv(path)
            meta = {"kind": kind, "drive": cfg.drive, "port": args.port}
            if temps:
                meta["t_fridge_k"] = temps[i]
            if kind == "opt_thermal":
                meta["gamma_m_t"] = calib.thermal_linewidth(cfg.device, temps[i])
                meta["omega_m_t"] = calib.thermal_frequency(cfg.device, temps[i])
            spectra.append(
                calib.SyntheticSpectrum(
                    omega_grid=omega, values=values, truth={}, sigma=sigma, meta=meta
                )
            )
        return spectra
    # synthetic path
    if not temps:
        temps = [0.2, 0.3, 0.4]
    grid = TWOPI * np.linspace(-2e3, 2e3, 401)
    spectra = []
    for i, t in enumerate(temps):
        seed = None if args.seed is None else args.seed + i
        if kind == "mw_thermal":
            n_m = bose_occupancy(t, cfg.device.omega_m)
            spectra.append(
                calib.synth_mw_thermal_spectrum(
                    cfg.device, cfg.drive, n_m, cfg.setup, grid,
                    noise_sigma=args.noise_sigma, seed=seed, t_fridge_k=t,
                )
            )
        else:
            spectra.append(
                calib.synth_opt_thermal_spectrum(
                    cfg.device, cfg.drive, t, cfg.setup, grid,
                    noise_sigma=args.noise_sigma, seed=seed,
                )
            )
    return spectra


def cmd_calibrate(args) -> int:
    cfg = _load(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    record = RunRecord(command=f"calibrate {args.target}", config=cfg.snapshot, seed=args.seed)

    if args.target == "qe":
        payload = {
            "eta_qe": cfg.setup.eta_qe,
            "n_add_setup_o": calib.quantum_efficiency_model(cfg.setup.eta_qe),
        }
        result_path = out / "calibrate_qe.json"
        result_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        record.add(result_path)
        print(json.dumps(payload, sort_keys=True))
        _finish(record, out)
        return EXIT_OK

    if args.target == "setup":
        derived = sweeps.operating_point(cfg)
        from .params import derive as derive_drive

        n_d_e = derive_drive(derived.params, derived.drive).n_d_e
        o_e = calib.mw_background_normalized(
            cfg.setup.n_add_setup_e, n_d_e, derived.params, derived.drive
        )
        o_raw = calib.mw_background_raw(
            cfg.setup.gain_setup_e_db, cfg.setup.n_add_setup_e, derived.params.omega_e
        )
        n_add, gain_db = calib.extract_setup_mw(
            o_e, n_d_e, derived.params, derived.drive, reflected_power=o_raw / o_e
        )
        payload = {"n_add_setup_e": n_add, "gain_setup_e_db": gain_db}
        result_path = out / "calibrate_setup.json"
        result_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
        record.add(result_path)
        print(json.dumps(payload, sort_keys=True))
        _finish(record, out)
        return EXIT_OK

    if args.target == "g0e":
        spectra = _calibrate_spectra(args, cfg, "mw_thermal")
        result = calib.fit_g0e(spectra, cfg.device, cfg.setup)
    elif args.target == "g0o":
        spectra = _calibrate_spectra(args, cfg, "opt_thermal")
        result = calib.fit_g0o(spectra, cfg.device, cfg.setup)
    elif args.target == "gamma-m":
        point = sweeps.operating_point(cfg)
        if args.input:
            spectra = []
            for path in args.input:
                omega, values, sigma = calib.read_spectrum_csv(path)
                spectra.append(
                    calib.SyntheticSpectrum(
                        omega_grid=omega, values=values, truth={}, sigma=sigma,
                        meta={"kind": "transduction", "drive": point.drive},
                    )
                )
        else:
            grid = TWOPI * np.linspace(-2e3, 2e3, 401)
            spectra = [
                calib.synth_transduction_curve(
                    point.params, point.drive, grid,
                    noise_sigma=args.noise_sigma, seed=args.seed,
                )
            ]
        result = calib.fit_gamma_m(spectra, point.params)
    elif args.target == "t-m":
        point = sweeps.operating_point(cfg)
        if args.input:
            raise ConfigError("t-m fits run on synthetic spectra; omit --input")
        grid = TWOPI * np.linspace(-2e3, 2e3, 401)
        spec_e, spec_o = calib.synth_noise_spectra(
            point.params, point.drive, point.t_m, cfg.setup, grid,
            noise_sigma=args.noise_sigma, seed=args.seed,
            include_resonator_noise=cfg.include_resonator_noise,
        )
        result = calib.fit_bath_temperature([spec_e, spec_o], point.params, cfg.setup)
    else:  # pragma: no cover - argparse restricts choices
        raise ConfigError(f"unknown calibrate target {args.target!r}")

    result_path = out / f"calibrate_{args.target.replace('-', '_')}.json"
    result_path.write_text(json.dumps(result.to_dict(), indent=2, sort_keys=True) + "\n")
    record.add(result_path)
    print(json.dumps(result.to_dict(), sort_keys=True))
    _finish(record, out)
    if not result.converged:
        return EXIT_FIT
    return EXIT_OK


def cmd_write_config(args) -> int:
    write_default_config(args.path)
    print(f"wrote {args.path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="eomtrans",
        description="microwave-optical transducer simulator and calibration toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, grid=True):
        p.add_argument("--config", help="INI config path (defaults: built-in device)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--seed", type=int, default=None, help="seed for synthetic noise")
        p.add_argument("--workers", type=int, default=1, help="worker processes for sweeps")
        p.add_argument("--no-plot", action="store_true", help="skip PNG rendering")
        if grid:
            p.add_argument("--grid", help="probe offset grid start:stop:points[:log] in Hz")

    p = sub.add_parser("sparams", help="reflection and transduction vs probe detuning")
    common(p)
    p.add_argument("--dump-matrices", action="store_true",
                   help="also dump the state-space matrices as CSV")
    p.set_defaults(func=cmd_sparams)

    p = sub.add_parser("sweep", help="conversion figures along a parameter axis")
    common(p, grid=False)
    p.add_argument("--axis", required=True, choices=sweeps.SWEEP_AXES)
    p.add_argument("--start", type=float, required=True,
                   help="axis start (W for powers, Hz for frequencies)")
    p.add_argument("--stop", type=float, required=True)
    p.add_argument("--points", type=int, required=True)
    p.add_argument("--log", action="store_true", help="log-spaced axis")
    p.add_argument("--nd-target", type=float, default=sweeps.DEFAULT_ND_TARGET,
                   help="held photon number for delta_o_const_nd")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("noise", help="layered output noise spectra at both ports")
    common(p)
    p.set_defaults(func=cmd_noise)

    p = sub.add_parser("fom", help="modulator figures of merit report")
    common(p)
    p.set_defaults(func=cmd_fom)

    p = sub.add_parser("calibrate", help="parameter-extraction fits")
    common(p, grid=False)
    p.add_argument("target", choices=("g0e", "g0o", "gamma-m", "t-m", "setup", "qe"))
    p.add_argument("--input", nargs="*", help="spectrum CSV files (omega_hz,value,sigma)")
    p.add_argument("--temps", nargs="*", type=float,
                   help="fridge temperatures (K), one per spectrum")
    p.add_argument("--noise-sigma", type=float, default=0.0,
                   help="relative noise for synthetic spectra")
    p.add_argument("--port", default="o", choices=("e", "o"),
                   help="port label for supplied noise spectra")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("write-config", help="write the default config to a file")
    p.add_argument("path")
    p.set_defaults(func=cmd_write_config)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InstabilityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except FitConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FIT
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EomtransError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
