"""Figure rendering for the CLI report paths.

Every report command writes a PNG next to its CSV. Rendering is kept
dumb: it re-reads the emitted tables so figures always show exactly what
was written to disk.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _read_table(path):
    with open(path, newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader)
        rows = [row for row in reader if row]
    columns = {}
    for i, name in enumerate(header):
        values = []
        for row in rows:
            try:
                values.append(float(row[i]))
            except ValueError:
                values.append(float("nan"))
        columns[name] = values
    return columns


def _save(fig, png_path) -> str:
    png_path = Path(png_path)
    fig.tight_layout()
    fig.savefig(png_path, dpi=150)
    plt.close(fig)
    return str(png_path)


def render_sparams(csv_path, png_path) -> str:
    data = _read_table(csv_path)
    delta_khz = [d / 1e3 for d in data["delta_hz"]]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    ax1.plot(delta_khz, data["s_ee_mag2"], label="$|S_{ee}|^2$")
    ax1.plot(delta_khz, data["s_oo_mag2"], label="$|S_{oo}|^2$")
    ax1.set_ylabel("reflection")
    ax1.legend()
    ax1.grid(alpha=0.3)
    ax2.semilogy(delta_khz, data["zeta"], label=r"$\zeta$")
    ax2.semilogy(delta_khz, data["theta"], label=r"$\theta$", ls="--")
    ax2.set_xlabel("probe detuning (kHz)")
    ax2.set_ylabel("transduction")
    ax2.legend()
    ax2.grid(alpha=0.3)
    return _save(fig, png_path)


def render_sweep(csv_path, png_path, axis_label: str) -> str:
    data = _read_table(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(data["axis_value"], data["zeta"], "o-", label=r"$\zeta$")
    ax.plot(data["axis_value"], data["theta"], "s--", label=r"$\theta$")
    if min(v for v in data["axis_value"] if v == v) > 0:
        ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel(axis_label)
    ax.set_ylabel("conversion efficiency")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, png_path)


def render_noise(csv_path, png_path) -> str:
    data = _read_table(csv_path)
    delta_khz = [d / 1e3 for d in data["delta_hz"]]
    fig, axes = plt.subplots(2, 1, figsize=(6, 6), sharex=True)
    for ax, port, color in zip(axes, ("e", "o"), ("tab:red", "tab:blue")):
        base = data[f"background_{port}"]
        res = [b + r for b, r in zip(base, data[f"resonator_{port}"])]
        oth = [r + o for r, o in zip(res, data[f"other_{port}"])]
        tot = data[f"total_{port}"]
        ax.fill_between(delta_khz, 0, base, alpha=0.25, color="gray", label="setup")
        ax.fill_between(delta_khz, base, res, alpha=0.4, color="darkred", label="resonator")
        ax.fill_between(delta_khz, oth, tot, alpha=0.4, color=color, label="mechanical")
        ax.plot(delta_khz, tot, color="black", lw=1)
        ax.set_ylabel(f"output quanta ({port})")
        ax.legend(loc="upper right", fontsize=8)
        ax.grid(alpha=0.3)
    axes[1].set_xlabel("probe detuning (kHz)")
    return _save(fig, png_path)


def render_fom(csv_path, png_path) -> str:
    data = _read_table(csv_path)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.semilogy([d / 1e3 for d in data["delta_hz"]], [v * 1e6 for v in data["v_pi_v"]])
    ax.set_xlabel("probe detuning (kHz)")
    ax.set_ylabel(r"$V_\pi$ ($\mu$V)")
    ax.grid(alpha=0.3)
    return _save(fig, png_path)
