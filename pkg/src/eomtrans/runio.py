"""Result emission: delimited tables and the per-run record.

CSV bodies are deterministic for a fixed config and seed (floats printed
with 12 significant digits); timestamps live only in the run record.
"""

from __future__ import annotations

import csv
import datetime
import json
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__


def format_value(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def write_table(path, columns, rows) -> str:
    """Write dict rows under a fixed column order; returns the path."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row[col]) for col in columns])
    return str(path)


@dataclass
class RunRecord:
    """Snapshot of one CLI invocation and every file it emitted."""

    command: str
    config: dict
    seed: int | None = None
    outputs: list = field(default_factory=list)
    version: str = __version__

    def add(self, path) -> str:
        path = str(path)
        if path not in self.outputs:
            self.outputs.append(path)
        return path

    def write(self, out_dir) -> str:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        payload = {
            "command": self.command,
            "version": self.version,
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "seed": self.seed,
            "config": self.config,
            "outputs": sorted(self.outputs),
        }
        path = out_dir / "run_record.json"
        with open(path, "w") as handle:
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
        return str(path)
