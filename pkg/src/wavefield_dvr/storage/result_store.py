from __future__ import annotations

import csv
import json
import math
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from ..models import Measurement, RunLog
from ..waveguide.field import PulseField

__all__ = ["ResultStore", "format_value"]


def format_value(value: Any) -> str:
    """CSV cell text; floats carry 12 significant digits."""

    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return format(float(value), ".12g")
    if value is None:
        return ""
    return str(value)


class ResultStore:
    """Filesystem layout for experiment outputs and run logs."""

    def __init__(self, base_dir: Path) -> None:
        self.base_dir = base_dir
        self.runs_dir = base_dir / "runs"

    def ensure_layout(self) -> None:
        for directory in [self.base_dir, self.runs_dir]:
            directory.mkdir(parents=True, exist_ok=True)

    def _target(self, relative: str) -> Path:
        path = self.base_dir / relative
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    # Tables
    def write_csv(
        self, relative: str, header: Sequence[str], rows: Iterable[Sequence[Any]]
    ) -> Path:
        path = self._target(relative)
        with path.open("w", encoding="utf-8", newline="") as file:
            writer = csv.writer(file, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_value(value) for value in row])
        return path

    def read_csv(self, relative: str) -> list[dict[str, str]]:
        with (self.base_dir / relative).open("r", encoding="utf-8", newline="") as file:
            return list(csv.DictReader(file))

    def write_measurement(self, relative: str, measurement: Measurement) -> Path:
        rows = (
            (j, z, value.real, value.imag, measurement.kind, measurement.seed)
            for j, (z, value) in enumerate(zip(measurement.depths, measurement.values), start=1)
        )
        return self.write_csv(relative, ("j", "depth_m", "real", "imag", "kind", "seed"), rows)

    def write_json(self, relative: str, payload: Any) -> Path:
        path = self._target(relative)
        with path.open("w", encoding="utf-8") as file:
            json.dump(payload, file, ensure_ascii=False, indent=2)
            file.write("\n")
        return path

    def save_pulse(self, relative: str, pulse: PulseField) -> Path:
        path = self._target(relative)
        with path.open("wb") as file:
            np.savez(
                file,
                time_s=pulse.time_axis,
                depth_m=pulse.depths,
                real=pulse.values.real,
                imag=pulse.values.imag,
            )
        return path

    # Run logs
    def record_run(self, run: RunLog) -> Path:
        """Write ``run`` under ``runs/``; names sort in recording order."""

        self.runs_dir.mkdir(parents=True, exist_ok=True)
        timestamp = datetime.now(timezone.utc).strftime("%Y%m%d_%H%M%S_%f")
        # sequence number breaks ties within one clock tick
        sequence = sum(1 for _ in self.runs_dir.glob("*_run.json"))
        run_path = self.runs_dir / f"{timestamp}_{sequence:06d}_{run.run_id}_run.json"
        with run_path.open("w", encoding="utf-8") as file:
            json.dump(run.to_dict(), file, ensure_ascii=False, indent=2)
        return run_path

    def latest_run(self) -> Path | None:
        if not self.runs_dir.exists():
            return None
        candidates = sorted(self.runs_dir.glob("*_run.json"))
        return candidates[-1] if candidates else None

    def load_run(self, path: Path) -> RunLog:
        with path.open("r", encoding="utf-8") as file:
            return RunLog.from_dict(json.load(file))
