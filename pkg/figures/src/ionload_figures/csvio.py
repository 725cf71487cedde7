"""Readers for the simulator's file formats.

Every CSV starts with a `# schema: <id>` line; readers refuse files
whose schema or column set does not match and say exactly what was
wrong. Files are opened read-only and never modified.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

POWER_SWEEP_SCHEMA = "ionload.power_sweep.v1"
FLUENCE_SWEEP_SCHEMA = "ionload.fluence_sweep.v1"
PULSES_SCHEMA = "ionload.pulses.v1"


class FormatError(ValueError):
    """Input file does not match the documented format."""


@dataclass(frozen=True)
class PowerSweepData:
    power_mw: list[float]
    mean_ions: list[float]
    sem_ions: list[float]


@dataclass(frozen=True)
class FluenceSweepData:
    fluence_j_cm2: list[float]
    mean_ions: list[float]
    sem_ions: list[float]
    region: list[str]


def _check_schema(path: Path, expected: str) -> None:
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    with path.open("r", encoding="utf-8") as handle:
        first = handle.readline().strip()
    if first != f"# schema: {expected}":
        raise FormatError(f"{path}: expected schema {expected!r}, found {first!r}")


def _rows(path: Path, expected_schema: str, required: tuple[str, ...]):
    _check_schema(path, expected_schema)
    with path.open("r", encoding="utf-8", newline="") as handle:
        handle.readline()
        reader = csv.DictReader(handle)
        header = reader.fieldnames or ()
        for column in required:
            if column not in header:
                raise FormatError(f"{path}: missing required column {column!r}")
        rows = list(reader)
    if not rows:
        raise FormatError(f"{path}: no data rows")
    return rows


def _column(rows, path: Path, name: str) -> list[float]:
    out = []
    for i, row in enumerate(rows):
        try:
            out.append(float(row[name]))
        except (TypeError, ValueError) as exc:
            raise FormatError(
                f"{path}: column {name!r} is not numeric at data row {i}"
            ) from exc
    return out


def read_power_sweep(path: str | Path) -> PowerSweepData:
    path = Path(path)
    required = ("power_mW", "mean_ions_per_pulse", "sem_ions_per_pulse")
    rows = _rows(path, POWER_SWEEP_SCHEMA, required)
    return PowerSweepData(
        power_mw=_column(rows, path, "power_mW"),
        mean_ions=_column(rows, path, "mean_ions_per_pulse"),
        sem_ions=_column(rows, path, "sem_ions_per_pulse"),
    )


def read_fluence_sweep(path: str | Path) -> FluenceSweepData:
    path = Path(path)
    required = ("fluence_J_per_cm2", "mean_ions_per_pulse", "sem_ions_per_pulse", "region")
    rows = _rows(path, FLUENCE_SWEEP_SCHEMA, required)
    return FluenceSweepData(
        fluence_j_cm2=_column(rows, path, "fluence_J_per_cm2"),
        mean_ions=_column(rows, path, "mean_ions_per_pulse"),
        sem_ions=_column(rows, path, "sem_ions_per_pulse"),
        region=[row["region"] for row in rows],
    )


def read_pulse_counts(path: str | Path) -> list[int]:
    """Trapped-ion count per pulse from a pulses CSV."""
    path = Path(path)
    rows = _rows(path, PULSES_SCHEMA, ("ions_total",))
    values = _column(rows, path, "ions_total")
    counts = [int(v) for v in values]
    if any(c != v for c, v in zip(counts, values)):
        raise FormatError(f"{path}: column 'ions_total' must hold integers")
    return counts


def read_fit_report(path: str | Path) -> dict[str, float | str]:
    """`key = value` lines; floats where possible, strings otherwise."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    report: dict[str, float | str] = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"{path}: malformed report line {line!r}")
        key = key.strip()
        value = value.strip()
        try:
            report[key] = float(value)
        except ValueError:
            report[key] = value
    if not report:
        raise FormatError(f"{path}: empty fit report")
    return report
