"""CSV and report writers with versioned schemas.

Every CSV starts with a `# schema: <id>` comment line, then a header
row whose column names carry units. Floats are written with repr (the
shortest round-trip form), decimals use '.', rows end with '\n':
identical data produces identical bytes, which the golden-file and
determinism tests rely on.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable

from .analysis import FitResult
from .campaign import CampaignSummary, PulseOutcome, SweepPoint
from .plume import classify_region

__all__ = [
    "PULSES_SCHEMA",
    "SWEEP_POWER_SCHEMA",
    "SWEEP_FLUENCE_SCHEMA",
    "SUMMARY_SCHEMA",
    "write_pulses_csv",
    "read_pulses_csv",
    "write_power_sweep_csv",
    "read_power_sweep_csv",
    "write_fluence_sweep_csv",
    "write_summary_csv",
    "write_fit_report",
    "read_fit_report",
]

PULSES_SCHEMA = "ionload.pulses.v1"
SWEEP_POWER_SCHEMA = "ionload.power_sweep.v1"
SWEEP_FLUENCE_SCHEMA = "ionload.fluence_sweep.v1"
SUMMARY_SCHEMA = "ionload.summary.v1"

_REGION_NAMES = {1: "I", 2: "II", 3: "III"}


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _open_writer(path: Path, schema: str, header: list[str]):
    handle = path.open("w", encoding="utf-8", newline="")
    handle.write(f"# schema: {schema}\n")
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(header)
    return handle, writer


def _check_schema(path: Path, expected: str) -> None:
    with path.open("r", encoding="utf-8") as handle:
        first = handle.readline().strip()
    if first != f"# schema: {expected}":
        raise ValueError(f"{path}: expected schema {expected!r}, found {first!r}")


def write_pulses_csv(
    path: str | Path,
    outcomes: Iterable[PulseOutcome],
    isotope_masses: Iterable[int],
) -> None:
    """One row per pulse with per-isotope trapped counts."""
    path = Path(path)
    masses = sorted(int(m) for m in isotope_masses)
    header = (
        ["pulse_index", "n_atoms", "ions_total"]
        + [f"ions_ba{m}" for m in masses]
        + ["direct_ions", "fluorescence_counts", "seed_path"]
    )
    handle, writer = _open_writer(path, PULSES_SCHEMA, header)
    with handle:
        for o in outcomes:
            row = [o.pulse_index, o.n_atoms, o.n_trapped]
            row += [o.trapped_by_isotope.get(m, 0) for m in masses]
            row += [o.direct_ions, _fmt(o.neutral_fluorescence_counts), o.seed_path]
            writer.writerow(row)


def read_pulses_csv(path: str | Path) -> list[dict]:
    """Rows as dicts with ints/floats restored; validates the schema line."""
    path = Path(path)
    _check_schema(path, PULSES_SCHEMA)
    with path.open("r", encoding="utf-8", newline="") as handle:
        handle.readline()
        reader = csv.DictReader(handle)
        rows = []
        for raw in reader:
            row: dict = {}
            for key, value in raw.items():
                if key == "seed_path":
                    row[key] = value
                elif key == "fluorescence_counts":
                    row[key] = float(value)
                else:
                    row[key] = int(value)
            rows.append(row)
    return rows


def write_power_sweep_csv(path: str | Path, points: Iterable[SweepPoint]) -> None:
    handle, writer = _open_writer(
        Path(path),
        SWEEP_POWER_SCHEMA,
        ["power_mW", "mean_ions_per_pulse", "sem_ions_per_pulse", "n_pulses"],
    )
    with handle:
        for p in points:
            writer.writerow(
                [_fmt(p.x * 1e3), _fmt(p.mean_ions), _fmt(p.sem_ions), p.n_pulses]
            )


def read_power_sweep_csv(path: str | Path) -> tuple[list[float], list[float], list[float]]:
    """(power_mW, mean, sem) columns from a power-sweep CSV."""
    path = Path(path)
    _check_schema(path, SWEEP_POWER_SCHEMA)
    xs: list[float] = []
    ys: list[float] = []
    ss: list[float] = []
    with path.open("r", encoding="utf-8", newline="") as handle:
        handle.readline()
        for raw in csv.DictReader(handle):
            xs.append(float(raw["power_mW"]))
            ys.append(float(raw["mean_ions_per_pulse"]))
            ss.append(float(raw["sem_ions_per_pulse"]))
    if not xs:
        raise ValueError(f"{path}: no data rows")
    return xs, ys, ss


def write_fluence_sweep_csv(path: str | Path, points: Iterable[SweepPoint]) -> None:
    """Fluence rows annotated with the loading region.

    Region III rows carry the campaign's total direct-ion count so
    contamination is visible next to the loading rate.
    """
    handle, writer = _open_writer(
        Path(path),
        SWEEP_FLUENCE_SCHEMA,
        [
            "fluence_J_per_cm2",
            "mean_ions_per_pulse",
            "sem_ions_per_pulse",
            "region",
            "direct_ions_total",
            "n_pulses",
        ],
    )
    with handle:
        for p in points:
            region = _REGION_NAMES[classify_region(p.x)]
            writer.writerow(
                [
                    _fmt(p.x),
                    _fmt(p.mean_ions),
                    _fmt(p.sem_ions),
                    region,
                    p.total_direct_ions,
                    p.n_pulses,
                ]
            )


def write_summary_csv(path: str | Path, summary: CampaignSummary) -> None:
    """Two-column key/value summary, histogram flattened as hist_<k>."""
    handle, writer = _open_writer(Path(path), SUMMARY_SCHEMA, ["key", "value"])
    items: list[tuple[str, object]] = [
        ("n_pulses", summary.n_pulses),
        ("mean_ions", summary.mean_ions),
        ("sem_ions", summary.sem_ions),
        ("median_ions", summary.median_ions),
        ("poisson_lambda", summary.poisson_lambda),
        ("poisson_lambda_sigma", summary.poisson_lambda_sigma),
        ("gof_chi2", summary.gof_chi2),
        ("gof_dof", summary.gof_dof),
        ("gof_p_value", summary.gof_p_value),
        ("success_fraction", summary.success_fraction),
        ("mean_fluorescence", summary.mean_fluorescence),
        ("total_ions", summary.total_ions),
        ("total_direct_ions", summary.total_direct_ions),
        (
            "multi_ion_impurity_fraction",
            "" if summary.multi_ion_impurity_fraction is None
            else summary.multi_ion_impurity_fraction,
        ),
    ]
    items += [(f"ions_ba{m}", c) for m, c in sorted(summary.trapped_by_isotope.items())]
    items += [(f"hist_{k}", c) for k, c in enumerate(summary.histogram)]
    with handle:
        for key, value in items:
            writer.writerow([key, _fmt(value)])


def write_fit_report(path: str | Path, fit: FitResult) -> None:
    """Plain `key = value` lines; consumed by the figure scripts."""
    lines = [f"model = {fit.model_id}"]
    for name, value in fit.params.items():
        lines.append(f"{name} = {_fmt(value)}")
        lines.append(f"sigma_{name} = {_fmt(fit.sigmas[name])}")
    lines.append(f"residual_norm = {_fmt(fit.residual_norm)}")
    for name, value in fit.extras.items():
        lines.append(f"{name} = {_fmt(value)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_fit_report(path: str | Path) -> dict[str, float | str]:
    """Parse a fit report back into a flat dict."""
    out: dict[str, float | str] = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        try:
            out[key] = float(value)
        except ValueError:
            out[key] = value
    return out
