"""Atomic data catalog: transitions, autoionizing resonances, isotopes.

The catalog lives in a sectioned text file (see data/catalog.txt) so the
numbers stay editable without touching code. Loading converts everything
to SI; serialization writes the same row values back out, so a
load -> save round trip is exact.
"""

from __future__ import annotations

import csv
import io
import importlib.resources
from dataclasses import dataclass
from pathlib import Path

from .constants import HC_EV_NM, MEGABARN, frequency_hz, photon_energy_ev

__all__ = [
    "Transition",
    "AutoionizingResonance",
    "Isotope",
    "AtomicCatalog",
    "AmbiguousResonanceError",
    "load_catalog",
    "default_catalog",
    "second_step_wavelength_nm",
]

SCHEMA_ID = "ionload.catalog.v1"

# Validation bounds. The ionization threshold of neutral barium is
# 5.2117 eV; any two-photon pathway in the catalog must end above it.
_IONIZATION_THRESHOLD_EV = 5.2
_KNOWN_MASS_NUMBERS = {130, 132, 134, 135, 136, 137, 138}


class AmbiguousResonanceError(LookupError):
    """More than one catalog resonance matched a wavelength query."""


@dataclass(frozen=True)
class Transition:
    """A dipole transition from the 6s2 1S0 ground state.

    linewidth_hz is the natural linewidth as an ordinary frequency
    (cycles/s, not rad/s).
    """

    label: str
    wavelength_nm: float
    upper_state: str
    linewidth_hz: float
    ground_branching_ratio: float

    @property
    def wavelength_m(self) -> float:
        return self.wavelength_nm * 1e-9

    @property
    def frequency_hz(self) -> float:
        return frequency_hz(self.wavelength_m)


@dataclass(frozen=True)
class AutoionizingResonance:
    """One autoionizing state reachable from 6s6p 1P1.

    total_energy_ev is the state energy above the ground state, i.e. the
    sum of both photon energies at resonance. alt_cross_section_mb
    carries an independently reported peak value (None if the catalog
    has only one measurement).
    """

    wavelength_nm: float
    peak_cross_section_mb: float
    configuration: str
    j_value: int
    total_energy_ev: float
    fano_gamma_hz: float
    fano_q: float
    alt_cross_section_mb: float | None = None
    alt_cross_section_err_mb: float | None = None

    @property
    def wavelength_m(self) -> float:
        return self.wavelength_nm * 1e-9

    @property
    def center_frequency_hz(self) -> float:
        return frequency_hz(self.wavelength_m)

    @property
    def peak_cross_section_m2(self) -> float:
        return self.peak_cross_section_mb * MEGABARN


@dataclass(frozen=True)
class Isotope:
    mass_number: int
    abundance: float
    # Shift of the 554 nm line relative to 138Ba, ordinary frequency.
    shift_554_hz: float


@dataclass(frozen=True)
class AtomicCatalog:
    transitions: tuple[Transition, ...]
    resonances: tuple[AutoionizingResonance, ...]
    isotopes: tuple[Isotope, ...]

    def validate(self) -> None:
        total = sum(i.abundance for i in self.isotopes)
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"isotope abundances sum to {total!r}, not 1")
        masses = {i.mass_number for i in self.isotopes}
        if not masses <= _KNOWN_MASS_NUMBERS:
            raise ValueError(f"unknown mass numbers: {sorted(masses - _KNOWN_MASS_NUMBERS)}")
        for iso in self.isotopes:
            if not 0.0 <= iso.abundance <= 1.0:
                raise ValueError(f"abundance out of range for {iso.mass_number}Ba")
        first = self.transition("554")
        for res in self.resonances:
            if res.total_energy_ev <= _IONIZATION_THRESHOLD_EV:
                raise ValueError(
                    f"resonance at {res.wavelength_nm} nm sits below the "
                    f"ionization threshold ({res.total_energy_ev} eV)"
                )
            if res.fano_gamma_hz <= 0.0:
                raise ValueError(f"resonance at {res.wavelength_nm} nm has non-positive width")
            # Energy closure: first photon + second photon must reproduce
            # the tabulated state energy.
            closure = photon_energy_ev(first.wavelength_nm) + photon_energy_ev(res.wavelength_nm)
            if abs(closure - res.total_energy_ev) > 0.002:
                raise ValueError(
                    f"energy closure fails for {res.wavelength_nm} nm: "
                    f"{closure:.5f} vs {res.total_energy_ev:.5f} eV"
                )
        for tr in self.transitions:
            if not 0.0 < tr.ground_branching_ratio <= 1.0:
                raise ValueError(f"branching ratio out of range for transition {tr.label}")
            if tr.linewidth_hz <= 0.0:
                raise ValueError(f"non-positive linewidth for transition {tr.label}")

    def transition(self, label: str) -> Transition:
        for tr in self.transitions:
            if tr.label == label:
                return tr
        raise KeyError(f"no transition labelled {label!r}")

    def isotope(self, mass_number: int) -> Isotope:
        for iso in self.isotopes:
            if iso.mass_number == mass_number:
                return iso
        raise KeyError(f"no isotope with mass number {mass_number}")

    def lookup_resonance(self, wavelength_nm: float, tolerance_nm: float = 0.5) -> AutoionizingResonance:
        """Find the unique resonance within tolerance of a wavelength.

        Raises LookupError when nothing matches and
        AmbiguousResonanceError when more than one row does.
        """
        if tolerance_nm <= 0.0:
            raise ValueError("tolerance must be positive")
        hits = [r for r in self.resonances if abs(r.wavelength_nm - wavelength_nm) <= tolerance_nm]
        if not hits:
            raise LookupError(f"no resonance within {tolerance_nm} nm of {wavelength_nm} nm")
        if len(hits) > 1:
            found = ", ".join(f"{r.wavelength_nm} nm" for r in hits)
            raise AmbiguousResonanceError(
                f"{len(hits)} resonances within {tolerance_nm} nm of {wavelength_nm} nm: {found}"
            )
        return hits[0]


def second_step_wavelength_nm(first_step_nm: float, total_energy_ev: float) -> float:
    """Second photon wavelength that completes a two-photon pathway.

    Solves E_total = E(first) + E(second) for the second wavelength.
    """
    remainder = total_energy_ev - photon_energy_ev(first_step_nm)
    if remainder <= 0.0:
        raise ValueError(
            f"first photon already exceeds the target energy "
            f"({photon_energy_ev(first_step_nm):.5f} >= {total_energy_ev} eV)"
        )
    return HC_EV_NM / remainder


# ---------------------------------------------------------------------------
# Parsing and serialization


def _opt_float(text: str) -> float | None:
    return None if text == "" else float(text)


def _fmt(value: float | int | str | None) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_catalog(text: str) -> AtomicCatalog:
    sections: dict[str, list[str]] = {}
    current: list[str] | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith("[") and line.endswith("]"):
            current = sections.setdefault(line[1:-1], [])
            continue
        if current is None:
            raise ValueError(f"catalog line {lineno}: data before any [section] header")
        current.append(line)

    missing = {"transitions", "resonances", "isotopes"} - set(sections)
    if missing:
        raise ValueError(f"catalog is missing sections: {sorted(missing)}")

    def rows(name: str) -> list[dict[str, str]]:
        return list(csv.DictReader(io.StringIO("\n".join(sections[name]))))

    transitions = tuple(
        Transition(
            label=r["label"],
            wavelength_nm=float(r["wavelength_nm"]),
            upper_state=r["upper_state"],
            linewidth_hz=float(r["linewidth_MHz"]) * 1e6,
            ground_branching_ratio=float(r["ground_branching_ratio"]),
        )
        for r in rows("transitions")
    )
    resonances = tuple(
        AutoionizingResonance(
            wavelength_nm=float(r["wavelength_nm"]),
            peak_cross_section_mb=float(r["peak_cross_section_Mb"]),
            alt_cross_section_mb=_opt_float(r["alt_cross_section_Mb"]),
            alt_cross_section_err_mb=_opt_float(r["alt_cross_section_err_Mb"]),
            configuration=r["configuration"],
            j_value=int(r["j_value"]),
            total_energy_ev=float(r["total_energy_eV"]),
            fano_gamma_hz=float(r["fano_gamma_GHz"]) * 1e9,
            fano_q=float(r["fano_q"]),
        )
        for r in rows("resonances")
    )
    isotopes = tuple(
        Isotope(
            mass_number=int(r["mass_number"]),
            abundance=float(r["abundance"]),
            shift_554_hz=float(r["isotope_shift_554_MHz"]) * 1e6,
        )
        for r in rows("isotopes")
    )
    catalog = AtomicCatalog(transitions, resonances, isotopes)
    catalog.validate()
    return catalog


def serialize_catalog(catalog: AtomicCatalog) -> str:
    """Render a catalog back to the sectioned text format.

    parse_catalog(serialize_catalog(c)) reproduces c exactly; float cells
    are written with repr so no precision is lost.
    """
    out: list[str] = [f"# Barium atomic data catalog (schema: {SCHEMA_ID})", ""]
    out.append("[transitions]")
    out.append("label,wavelength_nm,upper_state,linewidth_MHz,ground_branching_ratio")
    for t in catalog.transitions:
        out.append(
            ",".join(
                [t.label, _fmt(t.wavelength_nm), t.upper_state,
                 _fmt(t.linewidth_hz / 1e6), _fmt(t.ground_branching_ratio)]
            )
        )
    out.append("")
    out.append("[resonances]")
    out.append(
        "wavelength_nm,peak_cross_section_Mb,alt_cross_section_Mb,"
        "alt_cross_section_err_Mb,configuration,j_value,total_energy_eV,"
        "fano_gamma_GHz,fano_q"
    )
    for r in catalog.resonances:
        out.append(
            ",".join(
                [_fmt(r.wavelength_nm), _fmt(r.peak_cross_section_mb),
                 _fmt(r.alt_cross_section_mb), _fmt(r.alt_cross_section_err_mb),
                 r.configuration, _fmt(r.j_value), _fmt(r.total_energy_ev),
                 _fmt(r.fano_gamma_hz / 1e9), _fmt(r.fano_q)]
            )
        )
    out.append("")
    out.append("[isotopes]")
    out.append("mass_number,abundance,isotope_shift_554_MHz")
    for i in catalog.isotopes:
        out.append(",".join([_fmt(i.mass_number), _fmt(i.abundance), _fmt(i.shift_554_hz / 1e6)]))
    out.append("")
    return "\n".join(out)


def load_catalog(path: str | Path | None = None) -> AtomicCatalog:
    """Load a catalog file, or the bundled default when path is None."""
    if path is None:
        text = importlib.resources.files("ionload.data").joinpath("catalog.txt").read_text()
    else:
        text = Path(path).read_text()
    return parse_catalog(text)


_default: AtomicCatalog | None = None


def default_catalog() -> AtomicCatalog:
    """Bundled catalog, parsed once and cached."""
    global _default
    if _default is None:
        _default = load_catalog(None)
    return _default
