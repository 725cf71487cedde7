"""Physical constants and unit helpers used across the package.

Values come from scipy.constants (CODATA). Cross sections are handled in
SI (m^2) internally; the megabarn is the customary unit for autoionizing
resonances, 1 Mb = 1e-22 m^2.
"""

from __future__ import annotations

from scipy import constants as _const

__all__ = [
    "C_LIGHT",
    "H_PLANCK",
    "HBAR",
    "EV",
    "HC_EV_NM",
    "MEGABARN",
    "frequency_hz",
    "photon_energy_ev",
    "photon_energy_j",
]

C_LIGHT: float = _const.c
H_PLANCK: float = _const.h
HBAR: float = _const.hbar
EV: float = _const.e

# h*c expressed in eV*nm; convenient for wavelength <-> energy bookkeeping.
HC_EV_NM: float = H_PLANCK * C_LIGHT / EV * 1e9

MEGABARN: float = 1e-22  # m^2


def frequency_hz(wavelength_m: float) -> float:
    """Optical frequency (Hz) of light with the given vacuum wavelength."""
    if wavelength_m <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength_m}")
    return C_LIGHT / wavelength_m


def photon_energy_j(wavelength_m: float) -> float:
    """Photon energy in joules."""
    return H_PLANCK * frequency_hz(wavelength_m)


def photon_energy_ev(wavelength_nm: float) -> float:
    """Photon energy in eV for a vacuum wavelength given in nm."""
    if wavelength_nm <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength_nm}")
    return HC_EV_NM / wavelength_nm
