"""Fano profiles, saturation quantities, and two-level excitation.

Conventions that matter here:

* Natural linewidths are ordinary frequencies (Hz, cycles/s) everywhere
  in this package. ``saturation_intensity`` feeds the linewidth into
  hbar * omega^3 * Gamma / (4 pi c^2) *as that ordinary frequency*; with
  Gamma = 60.4 GHz at 769.211 THz this gives 63.7 W/cm^2. Converting
  Gamma to rad/s first would inflate the result by 2*pi (~400 W/cm^2),
  which is the classic way to get this number wrong.
* The Fano profile is normalized so its maximum equals the peak cross
  section for every q (the maximum sits at eps = 1/q).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .catalog import AutoionizingResonance
from .constants import C_LIGHT, HBAR

__all__ = [
    "FanoProfile",
    "fano_cross_section",
    "lorentzian_cross_section",
    "saturation_intensity",
    "saturation_power",
    "two_level_saturation_intensity",
    "excited_fraction",
]


@dataclass(frozen=True)
class FanoProfile:
    """Fano lineshape of one autoionizing resonance.

    gamma_hz is the full resonance width (ordinary frequency); q the
    asymmetry parameter; peak_cross_section_m2 the maximum of the
    profile.
    """

    center_frequency_hz: float
    gamma_hz: float
    q: float
    peak_cross_section_m2: float

    def __post_init__(self) -> None:
        if self.gamma_hz <= 0.0:
            raise ValueError(f"gamma must be positive, got {self.gamma_hz}")
        if self.peak_cross_section_m2 < 0.0:
            raise ValueError("peak cross section must be non-negative")

    @classmethod
    def from_resonance(cls, res: AutoionizingResonance) -> "FanoProfile":
        return cls(
            center_frequency_hz=res.center_frequency_hz,
            gamma_hz=res.fano_gamma_hz,
            q=res.fano_q,
            peak_cross_section_m2=res.peak_cross_section_m2,
        )


def fano_cross_section(detuning_hz, profile: FanoProfile):
    """Cross section at a detuning (Hz) from the resonance center.

    sigma(eps) = sigma_peak * (q + eps)^2 / ((1 + q^2)(1 + eps^2)) with
    the reduced detuning eps = 2*detuning/gamma. The profile vanishes at
    eps = -q and tends to the Lorentzian sigma_peak/(1 + eps^2) as
    q -> inf. Accepts scalars or arrays.
    """
    eps = 2.0 * np.asarray(detuning_hz, dtype=float) / profile.gamma_hz
    q = profile.q
    value = profile.peak_cross_section_m2 * (q + eps) ** 2 / ((1.0 + q * q) * (1.0 + eps * eps))
    if np.ndim(detuning_hz) == 0:
        return float(value)
    return value


def lorentzian_cross_section(detuning_hz, gamma_hz: float, peak_m2: float):
    """q -> inf limit of the Fano profile; used as an oracle and for checks."""
    eps = 2.0 * np.asarray(detuning_hz, dtype=float) / gamma_hz
    value = peak_m2 / (1.0 + eps * eps)
    if np.ndim(detuning_hz) == 0:
        return float(value)
    return value


def saturation_intensity(frequency_hz: float, gamma_hz: float) -> float:
    """Saturation intensity (W/m^2) of a broad resonance.

    I_sat = hbar * (2 pi f)^3 * Gamma / (4 pi c^2), with Gamma the
    resonance width as an ordinary frequency in Hz. See the module
    docstring for why the Hz convention is load-bearing.
    """
    if frequency_hz <= 0.0 or gamma_hz < 0.0:
        raise ValueError("frequency must be positive and linewidth non-negative")
    omega = 2.0 * math.pi * frequency_hz
    return HBAR * omega**3 * gamma_hz / (4.0 * math.pi * C_LIGHT**2)


def saturation_power(i_sat_w_m2: float, waist_m: float) -> float:
    """Beam power (W) whose Gaussian peak intensity equals i_sat.

    P = I * pi * w0^2 / 2 for a TEM00 beam of 1/e^2 radius w0.
    """
    if waist_m <= 0.0:
        raise ValueError(f"waist must be positive, got {waist_m}")
    return i_sat_w_m2 * math.pi * waist_m**2 / 2.0


def two_level_saturation_intensity(wavelength_m: float, gamma_hz: float) -> float:
    """Textbook two-level saturation intensity pi*h*c*Gamma_rad/(3 lambda^3).

    Used for the narrow 554 nm first step, where the two-level result is
    the right scale for the excitation saturation parameter. gamma_hz is
    again an ordinary frequency; the radiative rate 2*pi*gamma enters the
    formula.
    """
    if wavelength_m <= 0.0 or gamma_hz <= 0.0:
        raise ValueError("wavelength and linewidth must be positive")
    gamma_rad = 2.0 * math.pi * gamma_hz
    return math.pi * (HBAR * 2.0 * math.pi) * C_LIGHT * gamma_rad / (3.0 * wavelength_m**3)


def excited_fraction(s, detuning_hz, gamma_hz: float):
    """Steady-state upper-state population of a driven two-level atom.

    rho_ee = (s/2) / (1 + s + (2 delta / Gamma)^2); bounded above by 1/2,
    equal to 1/4 at s = 1 on resonance. Accepts scalars or arrays.
    """
    if gamma_hz <= 0.0:
        raise ValueError("gamma must be positive")
    s_arr = np.asarray(s, dtype=float)
    if np.any(s_arr < 0.0):
        raise ValueError("saturation parameter must be non-negative")
    d = 2.0 * np.asarray(detuning_hz, dtype=float) / gamma_hz
    value = 0.5 * s_arr / (1.0 + s_arr + d * d)
    if np.ndim(s) == 0 and np.ndim(detuning_hz) == 0:
        return float(value)
    return value
