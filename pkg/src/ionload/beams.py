"""Gaussian beam geometry: intensities, photon flux, transit profiles."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import C_LIGHT, H_PLANCK

__all__ = [
    "LaserBeam",
    "peak_intensity",
    "intensity_at",
    "photon_flux",
    "transit_dose",
    "transit_profile",
]


@dataclass(frozen=True)
class LaserBeam:
    """TEM00 beam: total power (W), 1/e^2 intensity radius (m), wavelength (m)."""

    power_w: float
    waist_m: float
    wavelength_m: float

    def __post_init__(self) -> None:
        if self.power_w < 0.0:
            raise ValueError(f"power must be non-negative, got {self.power_w}")
        if self.waist_m <= 0.0:
            raise ValueError(f"waist must be positive, got {self.waist_m}")
        if self.wavelength_m <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength_m}")

    @property
    def peak_intensity_w_m2(self) -> float:
        return peak_intensity(self.power_w, self.waist_m)

    @property
    def peak_photon_flux(self) -> float:
        return photon_flux(self.peak_intensity_w_m2, self.wavelength_m)


def peak_intensity(power_w: float, waist_m: float) -> float:
    """On-axis intensity I0 = 2 P / (pi w0^2) of a Gaussian beam."""
    if waist_m <= 0.0:
        raise ValueError(f"waist must be positive, got {waist_m}")
    if power_w < 0.0:
        raise ValueError(f"power must be non-negative, got {power_w}")
    return 2.0 * power_w / (math.pi * waist_m**2)


def intensity_at(power_w: float, waist_m: float, radius_m):
    """Intensity at radial offset r: I(r) = I0 exp(-2 r^2 / w0^2)."""
    i0 = peak_intensity(power_w, waist_m)
    r = np.asarray(radius_m, dtype=float)
    value = i0 * np.exp(-2.0 * r * r / waist_m**2)
    if np.ndim(radius_m) == 0:
        return float(value)
    return value


def photon_flux(intensity_w_m2, wavelength_m: float):
    """Photon flux (photons m^-2 s^-1) carried by an intensity."""
    if wavelength_m <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength_m}")
    i = np.asarray(intensity_w_m2, dtype=float)
    value = i * wavelength_m / (H_PLANCK * C_LIGHT)
    if np.ndim(intensity_w_m2) == 0:
        return float(value)
    return value


def transit_dose(beam: LaserBeam, speed_m_s: float, impact_parameter_m: float = 0.0) -> float:
    """Time-integrated intensity (J/m^2) for a straight perpendicular chord.

    For a chord at distance b from the axis crossed at speed v,
    integral I dt = I0 * w0 * sqrt(pi/2) / v * exp(-2 b^2 / w0^2).
    """
    if speed_m_s <= 0.0:
        raise ValueError(f"speed must be positive, got {speed_m_s}")
    i0 = peak_intensity(beam.power_w, beam.waist_m)
    return (
        i0
        * beam.waist_m
        * math.sqrt(math.pi / 2.0)
        / speed_m_s
        * math.exp(-2.0 * impact_parameter_m**2 / beam.waist_m**2)
    )


def transit_profile(
    beam: LaserBeam,
    speed_m_s: float,
    impact_parameter_m: float = 0.0,
    n_samples: int = 201,
    half_span_waists: float = 3.5,
):
    """Sampled intensity seen by an atom crossing the beam.

    Returns (times_s, intensities_w_m2) on a symmetric grid around the
    point of closest approach, spanning +/- half_span_waists * w0 along
    the chord. The effective 1/e^2 transit duration is 2 w0 / v.
    """
    if speed_m_s <= 0.0:
        raise ValueError(f"speed must be positive, got {speed_m_s}")
    if n_samples < 3:
        raise ValueError("need at least 3 samples")
    half = half_span_waists * beam.waist_m / speed_m_s
    times = np.linspace(-half, half, n_samples)
    radii = np.sqrt((speed_m_s * times) ** 2 + impact_parameter_m**2)
    return times, intensity_at(beam.power_w, beam.waist_m, radii)
