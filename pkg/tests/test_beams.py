import math

import numpy as np
import pytest
from scipy import integrate

from ionload import beams
from ionload.constants import C_LIGHT, H_PLANCK


def test_peak_intensity_value():
    # 1.08 mW in a 34 um waist: 2P/(pi w^2) ~ 5.95e5 W/m^2
    i0 = beams.peak_intensity(1.08e-3, 34e-6)
    assert i0 == pytest.approx(2 * 1.08e-3 / (math.pi * 34e-6**2), rel=1e-15)
    assert i0 == pytest.approx(5.948e5, rel=1e-3)


def test_peak_intensity_scaling():
    assert beams.peak_intensity(2.0, 1e-3) == 2 * beams.peak_intensity(1.0, 1e-3)
    assert beams.peak_intensity(1.0, 2e-3) == pytest.approx(
        beams.peak_intensity(1.0, 1e-3) / 4, rel=1e-15
    )
    assert beams.peak_intensity(0.0, 1e-3) == 0.0


def test_power_recovered_by_radial_integral():
    # integral of I(r) 2 pi r dr over the plane returns the total power
    p, w = 2.5e-6, 35e-6
    total, _ = integrate.quad(
        lambda r: beams.intensity_at(p, w, r) * 2 * math.pi * r, 0, 10 * w
    )
    assert total == pytest.approx(p, rel=1e-9)


def test_intensity_at_e2_radius():
    p, w = 1e-3, 34e-6
    assert beams.intensity_at(p, w, w) / beams.peak_intensity(p, w) == pytest.approx(
        math.exp(-2), rel=1e-12
    )
    arr = beams.intensity_at(p, w, np.array([0.0, w, 2 * w]))
    assert arr.shape == (3,)
    assert arr[0] == beams.peak_intensity(p, w)


def test_photon_flux_value():
    # 1 W/m^2 of 554 nm light carries lambda/(h c) photons per m^2 s
    val = beams.photon_flux(1.0, 554e-9)
    assert val == pytest.approx(554e-9 / (H_PLANCK * C_LIGHT), rel=1e-15)
    # operating point: 1.08 mW at 389.74 nm in a 34 um waist -> ~1.17e24
    flux = beams.photon_flux(beams.peak_intensity(1.08e-3, 34e-6), 389.74e-9)
    assert flux == pytest.approx(1.167e24, rel=1e-3)


def test_photon_flux_array():
    out = beams.photon_flux(np.array([0.0, 2.0]), 500e-9)
    assert out[0] == 0.0
    assert out[1] == pytest.approx(2 * beams.photon_flux(1.0, 500e-9), rel=1e-15)


def test_beam_validation():
    with pytest.raises(ValueError):
        beams.LaserBeam(-1e-3, 34e-6, 390e-9)
    with pytest.raises(ValueError):
        beams.LaserBeam(1e-3, 0.0, 390e-9)
    with pytest.raises(ValueError):
        beams.LaserBeam(1e-3, 34e-6, 0.0)
    with pytest.raises(ValueError):
        beams.peak_intensity(1.0, -1e-6)
    with pytest.raises(ValueError):
        beams.photon_flux(1.0, 0.0)


def test_beam_properties_delegate():
    b = beams.LaserBeam(1.08e-3, 34e-6, 389.74e-9)
    assert b.peak_intensity_w_m2 == beams.peak_intensity(1.08e-3, 34e-6)
    assert b.peak_photon_flux == beams.photon_flux(b.peak_intensity_w_m2, 389.74e-9)


def test_transit_dose_closed_form_matches_quadrature():
    b = beams.LaserBeam(1.08e-3, 34e-6, 389.74e-9)
    v = 1100.0
    for impact in (0.0, 20e-6, 45e-6):
        num, _ = integrate.quad(
            lambda t: beams.intensity_at(
                b.power_w, b.waist_m, math.hypot(v * t, impact)
            ),
            -10 * b.waist_m / v,
            10 * b.waist_m / v,
            epsabs=0.0,
            epsrel=1e-11,
        )
        closed = beams.transit_dose(b, v, impact)
        assert closed == pytest.approx(num, rel=1e-9)


def test_transit_dose_scalings():
    b = beams.LaserBeam(1e-3, 34e-6, 390e-9)
    base = beams.transit_dose(b, 1000.0)
    # halving the speed doubles the dose
    assert beams.transit_dose(b, 500.0) == pytest.approx(2 * base, rel=1e-12)
    # an off-axis chord picks up the Gaussian impact factor
    assert beams.transit_dose(b, 1000.0, b.waist_m) == pytest.approx(
        base * math.exp(-2), rel=1e-12
    )
    with pytest.raises(ValueError):
        beams.transit_dose(b, 0.0)


def test_transit_profile_shape():
    b = beams.LaserBeam(1e-3, 34e-6, 390e-9)
    t, i = beams.transit_profile(b, 1200.0, n_samples=401)
    assert t.shape == i.shape == (401,)
    # symmetric grid, peak in the middle
    assert t[0] == -t[-1]
    assert i.argmax() == 200
    assert i[200] == pytest.approx(b.peak_intensity_w_m2, rel=1e-12)
    # trapezoid over the profile approaches the closed-form dose
    assert np.trapezoid(i, t) == pytest.approx(beams.transit_dose(b, 1200.0), rel=1e-4)


def test_transit_profile_offset_peak():
    b = beams.LaserBeam(1e-3, 34e-6, 390e-9)
    _, on = beams.transit_profile(b, 1200.0)
    _, off = beams.transit_profile(b, 1200.0, impact_parameter_m=34e-6)
    assert off.max() == pytest.approx(on.max() * math.exp(-2), rel=1e-9)


def test_transit_profile_validation():
    b = beams.LaserBeam(1e-3, 34e-6, 390e-9)
    with pytest.raises(ValueError):
        beams.transit_profile(b, -5.0)
    with pytest.raises(ValueError):
        beams.transit_profile(b, 1200.0, n_samples=2)
