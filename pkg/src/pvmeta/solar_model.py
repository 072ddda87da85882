"""PVWatts-style generation model for a fixed-tilt array.

Angles are degrees at every public interface. Functions accept scalars or
numpy arrays and broadcast like ufuncs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

REFERENCE_IRRADIANCE = 1000.0  # W/m^2, the rating condition for nameplate power
DEFAULT_ALBEDO = 0.2


@dataclass(frozen=True)
class SolarPosition:
    zenith_deg: float
    azimuth_deg: float

    def __post_init__(self):
        if not 0.0 <= self.zenith_deg < 180.0:
            raise ValueError(f"solar zenith {self.zenith_deg} outside [0, 180)")
        if not 0.0 <= self.azimuth_deg < 360.0:
            raise ValueError(f"solar azimuth {self.azimuth_deg} outside [0, 360)")


@dataclass(frozen=True)
class SurfaceOrientation:
    """Panel orientation; azimuth measured clockwise from north."""

    azimuth_deg: float
    tilt_deg: float

    def __post_init__(self):
        if not 0.0 <= self.azimuth_deg < 360.0:
            raise ValueError(f"surface azimuth {self.azimuth_deg} outside [0, 360)")
        if not 0.0 <= self.tilt_deg <= 90.0:
            raise ValueError(f"surface tilt {self.tilt_deg} outside [0, 90]")


@dataclass(frozen=True)
class IrradianceComponents:
    normal: float
    sky_diffuse: float
    ground_diffuse: float

    def __post_init__(self):
        if min(self.normal, self.sky_diffuse, self.ground_diffuse) < 0:
            raise ValueError("irradiance components must be nonnegative")


@dataclass(frozen=True)
class PanelParams:
    nameplate_w: float
    temp_coeff_per_c: float = -0.004
    ref_temp_c: float = 25.0
    derate: float = 0.96

    def __post_init__(self):
        if not self.nameplate_w > 0:
            raise ValueError("nameplate_w must be positive")
        if not 0.0 < self.derate <= 1.0:
            raise ValueError("derate must lie in (0, 1]")


def incidence_angle(solar_zenith, solar_azimuth, surface_azimuth, surface_tilt):
    """Angle between the sun ray and the panel normal, in degrees.

    Mathematically ``arccos(sin zs cos(g - gs) sin b + cos zs cos b)``. The
    angle is recovered with ``atan2(|n x s|, n . s)`` instead, which equals the
    clamped arccos but keeps full precision near 0 and 180 degrees.
    """
    zs = np.radians(solar_zenith)
    d = np.radians(np.subtract(solar_azimuth, surface_azimuth))
    b = np.radians(surface_tilt)
    sin_zs, cos_zs = np.sin(zs), np.cos(zs)
    sin_b, cos_b = np.sin(b), np.cos(b)
    cos_d = np.cos(d)
    dot = sin_zs * cos_d * sin_b + cos_zs * cos_b
    # panel normal along +y after rotating by the surface azimuth
    cross_x = sin_b * cos_zs - cos_b * sin_zs * cos_d
    cross_yz = sin_zs * np.sin(d)
    theta = np.degrees(np.arctan2(np.hypot(cross_x, cross_yz), dot))
    # a flat panel sees the zenith angle exactly, so every azimuth ties bit-for-bit
    out = np.where(np.asarray(surface_tilt) == 0, np.asarray(solar_zenith, dtype=float), theta)
    return float(out) if np.ndim(out) == 0 else out


def step_attenuation(theta_deg):
    """Default glass model: full transmission in front of the panel, none behind."""
    return np.where(np.asarray(theta_deg) < 90.0, 1.0, 0.0)


def ashrae_attenuation(theta_deg, b0: float = 0.05):
    """ASHRAE incidence angle modifier ``1 - b0 (1/cos(theta) - 1)``, clipped to [0, 1]."""
    theta = np.asarray(theta_deg, dtype=float)
    front = theta < 90.0
    cos_t = np.cos(np.radians(np.where(front, theta, 0.0)))
    with np.errstate(divide="ignore"):
        iam = 1.0 - b0 * (1.0 / cos_t - 1.0)
    return np.where(front, np.clip(iam, 0.0, 1.0), 0.0)


ATTENUATION_MODELS: dict[str, Callable] = {
    "step": step_attenuation,
    "ashrae": ashrae_attenuation,
}


def attenuation_factor(theta_deg, model: str | Callable = "step"):
    fn = ATTENUATION_MODELS[model] if isinstance(model, str) else model
    out = fn(theta_deg)
    return float(out) if np.ndim(out) == 0 else out


def plane_of_array_irradiance(theta_deg, normal, sky_diffuse, ground_diffuse,
                              attenuation: str | Callable = "step"):
    """Transmitted POA irradiance; the beam term never goes negative."""
    theta = np.asarray(theta_deg, dtype=float)
    f = attenuation_factor(theta, attenuation)
    beam = np.maximum(f * np.cos(np.radians(theta)) * normal, 0.0)
    out = beam + sky_diffuse + ground_diffuse
    return float(out) if np.ndim(out) == 0 else out


def isotropic_components(ghi, dhi, surface_tilt, albedo: float = DEFAULT_ALBEDO):
    """Sky and ground diffuse on the tilted plane under an isotropic sky.

    Returns ``(sky_diffuse, ground_diffuse)``.
    """
    cos_b = np.cos(np.radians(surface_tilt))
    sky = np.multiply(dhi, (1.0 + cos_b) / 2.0)
    ground = np.multiply(ghi, albedo * (1.0 - cos_b) / 2.0)
    return sky, ground


def poa_from_horizontal(solar_zenith, solar_azimuth, ghi, dni, dhi,
                        surface_azimuth, surface_tilt,
                        albedo: float = DEFAULT_ALBEDO,
                        attenuation: str | Callable = "step"):
    """Incidence angle, isotropic transposition and POA irradiance in one call."""
    theta = incidence_angle(solar_zenith, solar_azimuth, surface_azimuth, surface_tilt)
    sky, ground = isotropic_components(ghi, dhi, surface_tilt, albedo)
    return plane_of_array_irradiance(theta, dni, sky, ground, attenuation)


def ac_power(poa, cell_temp_c, params: PanelParams):
    """AC output in watts.

    POA irradiance is expressed relative to 1000 W/m^2, so ``nameplate_w`` is
    produced exactly at reference irradiance and temperature with derate 1.
    """
    temp_factor = 1.0 + params.temp_coeff_per_c * (np.subtract(cell_temp_c, params.ref_temp_c))
    p = params.derate * params.nameplate_w * temp_factor * (np.divide(poa, REFERENCE_IRRADIANCE))
    out = np.maximum(p, 0.0)
    return float(out) if np.ndim(out) == 0 else out
