"""Downlink efficiencies and pair-generation rates for satellite-to-ground optics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class OpticalParams:
    aperture_radius: float = 0.5  # m
    beam_waist: float = 0.10  # m
    wavelength: float = 810e-9  # m
    eta_zenith: float = 0.8
    source_rate: float = 1e8  # attempts / s
    rate_floor: float = 1.0  # pairs / s

    def __post_init__(self):
        for name in ("aperture_radius", "beam_waist", "wavelength", "source_rate", "rate_floor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0.0 < self.eta_zenith <= 1.0:
            raise ValueError(f"eta_zenith must lie in (0, 1], got {self.eta_zenith}")

    @property
    def rayleigh_range(self) -> float:
        return math.pi * self.beam_waist**2 / self.wavelength


DEFAULT_OPTICS = OpticalParams()


def beam_radius(d, params: OpticalParams = DEFAULT_OPTICS):
    """1/e^2 radius of a diffraction-limited Gaussian beam after distance ``d``."""
    d = np.asarray(d, dtype=float)
    if np.any(d < 0):
        raise ValueError("propagation distance must be non-negative")
    w = params.beam_waist * np.sqrt(1.0 + (d / params.rayleigh_range) ** 2)
    return w if w.ndim else float(w)


def eta_geo(d, params: OpticalParams = DEFAULT_OPTICS):
    """Fraction of a Gaussian beam collected by a circular aperture at distance ``d``."""
    w = np.asarray(beam_radius(d, params))
    eta = -np.expm1(-2.0 * params.aperture_radius**2 / w**2)
    return eta if eta.ndim else float(eta)


def eta_atm(zenith, params: OpticalParams = DEFAULT_OPTICS):
    """Clear-sky transmission ``eta_zenith ** sec(zenith)``."""
    z = np.asarray(zenith, dtype=float)
    if np.any(z < 0) or np.any(z >= math.pi / 2):
        raise ValueError("zenith angle must lie in [0, pi/2)")
    eta = params.eta_zenith ** (1.0 / np.cos(z))
    return eta if eta.ndim else float(eta)


def link_efficiency(d, zenith, params: OpticalParams = DEFAULT_OPTICS):
    return np.asarray(eta_geo(d, params)) * np.asarray(eta_atm(zenith, params))


def pair_rate(eta_i, eta_j, params: OpticalParams = DEFAULT_OPTICS) -> tuple[float, bool]:
    """Expected pair rate for two downlinks and whether it clears the rate floor."""
    rate = params.source_rate * eta_i * eta_j
    return rate, bool(rate >= params.rate_floor)
