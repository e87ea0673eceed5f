"""Gaussian offset cooling beam: geometry, scattering rate, recoil sampling.

The beam propagates along +x, offset from the trap center along y.  The ion
is treated as a two-level scatterer; detuning is positive below resonance
(red), so absorption kicks push the ion along +x.
"""

import math
from dataclasses import dataclass

from .constants import C_LIGHT, HBAR, TWO_PI
from .errors import ValidationError, ZeroGradient

# Effective linewidth of the 397 nm cooling transition in 40Ca+.  This is a
# knob: every numeric cooling result scales with it.
DEFAULT_LINEWIDTH = TWO_PI * 21.6e6


def resonant_cross_section(wavelength):
    """Two-level cross-section lambda^2/(2 pi) for linear polarization
    addressing both sigma transitions."""
    return wavelength ** 2 / TWO_PI


@dataclass(frozen=True)
class LaserConfig:
    wavelength: float            # m
    power: float                 # W
    waist: float                 # m (1/e^2 intensity radius)
    offset: float = 0.0          # m, beam center displacement along y
    detuning: float = DEFAULT_LINEWIDTH / 2   # rad/s, positive = red
    linewidth: float = DEFAULT_LINEWIDTH      # rad/s
    cross_section: float = None  # m^2, defaults to lambda^2/(2 pi)

    def __post_init__(self):
        if min(self.wavelength, self.power, self.waist, self.linewidth) <= 0:
            raise ValidationError(
                "wavelength, power, waist and linewidth must be positive")
        if self.cross_section is None:
            object.__setattr__(self, "cross_section",
                               resonant_cross_section(self.wavelength))
        if self.cross_section <= 0:
            raise ValidationError("cross-section must be positive")

    @property
    def wavenumber(self):
        return TWO_PI / self.wavelength

    @property
    def angular_frequency(self):
        return TWO_PI * C_LIGHT / self.wavelength

    def recoil_velocity(self, ion):
        """Single-photon recoil speed hbar*k/M."""
        return HBAR * self.wavenumber / ion.mass


def intensity_at(y, laser):
    """Beam intensity at transverse position y (W/m^2)."""
    peak = 2.0 * laser.power / (math.pi * laser.waist ** 2)
    arg = y - laser.offset
    return peak * math.exp(-2.0 * arg * arg / (laser.waist * laser.waist))


def gradient_parameter(laser):
    """Gradient length Y0 of the linearized profile I(y) = I1 (1 + y/Y0).

    Evaluated at the trap center: Y0 = I(0) / (dI/dy)(0) = w0^2 / (4 y0).
    Maximal gradient (smallest Y0 for given waist) occurs at y0 = w0/2,
    where Y0 = w0/2.
    """
    if laser.offset == 0:
        raise ZeroGradient("beam centered on trap: dI/dy = 0 at the ion")
    return laser.waist ** 2 / (4.0 * laser.offset)


def scattering_rate(state, laser):
    """Saturated, Doppler-shifted photon scattering rate (1/s)."""
    flux = intensity_at(state.y, laser) * laser.cross_section / (
        HBAR * laser.angular_frequency)
    hg = 0.5 * laser.linewidth
    dop = laser.detuning + state.vx * laser.wavenumber
    return flux * hg * hg / (hg * hg + flux * hg + dop * dop)


def sample_photon_count(rate, dt, rng):
    """Number of photons scattered in dt: Poisson with mean rate*dt."""
    if rate < 0:
        raise ValidationError("scattering rate must be non-negative")
    if dt <= 0:
        raise ValidationError("time step must be positive")
    return rng.poisson(rate * dt)


def sample_recoil_kick(n, laser, ion, rng):
    """Velocity change from n absorption/re-emission cycles in one step.

    Absorption is deterministic along +x; the n re-emission wavevectors are
    drawn uniformly on the sphere and summed, with the axial (z) component
    discarded since only the radial plane is simulated.
    """
    if n < 0:
        raise ValidationError("photon count must be non-negative")
    recoil = laser.recoil_velocity(ion)
    kx = 0.0
    ky = 0.0
    for _ in range(n):
        ux, uy, _uz = rng.unit_sphere()
        kx += ux
        ky += uy
    return recoil * (n + kx), recoil * ky
