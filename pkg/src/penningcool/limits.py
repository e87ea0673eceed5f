"""Closed-form Doppler cooling limits and mode-coupling rate.

The two radial modes have opposite sign structure in their Doppler-limit
denominators, so for a given beam gradient at most a window of mode
frequencies can be cooled simultaneously.  An unstable mode (negative
denominator) is reported as the first-class value UNSTABLE (nan) rather
than an exception so sweep tables can plot asymptotes; a denominator of
exactly zero returns +inf.
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR, KB
from .errors import ValidationError

UNSTABLE = math.nan

# Optional correction for recoil from an axial cooling beam with a 1:1
# scattering ratio; off by default.
AXIAL_BEAM_CORRECTION = 1.3


def is_unstable(value):
    return isinstance(value, float) and math.isnan(value)


@dataclass(frozen=True)
class DopplerLimitInputs:
    gradient_length: float   # m, linearized beam profile parameter Y0
    detuning: float          # rad/s, positive below resonance
    linewidth: float         # rad/s
    wavenumber: float        # 1/m
    omega_plus: float        # rad/s
    omega_minus: float       # rad/s

    def __post_init__(self):
        for v in (self.gradient_length, self.detuning, self.linewidth,
                  self.wavenumber, self.omega_plus, self.omega_minus):
            if v <= 0:
                raise ValidationError("all Doppler-limit inputs must be positive")


def _limit(inputs, omega, sign, axial_correction):
    lw = (0.5 * inputs.linewidth) ** 2 + inputs.detuning ** 2
    yk = inputs.gradient_length * inputs.wavenumber
    numer = 5.0 * yk * lw
    denom = 6.0 * sign * (2.0 * inputs.detuning * omega * yk - lw)
    if denom < 0:
        return UNSTABLE
    if denom == 0:
        return math.inf
    n = numer / denom
    return n * AXIAL_BEAM_CORRECTION if axial_correction else n


def doppler_limit_cyclotron(inputs, axial_correction=False):
    """Doppler-limit mean phonon number of the modified cyclotron mode."""
    return _limit(inputs, inputs.omega_plus, +1.0, axial_correction)


def doppler_limit_magnetron(inputs, axial_correction=False):
    """Doppler-limit mean phonon number of the magnetron mode."""
    return _limit(inputs, inputs.omega_minus, -1.0, axial_correction)


def simultaneous_cooling_window(gradient_length, detuning, linewidth,
                                wavenumber):
    """Critical frequency c* (rad/s) separating the two mode regimes.

    Simultaneous cooling of both radial modes requires
    omega_minus < c* < omega_plus.
    """
    for v in (gradient_length, detuning, linewidth, wavenumber):
        if v <= 0:
            raise ValidationError("all inputs must be positive")
    lw = (0.5 * linewidth) ** 2 + detuning ** 2
    return lw / (2.0 * wavenumber * gradient_length * detuning)


def axialization_coupling_rate(v_ax, ring_radius, ion, omega_1):
    """Sinusoidal amplitude-exchange rate of the resonant quadrupolar drive."""
    if v_ax < 0 or ring_radius <= 0 or omega_1 <= 0:
        raise ValidationError("inputs must be positive (v_ax >= 0)")
    return ion.charge * v_ax / (4.0 * ion.mass * ring_radius ** 2 * omega_1)


def doppler_temperature_limit(linewidth):
    """Doppler temperature for isotropic emission, hbar*Gamma/(3 kB)."""
    if linewidth <= 0:
        raise ValidationError("linewidth must be positive")
    return HBAR * linewidth / (3.0 * KB)


def limit_curve(omega_c, omega_minus_axis, gradient_length, detuning,
                linewidth, wavenumber, axial_correction=False):
    """Doppler limits of both modes along a magnetron-frequency axis.

    omega_plus follows from the fixed true cyclotron frequency,
    omega_plus = omega_c - omega_minus.  Returns an array of rows
    (nu_minus_hz, nbar_plus, nbar_minus, stable_flag).
    """
    rows = []
    for wm in np.atleast_1d(omega_minus_axis):
        inputs = DopplerLimitInputs(
            gradient_length=gradient_length, detuning=detuning,
            linewidth=linewidth, wavenumber=wavenumber,
            omega_plus=omega_c - wm, omega_minus=wm)
        np_ = doppler_limit_cyclotron(inputs, axial_correction)
        nm = doppler_limit_magnetron(inputs, axial_correction)
        stable = not (is_unstable(np_) or is_unstable(nm))
        rows.append((wm / (2 * math.pi), np_, nm, stable))
    return rows
