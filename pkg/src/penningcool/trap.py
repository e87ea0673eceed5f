"""Trap and ion parameters and the closed-form relations between them.

Conventions: SI units throughout; all frequencies stored internally as
angular frequencies (rad/s).  User-facing constructors that take ordinary
frequencies are suffixed accordingly and convert at the boundary.
"""

import math
from dataclasses import dataclass

from .constants import ATOMIC_MASS, E_CHARGE, ELECTRON_MASS, HBAR, TWO_PI
from .errors import DegenerateFrequencies, StabilityViolation, ValidationError


@dataclass(frozen=True)
class IonSpecies:
    mass: float        # kg
    charge: float      # C
    label: str = ""

    def __post_init__(self):
        if self.mass <= 0:
            raise ValidationError("ion mass must be positive")
        if self.charge == 0:
            raise ValidationError("ion charge must be nonzero")


# Singly charged calcium-40: neutral atomic mass minus one electron.
CA40 = IonSpecies(mass=39.9626 * ATOMIC_MASS - ELECTRON_MASS,
                  charge=E_CHARGE, label="40Ca+")


@dataclass(frozen=True)
class PhaseState:
    """Instantaneous radial phase-space point."""
    t: float = 0.0
    x: float = 0.0
    y: float = 0.0
    vx: float = 0.0
    vy: float = 0.0

    def __post_init__(self):
        for v in (self.t, self.x, self.y, self.vx, self.vy):
            if not math.isfinite(v):
                raise ValidationError("phase-space coordinates must be finite")


@dataclass(frozen=True)
class TrapConfig:
    magnetic_field: float   # T
    trap_voltage: float     # V
    trap_dimension: float   # m, characteristic electrode dimension
    ring_radius: float      # m, effective radius of the segmented ring
    ion: IonSpecies = CA40

    def __post_init__(self):
        if self.magnetic_field <= 0:
            raise ValidationError("magnetic field must be positive")
        if self.trap_dimension <= 0 or self.ring_radius <= 0:
            raise ValidationError("trap dimensions must be positive")
        if self.trap_voltage * self.ion.charge < 0:
            raise ValidationError("trap voltage has deconfining sign for this ion")
        if self.trap_voltage > stability_voltage_limit(self) * (1 + 1e-12):
            raise StabilityViolation(
                f"trap voltage {self.trap_voltage} V exceeds the stability "
                f"limit {stability_voltage_limit(self):.6g} V")

    @classmethod
    def from_frequencies_hz(cls, nu_c, nu_z, ion=CA40,
                            trap_dimension=0.01, ring_radius=0.01):
        """Build a trap directly from measured ordinary frequencies (Hz).

        Back-solves the field and voltage that reproduce the given true
        cyclotron and axial frequencies for the chosen geometry.
        """
        omega_c = TWO_PI * nu_c
        omega_z = TWO_PI * nu_z
        b = ion.mass * omega_c / ion.charge
        v0 = ion.mass * omega_z ** 2 * trap_dimension ** 2 / (4 * ion.charge)
        return cls(magnetic_field=b, trap_voltage=v0,
                   trap_dimension=trap_dimension, ring_radius=ring_radius,
                   ion=ion)


@dataclass(frozen=True)
class ModeFrequencies:
    omega_z: float
    omega_c: float
    omega_1: float
    omega_plus: float
    omega_minus: float

    @classmethod
    def from_cyclotron_axial(cls, omega_c, omega_z):
        disc = omega_c ** 2 - 2 * omega_z ** 2
        if disc < 0:
            raise StabilityViolation(
                "2*omega_z^2 > omega_c^2: radial frequencies would be complex")
        omega_1 = 0.5 * math.sqrt(disc)
        return cls(omega_z=omega_z, omega_c=omega_c, omega_1=omega_1,
                   omega_plus=0.5 * omega_c + omega_1,
                   omega_minus=0.5 * omega_c - omega_1)

    def ground_state_radius(self, ion):
        """Length scale of the radial ground-state wave packet."""
        if self.omega_1 <= 0:
            raise DegenerateFrequencies("omega_1 = 0")
        return math.sqrt(HBAR / (ion.mass * self.omega_1))


@dataclass(frozen=True)
class ModeAmplitudes:
    """Cycle-averaged squared amplitudes of the two radial modes."""
    r_plus_sq: float   # m^2
    r_minus_sq: float  # m^2

    def __post_init__(self):
        if self.r_plus_sq < 0 or self.r_minus_sq < 0:
            raise ValidationError("squared amplitudes must be non-negative")


@dataclass(frozen=True)
class PhononNumbers:
    n_plus: float
    n_minus: float

    def __post_init__(self):
        if self.n_plus < 0 or self.n_minus < 0:
            raise ValidationError("phonon numbers must be non-negative")


def stability_voltage_limit(trap):
    """Largest confining voltage for which the radial motion stays bounded."""
    return (trap.ion.charge * trap.trap_dimension ** 2
            * trap.magnetic_field ** 2 / (8 * trap.ion.mass))


def compute_frequencies(trap):
    """Derive the five mode frequencies from static trap parameters."""
    m, q = trap.ion.mass, trap.ion.charge
    omega_z = math.sqrt(4 * q * trap.trap_voltage
                        / (m * trap.trap_dimension ** 2))
    omega_c = q * trap.magnetic_field / m
    return ModeFrequencies.from_cyclotron_axial(omega_c, omega_z)


def total_energy(r_z_sq, r_plus_sq, r_minus_sq, freqs, ion):
    """Cycle-averaged total (kinetic + potential) energy of the three modes.

    The magnetron contribution enters with a negative sign: shrinking the
    magnetron orbit raises the total energy.
    """
    if min(r_z_sq, r_plus_sq, r_minus_sq) < 0:
        raise ValidationError("squared amplitudes must be non-negative")
    return 0.5 * ion.mass * (
        r_z_sq * freqs.omega_z ** 2
        + 2 * r_plus_sq * freqs.omega_plus * freqs.omega_1
        - 2 * r_minus_sq * freqs.omega_minus * freqs.omega_1)


def cycle_averaged_amplitudes(state, freqs):
    """Project a phase-space point onto the two circular radial modes.

    Exact (time-independent) along any solution of the unperturbed radial
    equations of motion.
    """
    if freqs.omega_1 <= 0:
        raise DegenerateFrequencies("omega_1 = 0: modes are degenerate")
    inv = 1.0 / (4.0 * freqs.omega_1 ** 2)
    rp2 = ((freqs.omega_minus * state.x + state.vy) ** 2
           + (freqs.omega_minus * state.y - state.vx) ** 2) * inv
    rm2 = ((freqs.omega_plus * state.x + state.vy) ** 2
           + (freqs.omega_plus * state.y - state.vx) ** 2) * inv
    return ModeAmplitudes(r_plus_sq=rp2, r_minus_sq=rm2)


def phonons_from_amplitudes(amps, freqs, ion):
    """Mean phonon numbers from squared amplitudes, zero-point energy neglected.

    Note the deliberate convention gap with amplitudes_from_phonons: mapping
    a state synthesized from n quanta back through this function returns
    n + 1/2.
    """
    scale = ion.mass * freqs.omega_1 / HBAR
    return PhononNumbers(n_plus=amps.r_plus_sq * scale,
                         n_minus=amps.r_minus_sq * scale)


def amplitudes_from_phonons(phonons, freqs, ion):
    """Squared amplitudes of Fock states, including the zero-point term."""
    r0_sq = HBAR / (ion.mass * freqs.omega_1)
    return ModeAmplitudes(r_plus_sq=r0_sq * (phonons.n_plus + 0.5),
                          r_minus_sq=r0_sq * (phonons.n_minus + 0.5))
