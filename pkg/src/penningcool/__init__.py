"""Laser cooling of a single ion's radial motion in a Penning trap.

Subpackages cover the static trap relations, the stochastic semiclassical
Doppler-cooling simulation with axialization mode coupling, closed-form
cooling-limit models, sideband-spectrum synthesis and fitting for
thermometry, and a rate-equation sideband-cooling sequencer.
"""

__version__ = "0.1.0"

from .trap import (  # noqa: F401
    CA40,
    IonSpecies,
    ModeAmplitudes,
    ModeFrequencies,
    PhaseState,
    PhononNumbers,
    TrapConfig,
    compute_frequencies,
)
