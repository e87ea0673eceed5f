"""Physical constants (CODATA 2018) used throughout the package.

Hard-coded in one place so that golden regression values stay reproducible.
"""

HBAR = 1.054571817e-34       # reduced Planck constant, J s
KB = 1.380649e-23            # Boltzmann constant, J/K
E_CHARGE = 1.602176634e-19   # elementary charge, C
ATOMIC_MASS = 1.66053906660e-27   # unified atomic mass unit, kg
ELECTRON_MASS = 9.1093837015e-31  # electron mass, kg
C_LIGHT = 299792458.0        # speed of light, m/s

TWO_PI = 6.283185307179586
