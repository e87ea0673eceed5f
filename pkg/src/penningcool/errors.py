"""Exception hierarchy for the package."""


class PenningCoolError(Exception):
    """Base class for all package-specific errors."""


class StabilityViolation(PenningCoolError):
    """Trap parameters outside the stable region (2*omega_z^2 > omega_c^2)."""


class DegenerateFrequencies(PenningCoolError):
    """omega_1 = 0: the two radial modes are degenerate and the
    cycle-averaged amplitude decomposition is singular."""


class ZeroGradient(PenningCoolError):
    """Beam centered on the trap (y0 = 0): no intensity gradient at the ion."""


class StepRejected(PenningCoolError):
    """Integrator produced a non-finite state."""


class Diverged(PenningCoolError):
    """Trajectory exceeded the deconfinement bound."""


class WindowEmpty(PenningCoolError):
    """Averaging window contains no recorded samples."""


class TruncationInsufficient(PenningCoolError):
    """Thermal weight beyond the Fock cutoff exceeds the allowed tail."""


class FitFailed(PenningCoolError):
    """Fit could not constrain the requested parameters."""


class NotConverged(FitFailed):
    """Optimizer did not converge within the configured restarts."""


class CutoffExceeded(PenningCoolError):
    """Fock population leaked past the configured cutoff."""


class ParseError(PenningCoolError):
    """Malformed configuration text."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(PenningCoolError):
    """Configuration violates a documented invariant."""
