"""Exception types shared across the package."""


class JumpGUEError(Exception):
    """Base class for all package errors."""


class StepUnderflow(JumpGUEError):
    """Finite-difference step too small for the working precision."""


class PrecisionExhausted(JumpGUEError):
    """Results did not stabilise before the precision ceiling was reached."""


class NotPositiveDefinite(JumpGUEError):
    """A pivot of the Hankel factorization was not positive."""


class QuadratureNotConverged(JumpGUEError):
    """Panel refinement stalled before reaching the requested tolerance."""


class PoleHit(JumpGUEError):
    """Ladder coefficients evaluated at a jump location."""


class DegenerateResidue(JumpGUEError):
    """A residue needed as a divisor vanished (or all residues vanish)."""


class OrderViolation(JumpGUEError):
    """Scaled endpoints requested with t1 >= t2."""


class RateMismatch(JumpGUEError):
    """Observed convergence exponent too far from the asymptotic prediction."""


class StepCollapse(JumpGUEError):
    """Adaptive integrator step size underflowed; ``xi`` is where it stalled (None if unknown)."""

    def __init__(self, message, xi=None):
        super().__init__(message)
        self.xi = xi


class ConfigInvalid(JumpGUEError):
    """Invalid parameters or run configuration."""
