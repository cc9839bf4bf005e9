"""Exception hierarchy shared by all chlattice modules."""


class ChLatticeError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateLattice(ChLatticeError):
    """Spanning vectors are (numerically) linearly dependent."""


class CardinalityOutOfModel(ChLatticeError):
    """The minimal shell has a cardinality the reduction does not cover.

    The shell itself is still available on the ``critical_set`` attribute.
    """

    def __init__(self, message, critical_set=None):
        super().__init__(message)
        self.critical_set = critical_set


class WrongMultiplicity(ChLatticeError):
    """An operation restricted to one multiplicity was called with another."""


class InvalidConcentration(ChLatticeError):
    """Mean concentration outside (0, 1)."""


class NonpositiveGamma3(ChLatticeError):
    """Quartic free-energy coefficient came out non-positive."""


class ZeroMode(ChLatticeError):
    """The (0,0) wave index was used where the mean-zero constraint forbids it."""


class PesViolation(ChLatticeError):
    """Exchange of stabilities fails at the supposed threshold."""

    def __init__(self, message, index=None, margin=None):
        super().__init__(message)
        self.index = index
        self.margin = margin


class ResonantDenominator(ChLatticeError):
    """A non-resonant closed form was evaluated on a (near-)resonant geometry."""


class QuadratureUnderResolved(ChLatticeError):
    """Doubling the quadrature grid still changes the result."""


class UnsupportedCase(ChLatticeError):
    """No closed-form treatment exists for this shell/parameter combination."""


class DegenerateCoefficients(ChLatticeError):
    """A fixed-point formula divides by a vanishing coefficient combination."""


class PreTransition(ChLatticeError):
    """Requested post-transition analysis below the critical threshold."""


class BlowUp(ChLatticeError):
    """Trajectory exceeded the overflow guard."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class NotConverged(ChLatticeError):
    """Simulation did not reach a quasi-steady state."""


class UnderResolved(ChLatticeError):
    """Raster resolution below the Nyquist bound of the field."""


class IoFailure(ChLatticeError):
    """File export failed."""


class ConfigError(ChLatticeError):
    """Run configuration is invalid or contains unknown keys."""
