"""Typed error taxonomy shared across the package."""


class CycleCensusError(Exception):
    """Base class for all package-specific errors."""


class InvalidGeometry(CycleCensusError):
    """A radius or region parameter is outside its admissible range."""


class OrderViolation(CycleCensusError):
    """Monotone inputs arrived out of order (e.g. log-sups with M1 < M2)."""


class ZeroPolynomial(CycleCensusError):
    """All polynomial coefficients vanish; roots are undefined."""


class NonConvergence(CycleCensusError):
    """An adaptive refinement hit its resolution cap without resolving."""


class PersistentBoundaryZero(CycleCensusError):
    """Every jittered contour radius met a (near-)zero of the function."""


class DegenerateSlice(CycleCensusError):
    """The family member is identically zero; the requested quantity is undefined."""


class EmptyInput(CycleCensusError):
    """An empty collection was passed where at least one element is required."""


class DegreeMismatch(CycleCensusError):
    """Objects with incompatible polynomial degrees were combined."""


class ZeroField(CycleCensusError):
    """The vector field has a zero coefficient vector where that is not allowed."""


class NoContraction(CycleCensusError):
    """Successive fixed-point differences stopped shrinking; inputs are outside
    the contraction regime."""


class StepUnderflow(CycleCensusError):
    """The adaptive integrator's step size collapsed below its floor."""


class SolverFailure(CycleCensusError):
    """A trajectory solve produced non-finite values or an internal failure."""


class DegenerateVariance(CycleCensusError):
    """A calibrated count variance is numerically zero; the normalized sum is
    undefined."""


class RadiusViolation(CycleCensusError):
    """A requested counting radius reaches beyond the guaranteed analyticity
    radius."""


class InadmissibleField(CycleCensusError):
    """The field fails the solver-regime guard (denominator too close to zero)."""


class SeparationCheckFailed(CycleCensusError):
    """The family sequence fails the separation premises required for the
    normalized-sum harness."""


class AllSamplesFailed(CycleCensusError):
    """Every sample in an ensemble run was flagged as failed."""
