"""Exception hierarchy for sldkit.

Every numerical-contract violation raises a dedicated subclass of
:class:`SldkitError` so callers (and the CLI) can tell configuration
mistakes apart from genuine numerical failures.
"""


class SldkitError(Exception):
    """Base class for all sldkit errors."""


class NonHermitian(SldkitError):
    """Matrix violates the Hermiticity tolerance."""


class NoConvergence(SldkitError):
    """Iterative eigensolver failed to converge."""


class NotNormalized(SldkitError):
    """Probability vector or density matrix is not normalized."""


class DimMismatch(SldkitError):
    """Operands have incompatible dimensions."""


class SupportViolation(SldkitError):
    """Parameter derivative has weight outside the state's support."""


class NormalizationDrift(SldkitError):
    """Tangent vector is inconsistent with state normalization."""


class StepTooLarge(SldkitError):
    """Finite-difference estimates at h and h/2 disagree beyond tolerance."""


class EigTrackFailure(SldkitError):
    """Eigenvector matching across parameter values is ambiguous."""


class OddDimension(SldkitError):
    """Operation requires an even-dimensional Hilbert space."""


class NotAntisymmetric(SldkitError):
    """SLD is not purely imaginary in the reference eigenbasis."""


class DegenerateDenominator(SldkitError):
    """Closed-form expression is evaluated at a pole."""


class NotDescending(SldkitError):
    """Probability vector is not sorted in strictly descending order."""


class DimTooLarge(SldkitError):
    """Requested dense construction exceeds the supported size."""


class StiffnessFailure(SldkitError):
    """Adaptive ODE integration failed."""


class DegenerateGround(SldkitError):
    """Ground state is (nearly) degenerate; perturbation theory invalid."""


class UnderflowWarning(UserWarning):
    """A sector weight underflowed to (near) zero; results may lose classes."""
