"""Error hierarchy.

Three broad failure categories, each mapped to a distinct CLI exit code:
input validation (bad matrices, unmet preconditions), numerical quality
(convergence failures, order checks that did not lock in), and internal
inconsistency (results that are provably supposed to agree but did not).
"""


class HypoError(Exception):
    """Base class for all package errors."""


class ValidationError(HypoError, ValueError):
    """Input fails a structural or mathematical precondition."""


class DimensionError(ValidationError):
    """Matrix is not square / shapes are incompatible."""


class SymmetryError(ValidationError):
    """Matrix violates a required (anti-)Hermitian structure beyond tolerance."""


class NotPsdError(ValidationError):
    """Hermitian matrix has an eigenvalue below the PSD tolerance."""


class NotSemiDissipativeError(ValidationError):
    """System matrix has an indefinite Hermitian part."""


class EmptyKernelError(ValidationError):
    """A constrained minimization was requested over a trivial kernel."""


class NotInKernelError(ValidationError):
    """Initial vector is not in the kernel required by the expansion order."""


class NoExpansionError(ValidationError):
    """Decay-law quantities requested for a system with infinite index."""


class InsufficientDataError(ValidationError):
    """Fewer usable samples than a fit or window rule requires."""


class NumericalQualityError(HypoError, RuntimeError):
    """A computation finished but failed its own quality gate."""


class ConvergenceError(NumericalQualityError):
    """Iteration budget exhausted before the convergence test held."""


class MonotonicityError(NumericalQualityError):
    """Propagator norms increased beyond the allowed slack."""


class FailedOrderError(NumericalQualityError):
    """Observed remainder does not have the predicted asymptotic order."""


class InconsistencyError(HypoError, RuntimeError):
    """Quantities that must agree exactly (in theory) disagreed."""


class VariantDisagreementError(InconsistencyError):
    """The eight index characterizations did not all return the same value."""

    def __init__(self, message, per_variant=None):
        super().__init__(message)
        self.per_variant = dict(per_variant or {})


class BorderlineSpectrumError(InconsistencyError):
    """Spectral hypocoercivity test and index finiteness disagree near zero."""
