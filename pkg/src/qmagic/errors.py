"""Exception hierarchy."""


class QmagicError(Exception):
    """Base class for all library errors."""


class ValidationError(QmagicError, ValueError):
    """An object violates its structural invariants."""


class DimensionError(QmagicError, ValueError):
    """Dimensions or party counts do not match."""


class NotHermitianError(ValidationError):
    """A matrix expected to be Hermitian is not, within tolerance."""

    def __init__(self, asymmetry: float, tol: float):
        self.asymmetry = asymmetry
        self.tol = tol
        super().__init__(f"matrix is not Hermitian: max |A - A^H| = {asymmetry:.3e} > {tol:.1e}")


class DegenerateObservableError(ValidationError):
    """Observable has a repeated eigenvalue, so it does not fix a basis."""


class NoSignallingError(ValidationError):
    """Joint distributions disagree on a single-party marginal."""


class TotalMismatchError(QmagicError, ValueError):
    """Majorization requested between vectors of different totals."""


class PoolTooLargeError(QmagicError):
    """Projector pool exceeds the exhaustive-enumeration limit."""


class SolverError(QmagicError, RuntimeError):
    """The LP solver could not produce a verified answer."""


class NonMonotoneError(QmagicError):
    """A threshold scan found the criterion is not monotone in the parameter."""
