"""Exception hierarchy.

Every error raised on purpose by the package derives from :class:`CMVError`.
The two intermediate classes map onto the CLI exit codes: validation
problems (bad input) and numerical problems (the input was fine but a
computation could not be carried out reliably).
"""


class CMVError(Exception):
    """Base class for all package errors."""


class ValidationError(CMVError, ValueError):
    """Input violates a documented invariant."""


class NumericalError(CMVError, ArithmeticError):
    """A computation failed or lost too much accuracy."""


class SingularMatrixError(NumericalError):
    """Factorization of a (numerically) singular matrix was requested."""


class ConvergenceError(NumericalError):
    """An iteration did not converge within its sweep budget."""

    def __init__(self, msg, sweeps=None, residuals=None):
        super().__init__(msg)
        self.sweeps = sweeps
        self.residuals = residuals


class ShapeError(ValidationError):
    """Matrix does not have CMV shape."""

    def __init__(self, msg, report=None):
        super().__init__(msg)
        self.report = report


class DecoupledError(NumericalError):
    """An exposed entry is numerically zero; the matrix is a direct sum."""

    def __init__(self, msg, index=None):
        super().__init__(msg)
        self.index = index


class NotCyclicError(NumericalError):
    """``e_1`` is not a cyclic vector for the matrix."""

    def __init__(self, msg, step=None):
        super().__init__(msg)
        self.step = step


class DegenerateSpectrumError(NumericalError):
    """Two eigenvalues coincide within the gap tolerance."""


class RankError(NumericalError):
    """A measure has fewer effective atoms than requested."""


class UnderflowError(NumericalError):
    """A determinant or mass fell below the representable range."""


class OrderingError(ValidationError):
    """A formula that needs distinct ``F``-values received a degenerate ordering."""


class PoleError(NumericalError):
    """Argument too close to a pole of the shift kernel."""


class StepSizeError(NumericalError):
    """An integrator drifted off the CMV manifold; more steps are needed."""


class FormatError(CMVError):
    """A file could not be read, written or parsed (CLI exit code 4)."""
