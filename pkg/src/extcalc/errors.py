"""Exception hierarchy.

Input problems derive from :class:`ValueError`, numerical failures from
:class:`ArithmeticError`; the CLI maps the two families to distinct exit codes.
"""


class ExtcalcError(Exception):
    """Base class for every error raised by the package."""


class MeasureError(ExtcalcError, ValueError):
    """Malformed or inconsistent measure description."""


class NormalizationError(MeasureError):
    def __init__(self, defect, tol):
        self.defect = defect
        self.tol = tol
        super().__init__(
            f"normalization defect {defect:.3e} exceeds tolerance {tol:.1e} "
            "(integral of dmu/(1+x^2) must equal 1)"
        )


class DomainError(ExtcalcError, ValueError):
    """Argument outside the admissible region of a function."""


class SupportError(ExtcalcError, ArithmeticError):
    """Evaluation point lies on the closed support of the measure."""


class QuadratureError(ExtcalcError, ArithmeticError):
    def __init__(self, message, error_estimate=None):
        self.error_estimate = error_estimate
        super().__init__(message)


class EigenvalueError(ExtcalcError, ArithmeticError):
    """The point is an eigenvalue of the dissipative operator."""


class DecompositionError(ExtcalcError, ArithmeticError):
    """A vector could not be split along the domain of the extension."""


class ConvergenceError(ExtcalcError, ArithmeticError):
    """An iterative or extrapolation procedure failed to settle."""


class DegeneracyError(ExtcalcError, ArithmeticError):
    """A quantity that should be bounded away from zero vanished numerically."""
