"""Exception and warning classes shared across the package."""


class StarQuantError(Exception):
    """Base class for all package errors."""


class ParseError(StarQuantError, ValueError):
    """Malformed expression text.

    ``position`` is the 0-based character offset of the offending token.
    """

    def __init__(self, message, text="", position=0):
        self.message = message
        self.text = text
        self.position = position
        super().__init__(self._render())

    def _render(self):
        if not self.text:
            return f"{self.message} at position {self.position}"
        caret = " " * self.position + "^"
        return f"{self.message} at position {self.position}\n  {self.text}\n  {caret}"


class BasisMismatchError(StarQuantError, ValueError):
    pass


class ExponentOverflowError(StarQuantError, ValueError):
    pass


class UnsupportedOperationError(StarQuantError, TypeError):
    pass


class SingularExponentError(StarQuantError, ArithmeticError):
    """Gaussian composition whose completed-square form is not invertible."""

    def __init__(self, message, mus=()):
        self.mus = tuple(mus)
        super().__init__(message)


class SingularityError(StarQuantError, ArithmeticError):
    """Evaluation at a singular time (star exponential pole, kernel caustic)."""


class ConvergenceError(StarQuantError, ArithmeticError):
    """A series or integrator failed to converge; ``diagnostics`` holds the evidence."""

    def __init__(self, message, diagnostics=None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)


class BoundaryDecayError(StarQuantError, ValueError):
    pass


class QuadratureOrderError(StarQuantError, ValueError):
    pass


class TruncationWarning(UserWarning):
    pass


class AliasingWarning(UserWarning):
    pass


class BoundaryStencilWarning(UserWarning):
    pass
