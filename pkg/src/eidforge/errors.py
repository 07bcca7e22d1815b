"""Exception types shared across the package."""


class EidforgeError(Exception):
    """Base class for all package errors."""


class UnsupportedExpressionError(EidforgeError):
    """An expression node or shape outside the supported kernel class."""


class PoleError(EidforgeError):
    """Numeric evaluation hit a pole (vanishing denominator or radicand issue)."""

    def __init__(self, message, subexpr=None):
        super().__init__(message)
        self.subexpr = subexpr


class EvaluationError(EidforgeError):
    """Numeric evaluation failed (unbound symbol, domain problem, ...)."""


class ParseError(EidforgeError):
    """Malformed prefix-form expression text."""


class ValidationError(EidforgeError):
    """Invalid family specification or request parameters."""


class InvalidEigenfunctionError(EidforgeError):
    """Eigenfunction failed the residual precheck for a transformation step."""

    def __init__(self, message, max_residual=None, step_index=None):
        super().__init__(message)
        self.max_residual = max_residual
        self.step_index = step_index


class DegenerateTransformError(EidforgeError):
    """First integral vanishes identically; the transform is not invertible."""


class WindowError(EidforgeError):
    """No pole-free sampling window could be found."""
