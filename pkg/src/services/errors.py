"""
Error hierarchy cho transport simulator.

Mọi lỗi domain kế thừa TransportError để API/CLI/pipeline có thể bắt
chung một loại; các lỗi về giá trị đầu vào đồng thời là ValueError.
"""


class TransportError(Exception):
    """Base class for all simulator errors."""


class InvalidSpecError(TransportError, ValueError):
    """Invalid physical specification, plan or configuration value."""


class ShapeError(TransportError, ValueError):
    """Operator, vector or density-matrix dimensions do not match."""


class DegenerateNullspaceError(TransportError):
    """The Liouvillian has more than one steady state."""

    def __init__(self, dimension: int, message: str | None = None):
        self.dimension = dimension
        super().__init__(message or f"steady-state manifold has dimension {dimension}; chain is not connected")


class ConvergenceError(TransportError):
    """A solver did not reach the requested residual."""

    def __init__(self, residual: float, message: str | None = None):
        self.residual = residual
        super().__init__(message or f"solver did not converge (residual {residual:.3e})")


class UnsupportedFormulaError(TransportError):
    """A closed-form expression is not valid for the given chain."""


class InsufficientDataError(TransportError, ValueError):
    """Too few points for a regression."""


class FitDomainError(TransportError, ValueError):
    """Data outside the logarithm's domain."""


class SamplingError(TransportError):
    """A random ensemble could not draw enough admissible samples."""
