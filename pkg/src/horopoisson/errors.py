"""Exception types shared across the toolkit."""


class HoropoissonError(Exception):
    """Base class for all toolkit errors."""


class PoleError(HoropoissonError):
    """Gamma evaluated at (or too close to) a non-positive integer."""


class DomainError(HoropoissonError):
    """Argument outside the supported domain of a special function."""


class ConvergenceError(HoropoissonError):
    """A quadrature or series did not meet its truncation bound."""


class GridMismatch(HoropoissonError):
    """Binary operation on fields living on different grids."""


class SpaceError(HoropoissonError):
    """Field passed in the wrong space (position vs frequency)."""


class BranchError(HoropoissonError):
    """Complexified kernel argument left the principal-branch half-plane."""


class TubeViolation(HoropoissonError):
    """Imaginary part outside the tube (or outside the safety margin)."""


class ResolutionError(HoropoissonError):
    """Requested level is too small for the grid to resolve."""


class QuadratureError(HoropoissonError):
    """Quadrature refinement trend is ambiguous or inconsistent."""


class FitError(HoropoissonError):
    """Regression residual exceeded its threshold."""


class StencilError(HoropoissonError):
    """Finite-difference stencil requires (nearly) uniform levels."""


class ConditioningError(HoropoissonError):
    """Matrix too ill-conditioned for a reliable Gram determinant."""


class ConfigError(HoropoissonError):
    """Run configuration failed validation."""

    def __init__(self, messages):
        if isinstance(messages, str):
            messages = [messages]
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))
