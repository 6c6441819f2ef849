"""Exception types raised across the package."""


class SelectionRuleError(ValueError):
    """Transition or table entry forbidden by E1 selection rules."""


class ChannelError(ValueError):
    """Photon energy does not fall in the window of the requested transition."""


class SingularGeometryError(ValueError):
    """Polarization basis undefined because the direction is parallel to the reference."""


class QuadratureError(ArithmeticError):
    """Numerical quadrature failed to converge to the requested tolerance."""


class EmptyResultError(RuntimeError):
    """No open excitation channel for the supplied wave packet."""


class BasisSizeError(RuntimeError):
    """Truncated configuration basis exceeds the configured bound."""


class StabilityError(RuntimeError):
    """Time step too coarse for the fastest coupled transition frequency."""


class ConfigError(ValueError):
    """Malformed or invalid scenario configuration."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
