"""Exception types and the CLI exit-code contract.

Every documented failure mode maps to exactly one process exit code, so
scripted callers can dispatch on the code alone.
"""

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_METHOD_INAPPLICABLE = 3
EXIT_REVERSE_JUMP = 4
EXIT_DECOMPOSITION = 5
EXIT_DIMENSION_CAP = 6
EXIT_POSITIVE_UNRAVELING = 7
EXIT_REPREPARATION = 8
EXIT_QUADRATURE = 9


class OpdsimError(Exception):
    """Base class for all package errors."""

    exit_code = EXIT_USAGE


class ConfigError(OpdsimError):
    """Invalid or unknown experiment configuration."""

    exit_code = EXIT_CONFIG


class MethodInapplicableError(OpdsimError):
    """A trajectory method was asked to handle a rate sign it cannot."""

    exit_code = EXIT_METHOD_INAPPLICABLE


class ReverseJumpError(OpdsimError):
    """A reverse jump was required but no valid source state was available."""

    exit_code = EXIT_REVERSE_JUMP


class DecompositionError(OpdsimError):
    """Frame decomposition produced an invalid environmental operator."""

    exit_code = EXIT_DECOMPOSITION


class FrameRankError(DecompositionError):
    """Frame elements do not span the operator space."""


class DimensionCapError(OpdsimError):
    """A dense oracle was asked to exceed its configured dimension cap."""

    exit_code = EXIT_DIMENSION_CAP


class PositiveUnravelingError(OpdsimError):
    """A rate-operator eigenvalue went negative with no fallback enabled."""

    exit_code = EXIT_POSITIVE_UNRAVELING


class RepreparationError(OpdsimError):
    """A repreparation annihilates the reachable set (zero normalization)."""

    exit_code = EXIT_REPREPARATION


class QuadratureError(OpdsimError):
    """Numerical quadrature failed to reach the requested tolerance."""

    exit_code = EXIT_QUADRATURE
