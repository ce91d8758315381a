"""Exception types shared across the package.

Every failure mode that callers are expected to handle gets its own class;
generic misuse (wrong types, malformed arguments) raises ValueError as usual.
"""

from __future__ import annotations

from typing import Any


class DimspectraError(Exception):
    """Base class for all package-specific errors."""


class MarkovViolation(DimspectraError):
    """Branch images and the transition matrix disagree, or domains overlap."""


class ContractionViolation(DimspectraError):
    """|T'| < 1 somewhere, or |T'| = 1 away from every detected parabolic orbit."""


class NotTransitive(DimspectraError):
    """No power of the transition matrix is strictly positive."""


class OutOfImage(DimspectraError):
    """Requested preimage of a point outside the branch image."""


class FitUnstable(DimspectraError):
    """Log-log regression for a parabolic exponent has residual above tolerance."""


class LevelTooLarge(DimspectraError):
    """Cylinder enumeration would exceed the configured word budget."""


class PointOutsideCylinder(DimspectraError):
    """Point does not belong to the cylinder interval it was quoted against."""


class DegenerateCylinder(DimspectraError):
    """Cylinder interval collapsed below floating-point resolution."""


class NotConverged(DimspectraError):
    """Iteration budget exhausted before reaching tolerance.

    Carries the best enclosure computed so far; callers must consume it
    rather than discard the run (parabolic maps land here routinely).
    """

    def __init__(self, message: str, enclosure: Any = None):
        super().__init__(message)
        self.enclosure = enclosure


class NotStrictlyNegative(DimspectraError):
    """Potential does not satisfy sup(phi) < 0 after pressure normalization."""


class DerivativeUnstable(DimspectraError):
    """Finite-difference derivative estimates disagree across step sizes."""


class ConstraintInfeasible(DimspectraError):
    """Requested ratio lies outside the achievable hull at this level."""


class EmptyWindow(DimspectraError):
    """No cylinder's ratio bracket intersects the requested window."""


class NoConnector(DimspectraError):
    """No connector word of admissible length joins every pair of words."""


class InadmissibleSupport(DimspectraError):
    """Weight vector puts mass on an inadmissible word."""


class NoParabolicOrbit(DimspectraError):
    """Operation requires a parabolic orbit but the map has none."""


class TruncationTooSmall(DimspectraError):
    """Truncated induced system retains too little base measure."""


class TailDominates(DimspectraError):
    """Dropped tail of the induced system is not summably small."""


class ConfigError(DimspectraError):
    """Run configuration failed schema validation."""


class IoError(DimspectraError):
    """Artifact path could not be created or written."""
