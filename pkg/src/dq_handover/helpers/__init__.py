"""Helper modules to define types, errors and common array operations."""

from dq_handover.helpers.errors import (
    AntipodalPair,
    ConfigError,
    DegenerateData,
    DegenerateDualQuaternion,
    DimensionMismatch,
    DivergenceDetected,
    DqHandoverError,
    InsufficientData,
    InvalidQuaternion,
    InvalidVelocity,
    JumpDetected,
    MissingReport,
    NonMonotoneTime,
    NotPositiveDefinite,
    ParseError,
    RangeError,
    TrajectoryFileError,
)
from dq_handover.helpers.helpers import (
    GraspConfiguration,
    HandoverConfiguration,
    PoseMetric,
    TrajectorySource,
    canonicalised,
    geometric_mean,
    normalised,
    sign_continuous,
)

__all__ = [
    "AntipodalPair",
    "ConfigError",
    "DegenerateData",
    "DegenerateDualQuaternion",
    "DimensionMismatch",
    "DivergenceDetected",
    "DqHandoverError",
    "GraspConfiguration",
    "HandoverConfiguration",
    "InsufficientData",
    "InvalidQuaternion",
    "InvalidVelocity",
    "JumpDetected",
    "MissingReport",
    "NonMonotoneTime",
    "NotPositiveDefinite",
    "ParseError",
    "PoseMetric",
    "RangeError",
    "TrajectoryFileError",
    "TrajectorySource",
    "canonicalised",
    "geometric_mean",
    "normalised",
    "sign_continuous",
]
