"""Exceptions raised by the dq_handover package."""

from typing import Optional

import numpy as np


class DqHandoverError(Exception):
    """Base class for all errors raised by the package."""


class InvalidQuaternion(DqHandoverError, ValueError):
    """A quaternion has zero or non-finite norm."""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(
            message if line is None else f"line {line}: {message}"
        )
        self.line = line


class DegenerateDualQuaternion(DqHandoverError, ValueError):
    """The real part of a dual quaternion vanishes."""


class AntipodalPair(DqHandoverError, ValueError):
    """Two orientations are 90 degrees apart on S3; projection is undefined."""

    def __init__(self, message: str, index: Optional[int] = None):
        super().__init__(
            message if index is None else f"sample {index}: {message}"
        )
        self.index = index


class DimensionMismatch(DqHandoverError, ValueError):
    """Kernel inputs of unequal dimensionality."""


class NotPositiveDefinite(DqHandoverError, np.linalg.LinAlgError):
    """A Gram matrix could not be factorised even with the jitter cap."""

    def __init__(self, message: str, jitter: float = 0.0):
        super().__init__(message)
        self.jitter = jitter


class DegenerateData(DqHandoverError, ValueError):
    """Training data carry no information (e.g. all inputs identical)."""


class DivergenceDetected(DqHandoverError, RuntimeError):
    """A rollout left the configured workspace."""

    def __init__(self, message: str, step: int):
        super().__init__(f"step {step}: {message}")
        self.step = step


class RangeError(DqHandoverError, IndexError):
    """A step range lies outside a probability trace."""


class TrajectoryFileError(DqHandoverError, ValueError):
    """Base class for trajectory file problems, tagged with a line number."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


class ParseError(TrajectoryFileError):
    """A row could not be parsed."""


class NonMonotoneTime(TrajectoryFileError):
    """Time stamps are not strictly increasing."""


class JumpDetected(TrajectoryFileError):
    """Consecutive orientations are further apart than physically plausible."""


class InsufficientData(DqHandoverError, ValueError):
    """A condition has too few trajectories for the requested operation."""

    def __init__(self, label: str, message: str = ""):
        super().__init__(
            f"condition {label!r}: {message or 'not enough trajectories'}"
        )
        self.label = label


class MissingReport(DqHandoverError, FileNotFoundError):
    """A report required for evaluation does not exist."""


class InvalidVelocity(DqHandoverError, ValueError):
    """A tangent velocity is non-finite or implausibly large."""


class ConfigError(DqHandoverError, ValueError):
    """A run configuration contains unknown keys or invalid values."""
