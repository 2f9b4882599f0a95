"""Module to define squared-exponential kernels over poses and orientations."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray,
)

from dq_handover.geometry.dual_quaternion import (
    DualQuaternionPose,
    d_mag,
    to_pose,
)
from dq_handover.geometry.quaternion import (
    UnitQuaternion,
    d_arc,
)
from dq_handover.helpers.errors import DimensionMismatch


@dataclass(frozen=True, kw_only=True)
class Hyperparameters:
    """Hyperparameters of a squared-exponential kernel.

    Attributes
    ----------
    sigma_f
        Signal magnitude (units of the regression target).
    length_scale
        Length scale, in units of the paired distance.
    sigma_n
        Observation noise (units of the regression target).

    """

    sigma_f: float
    length_scale: float
    sigma_n: float = 0.0

    def __post_init__(self):
        if not (self.sigma_f > 0.0 and self.length_scale > 0.0):
            raise ValueError(
                "sigma_f and length_scale must be strictly positive, got "
                f"{self.sigma_f} and {self.length_scale}."
            )
        if not self.sigma_n >= 0.0:
            raise ValueError(
                f"sigma_n must be non-negative, got {self.sigma_n}."
            )

    def as_log(self) -> NDArray[np.float64]:
        """Get (log sigma_f, log l, log sigma_n); sigma_n = 0 maps to -inf."""
        with np.errstate(divide="ignore"):
            return np.log([self.sigma_f, self.length_scale, self.sigma_n])

    @classmethod
    def from_log(cls, log_values: ArrayLike) -> "Hyperparameters":
        """Initialise Hyperparameters from log-space values."""
        sigma_f, length_scale, sigma_n = np.exp(
            np.asarray(log_values, dtype=np.float64)
        )
        return cls(
            sigma_f=float(sigma_f),
            length_scale=float(length_scale),
            sigma_n=float(sigma_n),
        )


def squared_exponential(
    distances: ArrayLike,
    hp: Hyperparameters,
) -> NDArray[np.float64]:
    """Get sigma_f^2 exp(-d^2 / (2 l^2)) for an array of distances.

    Parameters
    ----------
    distances
        Distances in the units of the length scale.
    hp
        Kernel hyperparameters (sigma_n is ignored).

    Returns
    -------
        Covariances of the same shape as `distances`.

    """
    d = np.asarray(distances, dtype=np.float64)
    return hp.sigma_f**2 * np.exp(-(d**2) / (2.0 * hp.length_scale**2))


def k_se(x: ArrayLike, x2: ArrayLike, hp: Hyperparameters) -> float:
    """Get the Euclidean squared-exponential covariance of two vectors.

    Raises
    ------
    DimensionMismatch
        If the vectors have different shapes.

    """
    x = np.asarray(x, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    if x.shape != x2.shape:
        raise DimensionMismatch(
            f"Cannot compare vectors of shape {x.shape} and {x2.shape}."
        )
    return float(squared_exponential(np.linalg.norm(x - x2), hp))


def k_arc(q: UnitQuaternion, q2: UnitQuaternion, hp: Hyperparameters) -> float:
    """Get the squared-exponential covariance over the arc metric on S3."""
    return float(squared_exponential(d_arc(q, q2), hp))


def k_mag(
    a: DualQuaternionPose,
    b: DualQuaternionPose,
    hp: Hyperparameters,
) -> float:
    """Get the squared-exponential covariance over the d_mag pose metric."""
    return float(squared_exponential(d_mag(a, b), hp))


def k_product(
    a: DualQuaternionPose,
    b: DualQuaternionPose,
    hp: Hyperparameters,
) -> float:
    """Get the product covariance k_arc · k_se over orientation and position.

    Both factors share the length scale; the product is rescaled to the
    signal variance sigma_f^2.

    """
    q_a, p_a = to_pose(a)
    q_b, p_b = to_pose(b)
    return k_arc(q_a, q_b, hp) * k_se(p_a, p_b, hp) / hp.sigma_f**2
