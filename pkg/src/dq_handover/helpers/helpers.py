"""Module to define common functions and types."""

from typing import Literal

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray,
)

GraspConfiguration = Literal["bottom", "top", "above", "reversed"]
HandoverConfiguration = Literal["right", "down", "left", "up"]
TrajectorySource = Literal["recorded", "synthetic", "predicted"]
PoseMetric = Literal["d_mag", "d_arc", "product"]

UNIT_TOLERANCE = 1e-9


def normalised(array: ArrayLike) -> NDArray[np.float64]:
    """Get an array scaled to unit Euclidean norm along its last axis.

    Parameters
    ----------
    array
        Array to normalise, e.g. a quaternion or a stack of quaternions.

    Returns
    -------
        Array of the same shape with unit-norm rows.

    """
    array = np.asarray(array, dtype=np.float64)
    return array / np.linalg.norm(array, axis=-1, keepdims=True)


def canonicalised(array: ArrayLike) -> NDArray[np.float64]:
    """Get quaternions flipped onto the w >= 0 hemisphere.

    Ties on w = 0 are broken by the first nonzero component being positive.

    Parameters
    ----------
    array
        A quaternion (wxyz) or a stack of quaternions, shape (..., 4).

    Returns
    -------
        Quaternions representing the same orientations on the canonical
        hemisphere.

    """
    array = np.array(array, dtype=np.float64)
    flat = array.reshape(-1, 4)
    nonzero = flat != 0.0
    first = np.where(nonzero.any(axis=1), nonzero.argmax(axis=1), 0)
    leading = flat[np.arange(flat.shape[0]), first]
    sign = np.where(leading < 0.0, -1.0, 1.0)
    return (flat * sign[:, None]).reshape(array.shape)


def sign_continuous(array: ArrayLike) -> NDArray[np.float64]:
    """Get a quaternion sequence without sign flips between neighbours.

    The first quaternion is canonicalised; each later one takes the sign that
    makes its dot product with its predecessor non-negative.

    Parameters
    ----------
    array
        Quaternions (wxyz) in sequence order, shape (n, 4).

    Returns
    -------
        Quaternions representing the same orientations with
        <q(i), q(i + 1)> >= 0.

    """
    flat = np.array(array, dtype=np.float64).reshape(-1, 4)
    if len(flat) == 0:
        return flat
    dots = np.einsum("ij,ij->i", flat[1:], flat[:-1])
    flips = np.concatenate([[1.0], np.where(dots < 0.0, -1.0, 1.0)])
    first = 1.0 if np.array_equal(canonicalised(flat[0]), flat[0]) else -1.0
    return flat * (first * np.cumprod(flips))[:, None]


def geometric_mean(values: ArrayLike) -> float:
    """Get the geometric mean of strictly positive values.

    Parameters
    ----------
    values
        Positive values.

    Returns
    -------
        exp(mean(log(values))).

    """
    return float(np.exp(np.mean(np.log(np.asarray(values, dtype=np.float64)))))
