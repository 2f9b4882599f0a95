"""Module to deal with unit quaternions on S3.

Quaternions are stored in (w, x, y, z) order. Plain quaternions (e.g. the
dual part of a pose) are numpy arrays of shape (4,); orientations are
`UnitQuaternion` objects.

"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray,
)
from scipy.spatial.transform import Rotation

from dq_handover.helpers.errors import (
    AntipodalPair,
    InvalidQuaternion,
)
from dq_handover.helpers.helpers import (
    UNIT_TOLERANCE,
    canonicalised,
)

ANTIPODAL_TOLERANCE = 1e-6

_I = np.array([0.0, 1.0, 0.0, 0.0])
_J = np.array([0.0, 0.0, 1.0, 0.0])
_K = np.array([0.0, 0.0, 0.0, 1.0])


def quat_mul(a: ArrayLike, b: ArrayLike) -> NDArray[np.float64]:
    """Get the Hamilton product of two quaternions.

    Broadcasts over leading axes, so stacks of shape (..., 4) are accepted.

    Parameters
    ----------
    a, b
        Quaternions in (w, x, y, z) order.

    Returns
    -------
        The product a·b.

    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    aw, ax, ay, az = np.moveaxis(a, -1, 0)
    bw, bx, by, bz = np.moveaxis(b, -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conjugate(a: ArrayLike) -> NDArray[np.float64]:
    """Get the quaternion conjugate (w, -x, -y, -z)."""
    return np.asarray(a, dtype=np.float64) * np.array([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True, eq=False)
class UnitQuaternion:
    """A point on S3 representing a 3D orientation.

    The quaternion is renormalised on construction. Equality is orientation
    equality: q and -q compare equal.

    """

    w: float
    x: float
    y: float
    z: float

    def __post_init__(self):
        values = np.array([self.w, self.x, self.y, self.z], dtype=np.float64)
        norm = float(np.linalg.norm(values))
        if not np.isfinite(norm) or norm < 1e-12:
            raise InvalidQuaternion(f"Cannot normalise quaternion {values}.")
        values = values / norm
        for name, value in zip("wxyz", values):
            object.__setattr__(self, name, float(value))

    def __repr__(self):
        return (
            f"UnitQuaternion(w={self.w!r}, x={self.x!r}, y={self.y!r}, "
            f"z={self.z!r})"
        )

    def __eq__(self, other):
        if isinstance(other, UnitQuaternion):
            a, b = self.as_array(), other.as_array()
            return bool(
                np.allclose(a, b, rtol=0.0, atol=UNIT_TOLERANCE)
                or np.allclose(a, -b, rtol=0.0, atol=UNIT_TOLERANCE)
            )
        else:
            raise TypeError(
                f"Cannot compare UnitQuaternion with {type(other)}."
            )

    __hash__ = None  # type: ignore[assignment]

    def __neg__(self) -> "UnitQuaternion":
        return UnitQuaternion(-self.w, -self.x, -self.y, -self.z)

    def as_array(self) -> NDArray[np.float64]:
        """Get the (w, x, y, z) components as an array."""
        return np.array([self.w, self.x, self.y, self.z])

    def canonical(self) -> "UnitQuaternion":
        """Get the representative on the w >= 0 hemisphere."""
        return UnitQuaternion.from_array(canonicalised(self.as_array()))

    def as_rotvec(self) -> NDArray[np.float64]:
        """Get the rotation vector (axis times angle, radians)."""
        return Rotation.from_quat(np.roll(self.as_array(), -1)).as_rotvec()

    def as_matrix(self) -> NDArray[np.float64]:
        """Get the 3x3 rotation matrix."""
        return Rotation.from_quat(np.roll(self.as_array(), -1)).as_matrix()

    @classmethod
    def from_array(cls, array: ArrayLike) -> "UnitQuaternion":
        """Initialise a UnitQuaternion from a (w, x, y, z) array."""
        w, x, y, z = np.asarray(array, dtype=np.float64)
        return cls(w, x, y, z)

    @classmethod
    def from_rotvec(cls, rotvec: ArrayLike) -> "UnitQuaternion":
        """Initialise a UnitQuaternion from a rotation vector.

        Parameters
        ----------
        rotvec
            Rotation axis scaled by the rotation angle in radians.

        """
        xyzw = Rotation.from_rotvec(np.asarray(rotvec, dtype=np.float64))
        return cls.from_array(np.roll(xyzw.as_quat(), 1))

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        """Get the quaternion encoding zero rotation."""
        return cls(1.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class TangentFrame:
    """Orthonormal basis of the tangent space of S3 at a quaternion.

    Attributes
    ----------
    B
        4x3 matrix whose columns span the tangent space in R4.

    """

    B: NDArray[np.float64]


def tangent_frame(q: UnitQuaternion) -> TangentFrame:
    """Get the tangent frame [q·i, q·j, q·k] at q.

    Parameters
    ----------
    q
        Base orientation.

    Returns
    -------
        TangentFrame whose columns are orthonormal and orthogonal to q.

    """
    base = q.as_array()
    return TangentFrame(
        B=np.stack(
            [quat_mul(base, _I), quat_mul(base, _J), quat_mul(base, _K)],
            axis=1,
        )
    )


def central_project(q: UnitQuaternion, v_ts: ArrayLike) -> UnitQuaternion:
    """Project a tangent vector at q back onto S3.

    The ray through q + B·v_TS meets S3 at two antipodal points; the one on
    the hemisphere of q is returned.

    Parameters
    ----------
    q
        Base orientation.
    v_ts
        Tangent-space vector (3 components).

    Returns
    -------
        The projected orientation with a non-negative dot product with q.

    """
    base = q.as_array()
    v = base + tangent_frame(q).B @ np.asarray(v_ts, dtype=np.float64)
    v = v / np.linalg.norm(v)
    if np.dot(v, base) < 0.0:
        v = -v
    return UnitQuaternion.from_array(v)


def tangent_log(
    q: UnitQuaternion,
    q_next: UnitQuaternion,
) -> NDArray[np.float64]:
    """Get the tangent vector at q which centrally projects onto q_next.

    Parameters
    ----------
    q
        Base orientation.
    q_next
        Target orientation; its sign is aligned with q first.

    Returns
    -------
        v_TS such that central_project(q, v_TS) equals q_next.

    Raises
    ------
    AntipodalPair
        If q and q_next are (numerically) 90 degrees apart on S3.

    """
    base = q.as_array()
    target = q_next.as_array()
    dot = float(np.dot(base, target))
    if abs(dot) < ANTIPODAL_TOLERANCE:
        raise AntipodalPair(
            f"Orientations {q} and {q_next} cannot be related by a central "
            "projection."
        )
    if dot < 0.0:
        target, dot = -target, -dot
    return tangent_frame(q).B.T @ (target / dot - base)


def d_arc(q: UnitQuaternion, q2: UnitQuaternion) -> float:
    """Get the arc length between two orientations on S3.

    Parameters
    ----------
    q, q2
        Orientations; the sign of either is irrelevant.

    Returns
    -------
        Length of the shorter great-circle arc, in [0, pi/2].

    """
    dot = abs(float(np.dot(q.as_array(), q2.as_array())))
    return float(np.arccos(np.clip(dot, -1.0, 1.0)))


def d_arc_many(q: UnitQuaternion, others: ArrayLike) -> NDArray[np.float64]:
    """Get arc lengths from q to a stack of quaternions.

    Parameters
    ----------
    q
        Reference orientation.
    others
        Array of shape (..., 4) of unit quaternions. NaN rows yield NaN.

    Returns
    -------
        Array of shape (...) of arc lengths.

    """
    dots = np.abs(np.asarray(others, dtype=np.float64) @ q.as_array())
    return np.arccos(np.clip(dots, -1.0, 1.0))
