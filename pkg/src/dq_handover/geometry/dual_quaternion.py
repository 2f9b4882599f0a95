"""Module to deal with unit dual quaternions encoding 6D rigid poses.

A pose with rotation q_r and translation p is stored as
q_r + (epsilon/2)·q_t·q_r, with q_t the imaginary quaternion of p.

"""

from dataclasses import dataclass

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray,
)

from dq_handover.geometry.quaternion import (
    UnitQuaternion,
    d_arc,
    quat_conjugate,
    quat_mul,
)
from dq_handover.helpers.errors import (
    DegenerateDualQuaternion,
    InvalidQuaternion,
)
from dq_handover.helpers.helpers import (
    UNIT_TOLERANCE,
    canonicalised,
)

DEGENERATE_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class DualQuaternionPose:
    """A unit dual quaternion q_re + epsilon·q_du.

    On construction the dual part is made orthogonal to the real part when
    the drift exceeds the unit tolerance, and both parts are flipped onto the
    w >= 0 hemisphere of the real part (dq and -dq encode the same pose).

    Attributes
    ----------
    q_re
        Rotation part.
    q_du
        Dual part, shape (4,), carrying the translation in metres.

    """

    q_re: UnitQuaternion
    q_du: NDArray[np.float64]

    def __post_init__(self):
        real = self.q_re.as_array()
        dual = np.array(self.q_du, dtype=np.float64).reshape(4)
        if not np.all(np.isfinite(dual)):
            raise InvalidQuaternion(f"Non-finite dual part {dual}.")

        drift = float(np.dot(real, dual))
        if abs(drift) > UNIT_TOLERANCE:
            dual = dual - drift * real

        canonical = canonicalised(real)
        if not np.array_equal(canonical, real):
            object.__setattr__(
                self, "q_re", UnitQuaternion.from_array(canonical)
            )
            dual = -dual

        dual.flags.writeable = False
        object.__setattr__(self, "q_du", dual)

    def __repr__(self):
        return f"DualQuaternionPose(q_re={self.q_re!r}, q_du={self.q_du!r})"

    def __eq__(self, other):
        if isinstance(other, DualQuaternionPose):
            a, b = self.as_array(), other.as_array()
            return bool(
                np.allclose(a, b, rtol=0.0, atol=UNIT_TOLERANCE)
                or np.allclose(a, -b, rtol=0.0, atol=UNIT_TOLERANCE)
            )
        else:
            raise TypeError(
                f"Cannot compare DualQuaternionPose with {type(other)}."
            )

    __hash__ = None  # type: ignore[assignment]

    @property
    def position(self) -> NDArray[np.float64]:
        """Translation (metres) encoded by the pose."""
        return to_pose(self)[1]

    def as_array(self) -> NDArray[np.float64]:
        """Get the 8 components (q_re wxyz, q_du wxyz)."""
        return np.concatenate([self.q_re.as_array(), self.q_du])

    def as_matrix(self) -> NDArray[np.float64]:
        """Get the 4x4 homogeneous transformation matrix."""
        rotation, position = to_pose(self)
        matrix = np.eye(4)
        matrix[:3, :3] = rotation.as_matrix()
        matrix[:3, 3] = position
        return matrix

    @classmethod
    def from_array(cls, array: ArrayLike) -> "DualQuaternionPose":
        """Initialise a pose from 8 components, rescaling to unit length.

        Parameters
        ----------
        array
            Components (q_re wxyz, q_du wxyz).

        Raises
        ------
        DegenerateDualQuaternion
            If the real part has (near) zero norm.

        """
        array = np.asarray(array, dtype=np.float64).reshape(8)
        norm = float(np.linalg.norm(array[:4]))
        if not np.isfinite(norm) or norm < DEGENERATE_TOLERANCE:
            raise DegenerateDualQuaternion(
                f"Real part {array[:4]} is too small to decompose."
            )
        array = array / norm
        return cls(UnitQuaternion.from_array(array[:4]), array[4:])

    @classmethod
    def identity(cls) -> "DualQuaternionPose":
        """Get the pose with zero rotation and zero translation."""
        return cls(UnitQuaternion.identity(), np.zeros(4))


def dq_mul(
    a: DualQuaternionPose,
    b: DualQuaternionPose,
) -> DualQuaternionPose:
    """Get the dual quaternion product a∘b (composition of rigid motions)."""
    a_re, b_re = a.q_re.as_array(), b.q_re.as_array()
    return DualQuaternionPose.from_array(
        np.concatenate(
            [
                quat_mul(a_re, b_re),
                quat_mul(a_re, b.q_du) + quat_mul(a.q_du, b_re),
            ]
        )
    )


def dq_conjugate(dq: DualQuaternionPose) -> DualQuaternionPose:
    """Get the quaternion conjugate of both parts (the inverse motion)."""
    return DualQuaternionPose(
        UnitQuaternion.from_array(quat_conjugate(dq.q_re.as_array())),
        quat_conjugate(dq.q_du),
    )


def from_pose(q_r: UnitQuaternion, p: ArrayLike) -> DualQuaternionPose:
    """Get the dual quaternion of a rotation followed by a translation.

    Parameters
    ----------
    q_r
        Rotation.
    p
        Translation vector (metres).

    Returns
    -------
        q_r + (epsilon/2)·q_t·q_r with q_t = p_x i + p_y j + p_z k.

    """
    q_t = np.concatenate([[0.0], np.asarray(p, dtype=np.float64).reshape(3)])
    return DualQuaternionPose(q_r, 0.5 * quat_mul(q_t, q_r.as_array()))


def to_pose(
    dq: DualQuaternionPose | ArrayLike,
) -> tuple[UnitQuaternion, NDArray[np.float64]]:
    """Decompose a dual quaternion into rotation and translation.

    Parameters
    ----------
    dq
        A pose, or 8 raw components (q_re wxyz, q_du wxyz).

    Returns
    -------
        Rotation and translation vector (metres).

    Raises
    ------
    DegenerateDualQuaternion
        If the real part of raw components is (near) zero.

    """
    match dq:
        case DualQuaternionPose():
            pose = dq
        case _:
            pose = DualQuaternionPose.from_array(dq)

    real = pose.q_re.as_array()
    q_t = 2.0 * quat_mul(pose.q_du, quat_conjugate(real))
    return pose.q_re, q_t[1:]


def d_mag(a: DualQuaternionPose, b: DualQuaternionPose) -> float:
    """Get the magnitude of the rigid motion taking pose a to pose b.

    Parameters
    ----------
    a, b
        Poses.

    Returns
    -------
        Arc length of the relative rotation plus the norm of the relative
        translation (radians and metres weighted 1:1).

    """
    rotation, translation = to_pose(dq_mul(dq_conjugate(a), b))
    return d_arc(UnitQuaternion.identity(), rotation) + float(
        np.linalg.norm(translation)
    )


def d_mag_many(
    dq: DualQuaternionPose,
    rotations: ArrayLike,
    positions: ArrayLike,
) -> NDArray[np.float64]:
    """Get d_mag from one pose to a stack of poses.

    The relative rotation of conj(a)∘b has real part <q_a, q_b> and the
    relative translation is R_a^T (p_b - p_a), whose norm is ||p_b - p_a||.

    Parameters
    ----------
    dq
        Reference pose.
    rotations
        Unit quaternions of shape (..., 4).
    positions
        Matching positions of shape (..., 3). NaN rows yield NaN.

    Returns
    -------
        Array of shape (...) of distances.

    """
    rotations = np.asarray(rotations, dtype=np.float64)
    positions = np.asarray(positions, dtype=np.float64)
    rotation, position = to_pose(dq)
    dots = np.abs(rotations @ rotation.as_array())
    return np.arccos(np.clip(dots, -1.0, 1.0)) + np.linalg.norm(
        positions - position, axis=-1
    )


def stack_poses(
    poses: list[DualQuaternionPose],
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Get rotation (n, 4) and position (n, 3) arrays of a list of poses."""
    rotations = np.array([pose.q_re.as_array() for pose in poses])
    positions = np.array([to_pose(pose)[1] for pose in poses])
    return rotations.reshape(-1, 4), positions.reshape(-1, 3)
