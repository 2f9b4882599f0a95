"""Modules to deal with quaternion and dual-quaternion geometry."""

from dq_handover.geometry.dual_quaternion import (
    DualQuaternionPose,
    d_mag,
    d_mag_many,
    dq_conjugate,
    dq_mul,
    from_pose,
    stack_poses,
    to_pose,
)
from dq_handover.geometry.quaternion import (
    TangentFrame,
    UnitQuaternion,
    central_project,
    d_arc,
    d_arc_many,
    quat_conjugate,
    quat_mul,
    tangent_frame,
    tangent_log,
)
from dq_handover.geometry.velocity import TangentVelocity

__all__ = [
    "DualQuaternionPose",
    "TangentFrame",
    "TangentVelocity",
    "UnitQuaternion",
    "central_project",
    "d_arc",
    "d_arc_many",
    "d_mag",
    "d_mag_many",
    "dq_conjugate",
    "dq_mul",
    "from_pose",
    "quat_conjugate",
    "quat_mul",
    "stack_poses",
    "tangent_frame",
    "tangent_log",
    "to_pose",
]
