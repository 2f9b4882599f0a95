from typing import Optional

import numpy as np
import pytest

from dq_handover.data.trajectory import Trajectory
from dq_handover.geometry.dual_quaternion import (
    DualQuaternionPose,
    from_pose,
)
from dq_handover.geometry.quaternion import UnitQuaternion


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240501)


@pytest.fixture
def random_quaternion(rng):
    def make() -> UnitQuaternion:
        return UnitQuaternion.from_array(rng.normal(size=4))

    return make


@pytest.fixture
def random_pose(rng, random_quaternion):
    def make(scale: float = 1.0) -> DualQuaternionPose:
        return from_pose(random_quaternion(), rng.uniform(-scale, scale, 3))

    return make


@pytest.fixture
def line_trajectory():
    """Factory of straight-line trajectories with a steady rotation."""

    def make(
        start,
        end,
        n: int = 30,
        rotvec=(0.0, 0.0, 0.0),
        label: Optional[str] = None,
        name: Optional[str] = None,
    ) -> Trajectory:
        phase = np.linspace(0.0, 1.0, n)
        positions = np.asarray(start) + np.outer(
            phase, np.subtract(end, start)
        )
        rotations = np.array(
            [
                UnitQuaternion.from_rotvec(s * np.asarray(rotvec)).as_array()
                for s in phase
            ]
        )
        return Trajectory(
            times=np.arange(n) / 240.0,
            rotations=rotations,
            positions=positions,
            label=label,
            source="synthetic",
            name=name,
        )

    return make


@pytest.fixture
def pose_cloud(rng):
    """Factory of poses scattered around the identity."""

    def make(
        n: int,
        rotation_scale: float = 0.2,
        position_scale: float = 0.3,
    ) -> list[DualQuaternionPose]:
        return [
            from_pose(
                UnitQuaternion.from_rotvec(rng.normal(0.0, rotation_scale, 3)),
                rng.uniform(-position_scale, position_scale, 3),
            )
            for _ in range(n)
        ]

    return make
