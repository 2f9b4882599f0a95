"""Module to integrate GP velocities into pose trajectories."""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from dq_handover.data.trajectory import (
    DEFAULT_RATE,
    Trajectory,
)
from dq_handover.geometry.dual_quaternion import (
    DualQuaternionPose,
    from_pose,
    to_pose,
)
from dq_handover.geometry.quaternion import central_project
from dq_handover.geometry.velocity import TangentVelocity
from dq_handover.gp.model import (
    OUTPUT_DIMENSIONS,
    GpModel,
    predict,
)
from dq_handover.helpers.errors import DivergenceDetected

logger = logging.getLogger(__name__)


@dataclass(frozen=True, kw_only=True)
class RolloutConfig:
    """Settings of a GP rollout.

    Attributes
    ----------
    workspace_bound
        Largest accepted distance (metres) of a rolled-out position from the
        origin of the recording frame.
    nominal_rate
        Sampling rate (Hz) used for the time stamps of the rollout.

    """

    workspace_bound: float = 10.0
    nominal_rate: float = DEFAULT_RATE


@dataclass(frozen=True, kw_only=True, eq=False)
class RolloutTrajectory(Trajectory):
    """A trajectory predicted by a GP, with per-step predictive variances.

    Attributes
    ----------
    variances
        Predictive variances, shape (n, 6); the first row (start) is zero.

    """

    variances: NDArray[np.float64]


def step(pose: DualQuaternionPose, vel: TangentVelocity) -> DualQuaternionPose:
    """Advance a pose by one time step of a tangent velocity.

    Parameters
    ----------
    pose
        Current pose.
    vel
        Per-step velocity; v_TS lives in the tangent frame of the pose's
        rotation.

    Returns
    -------
        The pose with rotation central_project(q, v_TS) and position
        p + p_dot.

    """
    rotation, position = to_pose(pose)
    return from_pose(
        central_project(rotation, vel.v_ts),
        position + vel.p_dot,
    )


def rollout(
    model: GpModel,
    start: DualQuaternionPose,
    n_steps: int,
    config: RolloutConfig | None = None,
) -> RolloutTrajectory:
    """Roll out the GP mean velocity field from a start pose.

    Each posterior mean is integrated with `step()` and the resulting pose is
    the next query. Predictive variances are recorded but not propagated.

    Parameters
    ----------
    model
        A fitted model.
    start
        Initial pose.
    n_steps
        Number of steps (at least one).
    config, optional
        Rollout settings, by default `RolloutConfig()`.

    Returns
    -------
        Trajectory of n_steps + 1 poses including the start.

    Raises
    ------
    DivergenceDetected
        If a pose leaves the workspace bound.

    """
    config = config if config is not None else RolloutConfig()
    if n_steps < 1:
        raise ValueError(f"n_steps must be at least 1, got {n_steps}.")

    poses = [start]
    variances = [np.zeros(OUTPUT_DIMENSIONS)]
    pose = start
    for index in range(1, n_steps + 1):
        prediction = predict(model, pose)
        pose = step(pose, prediction.mean)
        if np.linalg.norm(pose.position) > config.workspace_bound:
            logger.warning("Rollout diverged at step %d.", index)
            raise DivergenceDetected(
                f"Position {pose.position} is outside the workspace bound "
                f"of {config.workspace_bound} m.",
                step=index,
            )
        poses.append(pose)
        variances.append(prediction.variance)

    return RolloutTrajectory.from_poses(
        poses,
        nominal_rate=config.nominal_rate,
        label=model.label,
        source="predicted",
        variances=np.array(variances),
    )
