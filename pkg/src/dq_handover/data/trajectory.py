"""Module to deal with pose trajectories and their CSV files."""

import csv
import logging
from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import (
    Iterator,
    Optional,
)

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray,
)

from dq_handover.geometry.dual_quaternion import (
    DualQuaternionPose,
    from_pose,
    stack_poses,
)
from dq_handover.geometry.quaternion import (
    UnitQuaternion,
    d_arc_many,
    tangent_log,
)
from dq_handover.geometry.velocity import TangentVelocity
from dq_handover.helpers.errors import (
    AntipodalPair,
    InvalidQuaternion,
    JumpDetected,
    NonMonotoneTime,
    ParseError,
)
from dq_handover.helpers.helpers import (
    TrajectorySource,
    normalised,
    sign_continuous,
)

logger = logging.getLogger(__name__)

CSV_HEADER = ("t", "px", "py", "pz", "qw", "qx", "qy", "qz")
DEFAULT_RATE = 240.0
MAX_STEP_ARC = np.pi / 4


@dataclass(frozen=True, kw_only=True, eq=False)
class Trajectory:
    """A time-indexed sequence of poses.

    Rotations are normalised and stored sign-continuous: the first sample
    is on the w >= 0 hemisphere and every later sample has a positive dot
    product with its predecessor, so a turn through w = 0 keeps its sign.

    Attributes
    ----------
    times
        Sample times (seconds), strictly increasing.
    rotations
        Unit quaternions (wxyz), shape (n, 4).
    positions
        Positions (metres), shape (n, 3).
    label
        Condition label, if known.
    source
        Where the samples come from.
    nominal_rate
        Nominal sampling rate (Hz).
    name
        Identifier of the trajectory (e.g. the file stem).

    """

    times: NDArray[np.float64]
    rotations: NDArray[np.float64]
    positions: NDArray[np.float64]
    label: Optional[str] = None
    source: TrajectorySource = "recorded"
    nominal_rate: float = DEFAULT_RATE
    name: Optional[str] = None

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64).reshape(-1)
        rotations = np.array(self.rotations, dtype=np.float64).reshape(-1, 4)
        positions = np.array(self.positions, dtype=np.float64).reshape(-1, 3)

        if not (len(times) == len(rotations) == len(positions)):
            raise ValueError(
                f"Inconsistent sample counts: {len(times)} times, "
                f"{len(rotations)} rotations, {len(positions)} positions."
            )
        for values in (times, rotations, positions):
            if not np.all(np.isfinite(values)):
                raise ValueError("Trajectory samples must be finite.")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("Trajectory times must be strictly increasing.")
        if np.any(np.linalg.norm(rotations, axis=1) < 1e-12):
            raise InvalidQuaternion("Trajectory contains a zero quaternion.")

        rotations = sign_continuous(normalised(rotations))
        for name, values in (
            ("times", times),
            ("rotations", rotations),
            ("positions", positions),
        ):
            values.flags.writeable = False
            object.__setattr__(self, name, values)

    def __len__(self):
        return len(self.times)

    def __repr__(self):
        return (
            f"Trajectory(name={self.name!r}, label={self.label!r}, "
            f"source={self.source!r}, samples={len(self)})"
        )

    def pose(self, index: int) -> DualQuaternionPose:
        """Get the pose at a sample index."""
        return from_pose(
            UnitQuaternion.from_array(self.rotations[index]),
            self.positions[index],
        )

    @property
    def poses(self) -> list[DualQuaternionPose]:
        """All poses in time order."""
        return [self.pose(index) for index in range(len(self))]

    @property
    def samples(self) -> Iterator[tuple[float, DualQuaternionPose]]:
        """Iterate over (time, pose) pairs."""
        for index in range(len(self)):
            yield float(self.times[index]), self.pose(index)

    @classmethod
    def from_poses(
        cls,
        poses: list[DualQuaternionPose],
        times: Optional[ArrayLike] = None,
        nominal_rate: float = DEFAULT_RATE,
        **kwargs,
    ) -> "Trajectory":
        """Initialise a Trajectory from poses.

        Parameters
        ----------
        poses
            Poses in time order.
        times, optional
            Sample times; by default uniform steps at `nominal_rate`.
        nominal_rate, optional
            Sampling rate in Hz, by default 240.
        **kwargs
            Further `Trajectory` fields (label, source, name).

        """
        rotations, positions = stack_poses(poses)
        if times is None:
            times = np.arange(len(poses)) / nominal_rate
        return cls(
            times=np.asarray(times, dtype=np.float64),
            rotations=rotations,
            positions=positions,
            nominal_rate=nominal_rate,
            **kwargs,
        )


def _parse_row(row: list[str], line: int) -> NDArray[np.float64]:
    if len(row) != len(CSV_HEADER):
        raise ParseError(
            f"Expected {len(CSV_HEADER)} columns, found {len(row)}.", line
        )
    try:
        values = np.array([float(value) for value in row])
    except ValueError as e:
        raise ParseError(f"Cannot parse {row}: {e}.", line) from e
    if not np.all(np.isfinite(values)):
        raise ParseError(f"Non-finite value in {row}.", line)
    if np.linalg.norm(values[4:]) < 1e-12:
        raise InvalidQuaternion("Quaternion has zero norm.", line=line)
    return values


def load_trajectory(
    path: PathLike | str,
    label: Optional[str] = None,
    source: TrajectorySource = "recorded",
    nominal_rate: Optional[float] = None,
) -> Trajectory:
    """Load a Trajectory from a CSV file.

    The file has the header ``t,px,py,pz,qw,qx,qy,qz``; positions are in
    metres and times in seconds.

    Parameters
    ----------
    path
        Path to the CSV file.
    label, optional
        Condition label to attach.
    source, optional
        Origin of the samples, by default "recorded".
    nominal_rate, optional
        Sampling rate in Hz; estimated from the median time step if None.

    Returns
    -------
        The loaded Trajectory, named after the file stem.

    Raises
    ------
    ParseError
        If the header or a row cannot be parsed.
    InvalidQuaternion
        If a row holds a zero quaternion.
    NonMonotoneTime
        If time stamps do not strictly increase.
    JumpDetected
        If consecutive orientations are more than pi/4 apart on S3.

    """
    path = Path(path)
    rows: list[NDArray[np.float64]] = []
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise ParseError(f"Expected header {','.join(CSV_HEADER)}.", 1)

        for row in reader:
            line = reader.line_num
            values = _parse_row(row, line)
            if rows and values[0] <= rows[-1][0]:
                raise NonMonotoneTime(
                    f"Time {values[0]} does not exceed {rows[-1][0]}.", line
                )
            if rows:
                arc = float(
                    d_arc_many(
                        UnitQuaternion.from_array(rows[-1][4:]),
                        normalised(values[4:]),
                    )
                )
                if arc > MAX_STEP_ARC:
                    raise JumpDetected(
                        f"Orientation jumps by an arc of {arc:.3f} rad.", line
                    )
            rows.append(values)

    if not rows:
        raise ParseError("File holds no samples.", 2)

    data = np.array(rows)
    if nominal_rate is None:
        nominal_rate = (
            1.0 / float(np.median(np.diff(data[:, 0])))
            if len(data) > 1
            else DEFAULT_RATE
        )

    logger.debug("Loaded %d samples from %s.", len(data), path)
    return Trajectory(
        times=data[:, 0],
        positions=data[:, 1:4],
        rotations=data[:, 4:],
        label=label,
        source=source,
        nominal_rate=nominal_rate,
        name=path.stem,
    )


def save_trajectory(trajectory: Trajectory, path: PathLike | str) -> Path:
    """Save a Trajectory as CSV (UTF-8, LF line endings).

    Values are written with `repr`, so reloading restores them exactly.

    Parameters
    ----------
    trajectory
        Trajectory to save.
    path
        Destination file.

    Returns
    -------
        Path of the written file.

    """
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for t, p, q in zip(
            trajectory.times, trajectory.positions, trajectory.rotations
        ):
            writer.writerow([repr(float(value)) for value in (t, *p, *q)])
    return path


def derive_velocities(
    trajectory: Trajectory,
) -> list[tuple[DualQuaternionPose, TangentVelocity]]:
    """Get (pose, velocity) training pairs of a trajectory.

    Velocities are per time step: v_TS = tangent_log(q(t), q(t+1)) and
    p_dot = p(t+1) - p(t).

    Parameters
    ----------
    trajectory
        A trajectory with at least two samples.

    Returns
    -------
        One pair per consecutive sample pair (n - 1 in total).

    Raises
    ------
    AntipodalPair
        If two consecutive orientations are 90 degrees apart on S3, tagged
        with the index of the first sample.

    """
    if len(trajectory) < 2:
        raise ValueError("Need at least two samples to derive velocities.")

    pairs = []
    poses = trajectory.poses
    for index, (pose, pose_next) in enumerate(zip(poses[:-1], poses[1:])):
        try:
            v_ts = tangent_log(pose.q_re, pose_next.q_re)
        except AntipodalPair as e:
            raise AntipodalPair(str(e), index=index) from e
        p_dot = trajectory.positions[index + 1] - trajectory.positions[index]
        pairs.append((pose, TangentVelocity(v_ts, p_dot)))
    return pairs


def training_pairs(
    trajectories: list[Trajectory],
) -> tuple[list[DualQuaternionPose], NDArray[np.float64]]:
    """Get GP inputs and (n, 6) velocity targets from several trajectories."""
    inputs: list[DualQuaternionPose] = []
    targets: list[NDArray[np.float64]] = []
    for trajectory in trajectories:
        for pose, velocity in derive_velocities(trajectory):
            inputs.append(pose)
            targets.append(velocity.as_array())
    return inputs, np.array(targets).reshape(-1, 6)
