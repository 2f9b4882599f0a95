"""Module to generate synthetic handover trajectories.

Each condition combines a grasp configuration (where and how the object is
picked up) with a handover configuration (how it is presented to the
receiver). The template motion of a condition runs from its grasp pose to its
handover pose with a minimum-jerk position profile and a constant-rate
rotation along the shortest arc; repetitions add smooth perturbations.

"""

import logging
from dataclasses import (
    dataclass,
    field,
)

import numpy as np
from numpy.typing import NDArray
from scipy.spatial.transform import (
    Rotation,
    Slerp,
)

from dq_handover.data.trajectory import (
    DEFAULT_RATE,
    Trajectory,
)
from dq_handover.helpers.helpers import (
    GraspConfiguration,
    HandoverConfiguration,
)

logger = logging.getLogger(__name__)

Condition = tuple[GraspConfiguration, HandoverConfiguration]

FEASIBLE_CONDITIONS: tuple[Condition, ...] = (
    ("bottom", "right"),
    ("bottom", "down"),
    ("bottom", "left"),
    ("bottom", "up"),
    ("top", "right"),
    ("top", "left"),
    ("top", "up"),
    ("above", "down"),
    ("above", "left"),
    ("reversed", "up"),
)

# Hand rotation (rotation vector, rad) and position (m) when grasping.
GRASP_POSES: dict[str, tuple[tuple[float, ...], tuple[float, ...]]] = {
    "bottom": ((0.0, 0.0, 0.0), (0.45, -0.20, 0.05)),
    "top": ((0.0, 2.2, 0.0), (0.45, -0.20, 0.26)),
    "above": ((0.0, 1.2, 0.0), (0.45, -0.20, 0.36)),
    "reversed": ((0.0, 0.0, 2.2), (0.40, -0.25, 0.12)),
}

# Extra hand rotation (rotation vector, rad) and offset from the handover
# point (m) when presenting the object; "up" keeps the cylinder vertical.
HANDOVER_POSES: dict[str, tuple[tuple[float, ...], tuple[float, ...]]] = {
    "right": ((-1.0, 0.0, 0.0), (0.0, -0.12, 0.0)),
    "down": ((0.0, 0.9, 0.0), (0.0, 0.0, -0.12)),
    "left": ((1.0, 0.0, 0.0), (0.0, 0.12, 0.0)),
    "up": ((0.0, 0.0, 0.0), (0.0, 0.0, 0.12)),
}

HANDOVER_POINT = (0.85, 0.25, 0.35)


def condition_label(condition: Condition) -> str:
    """Get the short label of a condition, e.g. "b-l" for bottom-left."""
    grasp, handover = condition
    return f"{grasp[0]}-{handover[0]}"


def condition_from_label(label: str) -> Condition:
    """Get the condition of a short label such as "b-l".

    Raises
    ------
    ValueError
        If no grasp x handover combination has the label.

    """
    for grasp in GRASP_POSES:
        for handover in HANDOVER_POSES:
            if condition_label((grasp, handover)) == label:
                return grasp, handover
    raise ValueError(f"Unknown condition label {label!r}.")


def minimum_jerk(phase: NDArray[np.float64]) -> NDArray[np.float64]:
    """Get the minimum-jerk profile 10s^3 - 15s^4 + 6s^5 for s in [0, 1]."""
    return phase**3 * (10.0 - 15.0 * phase + 6.0 * phase**2)


@dataclass(frozen=True, kw_only=True)
class SynthSpec:
    """Settings of the synthetic handover dataset.

    Attributes
    ----------
    conditions
        Grasp x handover combinations to generate.
    repetitions
        Trajectories per condition.
    steps
        Inclusive range of trajectory lengths (samples).
    noise_position
        Standard deviation (m) of the smooth positional perturbations.
    noise_angle
        Standard deviation (rad) of the smooth rotational perturbations.
    duration_jitter
        Draw each length from `steps`; otherwise all repetitions use the
        midpoint of the range.
    seed
        Seed of the generator.
    nominal_rate
        Sampling rate (Hz).
    feasible
        Accepted combinations.

    """

    conditions: tuple[Condition, ...] = FEASIBLE_CONDITIONS
    repetitions: int = 20
    steps: tuple[int, int] = (404, 468)
    noise_position: float = 0.005
    noise_angle: float = 0.01
    duration_jitter: bool = True
    seed: int = 0
    nominal_rate: float = DEFAULT_RATE
    feasible: tuple[Condition, ...] = field(default=FEASIBLE_CONDITIONS)

    def __post_init__(self):
        object.__setattr__(
            self, "conditions", tuple(tuple(c) for c in self.conditions)
        )
        object.__setattr__(
            self, "feasible", tuple(tuple(c) for c in self.feasible)
        )
        object.__setattr__(self, "steps", tuple(self.steps))
        for condition in self.conditions:
            if condition not in self.feasible:
                raise ValueError(f"Condition {condition} is not feasible.")
            if (
                condition[0] not in GRASP_POSES
                or condition[1] not in HANDOVER_POSES
            ):
                raise ValueError(f"Unknown configuration in {condition}.")
        if len(set(self.conditions)) != len(self.conditions):
            raise ValueError("Conditions must not repeat.")
        if self.repetitions < 1:
            raise ValueError("At least one repetition is required.")
        if not 2 <= self.steps[0] <= self.steps[1]:
            raise ValueError(f"Invalid step range {self.steps}.")
        if self.noise_position < 0.0 or self.noise_angle < 0.0:
            raise ValueError("Noise levels must be non-negative.")


def condition_endpoints(
    condition: Condition,
) -> tuple[Rotation, NDArray[np.float64], Rotation, NDArray[np.float64]]:
    """Get the template start and end poses of a condition.

    Returns
    -------
        Start rotation, start position, end rotation, end position.

    """
    grasp, handover = condition
    grasp_rotvec, grasp_position = GRASP_POSES[grasp]
    handover_rotvec, handover_offset = HANDOVER_POSES[handover]
    start_rotation = Rotation.from_rotvec(grasp_rotvec)
    end_rotation = Rotation.from_rotvec(handover_rotvec) * start_rotation
    end_position = np.add(HANDOVER_POINT, handover_offset)
    return (
        start_rotation,
        np.array(grasp_position),
        end_rotation,
        end_position,
    )


def _repetition(
    condition: Condition,
    n_steps: int,
    spec: SynthSpec,
    rng: np.random.Generator,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    start_rotation, start_position, end_rotation, end_position = (
        condition_endpoints(condition)
    )
    start_rotation = start_rotation * Rotation.from_rotvec(
        rng.normal(0.0, spec.noise_angle, 3)
    )
    end_rotation = end_rotation * Rotation.from_rotvec(
        rng.normal(0.0, spec.noise_angle, 3)
    )
    start_position = start_position + rng.normal(0.0, spec.noise_position, 3)
    end_position = end_position + rng.normal(0.0, spec.noise_position, 3)
    position_bumps = rng.normal(0.0, spec.noise_position, (2, 3))
    rotation_bump = rng.normal(0.0, spec.noise_angle, 3)

    phase = np.linspace(0.0, 1.0, n_steps)
    positions = start_position + np.outer(
        minimum_jerk(phase), end_position - start_position
    )
    for k, bump in enumerate(position_bumps, start=1):
        positions += np.outer(np.sin(k * np.pi * phase), bump)

    slerp = Slerp(
        [0.0, 1.0], Rotation.concatenate([start_rotation, end_rotation])
    )
    rotations = slerp(phase) * Rotation.from_rotvec(
        np.outer(np.sin(np.pi * phase), rotation_bump)
    )
    return np.roll(rotations.as_quat(), 1, axis=1), positions


def generate_synthetic(spec: SynthSpec) -> list[Trajectory]:
    """Generate a labelled synthetic handover dataset.

    Every (condition, repetition) pair draws from its own child of the seed
    sequence, so the output is bit-reproducible for a fixed seed.

    Parameters
    ----------
    spec
        Dataset settings.

    Returns
    -------
        Trajectories ordered by condition, then repetition.

    """
    children = np.random.SeedSequence(spec.seed).spawn(
        len(spec.conditions) * spec.repetitions
    )
    midpoint = (spec.steps[0] + spec.steps[1]) // 2

    trajectories = []
    for c, condition in enumerate(spec.conditions):
        label = condition_label(condition)
        for repetition in range(spec.repetitions):
            rng = np.random.default_rng(
                children[c * spec.repetitions + repetition]
            )
            n_steps = (
                int(rng.integers(spec.steps[0], spec.steps[1] + 1))
                if spec.duration_jitter
                else midpoint
            )
            rotations, positions = _repetition(condition, n_steps, spec, rng)
            trajectories.append(
                Trajectory(
                    times=np.arange(n_steps) / spec.nominal_rate,
                    rotations=rotations,
                    positions=positions,
                    label=label,
                    source="synthetic",
                    nominal_rate=spec.nominal_rate,
                    name=f"{label}_{repetition:02d}",
                )
            )
        logger.info(
            "Generated %d repetitions of condition %s.",
            spec.repetitions,
            label,
        )
    return trajectories
