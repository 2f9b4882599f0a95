"""Module to compare a streamed pose with the known conditions."""

import logging
from collections.abc import (
    Iterable,
    Sequence,
)
from typing import Optional

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray,
)
from scipy.integrate import trapezoid

from dq_handover.classifier.conditions import ConditionModel
from dq_handover.geometry.dual_quaternion import (
    DualQuaternionPose,
    d_mag_many,
    from_pose,
    stack_poses,
)
from dq_handover.geometry.quaternion import UnitQuaternion
from dq_handover.helpers.errors import RangeError
from dq_handover.kernels.gram import (
    JitterPolicy,
    clip_spectrum,
    factorise,
    kernel_matrix,
    pairwise_d_mag,
)
from dq_handover.kernels.kernels import Hyperparameters

logger = logging.getLogger(__name__)

EPSILON_FLOOR = 1e-8
# Smallest eigenvalue of the Mahalanobis covariance, relative to sigma_f^2.
EIGEN_FLOOR = 1.0


def mahalanobis_arrays(
    dq: DualQuaternionPose,
    rotations: ArrayLike,
    positions: ArrayLike,
    hp: Hyperparameters,
    epsilon_floor: float = EPSILON_FLOOR,
    jitter_policy: Optional[JitterPolicy] = None,
    eigen_floor: float = EIGEN_FLOOR,
) -> float:
    """Get the Mahalanobis distance of a pose from stacked reference poses.

    Array form of `mahalanobis()`; references are given as rotation (K, 4)
    and position (K, 3) arrays.

    """
    rotations = np.asarray(rotations, dtype=np.float64).reshape(-1, 4)
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    if rotations.shape[0] == 0:
        raise ValueError("At least one reference pose is required.")

    d = d_mag_many(dq, rotations, positions)
    K = kernel_matrix(pairwise_d_mag(rotations, positions), hp)
    K = clip_spectrum(K, eigen_floor * hp.sigma_f**2)
    gram_matrix = factorise(K, hp.sigma_f, jitter_policy)
    distance = float(np.sqrt(max(float(d @ gram_matrix.solve(d)), 0.0)))
    return max(distance, epsilon_floor)


def mahalanobis(
    dq: DualQuaternionPose,
    refs: list[DualQuaternionPose],
    hp: Hyperparameters,
    epsilon_floor: float = EPSILON_FLOOR,
    jitter_policy: Optional[JitterPolicy] = None,
    eigen_floor: float = EIGEN_FLOOR,
) -> float:
    """Get the Mahalanobis distance of a pose from a set of reference poses.

    The residuals are the d_mag distances from the pose to each reference and
    the covariance is the k_mag Gram matrix of the references. k_mag is not
    positive semi-definite on every point set, so eigenvalues of the Gram
    matrix below `eigen_floor` sigma_f^2 are lifted to that floor before
    factorisation. A single reference (or any matrix whose spectrum is
    already above the floor) is left untouched, giving d / sigma_f for K = 1
    with sigma_n = 0.

    Parameters
    ----------
    dq
        Query pose.
    refs
        At least one reference pose.
    hp
        Kernel hyperparameters; sigma_n^2 is added to the diagonal.
    epsilon_floor, optional
        Smallest returned distance, by default 1e-8.
    jitter_policy, optional
        Escalation schedule of the Gram factorisation.
    eigen_floor, optional
        Smallest eigenvalue of K relative to sigma_f^2, by default 1.

    Returns
    -------
        sqrt(d^T K^-1 d), at least `epsilon_floor`.

    Raises
    ------
    NotPositiveDefinite
        If the Gram matrix cannot be factorised.

    """
    if len(refs) == 0:
        raise ValueError("At least one reference pose is required.")
    rotations, positions = stack_poses(refs)
    return mahalanobis_arrays(
        dq, rotations, positions, hp, epsilon_floor, jitter_policy, eigen_floor
    )


def closest_indices(
    dq: DualQuaternionPose,
    condition: ConditionModel,
) -> NDArray[np.int_]:
    """Get, per training trajectory, the sample index closest to a pose.

    Ties go to the earliest sample; padding is never selected.

    """
    distances = d_mag_many(dq, condition.rotations, condition.positions)
    distances = np.where(np.isnan(distances), np.inf, distances)
    return np.argmin(distances, axis=1)


def _closest_arrays(
    dq: DualQuaternionPose,
    condition: ConditionModel,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    indices = closest_indices(dq, condition)
    rows = np.arange(len(condition))
    return (
        condition.rotations[rows, indices],
        condition.positions[rows, indices],
    )


def closest_poses(
    dq: DualQuaternionPose,
    condition: ConditionModel,
) -> list[DualQuaternionPose]:
    """Get the pose of each training trajectory closest to a pose in d_mag.

    Parameters
    ----------
    dq
        Query pose.
    condition
        Condition whose training trajectories are searched.

    Returns
    -------
        One pose per training trajectory, in trajectory order; ties are
        broken by the earliest time stamp.

    """
    rotations, positions = _closest_arrays(dq, condition)
    return [
        from_pose(UnitQuaternion.from_array(rotation), position)
        for rotation, position in zip(rotations, positions)
    ]


def condition_distance(
    dq: DualQuaternionPose,
    condition: ConditionModel,
    epsilon_floor: float = EPSILON_FLOOR,
    jitter_policy: Optional[JitterPolicy] = None,
    eigen_floor: float = EIGEN_FLOOR,
) -> float:
    """Get the Mahalanobis distance of a pose from a condition."""
    rotations, positions = _closest_arrays(dq, condition)
    return mahalanobis_arrays(
        dq,
        rotations,
        positions,
        condition.hp,
        epsilon_floor,
        jitter_policy,
        eigen_floor,
    )


def normalised_similarities(distances: ArrayLike) -> NDArray[np.float64]:
    """Get probabilities proportional to the inverse of positive distances."""
    similarities = 1.0 / np.asarray(distances, dtype=np.float64)
    return similarities / similarities.sum()


def step_probability(
    dq: DualQuaternionPose,
    conditions: Iterable[ConditionModel],
    epsilon_floor: float = EPSILON_FLOOR,
    jitter_policy: Optional[JitterPolicy] = None,
    eigen_floor: float = EIGEN_FLOOR,
) -> dict[str, float]:
    """Get the probability of each active condition at one step.

    Parameters
    ----------
    dq
        Current pose of the stream.
    conditions
        Active conditions (at least one).
    epsilon_floor, optional
        Smallest Mahalanobis distance, by default 1e-8.
    jitter_policy, optional
        Escalation schedule of the Gram factorisations.
    eigen_floor, optional
        Smallest covariance eigenvalue relative to sigma_f^2, by default 1.

    Returns
    -------
        Probabilities keyed by condition label, in the given order; they sum
        to one.

    """
    conditions = list(conditions)
    if len(conditions) == 0:
        raise ValueError("At least one active condition is required.")
    if len(conditions) == 1:
        return {conditions[0].label: 1.0}

    distances = [
        condition_distance(
            dq, condition, epsilon_floor, jitter_policy, eigen_floor
        )
        for condition in conditions
    ]
    probabilities = normalised_similarities(distances)
    return {
        condition.label: float(p)
        for condition, p in zip(conditions, probabilities)
    }


def trajectory_likelihood(
    prob_trace: Sequence[float] | ArrayLike,
    from_step: int,
    to_step: int,
) -> float:
    """Get the integral of a probability trace between two steps.

    Steps are 1-based. Each step owns the unit interval centred on it, so the
    end values are held for half a step on either side before the trapezoid
    rule is applied; a constant trace p over m steps integrates to m·p.

    Parameters
    ----------
    prob_trace
        Per-step probabilities of one condition.
    from_step, to_step
        Inclusive step range.

    Returns
    -------
        Integral of the trace over the range.

    Raises
    ------
    RangeError
        If the range is empty or outside the trace.

    """
    trace = np.asarray(prob_trace, dtype=np.float64)
    if not 1 <= from_step <= to_step <= len(trace):
        raise RangeError(
            f"Steps {from_step} to {to_step} are outside a trace of "
            f"{len(trace)} steps."
        )

    window = trace[from_step - 1 : to_step]
    steps = np.arange(from_step, to_step + 1, dtype=np.float64)
    values = np.concatenate([window[:1], window, window[-1:]])
    edges = np.concatenate([[from_step - 0.5], steps, [to_step + 0.5]])
    return float(trapezoid(values, x=edges))
