"""Module to deal with the known conditions a stream is classified into."""

from collections import UserDict
from dataclasses import (
    dataclass,
    field,
)
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from dq_handover.data.trajectory import Trajectory
from dq_handover.gp.model import GpModel
from dq_handover.helpers.errors import InsufficientData
from dq_handover.helpers.helpers import geometric_mean
from dq_handover.kernels.kernels import Hyperparameters


def condition_hyperparameters(gp: GpModel) -> Hyperparameters:
    """Get one k_mag hyperparameter set from a condition's six GP sets.

    Signal magnitude and length scale are geometric means over the output
    dimensions. The observation noise of the velocity GPs does not carry
    over: the Mahalanobis covariance is the noise-free k_mag Gram matrix.

    Parameters
    ----------
    gp
        The condition's fitted GP.

    Returns
    -------
        Hyperparameters for the condition's Mahalanobis distance, with
        sigma_n = 0.

    """
    return Hyperparameters(
        sigma_f=geometric_mean([hp.sigma_f for hp in gp.hyperparameters]),
        length_scale=geometric_mean(
            [hp.length_scale for hp in gp.hyperparameters]
        ),
    )


@dataclass(frozen=True, kw_only=True, eq=False)
class ConditionModel:
    """A known condition: its training trajectories and kernel settings.

    Attributes
    ----------
    label
        Condition label.
    trajectories
        The K >= 2 training trajectories of the condition.
    hp
        Hyperparameters of k_mag in the Mahalanobis distance.
    gp
        The condition's fitted GP, if any.
    rotations, positions
        Training poses padded with NaN to the longest trajectory, shapes
        (K, T, 4) and (K, T, 3).

    """

    label: str
    trajectories: list[Trajectory]
    hp: Hyperparameters
    gp: Optional[GpModel] = None
    rotations: NDArray[np.float64] = field(init=False, repr=False)
    positions: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self):
        if len(self.trajectories) < 2:
            raise InsufficientData(
                self.label,
                "a condition needs at least two training trajectories",
            )
        longest = max(len(trajectory) for trajectory in self.trajectories)
        rotations = np.full((len(self.trajectories), longest, 4), np.nan)
        positions = np.full((len(self.trajectories), longest, 3), np.nan)
        for j, trajectory in enumerate(self.trajectories):
            rotations[j, : len(trajectory)] = trajectory.rotations
            positions[j, : len(trajectory)] = trajectory.positions
        object.__setattr__(self, "rotations", rotations)
        object.__setattr__(self, "positions", positions)

    def __len__(self):
        return len(self.trajectories)

    @classmethod
    def from_gp(
        cls,
        label: str,
        trajectories: list[Trajectory],
        gp: GpModel,
    ) -> "ConditionModel":
        """Initialise a ConditionModel with hyperparameters from its GP."""
        return cls(
            label=label,
            trajectories=trajectories,
            hp=condition_hyperparameters(gp),
            gp=gp,
        )


class ConditionSet(UserDict[str, ConditionModel]):
    """A class containing the known conditions.

    Simple dictionary class where the keys are condition labels and the
    values are the matching `ConditionModel`s.

    """

    def __setitem__(
        self,
        label: str,
        condition: ConditionModel,
    ):
        if not isinstance(condition, ConditionModel):
            raise TypeError("Conditions must be ConditionModels!")
        if condition.label != label:
            raise KeyError(
                f"Condition {condition.label!r} stored under {label!r}."
            )
        self.data[label] = condition

    @property
    def labels(self) -> list[str]:
        """Condition labels in sorted order."""
        return sorted(self.data)

    @classmethod
    def from_models(
        cls,
        conditions: list[ConditionModel],
    ):
        """Initialise a ConditionSet from a list of ConditionModels.

        Raises
        ------
        ValueError
            If two conditions share a label.

        """
        results = cls()
        for condition in conditions:
            if condition.label in results:
                raise ValueError(f"Duplicate condition {condition.label!r}.")
            results[condition.label] = condition
        return results
