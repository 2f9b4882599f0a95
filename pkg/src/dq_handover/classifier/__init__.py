"""Modules to classify handover trajectories into known conditions."""

from dq_handover.classifier.conditions import (
    ConditionModel,
    ConditionSet,
    condition_hyperparameters,
)
from dq_handover.classifier.decision import (
    ClassifierConfig,
    ClassifierState,
    EliminationEvent,
    Exhausted,
    Nominated,
    Running,
    advance,
)
from dq_handover.classifier.report import (
    ClassificationReport,
    classify_stream,
)
from dq_handover.classifier.similarity import (
    closest_poses,
    mahalanobis,
    step_probability,
    trajectory_likelihood,
)

__all__ = [
    "ClassificationReport",
    "ClassifierConfig",
    "ClassifierState",
    "ConditionModel",
    "ConditionSet",
    "EliminationEvent",
    "Exhausted",
    "Nominated",
    "Running",
    "advance",
    "classify_stream",
    "closest_poses",
    "condition_hyperparameters",
    "mahalanobis",
    "step_probability",
    "trajectory_likelihood",
]
