"""Toolkit for classifying and predicting handover trajectories."""

from dq_handover.classifier.conditions import (
    ConditionModel,
    ConditionSet,
)
from dq_handover.classifier.decision import (
    ClassifierConfig,
    ClassifierState,
    advance,
)
from dq_handover.classifier.report import (
    ClassificationReport,
    classify_stream,
)
from dq_handover.data.synthetic import (
    SynthSpec,
    generate_synthetic,
)
from dq_handover.data.trajectory import (
    Trajectory,
    load_trajectory,
)
from dq_handover.geometry.dual_quaternion import (
    DualQuaternionPose,
    d_mag,
    from_pose,
    to_pose,
)
from dq_handover.geometry.quaternion import UnitQuaternion
from dq_handover.geometry.velocity import TangentVelocity
from dq_handover.gp.dynamics import rollout
from dq_handover.gp.model import (
    GpModel,
    fit,
    predict,
)
from dq_handover.kernels.kernels import Hyperparameters

__version__ = "0.1.0"
__all__ = (
    "ClassificationReport",
    "ClassifierConfig",
    "ClassifierState",
    "ConditionModel",
    "ConditionSet",
    "DualQuaternionPose",
    "GpModel",
    "Hyperparameters",
    "SynthSpec",
    "TangentVelocity",
    "Trajectory",
    "UnitQuaternion",
    "advance",
    "classify_stream",
    "d_mag",
    "fit",
    "from_pose",
    "generate_synthetic",
    "load_trajectory",
    "predict",
    "rollout",
    "to_pose",
)
