"""Modules to deal with GP regression over dual-quaternion poses."""

from dq_handover.gp.dynamics import (
    RolloutConfig,
    RolloutTrajectory,
    rollout,
    step,
)
from dq_handover.gp.model import (
    FitRecord,
    GpModel,
    OptimiserConfig,
    Prediction,
    fit,
    gaussian_log_likelihood,
    log_marginal_likelihood,
    predict,
)
from dq_handover.gp.persistence import (
    load_model,
    save_model,
)

__all__ = [
    "FitRecord",
    "GpModel",
    "OptimiserConfig",
    "Prediction",
    "RolloutConfig",
    "RolloutTrajectory",
    "fit",
    "gaussian_log_likelihood",
    "load_model",
    "log_marginal_likelihood",
    "predict",
    "rollout",
    "save_model",
    "step",
]
