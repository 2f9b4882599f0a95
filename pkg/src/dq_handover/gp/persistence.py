"""Module to save and load GP models as self-describing JSON files."""

import json
import logging
import typing
from dataclasses import asdict
from os import PathLike
from pathlib import Path
from typing import Any

from dq_handover.geometry.dual_quaternion import DualQuaternionPose
from dq_handover.gp.model import (
    FitRecord,
    GpModel,
)
from dq_handover.helpers.helpers import PoseMetric
from dq_handover.kernels.gram import JitterPolicy
from dq_handover.kernels.kernels import Hyperparameters

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
METRIC_VERSION = "v1"
METRICS = {
    f"{metric}/{METRIC_VERSION}": metric
    for metric in typing.get_args(PoseMetric)
}


def model_to_dict(model: GpModel) -> dict[str, Any]:
    """Get the canonical (fixed field order) dictionary of a model."""
    return {
        "format_version": FORMAT_VERSION,
        "metric": f"{model.metric}/{METRIC_VERSION}",
        "label": model.label,
        "hyperparameters": [
            {
                "sigma_f": hp.sigma_f,
                "length_scale": hp.length_scale,
                "sigma_n": hp.sigma_n,
            }
            for hp in model.hyperparameters
        ],
        "jitter_policy": asdict(model.jitter_policy),
        "fit_records": [
            {
                "dimension": record.dimension,
                "restart_lml": list(record.restart_lml),
                "best_so_far": list(record.best_so_far),
            }
            for record in model.fit_records
        ],
        "inputs": [pose.as_array().tolist() for pose in model.inputs],
        "targets": model.targets.tolist(),
    }


def model_from_dict(data: dict[str, Any]) -> GpModel:
    """Initialise a GpModel from its dictionary form.

    Raises
    ------
    ValueError
        If the format version or metric identifier is not supported.

    """
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(
            f"Unsupported model format version {data.get('format_version')}."
        )
    if data.get("metric") not in METRICS:
        raise ValueError(f"Unsupported model metric {data.get('metric')!r}.")

    return GpModel.build(
        [DualQuaternionPose.from_array(values) for values in data["inputs"]],
        data["targets"],
        [Hyperparameters(**values) for values in data["hyperparameters"]],
        jitter_policy=JitterPolicy(**data.get("jitter_policy", {})),
        fit_records=tuple(
            FitRecord(
                dimension=record["dimension"],
                restart_lml=tuple(record["restart_lml"]),
                best_so_far=tuple(record["best_so_far"]),
            )
            for record in data.get("fit_records", [])
        ),
        label=data.get("label"),
        metric=METRICS[data["metric"]],
    )


def save_model(model: GpModel, path: PathLike | str) -> Path:
    """Save a GpModel as JSON.

    Parameters
    ----------
    model
        Model to save.
    path
        Destination file.

    Returns
    -------
        Path of the written file.

    """
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(model_to_dict(model), f, indent=1)
        f.write("\n")
    logger.info("Saved model %s to %s.", model.label, path)
    return path


def load_model(path: PathLike | str) -> GpModel:
    """Load a GpModel saved with `save_model()`."""
    with open(Path(path), "r", encoding="utf-8") as f:
        return model_from_dict(json.load(f))
