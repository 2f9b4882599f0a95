"""Modules to deal with trajectories, datasets and synthetic data."""

from dq_handover.data.dataset import (
    group_by_label,
    load_dataset,
    read_manifest,
    split,
    write_dataset,
)
from dq_handover.data.synthetic import (
    FEASIBLE_CONDITIONS,
    SynthSpec,
    condition_endpoints,
    condition_from_label,
    condition_label,
    generate_synthetic,
    minimum_jerk,
)
from dq_handover.data.trajectory import (
    Trajectory,
    derive_velocities,
    load_trajectory,
    save_trajectory,
    training_pairs,
)

__all__ = [
    "FEASIBLE_CONDITIONS",
    "SynthSpec",
    "Trajectory",
    "condition_endpoints",
    "condition_from_label",
    "condition_label",
    "derive_velocities",
    "generate_synthetic",
    "group_by_label",
    "load_dataset",
    "load_trajectory",
    "minimum_jerk",
    "read_manifest",
    "save_trajectory",
    "split",
    "training_pairs",
    "write_dataset",
]
