"""Module to deal with labelled trajectory datasets and their manifests."""

import json
import logging
from collections import defaultdict
from os import PathLike
from pathlib import Path
from typing import (
    Any,
    Optional,
)

import numpy as np

from dq_handover.data.trajectory import (
    Trajectory,
    load_trajectory,
    save_trajectory,
)
from dq_handover.helpers.errors import InsufficientData

logger = logging.getLogger(__name__)

MANIFEST_VERSION = 1
TRAJECTORY_DIRECTORY = "trajectories"


def group_by_label(
    trajectories: list[Trajectory],
) -> dict[str, list[Trajectory]]:
    """Get trajectories grouped by condition label, labels sorted.

    Raises
    ------
    ValueError
        If a trajectory carries no label.

    """
    groups: dict[str, list[Trajectory]] = defaultdict(list)
    for trajectory in trajectories:
        if trajectory.label is None:
            raise ValueError(f"{trajectory!r} carries no condition label.")
        groups[trajectory.label].append(trajectory)
    return {label: groups[label] for label in sorted(groups)}


def split(
    trajectories: list[Trajectory],
    train_k: int = 15,
    seed: int = 0,
) -> tuple[list[Trajectory], list[Trajectory]]:
    """Split a labelled dataset into training and test trajectories.

    For each condition (in sorted label order) a seeded permutation selects
    `train_k` training trajectories; the rest are kept for testing. Both sets
    keep the input order.

    Parameters
    ----------
    trajectories
        Labelled trajectories.
    train_k, optional
        Training trajectories per condition, by default 15.
    seed, optional
        Seed of the permutation, by default 0.

    Returns
    -------
        Training and test trajectories.

    Raises
    ------
    InsufficientData
        If a condition has fewer than train_k + 1 trajectories.

    """
    rng = np.random.default_rng(seed)
    train_ids: set[int] = set()
    for label, group in group_by_label(trajectories).items():
        if len(group) < train_k + 1:
            raise InsufficientData(
                label,
                f"{len(group)} trajectories cannot be split into {train_k} "
                "training trajectories and a test set",
            )
        chosen = rng.permutation(len(group))[:train_k]
        train_ids.update(id(group[index]) for index in chosen)

    train = [t for t in trajectories if id(t) in train_ids]
    test = [t for t in trajectories if id(t) not in train_ids]
    return train, test


def write_dataset(
    trajectories: list[Trajectory],
    directory: PathLike | str,
    metadata: Optional[dict[str, Any]] = None,
) -> Path:
    """Write trajectory CSV files and a manifest listing them.

    Parameters
    ----------
    trajectories
        Named, labelled trajectories.
    directory
        Output directory; CSV files go to its `trajectories/` sub-directory.
    metadata, optional
        JSON-serialisable description of how the data were produced.

    Returns
    -------
        Path of the written `manifest.json`.

    """
    directory = Path(directory)
    (directory / TRAJECTORY_DIRECTORY).mkdir(parents=True, exist_ok=True)

    entries = []
    for trajectory in trajectories:
        relative = Path(TRAJECTORY_DIRECTORY) / f"{trajectory.name}.csv"
        save_trajectory(trajectory, directory / relative)
        entries.append(
            {
                "name": trajectory.name,
                "label": trajectory.label,
                "source": trajectory.source,
                "nominal_rate": trajectory.nominal_rate,
                "file": relative.as_posix(),
            }
        )

    manifest = directory / "manifest.json"
    with open(manifest, "w", encoding="utf-8", newline="\n") as f:
        json.dump(
            {
                "format_version": MANIFEST_VERSION,
                "metadata": metadata or {},
                "trajectories": entries,
            },
            f,
            indent=2,
        )
        f.write("\n")
    logger.info("Wrote %d trajectories to %s.", len(entries), directory)
    return manifest


def read_manifest(path: PathLike | str) -> dict[str, Any]:
    """Read a dataset manifest."""
    with open(Path(path), "r", encoding="utf-8") as f:
        manifest = json.load(f)
    if manifest.get("format_version") != MANIFEST_VERSION:
        raise ValueError(
            f"Unsupported manifest version {manifest.get('format_version')}."
        )
    return manifest


def load_dataset(path: PathLike | str) -> list[Trajectory]:
    """Load every trajectory listed in a manifest, with its label.

    Parameters
    ----------
    path
        Path to `manifest.json`; file entries are relative to it.

    Returns
    -------
        Trajectories in manifest order.

    """
    path = Path(path)
    manifest = read_manifest(path)
    return [
        load_trajectory(
            path.parent / entry["file"],
            label=entry.get("label"),
            source=entry.get("source", "recorded"),
            nominal_rate=entry.get("nominal_rate"),
        )
        for entry in manifest["trajectories"]
    ]
