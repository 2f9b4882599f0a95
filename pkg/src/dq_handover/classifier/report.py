"""Module to classify whole trajectories and report the outcome."""

import csv
import json
import logging
from dataclasses import (
    dataclass,
    field,
)
from os import PathLike
from pathlib import Path
from typing import (
    Any,
    Optional,
)

import numpy as np

from dq_handover.classifier.conditions import (
    ConditionModel,
    ConditionSet,
)
from dq_handover.classifier.decision import (
    ClassifierConfig,
    ClassifierState,
    DecisionRule,
    EliminationEvent,
    Exhausted,
    Nominated,
    advance,
)
from dq_handover.data.trajectory import Trajectory

logger = logging.getLogger(__name__)


@dataclass(kw_only=True)
class ClassificationReport:
    """Outcome of classifying one trajectory.

    Attributes
    ----------
    name
        Name of the trajectory.
    label
        True condition of the trajectory, if known.
    n_steps
        Length of the trajectory.
    nominated
        Nominated condition, None when the stream was exhausted.
    nomination_step
        1-based step of the nomination.
    nomination_rule
        Rule that nominated the condition.
    eliminations
        Elimination events, in order.
    traces
        Per-condition probability traces up to the last processed step; NaN
        after elimination.

    """

    name: str
    label: Optional[str]
    n_steps: int
    nominated: Optional[str] = None
    nomination_step: Optional[int] = None
    nomination_rule: Optional[DecisionRule] = None
    eliminations: list[EliminationEvent] = field(default_factory=list)
    traces: dict[str, list[float]] = field(default_factory=dict)

    @property
    def nomination_fraction(self) -> Optional[float]:
        """Fraction of the trajectory seen before the nomination."""
        if self.nomination_step is None:
            return None
        return self.nomination_step / self.n_steps

    @property
    def correct(self) -> bool:
        """Whether the nominated condition is the true one."""
        return self.nominated is not None and self.nominated == self.label

    @property
    def steps_observed(self) -> int:
        """Number of poses processed."""
        return max((len(trace) for trace in self.traces.values()), default=0)

    def to_dict(self) -> dict[str, Any]:
        """Get a JSON-compatible dictionary; NaN probabilities become None."""
        return {
            "name": self.name,
            "label": self.label,
            "n_steps": self.n_steps,
            "nominated": self.nominated,
            "nomination_step": self.nomination_step,
            "nomination_fraction": self.nomination_fraction,
            "nomination_rule": self.nomination_rule,
            "correct": self.correct,
            "eliminations": [
                {"label": e.label, "step": e.step, "rule": e.rule}
                for e in self.eliminations
            ],
            "traces": {
                label: [None if np.isnan(p) else p for p in trace]
                for label, trace in self.traces.items()
            },
        }

    def to_json(self) -> str:
        """Get the report as a JSON string with sorted keys."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def write_traces(self, path: PathLike | str) -> Path:
        """Write the probability traces as CSV, one row per step.

        Eliminated conditions have empty cells from the step after their
        elimination.

        """
        path = Path(path)
        labels = list(self.traces)
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["step", *labels])
            for index in range(self.steps_observed):
                row: list[str] = [str(index + 1)]
                for label in labels:
                    p = self.traces[label][index]
                    row.append("" if np.isnan(p) else repr(float(p)))
                writer.writerow(row)
        return path


def classify_stream(
    trajectory: Trajectory,
    models: ConditionSet | list[ConditionModel],
    cfg: Optional[ClassifierConfig] = None,
) -> ClassificationReport:
    """Classify a trajectory by streaming its poses through the rules.

    Poses are fed one at a time and nothing beyond the nomination step is
    read.

    Parameters
    ----------
    trajectory
        The stream to classify.
    models
        At least two known conditions.
    cfg, optional
        Rule thresholds, by default `ClassifierConfig.for_conditions(N)`.

    Returns
    -------
        ClassificationReport of the stream.

    """
    conditions = (
        models
        if isinstance(models, ConditionSet)
        else ConditionSet.from_models(models)
    )
    if len(conditions) < 2:
        raise ValueError("At least two conditions are required.")
    if cfg is None:
        cfg = ClassifierConfig.for_conditions(len(conditions))
    cfg.check(len(conditions))

    state = ClassifierState.start(conditions.labels)
    for index in range(len(trajectory)):
        advance(state, trajectory.pose(index), conditions, cfg)
        if state.terminated:
            break
    state.finish()

    report = ClassificationReport(
        name=trajectory.name or "unnamed",
        label=trajectory.label,
        n_steps=len(trajectory),
        eliminations=list(state.eliminations),
        traces={
            label: list(state.prob_trace[label]) for label in state.labels
        },
    )
    match state.outcome:
        case Nominated(label=label, step=step, rule=rule):
            report.nominated = label
            report.nomination_step = step
            report.nomination_rule = rule
        case Exhausted():
            pass
    logger.info(
        "Classified %s as %s after %d of %d steps.",
        trajectory.name,
        report.nominated,
        state.step,
        len(trajectory),
    )
    return report
