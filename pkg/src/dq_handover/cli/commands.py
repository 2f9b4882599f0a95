"""Module implementing the synth, train, classify, predict and eval steps.

All outputs of a run live under `RunConfig.out`:

    manifest.json, trajectories/*.csv   synth
    models/<label>.json                 train
    reports/split.json, train.json      train
    reports/classify.json               classify
    reports/nomination_steps.csv        classify
    reports/traces/<name>.csv           classify
    reports/predict.json, rmse.csv      predict
    summary.json                        eval

JSON files are written with sorted keys and no time stamps, so a rerun with
the same configuration reproduces them byte for byte.

"""

import csv
import json
import logging
from collections import defaultdict
from pathlib import Path
from typing import (
    Any,
    Optional,
)

import numpy as np
from numpy.typing import NDArray

from dq_handover.classifier.conditions import (
    ConditionModel,
    ConditionSet,
)
from dq_handover.classifier.report import (
    ClassificationReport,
    classify_stream,
)
from dq_handover.cli.config import RunConfig
from dq_handover.data.dataset import (
    group_by_label,
    load_dataset,
    split,
    write_dataset,
)
from dq_handover.data.synthetic import generate_synthetic
from dq_handover.data.trajectory import (
    Trajectory,
    training_pairs,
)
from dq_handover.geometry.dual_quaternion import d_mag
from dq_handover.gp.dynamics import (
    rollout,
    step,
)
from dq_handover.gp.model import (
    DIMENSION_NAMES,
    GpModel,
    fit,
    predict,
)
from dq_handover.gp.persistence import (
    load_model,
    save_model,
)
from dq_handover.helpers.errors import (
    ConfigError,
    DivergenceDetected,
    InsufficientData,
    MissingReport,
)

logger = logging.getLogger(__name__)

PROBABILITY_TOLERANCE = 1e-9


def _write_json(path: Path, data: dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, sort_keys=True, indent=2)
        f.write("\n")
    logger.info("Wrote %s.", path)
    return path


def _read_json(path: Path) -> dict[str, Any]:
    if not path.is_file():
        raise MissingReport(f"Required report {path} does not exist.")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def _write_table(path: Path, header: list[str], rows: list[list[Any]]):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.info("Wrote %s.", path)


def _mean_std(
    values: list[float],
) -> tuple[Optional[float], Optional[float]]:
    if not values:
        return None, None
    return float(np.mean(values)), float(np.std(values))


def _reports_dir(cfg: RunConfig) -> Path:
    return cfg.out_dir / "reports"


def _models_dir(cfg: RunConfig) -> Path:
    return cfg.out_dir / "models"


def cmd_synth(cfg: RunConfig) -> Path:
    """Generate the synthetic dataset and its manifest.

    Returns
    -------
        Path of the written manifest.

    """
    trajectories = generate_synthetic(cfg.synth_spec())
    return write_dataset(
        trajectories, cfg.out_dir, metadata={"config": cfg.to_dict()}
    )


def cmd_train(cfg: RunConfig) -> Path:
    """Split the dataset and fit one GP per condition.

    The split is recorded in `reports/split.json`; fitted hyperparameters,
    LML and restart history go to `reports/train.json` and are printed.

    Returns
    -------
        Directory of the model files.

    Raises
    ------
    InsufficientData
        If a condition has too few trajectories for the split.

    """
    trajectories = load_dataset(cfg.manifest)
    train, test = split(trajectories, cfg.train_k, cfg.seed)
    _write_json(
        _reports_dir(cfg) / "split.json",
        {
            "config": cfg.to_dict(),
            "train": [trajectory.name for trajectory in train],
            "test": [trajectory.name for trajectory in test],
        },
    )

    models_dir = _models_dir(cfg)
    models_dir.mkdir(parents=True, exist_ok=True)
    summary: dict[str, Any] = {}
    print(
        f"{'condition':<10}{'dimension':<10}{'sigma_f':>12}"
        f"{'length':>12}{'sigma_n':>12}{'lml':>14}"
    )
    for label, group in group_by_label(train).items():
        inputs, targets = training_pairs(group)
        model = fit(
            inputs,
            targets,
            cfg.optimiser_config(),
            label=label,
            metric=cfg.gp_metric,
        )
        save_model(model, models_dir / f"{label}.json")

        dimensions = []
        for record, hp in zip(model.fit_records, model.hyperparameters):
            name = DIMENSION_NAMES[record.dimension]
            dimensions.append(
                {
                    "dimension": name,
                    "sigma_f": hp.sigma_f,
                    "length_scale": hp.length_scale,
                    "sigma_n": hp.sigma_n,
                    "lml": record.lml,
                    "restart_lml": list(record.restart_lml),
                    "best_so_far": list(record.best_so_far),
                }
            )
            print(
                f"{label:<10}{name:<10}{hp.sigma_f:>12.4e}"
                f"{hp.length_scale:>12.4e}{hp.sigma_n:>12.4e}"
                f"{record.lml:>14.2f}"
            )
        summary[label] = {
            "n_trajectories": len(group),
            "n_points": len(model),
            "metric": model.metric,
            "dimensions": dimensions,
        }

    _write_json(
        _reports_dir(cfg) / "train.json",
        {"config": cfg.to_dict(), "conditions": summary},
    )
    return models_dir


def _load_split(cfg: RunConfig) -> tuple[list[Trajectory], list[Trajectory]]:
    record = _read_json(_reports_dir(cfg) / "split.json")
    by_name = {t.name: t for t in load_dataset(cfg.manifest)}
    missing = sorted(
        set(record["train"] + record["test"]).difference(by_name)
    )
    if missing:
        raise ConfigError(
            f"Dataset {cfg.manifest} lacks split trajectories: "
            f"{', '.join(missing)}."
        )
    return (
        [by_name[name] for name in record["train"]],
        [by_name[name] for name in record["test"]],
    )


def _load_models(cfg: RunConfig) -> dict[str, GpModel]:
    paths = sorted(_models_dir(cfg).glob("*.json"))
    if not paths:
        raise MissingReport(f"No model files in {_models_dir(cfg)}.")
    return {path.stem: load_model(path) for path in paths}


def load_conditions(
    cfg: RunConfig,
    train: list[Trajectory],
) -> ConditionSet:
    """Get the known conditions from the model files and training data."""
    groups = group_by_label(train)
    conditions = []
    for label, model in _load_models(cfg).items():
        if label not in groups:
            raise InsufficientData(label, "no training trajectories")
        conditions.append(
            ConditionModel.from_gp(label, groups[label], model)
        )
    return ConditionSet.from_models(conditions)


def probability_sum_error(report: ClassificationReport) -> float:
    """Get the largest deviation from one of a report's per-step sums."""
    if report.steps_observed == 0:
        return 0.0
    traces = np.array(list(report.traces.values()), dtype=np.float64)
    return float(np.max(np.abs(np.nansum(traces, axis=0) - 1.0)))


def cmd_classify(cfg: RunConfig) -> dict[str, Any]:
    """Classify every test trajectory and write the classification reports.

    Returns
    -------
        The aggregate written to `reports/classify.json`.

    """
    train, test = _load_split(cfg)
    conditions = load_conditions(cfg, train)
    try:
        classifier_config = cfg.classifier_config(len(conditions))
    except ValueError as e:
        raise ConfigError(str(e)) from e
    traces_dir = _reports_dir(cfg) / "traces"
    traces_dir.mkdir(parents=True, exist_ok=True)

    reports = []
    for trajectory in sorted(test, key=lambda t: t.name):
        report = classify_stream(trajectory, conditions, classifier_config)
        report.write_traces(traces_dir / f"{report.name}.csv")
        reports.append(report)

    per_condition: dict[str, list[ClassificationReport]] = defaultdict(list)
    for report in reports:
        per_condition[report.label].append(report)

    rows = []
    conditions_summary = {}
    for label in sorted(per_condition):
        group = per_condition[label]
        nominated = [r for r in group if r.nomination_step is not None]
        mean_step, std_step = _mean_std(
            [r.nomination_step for r in nominated]
        )
        mean_fraction, std_fraction = _mean_std(
            [r.nomination_fraction for r in nominated]
        )
        n_correct = sum(r.correct for r in group)
        conditions_summary[label] = {
            "n_trajectories": len(group),
            "n_correct": n_correct,
            "mean_nomination_step": mean_step,
            "std_nomination_step": std_step,
            "mean_nomination_fraction": mean_fraction,
            "std_nomination_fraction": std_fraction,
        }
        rows.append(
            [
                label,
                len(group),
                n_correct,
                mean_step,
                std_step,
                mean_fraction,
                std_fraction,
            ]
        )
    _write_table(
        _reports_dir(cfg) / "nomination_steps.csv",
        [
            "condition",
            "n",
            "n_correct",
            "mean_step",
            "std_step",
            "mean_fraction",
            "std_fraction",
        ],
        rows,
    )

    fractions = [
        r.nomination_fraction for r in reports if r.nomination_step is not None
    ]
    summary = {
        "config": cfg.to_dict(),
        "n_trajectories": len(reports),
        "n_correct": sum(r.correct for r in reports),
        "n_exhausted": sum(r.nominated is None for r in reports),
        "accuracy": (
            sum(r.correct for r in reports) / len(reports) if reports else 0.0
        ),
        "mean_nomination_fraction": _mean_std(fractions)[0],
        "max_probability_sum_error": max(
            (probability_sum_error(r) for r in reports), default=0.0
        ),
        "conditions": conditions_summary,
        "trajectories": [
            {
                key: value
                for key, value in r.to_dict().items()
                if key != "traces"
            }
            for r in reports
        ],
    }
    _write_json(_reports_dir(cfg) / "classify.json", summary)
    print(
        f"Classified {len(reports)} trajectories: accuracy "
        f"{summary['accuracy']:.3f}, mean nomination fraction "
        f"{summary['mean_nomination_fraction']}."
    )
    return summary


class RmseAccumulator:
    """Running root mean square of a stream of errors."""

    def __init__(self):
        self.count = 0
        self.mean_square = 0.0

    def add(self, error: float):
        """Add one error to the running mean of squares."""
        self.count += 1
        self.mean_square += (error**2 - self.mean_square) / self.count

    @property
    def value(self) -> float:
        """Root mean square of the errors added so far."""
        return float(np.sqrt(self.mean_square))


def one_step_errors(
    model: GpModel,
    trajectory: Trajectory,
    start: int = 0,
) -> NDArray[np.float64]:
    """Get d_mag errors of one-step GP predictions along a trajectory.

    Parameters
    ----------
    model
        Model predicting the velocities.
    trajectory
        Ground truth.
    start, optional
        Sample index of the first prediction, by default 0.

    Returns
    -------
        d_mag(predicted next pose, true next pose) for every sample from
        `start` to the second to last.

    """
    errors = []
    for index in range(start, len(trajectory) - 1):
        pose = trajectory.pose(index)
        predicted = step(pose, predict(model, pose).mean)
        errors.append(d_mag(predicted, trajectory.pose(index + 1)))
    return np.array(errors, dtype=np.float64)


def _prediction_start(
    trajectory: Trajectory,
    nominations: dict[str, dict[str, Any]],
    cfg: RunConfig,
) -> tuple[Optional[str], Optional[int]]:
    entry = nominations.get(trajectory.name)
    if cfg.oracle_labels:
        step_number = entry["nomination_step"] if entry else None
        return trajectory.label, (step_number or 1) - 1
    if entry is None or entry["nominated"] is None:
        return None, None
    return entry["nominated"], entry["nomination_step"] - 1


def cmd_predict(cfg: RunConfig) -> dict[str, Any]:
    """Evaluate GP velocity predictions from the nomination step onward.

    Each test trajectory is predicted with the model of its nominated
    condition (or its true condition with `oracle_labels`), one step at a
    time from the pose at the nomination step. A rollout from the same pose
    gives the final-pose error.

    Returns
    -------
        The aggregate written to `reports/predict.json`.

    Raises
    ------
    MissingReport
        If no classification report exists and `oracle_labels` is off.

    """
    _, test = _load_split(cfg)
    models = _load_models(cfg)
    classify_path = _reports_dir(cfg) / "classify.json"
    if classify_path.is_file():
        classified = _read_json(classify_path)["trajectories"]
    elif cfg.oracle_labels:
        classified = []
    else:
        raise MissingReport(f"Required report {classify_path} does not exist.")
    nominations = {entry["name"]: entry for entry in classified}

    entries = []
    pooled: list[NDArray[np.float64]] = []
    per_condition: dict[str, list[float]] = defaultdict(list)
    max_gap = 0.0
    for trajectory in sorted(test, key=lambda t: t.name):
        label, start = _prediction_start(trajectory, nominations, cfg)
        entry: dict[str, Any] = {
            "name": trajectory.name,
            "label": trajectory.label,
            "model": label,
            "start_step": None if start is None else start + 1,
            "n_predictions": 0,
            "rmse": None,
            "rmse_streaming": None,
            "rollout_final_error": None,
            "rollout_diverged_at": None,
        }
        entries.append(entry)
        if label is None or start is None or start >= len(trajectory) - 1:
            logger.warning("No predictions for %s.", trajectory.name)
            continue

        model = models[label]
        errors = one_step_errors(model, trajectory, start)
        accumulator = RmseAccumulator()
        for error in errors:
            accumulator.add(float(error))
        rmse = float(np.sqrt(np.mean(np.square(errors))))
        max_gap = max(max_gap, abs(rmse - accumulator.value))
        pooled.append(errors)
        per_condition[trajectory.label].append(rmse)
        entry.update(
            n_predictions=len(errors),
            rmse=rmse,
            rmse_streaming=accumulator.value,
        )

        try:
            predicted = rollout(
                model,
                trajectory.pose(start),
                len(trajectory) - 1 - start,
                cfg.rollout_config(),
            )
            entry["rollout_final_error"] = d_mag(
                predicted.pose(len(predicted) - 1),
                trajectory.pose(len(trajectory) - 1),
            )
        except DivergenceDetected as e:
            entry["rollout_diverged_at"] = start + 1 + e.step

    rows = []
    conditions_summary = {}
    for condition in sorted(per_condition):
        mean_rmse, std_rmse = _mean_std(per_condition[condition])
        conditions_summary[condition] = {
            "n_trajectories": len(per_condition[condition]),
            "mean_rmse": mean_rmse,
            "std_rmse": std_rmse,
        }
        rows.append(
            [condition, len(per_condition[condition]), mean_rmse, std_rmse]
        )
    _write_table(
        _reports_dir(cfg) / "rmse.csv",
        ["condition", "n", "mean_rmse", "std_rmse"],
        rows,
    )

    all_errors = np.concatenate(pooled) if pooled else np.array([])
    overall = (
        float(np.sqrt(np.mean(np.square(all_errors))))
        if all_errors.size
        else None
    )
    summary = {
        "config": cfg.to_dict(),
        "overall_rmse": overall,
        "overall_rmse_text": None if overall is None else f"{overall:.4g}",
        "max_rmse_order_gap": max_gap,
        "conditions": conditions_summary,
        "trajectories": entries,
    }
    _write_json(_reports_dir(cfg) / "predict.json", summary)
    print(f"Overall one-step RMSE: {summary['overall_rmse_text']}.")
    return summary


def _check(name: str, value: Any, threshold: float, passed: bool) -> dict:
    return {
        "name": name,
        "value": value,
        "threshold": threshold,
        "passed": bool(passed),
    }


def cmd_eval(cfg: RunConfig) -> int:
    """Merge the reports into `summary.json` and check acceptance.

    Returns
    -------
        0 if every acceptance threshold is met, 1 otherwise.

    Raises
    ------
    MissingReport
        If the classification or prediction report does not exist.

    """
    classified = _read_json(_reports_dir(cfg) / "classify.json")
    predicted = _read_json(_reports_dir(cfg) / "predict.json")

    fraction = classified["mean_nomination_fraction"]
    rmse_threshold = cfg.rmse_factor * cfg.noise_floor
    condition_rmse = [
        values["mean_rmse"] for values in predicted["conditions"].values()
    ]
    worst_rmse = max(condition_rmse) if condition_rmse else None
    checks = [
        _check(
            "accuracy",
            classified["accuracy"],
            cfg.min_accuracy,
            classified["accuracy"] >= cfg.min_accuracy,
        ),
        _check(
            "mean_nomination_fraction",
            fraction,
            cfg.max_nomination_fraction,
            fraction is not None and fraction <= cfg.max_nomination_fraction,
        ),
        _check(
            "max_probability_sum_error",
            classified["max_probability_sum_error"],
            PROBABILITY_TOLERANCE,
            classified["max_probability_sum_error"] <= PROBABILITY_TOLERANCE,
        ),
        _check(
            "max_condition_rmse",
            worst_rmse,
            rmse_threshold,
            worst_rmse is not None and worst_rmse <= rmse_threshold,
        ),
    ]
    passed = all(check["passed"] for check in checks)

    _write_json(
        cfg.out_dir / "summary.json",
        {
            "config": cfg.to_dict(),
            "classification": {
                key: classified[key]
                for key in (
                    "n_trajectories",
                    "n_correct",
                    "n_exhausted",
                    "accuracy",
                    "mean_nomination_fraction",
                    "max_probability_sum_error",
                    "conditions",
                )
            },
            "prediction": {
                key: predicted[key]
                for key in ("overall_rmse", "overall_rmse_text", "conditions")
            },
            "checks": checks,
            "passed": passed,
        },
    )

    print(f"{'check':<28}{'value':>14}{'threshold':>14}  result")
    for check in checks:
        value = check["value"]
        shown = "n/a" if value is None else f"{value:.4g}"
        print(
            f"{check['name']:<28}{shown:>14}{check['threshold']:>14.4g}  "
            f"{'pass' if check['passed'] else 'FAIL'}"
        )
    return 0 if passed else 1
