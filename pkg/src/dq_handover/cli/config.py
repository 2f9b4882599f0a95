"""Module to resolve the configuration of a command-line run.

Settings are merged from the defaults below, a flat JSON config file and the
command-line flags, in that order. The resolved configuration is written into
every report.

"""

import json
import logging
import typing
from dataclasses import (
    asdict,
    dataclass,
    fields,
    replace,
)
from os import PathLike
from pathlib import Path
from typing import (
    Any,
    Optional,
)

from dq_handover.classifier.decision import ClassifierConfig
from dq_handover.data.synthetic import (
    FEASIBLE_CONDITIONS,
    SynthSpec,
    condition_from_label,
)
from dq_handover.gp.dynamics import RolloutConfig
from dq_handover.gp.model import OptimiserConfig
from dq_handover.helpers.errors import ConfigError
from dq_handover.helpers.helpers import PoseMetric

logger = logging.getLogger(__name__)


@dataclass(frozen=True, kw_only=True)
class RunConfig:
    """Every tunable of the synth, train, classify, predict and eval steps.

    Attributes
    ----------
    seed
        Seed of data generation, splitting and subsampling.
    out
        Output directory of the run.
    dataset
        Manifest to train and test on, by default `<out>/manifest.json`.
    conditions
        Labels of the conditions to generate (e.g. ["b-r", "t-u"]), by
        default every feasible condition.
    repetitions, min_steps, max_steps, noise_position, noise_angle,
    duration_jitter
        Synthetic dataset settings (see `SynthSpec`).
    train_k
        Training trajectories per condition.
    max_points, n_starts, max_iterations
        Hyperparameter search settings (see `OptimiserConfig`).
    gp_metric
        Input metric of the GPs: "d_mag" (dual-quaternion poses), "d_arc"
        (orientation only) or "product" (orientation x position).
    abs_nominate, abs_eliminate, window_m, win_nominate, win_eliminate,
    epsilon_floor, eigen_floor
        Decision rule settings (see `ClassifierConfig`); unset thresholds
        follow the number of conditions.
    oracle_labels
        Predict with the true condition's model instead of the nominated one.
    workspace_bound
        Divergence bound (m) of rollouts.
    min_accuracy, max_nomination_fraction, rmse_factor
        Acceptance thresholds of `eval`; the RMSE threshold is `rmse_factor`
        times the injected noise floor.

    """

    seed: int = 0
    out: str = "run"
    dataset: Optional[str] = None

    conditions: Optional[tuple[str, ...]] = None
    repetitions: int = 20
    min_steps: int = 404
    max_steps: int = 468
    noise_position: float = 0.005
    noise_angle: float = 0.01
    duration_jitter: bool = True

    train_k: int = 15
    max_points: Optional[int] = 300
    n_starts: int = 8
    max_iterations: int = 200
    gp_metric: str = "d_mag"

    abs_nominate: Optional[float] = None
    abs_eliminate: Optional[float] = None
    window_m: int = 40
    win_nominate: Optional[float] = None
    win_eliminate: Optional[float] = None
    epsilon_floor: float = 1e-8
    eigen_floor: float = 1.0

    oracle_labels: bool = False
    workspace_bound: float = 10.0

    min_accuracy: float = 1.0
    max_nomination_fraction: float = 0.7
    rmse_factor: float = 3.0

    def __post_init__(self):
        try:
            self.synth_spec()
            self.optimiser_config()
            self.classifier_config()
        except ValueError as e:
            raise ConfigError(str(e)) from e
        if self.gp_metric not in typing.get_args(PoseMetric):
            raise ConfigError(f"Unknown GP metric {self.gp_metric!r}.")
        if self.train_k < 2:
            raise ConfigError("train_k must be at least 2.")
        if self.workspace_bound <= 0.0 or self.rmse_factor <= 0.0:
            raise ConfigError("workspace_bound and rmse_factor must be > 0.")

    @property
    def out_dir(self) -> Path:
        """Output directory."""
        return Path(self.out)

    @property
    def manifest(self) -> Path:
        """Dataset manifest used by train, classify and predict."""
        if self.dataset is not None:
            return Path(self.dataset)
        return self.out_dir / "manifest.json"

    @property
    def noise_floor(self) -> float:
        """Per-step d_mag error expected from the injected noise alone."""
        return max(self.noise_position + self.noise_angle / 2.0, 1e-4)

    @property
    def n_conditions(self) -> int:
        """Number of conditions the run generates."""
        if self.conditions is None:
            return len(FEASIBLE_CONDITIONS)
        return len(self.conditions)

    def synth_spec(self) -> SynthSpec:
        """Get the synthetic dataset settings."""
        conditions = (
            FEASIBLE_CONDITIONS
            if self.conditions is None
            else tuple(condition_from_label(c) for c in self.conditions)
        )
        return SynthSpec(
            conditions=conditions,
            repetitions=self.repetitions,
            steps=(self.min_steps, self.max_steps),
            noise_position=self.noise_position,
            noise_angle=self.noise_angle,
            duration_jitter=self.duration_jitter,
            seed=self.seed,
        )

    def optimiser_config(self) -> OptimiserConfig:
        """Get the hyperparameter search settings."""
        return OptimiserConfig(
            n_starts=self.n_starts,
            max_iterations=self.max_iterations,
            max_points=self.max_points,
            seed=self.seed,
        )

    def classifier_config(
        self,
        n_conditions: Optional[int] = None,
    ) -> ClassifierConfig:
        """Get the decision rule settings for some number of conditions.

        By default the number of conditions the run generates is used.

        """
        return ClassifierConfig.for_conditions(
            n_conditions if n_conditions is not None else self.n_conditions,
            abs_nominate=self.abs_nominate,
            abs_eliminate=self.abs_eliminate,
            window_m=self.window_m,
            win_nominate=self.win_nominate,
            win_eliminate=self.win_eliminate,
            epsilon_floor=self.epsilon_floor,
            eigen_floor=self.eigen_floor,
        )

    def rollout_config(self) -> RolloutConfig:
        """Get the rollout settings."""
        return RolloutConfig(workspace_bound=self.workspace_bound)

    def to_dict(self) -> dict[str, Any]:
        """Get the resolved configuration as a dictionary."""
        return asdict(self)


def _coerce(name: str, value: Any, hint: Any) -> Any:
    args = typing.get_args(hint)
    optional = type(None) in args
    if optional:
        hint = next(arg for arg in args if arg is not type(None))
    if value is None:
        if optional:
            return None
        raise ConfigError(f"{name} must not be null.")

    match (typing.get_origin(hint) or hint).__name__:
        case "bool":
            if not isinstance(value, bool):
                raise ConfigError(f"{name} must be true or false.")
        case "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ConfigError(f"{name} must be an integer.")
        case "float":
            if isinstance(value, bool) or not isinstance(value, int | float):
                raise ConfigError(f"{name} must be a number.")
            value = float(value)
        case "str":
            if not isinstance(value, str | PathLike):
                raise ConfigError(f"{name} must be a string.")
            value = str(value)
        case "tuple":
            if isinstance(value, str) or not isinstance(value, list | tuple):
                raise ConfigError(f"{name} must be a list of strings.")
            if not all(isinstance(item, str) for item in value):
                raise ConfigError(f"{name} must be a list of strings.")
            value = tuple(value)
    return value


def resolve_config(
    path: Optional[PathLike | str] = None,
    overrides: Optional[dict[str, Any]] = None,
) -> RunConfig:
    """Get the RunConfig of defaults, a config file and overrides.

    Parameters
    ----------
    path, optional
        Flat JSON object of settings.
    overrides, optional
        Settings taking precedence over the file (e.g. command-line flags).

    Returns
    -------
        The resolved configuration.

    Raises
    ------
    ConfigError
        If a key is unknown, a value has the wrong type or the file is not a
        JSON object.

    """
    hints = typing.get_type_hints(RunConfig)
    known = {f.name for f in fields(RunConfig)}

    settings: dict[str, Any] = {}
    if path is not None:
        try:
            with open(Path(path), "r", encoding="utf-8") as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config {path}: {e}") from e
        if not isinstance(loaded, dict):
            raise ConfigError(f"Config {path} must hold a JSON object.")
        settings.update(loaded)
        logger.info("Read %d settings from %s.", len(loaded), path)
    settings.update(overrides or {})

    unknown = sorted(set(settings) - known)
    if unknown:
        raise ConfigError(f"Unknown config keys: {', '.join(unknown)}.")
    return replace(
        RunConfig(),
        **{
            name: _coerce(name, value, hints[name])
            for name, value in settings.items()
        },
    )
