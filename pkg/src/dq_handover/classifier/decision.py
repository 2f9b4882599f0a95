"""Module to apply the nomination and elimination rules to a pose stream.

At every step the active conditions get a probability. A condition is
nominated when its probability, or its probability integrated over the last
`window_m` steps, reaches a nomination threshold; it is eliminated when either
falls to an elimination threshold. Nominating is checked before eliminating
and a nomination ends the classification.

"""

import logging
from dataclasses import (
    dataclass,
    field,
)
from typing import (
    Literal,
    Optional,
)

import numpy as np

from dq_handover.classifier.conditions import ConditionSet
from dq_handover.classifier.similarity import (
    EIGEN_FLOOR,
    EPSILON_FLOOR,
    step_probability,
    trajectory_likelihood,
)
from dq_handover.geometry.dual_quaternion import DualQuaternionPose
from dq_handover.kernels.gram import JitterPolicy

logger = logging.getLogger(__name__)

DecisionRule = Literal["absolute", "window", "last"]

DEFAULT_ABS_NOMINATE = 0.5
DEFAULT_ABS_ELIMINATE = 0.02
DEFAULT_WINDOW_M = 40
# Window thresholds relative to window_m.
DEFAULT_WIN_NOMINATE = 0.45
DEFAULT_WIN_ELIMINATE = 0.04


@dataclass(frozen=True, kw_only=True)
class ClassifierConfig:
    """Thresholds of the decision rules.

    Attributes
    ----------
    abs_nominate
        Probability at or above which a condition is nominated.
    abs_eliminate
        Probability at or below which a condition is eliminated.
    window_m
        Number of steps of the moving window.
    win_nominate
        Window integral (probability x steps) at or above which a condition
        is nominated, by default 0.45 * window_m.
    win_eliminate
        Window integral at or below which a condition is eliminated, by
        default 0.04 * window_m.
    epsilon_floor
        Smallest Mahalanobis distance.
    eigen_floor
        Smallest eigenvalue of the Mahalanobis covariance, relative to
        sigma_f^2.
    jitter_policy
        Escalation schedule of the Gram factorisations.

    """

    abs_nominate: float = DEFAULT_ABS_NOMINATE
    abs_eliminate: float = DEFAULT_ABS_ELIMINATE
    window_m: int = DEFAULT_WINDOW_M
    win_nominate: Optional[float] = None
    win_eliminate: Optional[float] = None
    epsilon_floor: float = EPSILON_FLOOR
    eigen_floor: float = EIGEN_FLOOR
    jitter_policy: Optional[JitterPolicy] = None

    def __post_init__(self):
        if self.win_nominate is None:
            object.__setattr__(
                self, "win_nominate", DEFAULT_WIN_NOMINATE * self.window_m
            )
        if self.win_eliminate is None:
            object.__setattr__(
                self, "win_eliminate", DEFAULT_WIN_ELIMINATE * self.window_m
            )
        if not 0.0 < self.abs_eliminate < self.abs_nominate < 1.0:
            raise ValueError(
                "Need 0 < abs_eliminate < abs_nominate < 1, got "
                f"{self.abs_eliminate} and {self.abs_nominate}."
            )
        if self.window_m < 1:
            raise ValueError(
                f"window_m must be positive, got {self.window_m}."
            )
        if not 0.0 < self.win_eliminate < self.win_nominate:
            raise ValueError(
                "Need 0 < win_eliminate < win_nominate, got "
                f"{self.win_eliminate} and {self.win_nominate}."
            )
        if self.epsilon_floor <= 0.0:
            raise ValueError("epsilon_floor must be positive.")
        if self.eigen_floor < 0.0:
            raise ValueError("eigen_floor must not be negative.")

    def check(self, n_conditions: int):
        """Check the thresholds bracket a uniform split over N conditions.

        Raises
        ------
        ValueError
            If abs_eliminate < 1/N < abs_nominate or
            win_eliminate < window_m/N < win_nominate does not hold.

        """
        if n_conditions < 1:
            raise ValueError("At least one condition is required.")
        uniform = 1.0 / n_conditions
        if not self.abs_eliminate < uniform < self.abs_nominate:
            raise ValueError(
                f"Absolute thresholds ({self.abs_eliminate}, "
                f"{self.abs_nominate}) must bracket 1/{n_conditions}."
            )
        window_uniform = self.window_m * uniform
        if not self.win_eliminate < window_uniform < self.win_nominate:
            raise ValueError(
                f"Window thresholds ({self.win_eliminate}, "
                f"{self.win_nominate}) must bracket {self.window_m}/"
                f"{n_conditions}."
            )

    @classmethod
    def for_conditions(
        cls,
        n_conditions: int,
        **settings,
    ) -> "ClassifierConfig":
        """Initialise a ClassifierConfig with thresholds fit for N conditions.

        Thresholds that are omitted (or None) take the usual defaults where
        these bracket the uniform share 1/N. Otherwise a nominate threshold
        sits halfway between 1/N and 1, the absolute eliminate threshold at
        a fifth of 1/N and the window eliminate threshold at 0.4 window_m/N.
        With N = 2 this gives 0.75 and 0.75 window_m for nominating.

        Parameters
        ----------
        n_conditions
            Number of known conditions (at least two).
        **settings
            Further `ClassifierConfig` fields; None values are dropped.

        Raises
        ------
        ValueError
            If fewer than two conditions are given or the thresholds do not
            bracket the uniform share.

        """
        if n_conditions < 2:
            raise ValueError("At least two conditions are required.")
        settings = {k: v for k, v in settings.items() if v is not None}
        uniform = 1.0 / n_conditions
        window_m = settings.get("window_m", DEFAULT_WINDOW_M)
        nominate = (1.0 + uniform) / 2.0
        defaults = {
            "abs_nominate": (
                DEFAULT_ABS_NOMINATE
                if uniform < DEFAULT_ABS_NOMINATE
                else nominate
            ),
            "abs_eliminate": min(DEFAULT_ABS_ELIMINATE, 0.2 * uniform),
            "win_nominate": window_m
            * (
                DEFAULT_WIN_NOMINATE
                if uniform < DEFAULT_WIN_NOMINATE
                else nominate
            ),
            "win_eliminate": window_m
            * min(DEFAULT_WIN_ELIMINATE, 0.4 * uniform),
        }
        config = cls(**(defaults | settings))
        config.check(n_conditions)
        return config


@dataclass(frozen=True)
class Running:
    """The stream is still being classified."""


@dataclass(frozen=True)
class Nominated:
    """A condition was nominated."""

    label: str
    step: int
    rule: DecisionRule


@dataclass(frozen=True)
class Exhausted:
    """The stream ended before a nomination."""

    step: int


Outcome = Running | Nominated | Exhausted


@dataclass(frozen=True, kw_only=True)
class EliminationEvent:
    """A condition removed from the active set."""

    label: str
    step: int
    rule: DecisionRule


@dataclass(kw_only=True)
class ClassifierState:
    """Progress of the classification of one stream.

    Attributes
    ----------
    labels
        All conditions, in order.
    active
        Conditions not yet eliminated, in the order of `labels`.
    prob_trace
        Per-condition probability at each step; NaN once eliminated.
    window_integrals
        Latest window integral of each active condition.
    step
        Number of poses seen so far (the current 1-based step).
    outcome
        Running, Nominated or Exhausted.
    eliminations
        Elimination events, in order.

    """

    labels: list[str]
    active: list[str]
    prob_trace: dict[str, list[float]]
    window_integrals: dict[str, float] = field(default_factory=dict)
    step: int = 0
    outcome: Outcome = field(default_factory=Running)
    eliminations: list[EliminationEvent] = field(default_factory=list)

    @classmethod
    def start(cls, labels: list[str]) -> "ClassifierState":
        """Initialise the state of a new stream over some conditions."""
        if len(set(labels)) != len(labels):
            raise ValueError("Condition labels must be unique.")
        return cls(
            labels=list(labels),
            active=list(labels),
            prob_trace={label: [] for label in labels},
        )

    @property
    def terminated(self) -> bool:
        """Whether no further pose can be processed."""
        return not isinstance(self.outcome, Running)

    def finish(self):
        """Mark a stream that ended without nomination as exhausted."""
        if not self.terminated:
            self.outcome = Exhausted(self.step)
            logger.warning(
                "Stream ended after %d steps without a nomination.", self.step
            )


def _leader(values: dict[str, float], labels: list[str]) -> str:
    # Highest value; ties go to the condition listed first.
    return max(values, key=lambda label: (values[label], -labels.index(label)))


def _nominate(state: ClassifierState, label: str, rule: DecisionRule):
    state.outcome = Nominated(label, state.step, rule)
    logger.info(
        "Nominated %s at step %d (%s rule).", label, state.step, rule
    )


def _eliminate(
    state: ClassifierState,
    labels: list[str],
    rule: DecisionRule,
):
    for label in labels:
        state.active.remove(label)
        state.window_integrals.pop(label, None)
        state.eliminations.append(
            EliminationEvent(label=label, step=state.step, rule=rule)
        )
        logger.info(
            "Eliminated %s at step %d (%s rule).", label, state.step, rule
        )


def advance(
    state: ClassifierState,
    dq: DualQuaternionPose,
    conditions: ConditionSet,
    cfg: ClassifierConfig,
) -> ClassifierState:
    """Process the next pose of a stream.

    The rules are applied in order: absolute nominate, absolute eliminate,
    then (once `window_m` steps have been seen) window nominate and window
    eliminate. A single remaining condition is nominated. Elimination never
    empties the active set; the best-scoring condition is kept.

    Parameters
    ----------
    state
        A running state; it is updated in place.
    dq
        The next pose.
    conditions
        The known conditions, keyed by label.
    cfg
        Rule thresholds.

    Returns
    -------
        The updated state.

    """
    if state.terminated:
        raise ValueError(f"Classification already ended: {state.outcome}.")

    state.step += 1
    probabilities = step_probability(
        dq,
        [conditions[label] for label in state.active],
        cfg.epsilon_floor,
        cfg.jitter_policy,
        cfg.eigen_floor,
    )
    for label in state.labels:
        state.prob_trace[label].append(probabilities.get(label, np.nan))

    leader = _leader(probabilities, state.labels)
    if probabilities[leader] >= cfg.abs_nominate:
        _nominate(state, leader, "absolute")
        return state

    eliminated = [
        label
        for label in state.active
        if probabilities[label] <= cfg.abs_eliminate and label != leader
    ]
    _eliminate(state, eliminated, "absolute")

    if state.step >= cfg.window_m:
        start = state.step - cfg.window_m + 1
        state.window_integrals = {
            label: trajectory_likelihood(
                state.prob_trace[label], start, state.step
            )
            for label in state.active
        }
        best = _leader(state.window_integrals, state.labels)
        if state.window_integrals[best] >= cfg.win_nominate:
            _nominate(state, best, "window")
            return state
        eliminated = [
            label
            for label in state.active
            if state.window_integrals[label] <= cfg.win_eliminate
            and label != best
        ]
        _eliminate(state, eliminated, "window")

    if len(state.active) == 1:
        _nominate(state, state.active[0], "last")
    return state
