"""Module to deal with GP regression from poses to tangent velocities.

Each of the six output dimensions (v_TS, p_dot) has its own GP with a zero
prior mean, a shared input metric and its own hyperparameters. The metric is
d_mag over dual-quaternion poses by default; "d_arc" regresses on the
orientation alone and "product" uses k_arc · k_se over orientation and
position (see `pairwise_distances()`).

"""

import logging
from dataclasses import (
    dataclass,
    field,
)
from typing import Optional

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray,
)
from scipy.linalg import solve_triangular
from scipy.optimize import minimize

from dq_handover.geometry.dual_quaternion import (
    DualQuaternionPose,
    stack_poses,
)
from dq_handover.geometry.velocity import TangentVelocity
from dq_handover.helpers.errors import (
    DegenerateData,
    NotPositiveDefinite,
)
from dq_handover.helpers.helpers import PoseMetric
from dq_handover.kernels.gram import (
    GramMatrix,
    JitterPolicy,
    factorise,
    kernel_matrix,
    pairwise_distances,
    query_distances,
)
from dq_handover.kernels.kernels import (
    Hyperparameters,
    squared_exponential,
)

logger = logging.getLogger(__name__)

OUTPUT_DIMENSIONS = 6
DIMENSION_NAMES = ("v_x", "v_y", "v_z", "p_dot_x", "p_dot_y", "p_dot_z")

# Multi-start grid: length scales relative to the median pairwise distance,
# signal and noise relative to the root mean square of the targets.
_LENGTH_SCALE_GRID = (0.1, 0.3, 1.0, 3.0)
_NOISE_RATIO_GRID = (0.01, 0.3)
_PENALTY = 1e25
IDENTICAL_TOLERANCE = 1e-6


@dataclass(frozen=True, kw_only=True)
class OptimiserConfig:
    """Settings of the multi-start Nelder-Mead hyperparameter search.

    Attributes
    ----------
    n_starts
        Number of restarts taken from the fixed log-grid (at most 8).
    max_iterations
        Iteration limit of each Nelder-Mead run.
    max_points
        If set, a seeded random subset of this many training pairs is used.
    seed
        Seed of the subsampling.
    jitter_policy
        Jitter escalation used for every factorisation.

    """

    n_starts: int = 8
    max_iterations: int = 200
    max_points: Optional[int] = None
    seed: int = 0
    jitter_policy: JitterPolicy = field(default_factory=JitterPolicy)


@dataclass(frozen=True, kw_only=True)
class FitRecord:
    """Bookkeeping of the hyperparameter search of one output dimension.

    Attributes
    ----------
    dimension
        Output dimension index.
    restart_lml
        Final LML of each restart, in restart order.
    best_so_far
        Running maximum of `restart_lml`.

    """

    dimension: int
    restart_lml: tuple[float, ...]
    best_so_far: tuple[float, ...]

    @property
    def lml(self) -> float:
        """LML of the selected hyperparameters."""
        return self.best_so_far[-1]


@dataclass(frozen=True, kw_only=True)
class Prediction:
    """Posterior of the GP at one query pose.

    Attributes
    ----------
    mean
        Posterior mean velocity.
    variance
        Predictive variance per dimension (latent variance plus sigma_n^2).
    latent_variance
        Posterior variance of the noise-free function per dimension.

    """

    mean: TangentVelocity
    variance: NDArray[np.float64]
    latent_variance: NDArray[np.float64]


@dataclass(frozen=True, kw_only=True, eq=False)
class GpModel:
    """A fitted GP from poses to tangent velocities.

    Use `GpModel.build()` (fixed hyperparameters) or `fit()` (optimised
    hyperparameters) rather than the initialiser.

    """

    inputs: list[DualQuaternionPose]
    targets: NDArray[np.float64]
    hyperparameters: tuple[Hyperparameters, ...]
    grams: tuple[GramMatrix, ...] = field(repr=False)
    alphas: NDArray[np.float64] = field(repr=False)
    rotations: NDArray[np.float64] = field(repr=False)
    positions: NDArray[np.float64] = field(repr=False)
    jitter_policy: JitterPolicy = field(default_factory=JitterPolicy)
    fit_records: tuple[FitRecord, ...] = ()
    label: Optional[str] = None
    metric: PoseMetric = "d_mag"

    def __len__(self):
        return len(self.inputs)

    @classmethod
    def build(
        cls,
        inputs: list[DualQuaternionPose],
        targets: ArrayLike,
        hyperparameters: list[Hyperparameters] | tuple[Hyperparameters, ...],
        jitter_policy: Optional[JitterPolicy] = None,
        fit_records: tuple[FitRecord, ...] = (),
        label: Optional[str] = None,
        metric: PoseMetric = "d_mag",
    ) -> "GpModel":
        """Initialise a GpModel with given hyperparameters.

        Parameters
        ----------
        inputs
            Training poses.
        targets
            Velocity targets, shape (n, 6).
        hyperparameters
            One set per output dimension.
        jitter_policy, optional
            Jitter escalation, by default `JitterPolicy()`.
        fit_records, optional
            Optimiser bookkeeping to keep with the model.
        label, optional
            Condition label of the model.
        metric, optional
            Input metric, by default "d_mag".

        Returns
        -------
            The GpModel with cached factorisations.

        """
        policy = jitter_policy if jitter_policy is not None else JitterPolicy()
        targets = np.asarray(targets, dtype=np.float64).reshape(
            -1, OUTPUT_DIMENSIONS
        )
        if len(inputs) != len(targets):
            raise ValueError(
                f"{len(inputs)} inputs do not match {len(targets)} targets."
            )
        if len(hyperparameters) != OUTPUT_DIMENSIONS:
            raise ValueError(
                f"Expected {OUTPUT_DIMENSIONS} hyperparameter sets, got "
                f"{len(hyperparameters)}."
            )

        rotations, positions = stack_poses(inputs)
        distances = pairwise_distances(rotations, positions, metric)
        grams = []
        alphas = []
        for dim, hp in enumerate(hyperparameters):
            gram_matrix = factorise(
                kernel_matrix(distances, hp), hp.sigma_f, policy
            )
            grams.append(gram_matrix)
            alphas.append(gram_matrix.solve(targets[:, dim]))

        return cls(
            inputs=list(inputs),
            targets=targets,
            hyperparameters=tuple(hyperparameters),
            grams=tuple(grams),
            alphas=np.array(alphas),
            rotations=rotations,
            positions=positions,
            jitter_policy=policy,
            fit_records=fit_records,
            label=label,
            metric=metric,
        )


def gaussian_log_likelihood(gram_matrix: GramMatrix, y: ArrayLike) -> float:
    """Get log N(y | 0, K) for a factorised covariance K.

    Parameters
    ----------
    gram_matrix
        Factorised covariance.
    y
        Observations, one per row of K.

    Returns
    -------
        -1/2 y^T K^-1 y - 1/2 log|K| - n/2 log(2 pi).

    """
    y = np.asarray(y, dtype=np.float64)
    alpha = gram_matrix.solve(y)
    return float(
        -0.5 * y @ alpha
        - 0.5 * gram_matrix.log_det()
        - 0.5 * len(y) * np.log(2.0 * np.pi)
    )


def log_marginal_likelihood(model: GpModel, dim: int) -> float:
    """Get the log marginal likelihood of one output dimension.

    Parameters
    ----------
    model
        A fitted model.
    dim
        Output dimension index (0-5).

    Returns
    -------
        LML of the model's training targets under its hyperparameters.

    """
    return gaussian_log_likelihood(model.grams[dim], model.targets[:, dim])


def _negative_lml(
    log_values: NDArray[np.float64],
    distances: NDArray[np.float64],
    y: NDArray[np.float64],
    policy: JitterPolicy,
) -> float:
    hp = Hyperparameters.from_log(log_values)
    try:
        gram_matrix = factorise(
            kernel_matrix(distances, hp), hp.sigma_f, policy
        )
    except NotPositiveDefinite:
        return _PENALTY
    value = -gaussian_log_likelihood(gram_matrix, y)
    return value if np.isfinite(value) else _PENALTY


def _optimise_dimension(
    dim: int,
    distances: NDArray[np.float64],
    y: NDArray[np.float64],
    config: OptimiserConfig,
) -> tuple[Hyperparameters, FitRecord]:
    magnitude = float(np.sqrt(np.mean(np.square(y))))
    scale = magnitude if magnitude > 0.0 else 1.0
    off_diagonal = distances[np.triu_indices_from(distances, 1)]
    median = float(np.median(off_diagonal[off_diagonal > 0.0]))

    bounds = [
        (np.log(scale) - 7.0, np.log(scale) + 7.0),
        (np.log(median) - 7.0, np.log(median) + 5.0),
        (np.log(scale) - 14.0, np.log(scale) + 3.0),
    ]
    starts = [
        np.log([scale, median * length_ratio, scale * noise_ratio])
        for noise_ratio in _NOISE_RATIO_GRID
        for length_ratio in _LENGTH_SCALE_GRID
    ][: config.n_starts]

    best_value = np.inf
    best_x = starts[0]
    restart_lml = []
    best_so_far = []
    for start in starts:
        result = minimize(
            _negative_lml,
            start,
            args=(distances, y, config.jitter_policy),
            method="Nelder-Mead",
            bounds=bounds,
            options={"maxiter": config.max_iterations},
        )
        if result.fun < best_value:
            best_value, best_x = float(result.fun), result.x
        restart_lml.append(-float(result.fun))
        best_so_far.append(-best_value)
        logger.debug(
            "Dimension %d restart %d: LML %.6g (best %.6g).",
            dim,
            len(restart_lml),
            restart_lml[-1],
            best_so_far[-1],
        )

    hp = Hyperparameters.from_log(best_x)
    logger.info(
        "Dimension %s: sigma_f=%.4g, l=%.4g, sigma_n=%.4g, LML=%.6g.",
        DIMENSION_NAMES[dim],
        hp.sigma_f,
        hp.length_scale,
        hp.sigma_n,
        -best_value,
    )
    return hp, FitRecord(
        dimension=dim,
        restart_lml=tuple(restart_lml),
        best_so_far=tuple(best_so_far),
    )


def fit(
    inputs: list[DualQuaternionPose],
    targets: ArrayLike,
    opt_config: Optional[OptimiserConfig] = None,
    label: Optional[str] = None,
    metric: PoseMetric = "d_mag",
) -> GpModel:
    """Fit a GpModel by maximising the LML of each output dimension.

    Parameters
    ----------
    inputs
        Training poses (at least two).
    targets
        Velocity targets, shape (n, 6).
    opt_config, optional
        Optimiser settings, by default `OptimiserConfig()`.
    label, optional
        Condition label of the model.
    metric, optional
        Input metric, by default "d_mag".

    Returns
    -------
        The fitted model with cached factorisations.

    Raises
    ------
    DegenerateData
        If fewer than two inputs are given or all inputs are identical under
        the metric.

    """
    config = opt_config if opt_config is not None else OptimiserConfig()
    targets = np.asarray(targets, dtype=np.float64).reshape(
        -1, OUTPUT_DIMENSIONS
    )
    if len(inputs) < 2 or len(inputs) != len(targets):
        raise DegenerateData(
            f"Need at least two inputs matching the targets, got "
            f"{len(inputs)} inputs and {len(targets)} targets."
        )

    if config.max_points is not None and len(inputs) > config.max_points:
        rng = np.random.default_rng(config.seed)
        keep = np.sort(
            rng.choice(len(inputs), size=config.max_points, replace=False)
        )
        inputs = [inputs[index] for index in keep]
        targets = targets[keep]
        logger.info("Subsampled %d training pairs.", len(inputs))

    rotations, positions = stack_poses(inputs)
    distances = pairwise_distances(rotations, positions, metric)
    if not np.any(distances > IDENTICAL_TOLERANCE):
        raise DegenerateData("All training inputs are identical.")

    hyperparameters = []
    records = []
    for dim in range(OUTPUT_DIMENSIONS):
        hp, record = _optimise_dimension(
            dim, distances, targets[:, dim], config
        )
        hyperparameters.append(hp)
        records.append(record)

    return GpModel.build(
        inputs,
        targets,
        hyperparameters,
        jitter_policy=config.jitter_policy,
        fit_records=tuple(records),
        label=label,
        metric=metric,
    )


def predict(model: GpModel, query: DualQuaternionPose) -> Prediction:
    """Get the GP posterior at a query pose.

    Parameters
    ----------
    model
        A fitted model.
    query
        Query pose.

    Returns
    -------
        Posterior mean velocity and per-dimension variances.

    """
    distances = query_distances(
        query, model.rotations, model.positions, model.metric
    )
    mean = np.empty(OUTPUT_DIMENSIONS)
    latent = np.empty(OUTPUT_DIMENSIONS)
    noise = np.empty(OUTPUT_DIMENSIONS)
    for dim, (hp, gram_matrix) in enumerate(
        zip(model.hyperparameters, model.grams)
    ):
        k_star = squared_exponential(distances, hp)
        mean[dim] = k_star @ model.alphas[dim]
        v = solve_triangular(gram_matrix.cholesky, k_star, lower=True)
        latent[dim] = max(hp.sigma_f**2 - float(v @ v), 0.0)
        noise[dim] = hp.sigma_n**2

    return Prediction(
        mean=TangentVelocity.from_array(mean),
        variance=latent + noise,
        latent_variance=latent,
    )
