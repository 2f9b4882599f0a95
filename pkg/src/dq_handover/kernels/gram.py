"""Module to assemble and factorise Gram matrices over poses.

Squared-exponential kernels over d_arc and d_mag are not guaranteed to be
positive semi-definite, so every factorisation goes through an escalating
diagonal jitter. By default the first attempt uses no jitter at all; set
`JitterPolicy.try_zero` to False to start the schedule at `start`.

Where a covariance is known to be indefinite by more than any sensible
jitter, `clip_spectrum()` lifts its eigenvalues to a floor instead.

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
from scipy.linalg import (
    cho_solve,
    eigh,
    lapack,
)
from scipy.spatial.distance import cdist

from dq_handover.geometry.dual_quaternion import (
    DualQuaternionPose,
    stack_poses,
    to_pose,
)
from dq_handover.geometry.quaternion import d_arc_many
from dq_handover.helpers.errors import NotPositiveDefinite
from dq_handover.helpers.helpers import PoseMetric
from dq_handover.kernels.kernels import (
    Hyperparameters,
    squared_exponential,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, kw_only=True)
class JitterPolicy:
    """Escalation schedule for the diagonal jitter.

    Jitter levels are relative to sigma_f^2: no jitter first (unless
    `try_zero` is False), then `start`, multiplied by `factor` until `cap`.
    A factorisation is only accepted once its estimated condition number is
    below `max_condition` (the cap level is accepted whenever the
    factorisation succeeds).

    """

    start: float = 1e-10
    factor: float = 10.0
    cap: float = 1e-4
    max_condition: float = 1e11
    try_zero: bool = True

    def levels(self) -> list[float]:
        """Get the relative jitter levels to try, in order."""
        levels = [0.0] if self.try_zero else []
        level = self.start
        while level < self.cap * (1.0 - 1e-9):
            levels.append(level)
            level *= self.factor
        levels.append(self.cap)
        return levels


@dataclass(frozen=True, kw_only=True)
class GramMatrix:
    """A factorised covariance matrix.

    Attributes
    ----------
    K
        Kernel matrix including the noise term sigma_n^2 on the diagonal
        (jitter not included).
    jitter
        Absolute jitter added to the diagonal before factorisation.
    cholesky
        Lower Cholesky factor of K + jitter·I.

    """

    K: NDArray[np.float64]
    jitter: float
    cholesky: NDArray[np.float64] = field(repr=False)

    def __len__(self):
        return self.K.shape[0]

    def solve(self, b: ArrayLike) -> NDArray[np.float64]:
        """Get (K + jitter·I)^-1 b."""
        return cho_solve((self.cholesky, True), np.asarray(b, np.float64))

    def log_det(self) -> float:
        """Get log |K + jitter·I|."""
        return float(2.0 * np.sum(np.log(np.diag(self.cholesky))))


def _combine(
    arcs: NDArray[np.float64],
    lengths: NDArray[np.float64],
    metric: PoseMetric,
) -> NDArray[np.float64]:
    match metric:
        case "d_mag":
            return arcs + lengths
        case "d_arc":
            return arcs
        case "product":
            return np.hypot(arcs, lengths)
        case _:
            raise ValueError(f"Unknown pose metric {metric!r}.")


def pairwise_distances(
    rotations: ArrayLike,
    positions: ArrayLike,
    metric: PoseMetric = "d_mag",
    rotations2: Optional[ArrayLike] = None,
    positions2: Optional[ArrayLike] = None,
) -> NDArray[np.float64]:
    """Get the matrix of pose distances between two stacks of poses.

    Three metrics are available:

        d_mag     arc length plus translation norm (dual-quaternion poses)
        d_arc     arc length only (orientations on S3, positions ignored)
        product   sqrt(arc^2 + translation^2), so that a squared-exponential
                  kernel over it is the product of k_arc and k_se

    Parameters
    ----------
    rotations, positions
        Arrays of shape (n, 4) and (n, 3).
    metric, optional
        Pose metric, by default "d_mag".
    rotations2, positions2, optional
        Arrays of shape (m, 4) and (m, 3). When omitted, the distances within
        the first stack are returned, exactly symmetric with a zero diagonal.

    Returns
    -------
        Distance matrix of shape (n, m).

    """
    rotations = np.asarray(rotations, dtype=np.float64)
    positions = np.asarray(positions, dtype=np.float64)
    symmetric = rotations2 is None
    if symmetric:
        rotations2, positions2 = rotations, positions
    rotations2 = np.asarray(rotations2, dtype=np.float64)
    positions2 = np.asarray(positions2, dtype=np.float64)

    dots = np.clip(np.abs(rotations @ rotations2.T), -1.0, 1.0)
    distances = _combine(
        np.arccos(dots), cdist(positions, positions2), metric
    )
    if symmetric:
        distances = np.triu(distances, 1)
        distances = distances + distances.T
    return distances


def pairwise_d_mag(
    rotations: ArrayLike,
    positions: ArrayLike,
    rotations2: Optional[ArrayLike] = None,
    positions2: Optional[ArrayLike] = None,
) -> NDArray[np.float64]:
    """Get the matrix of d_mag distances between two stacks of poses."""
    return pairwise_distances(
        rotations, positions, "d_mag", rotations2, positions2
    )


def query_distances(
    dq: DualQuaternionPose,
    rotations: ArrayLike,
    positions: ArrayLike,
    metric: PoseMetric = "d_mag",
) -> NDArray[np.float64]:
    """Get the distances from one pose to a stack of poses.

    NaN rows yield NaN; with "d_mag" this matches `d_mag_many()`.

    """
    rotation, position = to_pose(dq)
    arcs = d_arc_many(rotation, rotations)
    lengths = np.linalg.norm(
        np.asarray(positions, dtype=np.float64) - position, axis=-1
    )
    return _combine(arcs, lengths, metric)


def kernel_matrix(
    distances: ArrayLike,
    hp: Hyperparameters,
) -> NDArray[np.float64]:
    """Get the noisy covariance matrix of a symmetric distance matrix."""
    K = squared_exponential(distances, hp)
    K[np.diag_indices_from(K)] += hp.sigma_n**2
    return K


def min_eigenvalue(K: ArrayLike) -> float:
    """Get the smallest eigenvalue of a symmetric matrix."""
    K = np.asarray(K, dtype=np.float64)
    return float(eigh(K, eigvals_only=True, subset_by_index=[0, 0])[0])


def clip_spectrum(K: ArrayLike, floor: float) -> NDArray[np.float64]:
    """Get a symmetric matrix with its eigenvalues lifted to a floor.

    Parameters
    ----------
    K
        Symmetric matrix.
    floor
        Smallest eigenvalue of the result (absolute, non-negative).

    Returns
    -------
        V diag(max(lambda, floor)) V^T, or a copy of K if no eigenvalue is
        below the floor.

    """
    if not floor >= 0.0:
        raise ValueError(f"Eigenvalue floor must be at least 0, got {floor}.")
    K = np.array(K, dtype=np.float64)
    eigenvalues, vectors = eigh(K)
    below = eigenvalues < floor
    if not np.any(below):
        return K
    logger.debug(
        "Lifted %d of %d eigenvalues (smallest %.3e) to %.3e.",
        int(below.sum()),
        len(eigenvalues),
        eigenvalues[0],
        floor,
    )
    clipped = (vectors * np.maximum(eigenvalues, floor)) @ vectors.T
    return 0.5 * (clipped + clipped.T)


def factorise(
    K: ArrayLike,
    sigma_f: float,
    jitter_policy: Optional[JitterPolicy] = None,
) -> GramMatrix:
    """Factorise a covariance matrix, escalating jitter as needed.

    Parameters
    ----------
    K
        Symmetric covariance matrix.
    sigma_f
        Signal magnitude; jitter levels are relative to sigma_f^2.
    jitter_policy, optional
        Escalation schedule, by default `JitterPolicy()`.

    Returns
    -------
        The factorised GramMatrix.

    Raises
    ------
    NotPositiveDefinite
        If the factorisation fails even at the jitter cap.

    """
    policy = jitter_policy if jitter_policy is not None else JitterPolicy()
    K = np.asarray(K, dtype=np.float64)
    eye = np.eye(K.shape[0])
    scale = sigma_f**2
    levels = policy.levels()

    for level in levels:
        jitter = level * scale
        A = K + jitter * eye
        L, info = lapack.dpotrf(A, lower=1, clean=1)
        if info != 0:
            logger.debug("Cholesky failed with jitter %.3e.", jitter)
            continue

        anorm = float(np.abs(A).sum(axis=0).max())
        rcond, _ = lapack.dpocon(L, anorm, uplo="L")
        if rcond * policy.max_condition < 1.0 and level < levels[-1]:
            logger.debug(
                "Condition estimate %.3e too large with jitter %.3e.",
                1.0 / max(rcond, np.finfo(float).tiny),
                jitter,
            )
            continue

        return GramMatrix(K=K, jitter=jitter, cholesky=L)

    raise NotPositiveDefinite(
        f"Gram matrix of size {K.shape[0]} is not positive definite even "
        f"with a jitter of {levels[-1] * scale:.3e}.",
        jitter=levels[-1] * scale,
    )


def gram(
    points: list[DualQuaternionPose],
    hp: Hyperparameters,
    jitter_policy: Optional[JitterPolicy] = None,
    metric: PoseMetric = "d_mag",
) -> GramMatrix:
    """Get the factorised Gram matrix of a set of poses.

    Parameters
    ----------
    points
        At least one pose.
    hp
        Kernel hyperparameters; sigma_n^2 is added to the diagonal.
    jitter_policy, optional
        Escalation schedule, by default `JitterPolicy()`.
    metric, optional
        Pose metric of the kernel, by default "d_mag" (k_mag).

    Returns
    -------
        GramMatrix with K_ij = k(p_i, p_j) + sigma_n^2 delta_ij.

    """
    if len(points) == 0:
        raise ValueError("Cannot build a Gram matrix of no points.")
    rotations, positions = stack_poses(points)
    K = kernel_matrix(pairwise_distances(rotations, positions, metric), hp)
    return factorise(K, hp.sigma_f, jitter_policy)
