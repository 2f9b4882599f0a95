"""Module to deal with tangent-space velocities of poses."""

from dataclasses import dataclass

import numpy as np
from numpy.typing import (
    ArrayLike,
    NDArray,
)

from dq_handover.helpers.errors import InvalidVelocity

V_MAX = 10.0


@dataclass(frozen=True, eq=False)
class TangentVelocity:
    """Per-step velocity of a pose, the output of the GP.

    Attributes
    ----------
    v_ts
        Rotational rate in the tangent space of S3 at the current rotation
        (dimensionless per time step).
    p_dot
        Translational rate (metres per time step).
    v_max
        Largest accepted Euclidean norm of the 6-vector.

    """

    v_ts: NDArray[np.float64]
    p_dot: NDArray[np.float64]
    v_max: float = V_MAX

    def __post_init__(self):
        v_ts = np.array(self.v_ts, dtype=np.float64).reshape(3)
        p_dot = np.array(self.p_dot, dtype=np.float64).reshape(3)
        stacked = np.concatenate([v_ts, p_dot])
        if not np.all(np.isfinite(stacked)):
            raise InvalidVelocity(f"Non-finite velocity {stacked}.")
        if np.linalg.norm(stacked) > self.v_max:
            raise InvalidVelocity(
                f"Velocity {stacked} exceeds the bound of {self.v_max} per "
                "step."
            )
        object.__setattr__(self, "v_ts", v_ts)
        object.__setattr__(self, "p_dot", p_dot)

    def __repr__(self):
        return f"TangentVelocity(v_ts={self.v_ts!r}, p_dot={self.p_dot!r})"

    def __eq__(self, other):
        if isinstance(other, TangentVelocity):
            return bool(np.allclose(self.as_array(), other.as_array()))
        else:
            raise TypeError(
                f"Cannot compare TangentVelocity with {type(other)}."
            )

    __hash__ = None  # type: ignore[assignment]

    def as_array(self) -> NDArray[np.float64]:
        """Get the 6-vector (v_ts, p_dot)."""
        return np.concatenate([self.v_ts, self.p_dot])

    @classmethod
    def from_array(
        cls,
        array: ArrayLike,
        v_max: float = V_MAX,
    ) -> "TangentVelocity":
        """Initialise a TangentVelocity from a 6-vector (v_ts, p_dot)."""
        array = np.asarray(array, dtype=np.float64).reshape(6)
        return cls(array[:3], array[3:], v_max)

    @classmethod
    def zero(cls) -> "TangentVelocity":
        """Get the velocity of a pose at rest."""
        return cls(np.zeros(3), np.zeros(3))
