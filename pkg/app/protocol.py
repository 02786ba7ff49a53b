"""
Attitude synchronization control law.

omega_i = - sum_{j in N_i} a_ij * q_ij   (q_ij: vector part of the multiplicative error)
"""
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable

import numpy as np

from .config import get_settings
from .digraph import DirectedGraph
from .exceptions import QuaternionError
from .quaternion import UnitQuaternion, error_array

settings = get_settings()


class ProtocolKind(str, Enum):
    MULTIPLICATIVE = "multiplicative"
    ADDITIVE = "additive"


@dataclass(frozen=True, eq=False)
class NetworkState:
    """Snapshot of all attitudes at time t plus the last applied body rates"""

    t: float
    attitudes: np.ndarray  # (N, 4) scalar-first rows
    omegas: np.ndarray = field(default=None)  # (N, 3)

    def __post_init__(self):
        att = np.array(self.attitudes, dtype=float)
        if att.ndim != 2 or att.shape[1] != 4:
            raise QuaternionError(f"attitudes must be an (N, 4) array, got {att.shape}")
        omg = np.zeros((att.shape[0], 3)) if self.omegas is None else np.array(self.omegas, dtype=float)
        if omg.shape != (att.shape[0], 3):
            raise QuaternionError(f"omegas must be ({att.shape[0]}, 3), got {omg.shape}")
        if not (np.all(np.isfinite(att)) and np.all(np.isfinite(omg))):
            raise QuaternionError("network state contains non-finite values")
        defect = np.abs(np.einsum("ij,ij->i", att, att) - 1.0)
        if np.any(defect > settings.UNITY_RENORM_TOL):
            bad = int(np.argmax(defect)) + 1
            raise QuaternionError(f"attitude of agent {bad} is not unit (defect {defect.max():.3g})")
        att.setflags(write=False)
        omg.setflags(write=False)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "attitudes", att)
        object.__setattr__(self, "omegas", omg)

    @classmethod
    def from_quaternions(cls, quats: Iterable[UnitQuaternion], t: float = 0.0) -> "NetworkState":
        return cls(t, np.array([q.as_array() for q in quats]))

    @property
    def n(self) -> int:
        return self.attitudes.shape[0]

    @property
    def scalars(self) -> np.ndarray:
        return self.attitudes[:, 0]

    def attitude(self, i: int) -> UnitQuaternion:
        """Attitude of agent i (1-based)"""
        row = self.attitudes[i - 1]
        return UnitQuaternion.from_array(row / np.linalg.norm(row))

    def quaternions(self) -> list[UnitQuaternion]:
        return [self.attitude(i) for i in range(1, self.n + 1)]


def _check_sizes(state: NetworkState, g: DirectedGraph):
    if state.n != g.n:
        raise QuaternionError(f"state has {state.n} agents but graph has {g.n} nodes")


def control_input(i: int, state: NetworkState, g: DirectedGraph) -> np.ndarray:
    """Body rate of agent i; reads only agent i and its in-neighbors"""
    _check_sizes(state, g)
    nbrs = [j - 1 for j in g.in_neighbors(i)]
    if not nbrs:
        return np.zeros(3)
    errors = error_array(state.attitudes[i - 1][None, :], state.attitudes[nbrs])
    return -(g.weights[i - 1, nbrs] @ errors[:, 1:])


def control_all(state: NetworkState, g: DirectedGraph) -> np.ndarray:
    _check_sizes(state, g)
    return np.array([control_input(i, state, g) for i in range(1, g.n + 1)]).reshape(g.n, 3)


def control_matrix(attitudes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Vectorized multiplicative protocol for all agents at once"""
    errors = error_array(attitudes[:, None, :], attitudes[None, :, :])
    return -np.einsum("ij,ijk->ik", weights, errors[..., 1:])


def additive_control(attitudes: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Additive-error law omega_i = - sum_j a_ij (q_i - q_j), kept for comparison runs"""
    vec = attitudes[:, 1:]
    laplacian = np.diag(weights.sum(axis=1)) - weights
    return -(laplacian @ vec)


def control_law(kind: ProtocolKind) -> Callable[[np.ndarray, np.ndarray], np.ndarray]:
    if ProtocolKind(kind) is ProtocolKind.ADDITIVE:
        return additive_control
    return control_matrix
