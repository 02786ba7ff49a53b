"""
Unit-quaternion algebra, scalar-first layout (eps, q1, q2, q3).

Product convention: the multiplicative error of i with respect to j is
conj(q_j) * q_i in the Hamilton product. Under the attitude-matrix map
C(q) = (eps^2 - q.q) I + 2 q q^T - 2 eps q^x this gives
C(err) = C(q_i) C(q_j)^T.
"""
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable

import numpy as np
from numpy.typing import NDArray

from .config import get_settings
from .exceptions import QuaternionError

logger = logging.getLogger(__name__)
settings = get_settings()

Vec3 = NDArray[np.float64]


def _vec3(x: Iterable[float], name: str = "vector") -> np.ndarray:
    arr = np.asarray(x, dtype=float).reshape(-1)
    if arr.shape != (3,):
        raise QuaternionError(f"{name} must have 3 components, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise QuaternionError(f"{name} has non-finite components: {arr.tolist()}")
    return arr


@dataclass(frozen=True)
class _Quaternion:
    """Immutable scalar-first quaternion on S^3"""

    eps: float
    vec: tuple[float, float, float]

    def __post_init__(self):
        vec = tuple(float(c) for c in self.vec)
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "vec", vec)
        if len(vec) != 3:
            raise QuaternionError(f"vector part must have 3 components, got {len(vec)}")
        if not all(math.isfinite(c) for c in (self.eps, *vec)):
            raise QuaternionError(f"non-finite quaternion component in {self.as_tuple()}")
        if self.unity_defect > settings.UNITY_TOL:
            raise QuaternionError(
                f"{type(self).__name__} {self.as_tuple()} violates unity "
                f"(defect {self.unity_defect:.3g} > {settings.UNITY_TOL:g})"
            )

    @property
    def unity_defect(self) -> float:
        return abs(self.eps**2 + sum(c * c for c in self.vec) - 1.0)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.eps, *self.vec)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=float)

    @property
    def vector(self) -> Vec3:
        return np.array(self.vec, dtype=float)

    @classmethod
    def from_array(cls, arr: Iterable[float]):
        a = np.asarray(arr, dtype=float).reshape(-1)
        if a.shape != (4,):
            raise QuaternionError(f"quaternion must have 4 components, got {a.shape[0]}")
        return cls(a[0], (a[1], a[2], a[3]))


@dataclass(frozen=True)
class UnitQuaternion(_Quaternion):
    """Attitude quaternion (eps, q)"""

    @classmethod
    def identity(cls) -> "UnitQuaternion":
        return cls(1.0, (0.0, 0.0, 0.0))

    @classmethod
    def from_components(
        cls,
        eps: float,
        q1: float,
        q2: float,
        q3: float,
        max_defect: float | None = None,
    ) -> "UnitQuaternion":
        """
        Build from possibly truncated user input.
        Defect above `max_defect` is rejected; above UNITY_TOL it is renormalized with a warning.
        """
        ceiling = settings.UNITY_RENORM_TOL if max_defect is None else max_defect
        arr = np.array([eps, q1, q2, q3], dtype=float)
        if not np.all(np.isfinite(arr)):
            raise QuaternionError(f"non-finite quaternion component in {arr.tolist()}")
        defect = abs(float(arr @ arr) - 1.0)
        if defect > ceiling:
            raise QuaternionError(
                f"quaternion {arr.tolist()} is not unit (defect {defect:.3g} > {ceiling:g})"
            )
        if defect > settings.UNITY_TOL:
            logger.warning(f"Renormalizing quaternion {arr.tolist()} (unity defect {defect:.3g})")
            arr = arr / np.linalg.norm(arr)
        return cls.from_array(arr)

    def __neg__(self) -> "UnitQuaternion":
        return UnitQuaternion(-self.eps, tuple(-c for c in self.vec))


@dataclass(frozen=True)
class QuatError(_Quaternion):
    """Multiplicative quaternion error (eps_ij, q_ij)"""


@dataclass(frozen=True)
class QuatDeriv:
    """Time derivative (eps_dot, q_dot) in 1/s"""

    deps: float
    dvec: tuple[float, float, float]

    def as_array(self) -> np.ndarray:
        return np.array((self.deps, *self.dvec), dtype=float)


class Subspace(str, Enum):
    """Partition of S^3 used to pick one representative per physical attitude"""

    S1 = "S1"  # eps > 0
    S2 = "S2"  # eps = 0, q in S+
    S3 = "S3"  # eps < 0
    S4 = "S4"  # eps = 0, q in S-


# ----- array kernels (shared with protocol / transform / simulator) -----


def error_array(qi: np.ndarray, qj: np.ndarray) -> np.ndarray:
    """Multiplicative error of every qi w.r.t. qj; both (..., 4), broadcastable"""
    ei, vi = qi[..., 0], qi[..., 1:]
    ej, vj = qj[..., 0], qj[..., 1:]
    eps = ei * ej + np.sum(vi * vj, axis=-1)
    vec = ej[..., None] * vi - ei[..., None] * vj + np.cross(vi, vj)
    return np.concatenate([eps[..., None], vec], axis=-1)


def compose_array(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product p * q on (..., 4) arrays"""
    ep, vp = p[..., 0], p[..., 1:]
    eq, vq = q[..., 0], q[..., 1:]
    eps = ep * eq - np.sum(vp * vq, axis=-1)
    vec = ep[..., None] * vq + eq[..., None] * vp + np.cross(vp, vq)
    return np.concatenate([eps[..., None], vec], axis=-1)


def rhs_array(attitudes: np.ndarray, omegas: np.ndarray) -> np.ndarray:
    """Kinematics right-hand side for (N, 4) attitudes and (N, 3) body rates"""
    eps, vec = attitudes[..., 0], attitudes[..., 1:]
    deps = -0.5 * np.sum(vec * omegas, axis=-1)
    dvec = 0.5 * (np.cross(vec, omegas) + eps[..., None] * omegas)
    return np.concatenate([deps[..., None], dvec], axis=-1)


def normalize_rows(attitudes: np.ndarray) -> np.ndarray:
    return attitudes / np.linalg.norm(attitudes, axis=-1, keepdims=True)


# ----- operations -----


def cross_matrix(x: Iterable[float]) -> np.ndarray:
    """Skew-symmetric matrix M with M @ y == x × y"""
    x1, x2, x3 = _vec3(x)
    return np.array(
        [
            [0.0, -x3, x2],
            [x3, 0.0, -x1],
            [-x2, x1, 0.0],
        ]
    )


def from_axis_angle(axis: Iterable[float], angle: float) -> UnitQuaternion:
    """Euler axis / angle to quaternion: (cos(angle/2), axis sin(angle/2))"""
    e = _vec3(axis, "axis")
    norm = float(np.linalg.norm(e))
    if abs(norm - 1.0) > settings.UNITY_TOL:
        raise QuaternionError(f"axis {e.tolist()} is not a unit vector (norm {norm:.12g})")
    if not math.isfinite(angle):
        raise QuaternionError(f"angle must be finite, got {angle}")
    e = e / norm
    half = 0.5 * angle
    return UnitQuaternion(math.cos(half), tuple(e * math.sin(half)))


def mult_error(qi: UnitQuaternion, qj: UnitQuaternion) -> QuatError:
    """Multiplicative quaternion error of body i with respect to body j"""
    return QuatError.from_array(error_array(qi.as_array(), qj.as_array()))


def kinematics_rhs(q: UnitQuaternion, omega: Iterable[float]) -> QuatDeriv:
    w = _vec3(omega, "omega")
    d = rhs_array(q.as_array(), w)
    return QuatDeriv(float(d[0]), (float(d[1]), float(d[2]), float(d[3])))


def in_s_plus(vec: Iterable[float], tol: float | None = None) -> bool:
    """Lexicographic half-sphere rule: x3 > 0, else x2 > 0, else x1 > 0"""
    tol = settings.ZERO_TOL if tol is None else tol
    for c in reversed(tuple(vec)):
        if c > tol:
            return True
        if c < -tol:
            return False
    return False


def classify_subspace(q: UnitQuaternion) -> Subspace:
    tol = settings.ZERO_TOL
    if q.eps > tol:
        return Subspace.S1
    if q.eps < -tol:
        return Subspace.S3
    return Subspace.S2 if in_s_plus(q.vec, tol) else Subspace.S4


def canonicalize(q: UnitQuaternion) -> UnitQuaternion:
    """Representative of the physical attitude of q inside S1 ∪ S2"""
    tol = settings.ZERO_TOL
    if abs(q.eps) <= tol:
        vec = q.vector
        vec = vec / np.linalg.norm(vec)
        if not in_s_plus(vec, tol):
            vec = -vec
        return UnitQuaternion(0.0, tuple(vec))
    if q.eps < 0:
        return -q
    return q


def random_unit_quaternions(rng: np.random.Generator, n: int) -> np.ndarray:
    """(n, 4) attitudes drawn uniformly on S^3"""
    return normalize_rows(rng.standard_normal((n, 4)))
