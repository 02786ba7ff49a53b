"""
Constant frame changes that leave every multiplicative error unchanged.

A transform quaternion v re-expresses each attitude as q_hat = conj(v) * q. The
constructions below pick v from the canonical initial attitudes so that every
transformed initial scalar part is non-negative and at least one root has a
positive one. The protocol never reads v; it only feeds the diagnostics.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .config import get_settings
from .digraph import RootAnalysis
from .exceptions import GraphValidationError, QuaternionError, TransformError
from .quaternion import (
    Subspace,
    UnitQuaternion,
    classify_subspace,
    compose_array,
    error_array,
)

logger = logging.getLogger(__name__)
settings = get_settings()

POSTCONDITION_TOL = 1e-12


class ConditionTag(str, Enum):
    I1 = "I1"  # root-only network, some scalar part positive
    I2 = "I2"  # root-only network, every scalar part zero
    II1 = "II1"  # some root in S1
    II2 = "II2"  # every root in S2


class Part(str, Enum):
    P1 = "P1"  # some root q3 > 0, every non-root in S2
    P2 = "P2"  # some root q3 > 0, some non-root in S1
    P3 = "P3"  # every root q3 = 0, every non-root in S2
    P4 = "P4"  # every root q3 = 0, some non-root in S1


@dataclass(frozen=True)
class InitialConditionClass:
    tag: ConditionTag
    part: Part | None = None

    def __str__(self) -> str:
        return self.tag.value if self.part is None else f"{self.tag.value}/{self.part.value}"


@dataclass(frozen=True, eq=False)
class TransformResult:
    v: UnitQuaternion
    cls: InitialConditionClass | None
    transformed_initial: tuple[UnitQuaternion, ...]
    constants: dict = field(default_factory=dict)  # the epsilon values used by the construction

    @property
    def scalars(self) -> np.ndarray:
        return np.array([q.eps for q in self.transformed_initial])


def transform_array(attitudes: np.ndarray, v: UnitQuaternion) -> np.ndarray:
    """Rows of `attitudes` expressed in the frame given by v"""
    return error_array(np.asarray(attitudes, dtype=float), v.as_array())


def apply_transform(q: UnitQuaternion, v: UnitQuaternion) -> UnitQuaternion:
    return UnitQuaternion.from_array(error_array(q.as_array(), v.as_array()))


def inverse_transform(q_hat: UnitQuaternion, v: UnitQuaternion) -> UnitQuaternion:
    return UnitQuaternion.from_array(compose_array(v.as_array(), q_hat.as_array()))


def _require_canonical(states: Sequence[UnitQuaternion]) -> list[Subspace]:
    subspaces = [classify_subspace(q) for q in states]
    for k, s in enumerate(subspaces, start=1):
        if s not in (Subspace.S1, Subspace.S2):
            raise QuaternionError(f"initial attitude of agent {k} is in {s.value}; canonicalize first")
    return subspaces


def classify_initial(states: Sequence[UnitQuaternion], roots: RootAnalysis) -> InitialConditionClass:
    if len(states) != roots.n:
        raise QuaternionError(f"{len(states)} attitudes for a {roots.n}-node graph")
    if not roots.roots:
        raise GraphValidationError("graph has no root; initial condition class is undefined")
    tol = settings.ZERO_TOL
    subspaces = _require_canonical(states)
    root_only = not roots.non_roots

    if any(subspaces[i - 1] is Subspace.S1 for i in roots.roots):
        return InitialConditionClass(ConditionTag.I1 if root_only else ConditionTag.II1)
    if root_only:
        return InitialConditionClass(ConditionTag.I2)

    root_q3_positive = any(states[i - 1].vec[2] > tol for i in roots.roots)
    non_root_in_s1 = any(subspaces[i - 1] is Subspace.S1 for i in roots.non_roots)
    if root_q3_positive:
        part = Part.P2 if non_root_in_s1 else Part.P1
    else:
        part = Part.P4 if non_root_in_s1 else Part.P3
    return InitialConditionClass(ConditionTag.II2, part)


def _min_or_default(values: list[float], default: float = 1.0) -> float:
    return min(values) if values else default


def _bisector(lowest_q1: float) -> tuple[float, float]:
    """Unit in-plane direction halfway between (1, 0) and (lowest_q1, +sqrt(1 - lowest_q1^2))"""
    c = min(1.0, max(-1.0, lowest_q1))
    return math.sqrt((1.0 + c) / 2.0), math.sqrt((1.0 - c) / 2.0)


def _build_result(states, v, cls, constants) -> TransformResult:
    moved = transform_array(np.array([q.as_array() for q in states]), v)
    return TransformResult(
        v=v,
        cls=cls,
        transformed_initial=tuple(UnitQuaternion.from_array(row) for row in moved),
        constants=constants,
    )


def postcondition_violation(result: TransformResult, scope: Sequence[int], roots: Sequence[int]) -> str | None:
    """None when scalars over `scope` are >= -1e-12 and some root scalar is > 0"""
    scalars = result.scalars
    for i in scope:
        if scalars[i - 1] < -POSTCONDITION_TOL:
            return f"transformed scalar of agent {i} is {scalars[i - 1]:.3g} < 0"
    if not roots or max(scalars[i - 1] for i in roots) <= 0.0:
        return "no root has a positive transformed scalar"
    return None


def _verify(result: TransformResult, scope: Sequence[int], roots: Sequence[int]) -> TransformResult:
    problem = postcondition_violation(result, scope, roots)
    if problem:
        raise TransformError(f"transform {result.v.as_tuple()} for class {result.cls}: {problem}")
    return result


def find_transform_roots_only(states: Sequence[UnitQuaternion]) -> TransformResult:
    """Frame change for a network made only of roots, all in S2"""
    tol = settings.ZERO_TOL
    subspaces = _require_canonical(states)
    if any(s is not Subspace.S2 for s in subspaces):
        raise QuaternionError("root-only construction needs every attitude in S2")

    if any(q.vec[2] > tol for q in states):
        v = UnitQuaternion(0.0, (0.0, 0.0, 1.0))
    elif all(abs(q.vec[0] - 1.0) <= tol for q in states):
        v = UnitQuaternion(0.0, (1.0, 0.0, 0.0))
    else:
        v = UnitQuaternion(0.0, (0.0, 1.0, 0.0))

    nodes = list(range(1, len(states) + 1))
    result = _build_result(states, v, InitialConditionClass(ConditionTag.I2), {})
    return _verify(result, nodes, nodes)


def find_transform(states: Sequence[UnitQuaternion], roots: RootAnalysis) -> TransformResult:
    """Classify the initial condition and construct its transform quaternion"""
    tol = settings.ZERO_TOL
    cls = classify_initial(states, roots)
    nodes = list(range(1, len(states) + 1))

    if cls.tag in (ConditionTag.I1, ConditionTag.II1):
        result = _build_result(states, UnitQuaternion.identity(), cls, {})
    elif cls.tag is ConditionTag.I2:
        result = find_transform_roots_only(states)
    else:
        result = _build_result(states, *_mixed_class_parts(states, roots, cls, tol))

    logger.info(f"Initial condition {cls}: transform v = {result.v.as_tuple()}")
    return _verify(result, nodes, roots.roots)


def _mixed_class_parts(states, roots: RootAnalysis, cls: InitialConditionClass, tol: float):
    eps = {i: states[i - 1].eps for i in range(1, len(states) + 1)}
    vec = {i: states[i - 1].vec for i in range(1, len(states) + 1)}
    non_roots = roots.non_roots

    if cls.part is Part.P1:
        return UnitQuaternion(0.0, (0.0, 0.0, 1.0)), cls, {}

    if cls.part is Part.P2:
        e1 = min(eps[i] for i in non_roots if eps[i] > tol)
        v = UnitQuaternion(math.sqrt(1.0 - e1 * e1), (0.0, 0.0, e1))
        return v, cls, {"eps1": e1}

    if cls.part is Part.P3:
        e2 = _min_or_default([vec[i][0] for i in eps if abs(vec[i][2]) <= tol])
        e3 = _min_or_default([vec[i][2] for i in non_roots if vec[i][2] > tol])
        b1, b2 = _bisector(e2)
        v = UnitQuaternion(0.0, (b1 * e3, b2 * e3, math.sqrt(max(0.0, 1.0 - e3 * e3))))
        return v, cls, {"eps2": e2, "eps3": e3}

    e4 = _min_or_default([vec[i][0] for i in eps if abs(eps[i]) <= tol and abs(vec[i][2]) <= tol])
    e5 = _min_or_default([vec[i][2] for i in non_roots if abs(eps[i]) <= tol and vec[i][2] > tol])
    e6 = min(eps[i] for i in non_roots if eps[i] > tol)
    b1, b2 = _bisector(e4)
    tilt = math.sqrt(max(0.0, 1.0 - e5 * e5))
    v = UnitQuaternion(
        math.sqrt(max(0.0, 1.0 - e6 * e6)),
        (b1 * e5 * e6, b2 * e5 * e6, tilt * e6),
    )
    return v, cls, {"eps4": e4, "eps5": e5, "eps6": e6}


def explicit_transform(states: Sequence[UnitQuaternion], v: UnitQuaternion, roots: RootAnalysis) -> TransformResult:
    """User-supplied v; the postcondition is reported, not enforced"""
    cls = classify_initial(states, roots) if roots.roots else None
    result = _build_result(states, v, cls, {})
    problem = postcondition_violation(result, range(1, len(states) + 1), roots.roots)
    if problem:
        logger.warning(f"Explicit transform {v.as_tuple()} does not give non-negative scalars: {problem}")
    return result


class TransformMode(str, Enum):
    AUTO = "auto"
    NONE = "none"
    EXPLICIT = "explicit"


def select_transform(
    mode: TransformMode,
    states: Sequence[UnitQuaternion],
    roots: RootAnalysis,
    v: UnitQuaternion | None = None,
) -> TransformResult | None:
    """Transform for a run: constructed (auto), supplied (explicit) or skipped (none)"""
    mode = TransformMode(mode)
    if mode is TransformMode.NONE:
        return None
    if mode is TransformMode.EXPLICIT:
        if v is None:
            raise TransformError("explicit transform mode needs a transform quaternion")
        return explicit_transform(states, v, roots)
    if not roots.roots:
        logger.warning("Graph has no root; skipping the transform construction")
        return None
    return find_transform(states, roots)
