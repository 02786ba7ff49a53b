"""
Shared constants and oracles for the test suite
"""
import math

import numpy as np

from app.quaternion import UnitQuaternion, canonicalize, normalize_rows

# five spacecraft, scalar-first, as published (4-decimal truncations)
SPACECRAFT = [
    (0.0, -0.6894, -0.6140, 0.3843),
    (0.0, -0.0602, 0.7248, 0.6863),
    (0.0, 0.8975, -0.4409, 0.0119),
    (0.4796, -0.0077, -0.5447, -0.6879),
    (0.5929, 0.1024, 0.7263, 0.3325),
]
CASE1_EDGES = [(5, 1, 1.0), (1, 2, 0.5), (2, 3, 0.8), (3, 4, 0.6), (4, 5, 0.3)]
CASE2_EDGES = [(5, 1, 1.0), (4, 2, 0.5), (2, 3, 0.8), (3, 4, 0.6), (4, 5, 0.3)]


def spacecraft_array() -> np.ndarray:
    return normalize_rows(np.array(SPACECRAFT))


def attitude_matrices(q: np.ndarray) -> np.ndarray:
    """C(q) = (eps^2 - q.q) I + 2 q q^T - 2 eps q^x for (..., 4) inputs"""
    eps, v = q[..., 0], q[..., 1:]
    eye = np.eye(3)
    x1, x2, x3 = v[..., 0], v[..., 1], v[..., 2]
    zero = np.zeros_like(x1)
    skew = np.stack(
        [
            np.stack([zero, -x3, x2], axis=-1),
            np.stack([x3, zero, -x1], axis=-1),
            np.stack([-x2, x1, zero], axis=-1),
        ],
        axis=-2,
    )
    return (
        (eps**2 - np.sum(v * v, axis=-1))[..., None, None] * eye
        + 2.0 * v[..., :, None] * v[..., None, :]
        - 2.0 * eps[..., None, None] * skew
    )


def random_units(rng: np.random.Generator, size: int) -> np.ndarray:
    return normalize_rows(rng.standard_normal((size, 4)))


def config_text(n, edges, initial, integrator=None, transform="auto", v=None, name="test") -> str:
    lines = ["[graph]", f"nodes {n}"]
    lines += [f"edge {j} {i} {w}" for j, i, w in edges]
    lines += ["[initial]"]
    lines += [f"q {k} " + " ".join(str(c) for c in q) for k, q in enumerate(initial, start=1)]
    lines += ["[integrator]"]
    lines += [f"{key} {value}" for key, value in (integrator or {}).items()]
    lines += ["[transform]", f"mode {transform}"]
    if v is not None:
        lines.append("v " + " ".join(str(c) for c in v))
    lines += ["[output]", f"name {name}"]
    return "\n".join(lines) + "\n"


# ----- samplers over the canonical subspaces -----


def s1(rng) -> UnitQuaternion:
    q = random_units(rng, 1)[0]
    q[0] = abs(q[0]) + 1e-6
    return UnitQuaternion.from_array(q / np.linalg.norm(q))


def s2(rng) -> UnitQuaternion:
    vec = rng.standard_normal(3)
    vec /= np.linalg.norm(vec)
    return canonicalize(UnitQuaternion(0.0, tuple(vec)))


def s2_q3_positive(rng) -> UnitQuaternion:
    vec = rng.standard_normal(3)
    vec[2] = abs(vec[2]) + 1e-3
    vec /= np.linalg.norm(vec)
    return UnitQuaternion(0.0, tuple(vec))


def s2_q3_zero(rng) -> UnitQuaternion:
    if rng.random() < 0.1:
        return UnitQuaternion(0.0, (1.0, 0.0, 0.0))
    theta = rng.uniform(1e-6, math.pi - 1e-6)
    return UnitQuaternion(0.0, (math.cos(theta), math.sin(theta), 0.0))


def non_root_mix(rng, count: int, want_s1: bool, s2_sampler) -> list[UnitQuaternion]:
    states = [s1(rng) if rng.random() < 0.5 else s2_sampler(rng) for _ in range(count)]
    if want_s1 and not any(q.eps > 0 for q in states):
        states[int(rng.integers(count))] = s1(rng)
    if not want_s1:
        states = [q if q.eps == 0 else s2_sampler(rng) for q in states]
    return states
