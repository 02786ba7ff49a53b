"""
Trajectory diagnostics: minimum scalar part, energy functions, disagreement
and the monotonicity / convergence verdicts computed from a trace.
"""
import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

from .config import get_settings
from .digraph import DirectedGraph, RootAnalysis
from .exceptions import GraphValidationError
from .protocol import NetworkState
from .quaternion import UnitQuaternion
from .transform import transform_array

if TYPE_CHECKING:
    from .simulator import Trace

logger = logging.getLogger(__name__)
settings = get_settings()

POSITIVE_SLACK = 1e-12  # initial eps* below this is reported as negative


@dataclass(frozen=True)
class Metrics:
    t: float
    eps_star_roots: float
    eps_star_all: float
    k_index: int | None
    w1: float
    w2: float
    v_energy: float
    disagreement: float
    max_omega_norm: float

    def as_row(self) -> dict:
        return {
            "t": self.t,
            "eps_star_roots": self.eps_star_roots,
            "eps_star_all": self.eps_star_all,
            "k_index": self.k_index,
            "W1": self.w1,
            "W2": self.w2,
            "V": self.v_energy,
            "disagreement": self.disagreement,
            "max_omega": self.max_omega_norm,
        }


@dataclass(frozen=True)
class Verdict:
    passed: bool
    message: str
    first_violation: tuple[float, float] | None = None
    c1_estimate: float | None = None

    def __bool__(self) -> bool:
        return self.passed


# ----- array helpers -----


def _indices(subset: Iterable[int], n: int) -> list[int]:
    idx = sorted(set(int(i) for i in subset))
    if not idx:
        raise GraphValidationError("node subset must not be empty")
    for i in idx:
        if not 1 <= i <= n:
            raise GraphValidationError(f"node {i} out of range 1..{n}")
    return idx


def _min_scalar(attitudes: np.ndarray, idx: Sequence[int]) -> tuple[float, int]:
    scalars = attitudes[[i - 1 for i in idx], 0]
    pos = int(np.argmin(scalars))  # first occurrence, so ties go to the lowest id
    return float(scalars[pos]), idx[pos]


def _w1(attitudes: np.ndarray, idx: Sequence[int]) -> float:
    _, k = _min_scalar(attitudes, idx)
    eps, vec = attitudes[k - 1, 0], attitudes[k - 1, 1:]
    return float(vec @ vec + (eps - 1.0) ** 2)


def _w2(attitudes: np.ndarray, idx: Sequence[int]) -> float:
    rows = attitudes[[i - 1 for i in idx]]
    return float(np.sum(np.sum(rows[:, 1:] ** 2, axis=1) + (rows[:, 0] - 1.0) ** 2))


def _pair_gap(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = a[:, None, :] - b[None, :, :]
    return np.abs(diff[..., 0]) + np.linalg.norm(diff[..., 1:], axis=-1)


def _disagreement(attitudes: np.ndarray) -> float:
    return float(_pair_gap(attitudes, attitudes).max())


def _frame(attitudes: np.ndarray, v: UnitQuaternion | None) -> np.ndarray:
    return attitudes if v is None else transform_array(attitudes, v)


# ----- operations -----


def min_scalar(state: NetworkState, subset: Iterable[int]) -> tuple[float, int]:
    """eps* over `subset` and the lowest node id attaining it"""
    return _min_scalar(state.attitudes, _indices(subset, state.n))


def energy_w1(state: NetworkState, roots: Iterable[int]) -> float:
    return _w1(state.attitudes, _indices(roots, state.n))


def energy_w2(state: NetworkState, roots: Iterable[int], v: UnitQuaternion | None = None) -> float:
    """Sum over roots of |q_hat|^2 + (eps_hat - 1)^2 in the frame given by v"""
    return _w2(_frame(state.attitudes, v), _indices(roots, state.n))


def energy_v(state: NetworkState) -> float:
    return 2.0 - 2.0 * float(state.scalars.min())


def disagreement(state: NetworkState) -> float:
    """max over pairs of |eps_i - eps_j| + |q_i - q_j|"""
    return _disagreement(state.attitudes)


def follower_gap(state: NetworkState, roots: RootAnalysis) -> float:
    """Largest distance between a non-root attitude and a root attitude"""
    if not roots.non_roots or not roots.roots:
        return 0.0
    att = state.attitudes
    followers = att[[i - 1 for i in roots.non_roots]]
    leaders = att[[i - 1 for i in roots.roots]]
    return float(_pair_gap(followers, leaders).max())


def omega_bounds(g: DirectedGraph, roots: RootAnalysis) -> tuple[float, int]:
    """(max_i d_i, N^r - 1); only the first bounds every body rate without extra weight assumptions"""
    return float(g.degrees.max()), max(roots.root_count - 1, 0)


def compute_metrics(
    state: NetworkState,
    g: DirectedGraph,
    roots: RootAnalysis,
    v: UnitQuaternion | None = None,
) -> Metrics:
    att = state.attitudes
    frame = _frame(att, v)
    all_nodes = list(range(1, g.n + 1))
    eps_all, _ = _min_scalar(frame, all_nodes)

    if roots.roots:
        eps_roots, k = _min_scalar(frame, roots.roots)
        w1 = _w1(frame, roots.roots)
        w2 = _w2(frame, roots.roots)
    else:
        eps_roots, k, w1, w2 = math.nan, None, math.nan, math.nan

    return Metrics(
        t=state.t,
        eps_star_roots=eps_roots,
        eps_star_all=eps_all,
        k_index=k,
        w1=w1,
        w2=w2,
        v_energy=2.0 - 2.0 * eps_all,
        disagreement=_disagreement(att),
        max_omega_norm=float(np.linalg.norm(state.omegas, axis=1).max()),
    )


def eps_star_series(trace: "Trace", subset: Iterable[int] | None = None) -> np.ndarray:
    """eps* over `subset` at every sample, in the trace's analysis frame"""
    n = trace.graph.n
    idx = [i - 1 for i in _indices(range(1, n + 1) if subset is None else subset, n)]
    v = trace.transform.v if trace.transform is not None else None
    stacked = _frame(trace.attitudes(), v)
    return stacked[:, idx, 0].min(axis=1)


def verify_monotone_eps_star(trace: "Trace", subset: Iterable[int] | None = None, tol: float | None = None) -> Verdict:
    tol = settings.MONOTONE_TOL if tol is None else tol
    if not trace.samples:
        return Verdict(False, "empty trace")
    series = eps_star_series(trace, subset)
    times = trace.times()
    drops = series[:-1] - series[1:]
    bad = np.flatnonzero(drops > tol)
    if bad.size:
        k = int(bad[0]) + 1
        delta = float(series[k] - series[k - 1])
        logger.debug(f"eps* decreased by {-delta:.3g} at t={times[k]:.6g}")
        return Verdict(False, f"eps* decreased by {-delta:.3g} at t={times[k]:.6g}", (float(times[k]), delta))
    if series[0] < -POSITIVE_SLACK:
        return Verdict(True, f"eps* non-decreasing, but starts negative ({series[0]:.3g})")
    return Verdict(True, f"eps* non-decreasing over {series.size} samples (tol {tol:g})")


def verify_convergence(trace: "Trace", tol: float | None = None, window: int | None = None) -> Verdict:
    tol = settings.CONVERGENCE_TOL if tol is None else tol
    window = settings.CONVERGENCE_WINDOW if window is None else window
    if not trace.samples:
        return Verdict(False, "empty trace")

    gaps = np.array([_disagreement(s.state.attitudes) for s in trace.samples])
    c1 = float(eps_star_series(trace)[-1])
    final = float(gaps[-1])
    if final >= tol:
        return Verdict(False, f"final disagreement {final:.3g} >= {tol:g}", c1_estimate=c1)

    tail = gaps[-window:]
    rises = np.flatnonzero(np.diff(tail) > 10.0 * tol)
    if rises.size:
        k = len(gaps) - len(tail) + int(rises[0]) + 1
        t = float(trace.samples[k].t)
        return Verdict(False, f"disagreement increases at t={t:.6g}", (t, float(gaps[k] - gaps[k - 1])), c1)

    if c1 <= 0.0:
        return Verdict(False, f"converged but C1 estimate {c1:.3g} is not positive", c1_estimate=c1)
    return Verdict(True, f"final disagreement {final:.3g} < {tol:g}, C1 = {c1:.6g}", c1_estimate=c1)
