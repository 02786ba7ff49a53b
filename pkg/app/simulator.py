"""
Fixed-step RK4 integration of the closed-loop attitude kinematics
"""
import logging
import time
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .analysis import Metrics, compute_metrics
from .config import get_settings
from .digraph import DirectedGraph, RootAnalysis, is_quasi_strongly_connected
from .exceptions import ConfigError, IntegrationError, QuaternionError
from .protocol import NetworkState, ProtocolKind, control_law
from .quaternion import canonicalize, normalize_rows, rhs_array
from .schemas import IntegratorSettings, SimConfig
from .transform import TransformResult, select_transform

logger = logging.getLogger(__name__)
settings = get_settings()

ControlLaw = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Sample:
    t: float
    state: NetworkState
    metrics: Metrics | None = None


@dataclass(frozen=True, eq=False)
class Trace:
    """Recorded trajectory plus everything needed to re-analyze it"""

    samples: tuple[Sample, ...]
    graph: DirectedGraph
    roots: RootAnalysis
    settings: IntegratorSettings
    transform: TransformResult | None = None
    steps: int = 0
    wall_time: float = 0.0
    name: str = "run"

    @property
    def protocol(self) -> ProtocolKind:
        return self.settings.protocol

    @property
    def final(self) -> Sample:
        return self.samples[-1]

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def attitudes(self) -> np.ndarray:
        """(samples, N, 4)"""
        if not self.samples:
            return np.empty((0, self.graph.n, 4))
        return np.stack([s.state.attitudes for s in self.samples])

    def omegas(self) -> np.ndarray:
        if not self.samples:
            return np.empty((0, self.graph.n, 3))
        return np.stack([s.state.omegas for s in self.samples])

    def metrics(self) -> list[Metrics]:
        return [s.metrics for s in self.samples if s.metrics is not None]

    def with_samples(self, samples: Sequence[Sample]) -> "Trace":
        return replace(self, samples=tuple(samples))


def rk4_step(attitudes: np.ndarray, weights: np.ndarray, dt: float, law: ControlLaw) -> tuple[np.ndarray, np.ndarray]:
    """
    One classical RK4 step of the coupled kinematics.
    The control is re-evaluated from every stage's attitudes.
    Returns (unnormalized attitudes after the step, control at the step start).
    """
    omega0 = law(attitudes, weights)
    k1 = rhs_array(attitudes, omega0)
    a2 = attitudes + 0.5 * dt * k1
    k2 = rhs_array(a2, law(a2, weights))
    a3 = attitudes + 0.5 * dt * k2
    k3 = rhs_array(a3, law(a3, weights))
    a4 = attitudes + dt * k3
    k4 = rhs_array(a4, law(a4, weights))
    return attitudes + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), omega0


def _check_finite(attitudes: np.ndarray, t: float):
    bad = ~np.all(np.isfinite(attitudes), axis=1)
    if np.any(bad):
        raise IntegrationError("non-finite attitude", agent=int(np.flatnonzero(bad)[0]) + 1, t=t)


def step(
    state: NetworkState,
    g: DirectedGraph,
    dt: float,
    renormalize: bool = True,
    protocol: ProtocolKind = ProtocolKind.MULTIPLICATIVE,
) -> NetworkState:
    if not np.isfinite(dt) or dt <= 0:
        raise ConfigError(f"step size must be positive, got {dt}", field="dt")
    if state.n != g.n:
        raise QuaternionError(f"state has {state.n} agents but graph has {g.n} nodes")
    new, omega0 = rk4_step(state.attitudes, g.weights, dt, control_law(protocol))
    _check_finite(new, state.t + dt)
    if renormalize:
        new = normalize_rows(new)
    return NetworkState(state.t + dt, new, omega0)


def integrate(
    g: DirectedGraph,
    initial: np.ndarray,
    integrator: IntegratorSettings,
    roots: RootAnalysis | None = None,
    transform: TransformResult | None = None,
    name: str = "run",
) -> Trace:
    """Run the fixed-step loop and record every `record_every`-th state plus the first and last"""
    roots = g.root_analysis if roots is None else roots
    law = control_law(integrator.protocol)
    weights = g.weights
    dt, n_steps = integrator.dt, integrator.n_steps
    att = np.array(initial, dtype=float)
    if att.shape != (g.n, 4):
        raise QuaternionError(f"initial attitudes must be ({g.n}, 4), got {att.shape}")
    v = transform.v if transform is not None else None

    samples: list[Sample] = []

    def record(k: int, attitudes: np.ndarray):
        t = k * dt
        try:
            state = NetworkState(t, attitudes, law(attitudes, weights))
        except QuaternionError as e:
            raise IntegrationError(e.message, t=t) from e
        samples.append(Sample(t, state, compute_metrics(state, g, roots, v)))
        logger.debug(f"[{name}] t={t:.4f} disagreement={samples[-1].metrics.disagreement:.3e}")

    logger.info(f"[{name}] Integrating {g.n} agents: {n_steps} steps of dt={dt:g} ({integrator.protocol.value})")
    started = time.perf_counter()
    record(0, att)
    for k in range(1, n_steps + 1):
        att, _ = rk4_step(att, weights, dt, law)
        _check_finite(att, k * dt)
        if integrator.renormalize:
            att = normalize_rows(att)
        if k % integrator.record_every == 0 or k == n_steps:
            record(k, att)
    wall = time.perf_counter() - started
    logger.info(f"[{name}] Finished {n_steps} steps in {wall:.3f}s ({len(samples)} samples)")

    return Trace(
        samples=tuple(samples),
        graph=g,
        roots=roots,
        settings=integrator,
        transform=transform,
        steps=n_steps,
        wall_time=wall,
        name=name,
    )


def simulate(config: SimConfig) -> Trace:
    """Canonicalize, pick the analysis transform and integrate a validated config"""
    g = config.graph()
    roots = g.root_analysis
    if not is_quasi_strongly_connected(g):
        logger.warning(f"[{config.name}] Graph is not quasi-strongly connected; synchronization is not expected")

    states = config.initial_quaternions()
    if config.canonicalize_init:
        states = [canonicalize(q) for q in states]
    transform = select_transform(config.transform_mode, states, roots, config.transform_quaternion())

    initial = np.array([q.as_array() for q in states])
    return integrate(g, initial, config.integrator, roots, transform, name=config.name)
