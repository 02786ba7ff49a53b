import logging

import numpy as np
import pytest
from pydantic import ValidationError

from app import simulator
from app.digraph import build_graph
from app.exceptions import ConfigError, IntegrationError, QuaternionError
from app.protocol import NetworkState, ProtocolKind, control_matrix
from app.quaternion import UnitQuaternion, error_array
from app.schemas import IntegratorSettings, SimConfig
from app.services.runner import bundled_config
from app.simulator import integrate, simulate, step

from helpers import random_units, spacecraft_array


def unity_defect(att: np.ndarray) -> float:
    return float(np.max(np.abs(np.sum(att * att, axis=-1) - 1.0)))


def final_attitudes(g, initial, dt, t_final, renormalize=True) -> np.ndarray:
    settings = IntegratorSettings(dt=dt, t_final=t_final, record_every=10_000, renormalize=renormalize)
    return integrate(g, initial, settings).final.state.attitudes


def test_identical_attitudes_are_a_fixed_point(case1_graph):
    att = np.tile(spacecraft_array()[3], (5, 1))
    state = NetworkState(0.0, att)
    for _ in range(100):
        state = step(state, case1_graph, 0.05)
    assert np.max(np.abs(state.attitudes - att)) <= 1e-13
    assert np.array_equal(state.omegas, np.zeros((5, 3)))


def test_antipodal_pair_is_an_equilibrium():
    g = build_graph(2, [(1, 2, 1.0), (2, 1, 1.0)])
    q = spacecraft_array()[4]
    state = NetworkState(0.0, np.stack([q, -q]))
    after = step(state, g, 0.1)
    assert np.max(np.abs(after.attitudes - state.attitudes)) <= 1e-14


def test_single_agent_stays_put():
    g = build_graph(1, [])
    trace = integrate(g, spacecraft_array()[:1], IntegratorSettings(dt=0.1, t_final=1.0))
    assert len(trace.samples) == 11
    assert np.allclose(trace.final.state.attitudes, trace.samples[0].state.attitudes, rtol=0, atol=1e-14)


def test_step_returns_step_start_control(case1_graph):
    state = NetworkState(0.0, spacecraft_array())
    after = step(state, case1_graph, 0.01)
    assert after.t == pytest.approx(0.01)
    assert np.array_equal(after.omegas, control_matrix(state.attitudes, case1_graph.weights))


def test_step_rejects_bad_input(case1_graph):
    state = NetworkState(0.0, spacecraft_array())
    for dt in (0.0, -0.01, float("nan")):
        with pytest.raises(ConfigError, match="dt"):
            step(state, case1_graph, dt)
    with pytest.raises(QuaternionError):
        step(NetworkState(0.0, spacecraft_array()[:2]), case1_graph, 0.01)


def test_unity_defect_shrinks_with_step_size(case1_graph):
    state = NetworkState(0.0, spacecraft_array())
    coarse = step(state, case1_graph, 0.1, renormalize=False).attitudes
    fine = step(state, case1_graph, 0.05, renormalize=False).attitudes
    assert unity_defect(coarse) / unity_defect(fine) > 16.0


def test_unity_drift_without_renormalization(case1_graph):
    att = final_attitudes(case1_graph, spacecraft_array(), dt=0.01, t_final=100.0, renormalize=False)
    assert unity_defect(att) <= 1e-8


def test_renormalized_samples_stay_unit(case1_trace):
    assert unity_defect(case1_trace.attitudes()) <= 1e-12


def test_integration_is_deterministic(case2_graph):
    settings = IntegratorSettings(dt=0.01, t_final=2.0, record_every=7)
    first = integrate(case2_graph, spacecraft_array(), settings)
    second = integrate(case2_graph, spacecraft_array(), settings)
    assert np.array_equal(first.attitudes(), second.attitudes())
    assert np.array_equal(first.omegas(), second.omegas())


def test_fourth_order_convergence_on_case1():
    config = bundled_config("case1")

    def final_at(dt: float) -> np.ndarray:
        integrator = config.integrator.model_copy(update={"dt": dt, "record_every": 1_000_000})
        return simulate(config.model_copy(update={"integrator": integrator})).final.state.attitudes

    reference = final_at(0.00125)
    coarse = np.max(np.abs(final_at(0.01) - reference))
    fine = np.max(np.abs(final_at(0.005) - reference))
    assert 8.0 <= coarse / fine <= 32.0


def test_constant_frame_change_commutes_with_integration(rng, case2_graph):
    initial = spacecraft_array()
    settings = IntegratorSettings(dt=0.01, t_final=10.0, record_every=100)
    for _ in range(3):
        v = random_units(rng, 1)[0]
        plain = integrate(case2_graph, initial, settings).attitudes()
        moved = integrate(case2_graph, error_array(initial, v), settings).attitudes()
        assert np.max(np.abs(moved - error_array(plain, v))) <= 5e-10


def test_node_without_in_neighbors_is_constant(broken_trace):
    att = broken_trace.attitudes()
    assert np.max(np.abs(att[:, 0, :] - att[0, 0, :])) <= 1e-12
    assert np.all(broken_trace.omegas()[:, 0, :] == 0.0)


def test_non_finite_state_names_the_agent(monkeypatch, case1_graph):
    def poisoned(attitudes, weights):
        omegas = np.zeros((attitudes.shape[0], 3))
        omegas[1] = np.nan
        return omegas

    monkeypatch.setattr(simulator, "control_law", lambda protocol: poisoned)
    with pytest.raises(IntegrationError) as info:
        step(NetworkState(0.0, spacecraft_array()), case1_graph, 0.01)
    assert info.value.agent == 2
    assert info.value.t == pytest.approx(0.01)
    assert info.value.exit_code == 2


def test_integrator_settings_validation():
    with pytest.raises(ValidationError):
        IntegratorSettings(dt=0.0)
    with pytest.raises(ValidationError, match="dt must be"):
        IntegratorSettings(dt=0.2)
    with pytest.raises(ValidationError, match="t_final"):
        IntegratorSettings(dt=0.01, t_final=0.001)
    with pytest.raises(ValidationError):
        IntegratorSettings(record_every=0)

    assert IntegratorSettings().n_steps == 6000
    assert IntegratorSettings(dt=0.01, t_final=0.025).n_steps == 3
    assert IntegratorSettings(dt=0.1, t_final=5.0).n_steps == 50


def test_sample_times_include_first_and_last(case1_graph):
    trace = integrate(case1_graph, spacecraft_array(), IntegratorSettings(dt=0.01, t_final=0.1, record_every=3))
    assert trace.steps == 10
    assert trace.times().tolist() == pytest.approx([0.0, 0.03, 0.06, 0.09, 0.1])
    assert trace.samples[0].metrics is not None


def test_recorded_omegas_match_sample_attitudes(case1_graph):
    trace = integrate(case1_graph, spacecraft_array(), IntegratorSettings(dt=0.01, t_final=0.5, record_every=5))
    for sample in trace.samples:
        expected = control_matrix(sample.state.attitudes, case1_graph.weights)
        assert np.array_equal(sample.state.omegas, expected)


def test_additive_protocol_integrates(case1_graph):
    settings = IntegratorSettings(dt=0.01, t_final=1.0, protocol=ProtocolKind.ADDITIVE)
    trace = integrate(case1_graph, spacecraft_array(), settings)
    assert trace.protocol is ProtocolKind.ADDITIVE
    assert unity_defect(trace.attitudes()) <= 1e-12


def test_integrate_rejects_wrong_shape(case1_graph):
    with pytest.raises(QuaternionError, match=r"\(5, 4\)"):
        integrate(case1_graph, spacecraft_array()[:3], IntegratorSettings())


def test_simulate_without_root_warns_and_skips_transform(caplog):
    config = SimConfig(
        name="loose",
        n=2,
        edges=[],
        initial=[(1.0, 0.0, 0.0, 0.0), (0.0, 1.0, 0.0, 0.0)],
        integrator=IntegratorSettings(dt=0.1, t_final=0.2),
    )
    with caplog.at_level(logging.WARNING, logger="app"):
        trace = simulate(config)
    assert "quasi-strongly" in caplog.text
    assert trace.transform is None
    assert trace.final.metrics.k_index is None
    assert np.isnan(trace.final.metrics.eps_star_roots)


def test_simulate_canonicalizes_initial_attitudes():
    config = SimConfig(
        name="flip",
        n=2,
        edges=[{"j": 1, "i": 2, "weight": 1.0}],
        initial=[(-1.0, 0.0, 0.0, 0.0), (0.0, 0.0, 0.0, -1.0)],
        integrator=IntegratorSettings(dt=0.1, t_final=0.1),
    )
    trace = simulate(config)
    assert trace.samples[0].state.attitudes.tolist() == [[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0]]
    assert trace.transform.v == UnitQuaternion.identity()


def test_case2_synchronizes(case2_trace):
    assert case2_trace.final.metrics.disagreement < 1e-3
    assert case2_trace.final.t == pytest.approx(60.0)
