import numpy as np
import pytest

from app.digraph import build_graph, random_quasi_strongly_connected
from app.exceptions import QuaternionError
from app.protocol import (
    NetworkState,
    ProtocolKind,
    additive_control,
    control_all,
    control_input,
    control_law,
    control_matrix,
)
from app.quaternion import UnitQuaternion, error_array

from helpers import random_units, spacecraft_array


def test_identical_attitudes_give_zero_control(case1_graph):
    att = np.tile([0.6, 0.0, 0.8, 0.0], (5, 1))
    state = NetworkState(0.0, att)
    assert np.array_equal(control_all(state, case1_graph), np.zeros((5, 3)))


def test_node_without_in_neighbors(case2_graph):
    g = case2_graph.without_edge(5, 1)
    state = NetworkState(0.0, spacecraft_array())
    assert np.array_equal(control_input(1, state, g), np.zeros(3))


def test_two_node_example():
    g = build_graph(2, [(2, 1, 0.5)])
    state = NetworkState.from_quaternions([UnitQuaternion.identity(), UnitQuaternion(0.0, (0.0, 0.0, 1.0))])
    assert control_input(1, state, g).tolist() == [0.0, 0.0, 0.5]
    assert np.array_equal(control_input(2, state, g), np.zeros(3))


def test_control_all_matches_per_node(case1_graph):
    state = NetworkState(0.0, spacecraft_array())
    rows = control_all(state, case1_graph)
    for i in range(1, 6):
        assert np.array_equal(rows[i - 1], control_input(i, state, case1_graph))
    assert np.array_equal(control_all(state, build_graph(5, [])), np.zeros((5, 3)))


def test_control_matrix_matches_control_all(rng):
    for _ in range(50):
        n = int(rng.integers(2, 10))
        g = random_quasi_strongly_connected(rng, n, 0.3)
        state = NetworkState(0.0, random_units(rng, n))
        assert np.max(np.abs(control_matrix(state.attitudes, g.weights) - control_all(state, g))) <= 1e-14


def test_velocity_bound(rng):
    for _ in range(200):
        n = int(rng.integers(2, 12))
        g = random_quasi_strongly_connected(rng, n, 0.5)
        state = NetworkState(0.0, random_units(rng, n))
        norms = np.linalg.norm(control_all(state, g), axis=1)
        assert np.all(norms <= g.degrees + 1e-12)


def test_frame_change_leaves_control_unchanged(rng):
    for _ in range(100):
        n = int(rng.integers(2, 8))
        g = random_quasi_strongly_connected(rng, n, 0.4)
        att = random_units(rng, n)
        v = random_units(rng, 1)[0]
        moved = error_array(att, v)
        diff = control_matrix(moved, g.weights) - control_matrix(att, g.weights)
        assert np.max(np.abs(diff)) <= 1e-12


def test_control_reads_only_in_neighbors(case2_graph, rng):
    att = spacecraft_array()
    before = control_input(2, NetworkState(0.0, att), case2_graph)
    # agent 2 listens to agent 4 only
    for k in (1, 3, 5):
        perturbed = att.copy()
        perturbed[k - 1] = random_units(rng, 1)[0]
        after = control_input(2, NetworkState(0.0, perturbed), case2_graph)
        assert np.array_equal(before, after)


def test_additive_control():
    att = np.tile([0.6, 0.0, 0.8, 0.0], (3, 1))
    w = np.array([[0, 1.0, 0], [0, 0, 2.0], [0.5, 0, 0]])
    assert np.array_equal(additive_control(att, w), np.zeros((3, 3)))

    att = np.array([[1.0, 0, 0, 0], [0.0, 0, 0, 1.0], [1.0, 0, 0, 0]])
    # agent 1 hears agent 2: -(1.0) * (q_1 - q_2) = (0, 0, 1)
    assert additive_control(att, w)[0].tolist() == [0.0, 0.0, 1.0]
    assert control_law(ProtocolKind.ADDITIVE) is additive_control
    assert control_law("multiplicative") is control_matrix


def test_network_state_validation():
    with pytest.raises(QuaternionError, match="not unit"):
        NetworkState(0.0, np.array([[1.0, 0.1, 0.0, 0.0]]))
    with pytest.raises(QuaternionError, match=r"\(N, 4\)"):
        NetworkState(0.0, np.ones((2, 3)))
    with pytest.raises(QuaternionError, match="omegas"):
        NetworkState(0.0, np.array([[1.0, 0, 0, 0]]), np.zeros((2, 3)))

    state = NetworkState(0.0, np.array([[1.0, 0, 0, 0]]))
    assert np.array_equal(state.omegas, np.zeros((1, 3)))
    with pytest.raises(ValueError):
        state.attitudes[0, 0] = 0.5


def test_control_rejects_size_mismatch(case1_graph):
    with pytest.raises(QuaternionError):
        control_input(1, NetworkState(0.0, np.array([[1.0, 0, 0, 0]])), case1_graph)
