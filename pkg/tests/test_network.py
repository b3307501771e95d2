"""Exact network evaluation against independent oracles, plus I/O and errors."""

import json

import numpy as np
import pytest

from helpers import fd_first, fd_second, rel_close
from pinncert.network import (
    DenseNetwork,
    load_network,
    network_from_dict,
    network_to_dict,
    random_network,
    save_network,
)


def _loop_forward(net, x):
    """Per-sample, per-neuron reference forward pass."""
    out = []
    for row in x:
        z = list(row)
        for k in range(net.n_layers):
            w, b = net.weights[k], net.biases[k]
            y = [sum(w[m][n] * z[n] for n in range(len(z))) + b[m] for m in range(w.shape[0])]
            z = y if k == net.n_layers - 1 else [np.tanh(v) for v in y]
        out.append(z)
    return np.array(out)


def test_forward_matches_loop_oracle():
    rng = np.random.default_rng(0)
    net = random_network(rng, 3, [5, 4], out_dim=2)
    x = rng.uniform(-2, 2, (10, 3))
    assert np.allclose(net.forward(x), _loop_forward(net, x), atol=1e-12)


def test_first_derivative_matches_fd():
    rng = np.random.default_rng(1)
    for _ in range(10):
        d0 = int(rng.integers(1, 4))
        net = random_network(rng, d0, [8, 8], out_dim=int(rng.integers(1, 3)))
        x = rng.uniform(-2, 2, (50, d0))
        for i in range(d0):
            assert rel_close(net.first_derivative(x, i), fd_first(net, x, i), rtol=1e-5)


def test_second_derivative_matches_fd():
    rng = np.random.default_rng(2)
    for _ in range(10):
        d0 = int(rng.integers(1, 4))
        net = random_network(rng, d0, [8, 8])
        x = rng.uniform(-2, 2, (50, d0))
        for i in range(d0):
            assert rel_close(net.second_derivative(x, i), fd_second(net, x, i), rtol=1e-4)


def test_single_linear_layer_derivatives():
    net = DenseNetwork([np.array([[2.0, -3.0]])], [np.array([0.5])])
    x = np.array([[1.0, 1.0], [0.0, -2.0]])
    assert np.allclose(net.forward(x), np.array([[-0.5], [6.5]]))
    assert np.allclose(net.first_derivative(x, 0), 2.0)
    assert np.allclose(net.first_derivative(x, 1), -3.0)
    assert np.allclose(net.second_derivative(x, 0), 0.0)


def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(3)
    net = random_network(rng, 2, [4], out_dim=1)
    path = str(tmp_path / "net.json")
    save_network(net, path)
    back = load_network(path)
    x = rng.uniform(-1, 1, (5, 2))
    assert np.array_equal(net.forward(x), back.forward(x))


def test_dimension_chain_error_names_layer():
    with pytest.raises(ValueError, match="layer 1"):
        DenseNetwork(
            [np.ones((3, 2)), np.ones((1, 4))],
            [np.zeros(3), np.zeros(1)],
        )


def test_bias_mismatch_error():
    with pytest.raises(ValueError, match="layer 0"):
        DenseNetwork([np.ones((3, 2))], [np.zeros(2)])


def test_bad_activation_rejected():
    with pytest.raises(ValueError, match="activation"):
        network_from_dict({"activation": "relu", "layers": [{"weight": [[1.0]], "bias": [0.0]}]})


def test_malformed_layer_rejected():
    with pytest.raises(ValueError, match="layer 0"):
        network_from_dict({"activation": "tanh", "layers": [{"weight": [[1.0]]}]})


def test_bad_input_shape():
    net = DenseNetwork([np.ones((1, 2))], [np.zeros(1)])
    with pytest.raises(ValueError, match="shape"):
        net.forward(np.zeros((5, 3)))
    with pytest.raises(ValueError, match="coordinate"):
        net.first_derivative(np.zeros((5, 2)), 2)


def test_round_trip_dict_layout():
    rng = np.random.default_rng(4)
    net = random_network(rng, 2, [3])
    doc = network_to_dict(net)
    assert doc["activation"] == "tanh"
    assert len(doc["layers"]) == 2
    # row-major: rows indexed by output neuron
    assert len(doc["layers"][0]["weight"]) == 3
    assert len(doc["layers"][0]["weight"][0]) == 2
