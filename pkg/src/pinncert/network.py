"""Fully-connected tanh networks: JSON I/O and exact batched evaluation.

Weight files use the layout::

    {"activation": "tanh",
     "layers": [{"weight": [[...], ...], "bias": [...]}, ...]}

Layers are ordered input -> output; every hidden layer applies tanh, the last
layer is linear.  Weight matrices are row-major with shape
(out_features, in_features).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np


@dataclass
class DenseNetwork:
    """A tanh MLP given by per-layer weight matrices and bias vectors."""

    weights: List[np.ndarray]
    biases: List[np.ndarray]

    def __post_init__(self):
        if len(self.weights) != len(self.biases):
            raise ValueError(
                f"{len(self.weights)} weight matrices but {len(self.biases)} bias vectors"
            )
        if not self.weights:
            raise ValueError("network must have at least one layer")
        self.weights = [np.asarray(w, dtype=np.float64) for w in self.weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in self.biases]
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.ndim != 2:
                raise ValueError(f"layer {k}: weight must be 2-D, got shape {w.shape}")
            if b.ndim != 1:
                raise ValueError(f"layer {k}: bias must be 1-D, got shape {b.shape}")
            if w.shape[0] != b.shape[0]:
                raise ValueError(
                    f"layer {k}: weight rows {w.shape[0]} != bias length {b.shape[0]}"
                )
            if k > 0 and w.shape[1] != self.weights[k - 1].shape[0]:
                raise ValueError(
                    f"layer {k}: expects {w.shape[1]} inputs but layer {k - 1} "
                    f"produces {self.weights[k - 1].shape[0]}"
                )

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def in_dim(self) -> int:
        return self.weights[0].shape[1]

    @property
    def out_dim(self) -> int:
        return self.weights[-1].shape[0]

    def layer_dims(self) -> List[int]:
        return [self.in_dim] + [w.shape[0] for w in self.weights]

    # -- exact evaluation ---------------------------------------------------

    def forward(self, x: np.ndarray) -> np.ndarray:
        """Evaluate the network on a batch x of shape (n, in_dim)."""
        z = self._check_batch(x)
        for k, (w, b) in enumerate(zip(self.weights, self.biases)):
            y = z @ w.T + b
            z = y if k == self.n_layers - 1 else np.tanh(y)
        return z

    def first_derivative(self, x: np.ndarray, i: int) -> np.ndarray:
        """Exact d(output)/d(x_i) on a batch, shape (n, out_dim)."""
        z = self._check_batch(x)
        self._check_coord(i)
        v = np.zeros((z.shape[0], self.in_dim))
        v[:, i] = 1.0
        for k in range(self.n_layers - 1):
            w, b = self.weights[k], self.biases[k]
            y = z @ w.T + b
            t = np.tanh(y)
            v = (1.0 - t * t) * (v @ w.T)
            z = t
        return v @ self.weights[-1].T

    def second_derivative(self, x: np.ndarray, i: int) -> np.ndarray:
        """Exact d^2(output)/d(x_i)^2 on a batch, shape (n, out_dim)."""
        z = self._check_batch(x)
        self._check_coord(i)
        v = np.zeros((z.shape[0], self.in_dim))
        v[:, i] = 1.0
        s = np.zeros_like(v)
        for k in range(self.n_layers - 1):
            w, b = self.weights[k], self.biases[k]
            y = z @ w.T + b
            t = np.tanh(y)
            sp = 1.0 - t * t
            spp = -2.0 * t * sp
            wv = v @ w.T
            s = spp * wv * wv + sp * (s @ w.T)
            v = sp * wv
            z = t
        return s @ self.weights[-1].T

    # -- helpers ------------------------------------------------------------

    def _check_batch(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 2 or x.shape[1] != self.in_dim:
            raise ValueError(
                f"expected input of shape (n, {self.in_dim}), got {x.shape}"
            )
        return x

    def _check_coord(self, i: int) -> None:
        if not 0 <= i < self.in_dim:
            raise ValueError(f"input coordinate {i} out of range for dim {self.in_dim}")


def load_network(path: str) -> DenseNetwork:
    with open(path) as fh:
        doc = json.load(fh)
    return network_from_dict(doc)


def network_from_dict(doc: dict) -> DenseNetwork:
    if doc.get("activation") != "tanh":
        raise ValueError(f"unsupported activation {doc.get('activation')!r}; only tanh")
    layers = doc.get("layers")
    if not isinstance(layers, list) or not layers:
        raise ValueError("weight file must contain a non-empty 'layers' list")
    weights, biases = [], []
    for k, layer in enumerate(layers):
        try:
            weights.append(np.array(layer["weight"], dtype=np.float64))
            biases.append(np.array(layer["bias"], dtype=np.float64))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"layer {k}: malformed weight/bias entry") from exc
    return DenseNetwork(weights, biases)


def network_to_dict(net: DenseNetwork) -> dict:
    return {
        "activation": "tanh",
        "layers": [
            {"weight": w.tolist(), "bias": b.tolist()}
            for w, b in zip(net.weights, net.biases)
        ],
    }


def save_network(net: DenseNetwork, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(network_to_dict(net), fh)


def network_sha256(path: str) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def random_network(
    rng: np.random.Generator,
    in_dim: int,
    hidden: Sequence[int],
    out_dim: int = 1,
    scale: float = 1.0,
) -> DenseNetwork:
    """Xavier-style random tanh net; used by tests and oracles."""
    dims = [in_dim, *hidden, out_dim]
    weights, biases = [], []
    for a, b in zip(dims[:-1], dims[1:]):
        std = scale * np.sqrt(2.0 / (a + b))
        weights.append(rng.normal(0.0, std, size=(b, a)))
        biases.append(rng.normal(0.0, 0.1 * scale, size=b))
    return DenseNetwork(weights, biases)
