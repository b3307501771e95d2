"""Shared oracles for the test suite: finite differences, grid checks and
random problem generation."""

from __future__ import annotations

import numpy as np

from pinncert.linbounds import Box
from pinncert.network import DenseNetwork, random_network
from pinncert.relax import LinRelax


def fd_first(net: DenseNetwork, x: np.ndarray, i: int, h: float = 1e-4) -> np.ndarray:
    """Central-difference first derivative, shape (n, out_dim)."""
    xp = x.copy()
    xm = x.copy()
    xp[:, i] += h
    xm[:, i] -= h
    return (net.forward(xp) - net.forward(xm)) / (2.0 * h)


def fd_second(net: DenseNetwork, x: np.ndarray, i: int, h: float = 1e-3) -> np.ndarray:
    """Central-difference second derivative, shape (n, out_dim)."""
    xp = x.copy()
    xm = x.copy()
    xp[:, i] += h
    xm[:, i] -= h
    return (net.forward(xp) - 2.0 * net.forward(x) + net.forward(xm)) / (h * h)


def rel_close(a: np.ndarray, b: np.ndarray, rtol: float, atol: float = 1e-8) -> bool:
    return bool(np.all(np.abs(a - b) <= atol + rtol * np.maximum(np.abs(a), np.abs(b))))


def grid_violation(f, relax: LinRelax, l_b: float, u_b: float, n: int = 10_000) -> float:
    """Worst constraint violation of a linear sandwich on an n-point grid."""
    y = np.linspace(l_b, u_b, n)
    fy = np.asarray(f(y), dtype=np.float64)
    over = fy - (relax.alpha_u * y + relax.beta_u)
    under = (relax.alpha_l * y + relax.beta_l) - fy
    return max(float(over.max()), float(under.max()))


def random_net_and_box(rng: np.random.Generator, out_dim: int | None = None):
    d0 = int(rng.integers(1, 4))
    n_hidden = int(rng.integers(2, 6))
    hidden = [int(rng.integers(4, 21)) for _ in range(n_hidden)]
    od = out_dim if out_dim is not None else int(rng.integers(1, 3))
    net = random_network(rng, d0, hidden, out_dim=od)
    centre = rng.uniform(-2.0, 2.0, d0)
    half = rng.uniform(0.05, 1.5, d0)
    return net, Box(centre - half, centre + half)
