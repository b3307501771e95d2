"""Cross-language checks on the committed trainer-produced weight fixture."""

import json
import os

import numpy as np
import pytest

from pinncert.derivatives import BoxBounder
from pinncert.linbounds import Box
from pinncert.network import load_network
from pinncert.residual import bound_residual, build_pde, residual_values

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), "..", "fixtures")
FIXTURE = os.path.join(FIXTURE_DIR, "burgers_small.json")
CHECK = os.path.join(FIXTURE_DIR, "burgers_small_check.json")

pytestmark = pytest.mark.skipif(
    not os.path.exists(FIXTURE), reason="trained fixture not present"
)


@pytest.fixture(scope="module")
def net():
    return load_network(FIXTURE)


def test_fixture_shape(net):
    assert net.in_dim == 2 and net.out_dim == 1
    assert net.layer_dims() == [2, 16, 16, 16, 1]


def test_forward_agreement_with_trainer(net):
    doc = json.load(open(CHECK))
    points = np.array(doc["points"])
    expected = np.array(doc["values"])
    assert points.shape[0] >= 1000
    got = net.forward(points)
    assert np.max(np.abs(got - expected)) < 1e-6


def test_soundness_on_fixture(net):
    rng = np.random.default_rng(3)
    pde = build_pde("burgers")
    expr = pde.residual_exprs[0]
    for _ in range(10):
        lo = pde.domain.lower + rng.random(2) * pde.domain.width() * 0.6
        hi = lo + rng.random(2) * (pde.domain.upper - lo)
        box = Box(lo, hi)
        bounder = BoxBounder(net, box)
        x = box.sample(rng, 20_000)
        _, _, y_lo, y_hi = bounder.output()
        u = net.forward(x)[:, 0]
        assert y_lo[0] - 1e-9 <= u.min() and u.max() <= y_hi[0] + 1e-9
        for i in range(2):
            fb = bounder.first(i)
            du = net.first_derivative(x, i)[:, 0]
            assert fb.out_lo[0] - 1e-9 <= du.min() and du.max() <= fb.out_hi[0] + 1e-9
            sb = bounder.second(i)
            d2 = net.second_derivative(x, i)[:, 0]
            assert sb.out_lo[0] - 1e-9 <= d2.min() and d2.max() <= sb.out_hi[0] + 1e-9
        sbnd = bound_residual(bounder, expr)
        vals = residual_values(net, expr, x)
        assert sbnd.lo - 1e-9 <= vals.min() and vals.max() <= sbnd.hi + 1e-9
