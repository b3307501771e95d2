"""Condition verification, certificates and the command-line interface."""

import json

import numpy as np
import pytest

from pinncert.certify import (
    build_certificate,
    verify_boundary,
    verify_initial,
    verify_residual,
)
from pinncert.cli import main
from pinncert.network import DenseNetwork, random_network, save_network
from pinncert.residual import build_pde


def _zero_net(d0=2, out_dim=1):
    """Network that is identically zero (zero final layer)."""
    return DenseNetwork(
        [np.zeros((4, d0)), np.zeros((out_dim, 4))],
        [np.zeros(4), np.zeros(out_dim)],
    )


@pytest.fixture
def net_path(tmp_path):
    rng = np.random.default_rng(7)
    path = str(tmp_path / "net.json")
    save_network(random_network(rng, 2, [6, 6]), path)
    return path


def test_zero_network_burgers_trivia():
    net = _zero_net()
    pde = build_pde("burgers")
    # u == 0: boundaries hold exactly, residual is exactly zero
    for r in verify_boundary(net, pde, n_branches=5, n_samples=500):
        assert r.certified <= 1e-12 and r.passed
    r = verify_residual(net, pde, n_branches=5, n_samples=500)
    assert r.certified <= 1e-12 and r.passed
    # initial error is max sin(pi x)^2 = 1
    r = verify_initial(net, pde, n_branches=50, n_samples=2000)
    assert 1.0 <= r.certified <= 1.001
    assert not r.passed


def test_certified_dominates_empirical():
    rng = np.random.default_rng(0)
    net = random_network(rng, 2, [6, 6])
    pde = build_pde("burgers")
    results = [verify_initial(net, pde, n_branches=40, n_samples=3000)]
    results += verify_boundary(net, pde, n_branches=20, n_samples=3000)
    results.append(verify_residual(net, pde, n_branches=20, n_samples=3000))
    for r in results:
        assert r.certified >= r.empirical - 1e-12, r.tag


def test_output_count_mismatch_rejected():
    net = _zero_net(out_dim=2)
    pde = build_pde("burgers")
    with pytest.raises(ValueError, match="outputs"):
        verify_initial(net, pde)
    with pytest.raises(ValueError, match="outputs"):
        verify_residual(net, pde)


def test_diffusion_sorption_residual_rejected():
    with pytest.raises(ValueError, match="not supported"):
        verify_residual(_zero_net(), build_pde("diffusion-sorption"))


def test_certificate_layout(net_path):
    from pinncert.network import load_network

    net = load_network(net_path)
    pde = build_pde("burgers")
    results = verify_boundary(net, pde, n_branches=5, n_samples=500)
    cert = build_certificate(net_path, pde, results)
    assert cert["version"] == 1
    assert cert["pde"] == "burgers"
    assert len(cert["net_sha256"]) == 64
    assert cert["pass"] == all(c["passed"] for c in cert["conditions"])
    for c in cert["conditions"]:
        assert set(c) == {
            "tag", "certified", "empirical", "tolerance", "passed",
            "n_branches", "n_samples", "seed", "seconds",
        }


def _strip_seconds(doc):
    for c in doc["conditions"]:
        c.pop("seconds")
    return doc


def test_cli_certify_deterministic(net_path, tmp_path, capsys):
    args = ["certify", "--net", net_path, "--pde", "burgers",
            "--condition", "boundary", "--nb", "10", "--ns", "1000"]
    outs = []
    for _ in range(2):
        main(args)
        outs.append(_strip_seconds(json.loads(capsys.readouterr().out)))
    assert outs[0] == outs[1]


def test_cli_exit_codes(net_path, tmp_path, capsys):
    # random net: conditions fail -> 1
    rc = main(["certify", "--net", net_path, "--pde", "burgers",
               "--condition", "boundary", "--nb", "5", "--ns", "500"])
    assert rc == 1
    capsys.readouterr()
    # zero net on burgers boundaries -> pass -> 0
    zp = str(tmp_path / "zero.json")
    save_network(_zero_net(), zp)
    rc = main(["certify", "--net", zp, "--pde", "burgers",
               "--condition", "boundary", "--nb", "5", "--ns", "500"])
    assert rc == 0
    capsys.readouterr()
    # unreadable network -> 2
    rc = main(["certify", "--net", str(tmp_path / "missing.json"),
               "--pde", "burgers"])
    assert rc == 2
    # unsupported residual -> 2
    rc = main(["certify", "--net", zp, "--pde", "diffusion-sorption",
               "--condition", "residual"])
    assert rc == 2


def test_cli_certify_writes_file(net_path, tmp_path, capsys):
    out = str(tmp_path / "cert.json")
    main(["certify", "--net", net_path, "--pde", "burgers",
          "--condition", "boundary", "--nb", "5", "--ns", "500", "--out", out])
    capsys.readouterr()
    doc = json.load(open(out))
    assert doc["pde"] == "burgers"


def test_cli_bound(net_path, capsys):
    rc = main(["bound", "--net", net_path, "--box", "0:1,-1:1",
               "--target", "d2u", "--i", "1", "--nb", "10"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["lo"] <= doc["empirical_lo"] <= doc["empirical_hi"] <= doc["hi"]


def test_cli_bad_box(net_path, capsys):
    rc = main(["bound", "--net", net_path, "--box", "0:1,zork",
               "--target", "u"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_robin_boundary_uses_first_derivative():
    rng = np.random.default_rng(9)
    net = random_network(rng, 2, [5, 5])
    pde = build_pde("diffusion-sorption")
    results = verify_boundary(net, pde, n_branches=10, n_samples=2000)
    robin = [r for r in results if "D u_x" in r.tag][0]
    # cross-check the empirical value directly
    x = np.column_stack([np.linspace(0, 500, 5000), np.ones(5000)])
    vals = (net.forward(x)[:, 0] - 5e-4 * net.first_derivative(x, 1)[:, 0]) ** 2
    assert robin.certified >= vals.max() - 1e-9


def test_periodic_boundary_certified_sound():
    rng = np.random.default_rng(10)
    net = random_network(rng, 2, [5, 5], out_dim=2)
    pde = build_pde("schrodinger")
    results = verify_boundary(net, pde, n_branches=10, n_samples=2000)
    ts = np.linspace(0, np.pi / 2, 4000)
    x_lo = np.column_stack([ts, np.full_like(ts, -5.0)])
    x_hi = np.column_stack([ts, np.full_like(ts, 5.0)])
    checks = {
        "boundary[u1 periodic]": (net.forward(x_lo)[:, 0] - net.forward(x_hi)[:, 0]) ** 2,
        "boundary[du2/dx periodic]": (
            net.first_derivative(x_lo, 1)[:, 1] - net.first_derivative(x_hi, 1)[:, 1]
        ) ** 2,
    }
    by_tag = {r.tag: r for r in results}
    for tag, vals in checks.items():
        assert by_tag[tag].certified >= vals.max() - 1e-9
