"""Command-line interface: certify PINN conditions or bound single quantities."""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

import numpy as np

from .branching import greedy_branch
from .certify import (
    DEFAULT_TOL_BOUNDARY,
    DEFAULT_TOL_INITIAL,
    DEFAULT_TOL_RESIDUAL,
    build_certificate,
    emit_certificate,
    verify_boundary,
    verify_initial,
    verify_residual,
)
from .derivatives import BoundConfig, BoxBounder
from .linbounds import Box
from .network import load_network
from .residual import PDE_NAMES, build_pde


def _parse_box(text: str) -> Box:
    """Parse "l0:u0,l1:u1,..." into a Box."""
    lower, upper = [], []
    for part in text.split(","):
        pieces = part.split(":")
        if len(pieces) != 2:
            raise ValueError(f"bad box side {part!r}; expected lo:hi")
        lower.append(float(pieces[0]))
        upper.append(float(pieces[1]))
    return Box(np.array(lower), np.array(upper))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pinn-cert",
        description="Certified global bounds for tanh PINNs over box domains",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    cert = sub.add_parser("certify", help="verify PINN correctness conditions")
    cert.add_argument("--net", required=True, help="weight file (JSON)")
    cert.add_argument("--pde", required=True, choices=PDE_NAMES)
    cert.add_argument(
        "--condition", default="all",
        choices=["initial", "boundary", "residual", "all"],
    )
    cert.add_argument("--nb", type=int, default=200, help="branching budget")
    cert.add_argument("--ns", type=int, default=10_000, help="Monte-Carlo samples")
    cert.add_argument("--seed", type=int, default=0)
    cert.add_argument("--tol-init", type=float, default=DEFAULT_TOL_INITIAL)
    cert.add_argument("--tol-bound", type=float, default=DEFAULT_TOL_BOUNDARY)
    cert.add_argument("--tol-res", type=float, default=DEFAULT_TOL_RESIDUAL)
    cert.add_argument("--eta", type=float, default=0.5,
                      help="McCormick upper-plane mixing coefficient")
    cert.add_argument("--out", default=None, help="write the certificate here")
    cert.add_argument("--dump-branches", default=None,
                      help="newline-delimited JSON log of processed branches")
    cert.add_argument("--threads", type=int, default=0)

    bound = sub.add_parser("bound", help="bound one quantity over a box")
    bound.add_argument("--net", required=True)
    bound.add_argument("--box", required=True, help='e.g. "0:1,-1:1"')
    bound.add_argument("--target", required=True, choices=["u", "du", "d2u"])
    bound.add_argument("--i", type=int, default=0, help="input coordinate (du/d2u)")
    bound.add_argument("--j", type=int, default=0, help="output component")
    bound.add_argument("--nb", type=int, default=0)
    bound.add_argument("--ns", type=int, default=4096)
    bound.add_argument("--seed", type=int, default=0)
    return parser


def _cmd_certify(args) -> int:
    net = load_network(args.net)
    pde = build_pde(args.pde)
    config = BoundConfig(eta=args.eta)
    common = dict(
        n_branches=args.nb, n_samples=args.ns, seed=args.seed,
        config=config, threads=args.threads, dump_path=args.dump_branches,
    )
    results = []
    if args.condition in ("initial", "all"):
        results.append(verify_initial(net, pde, tolerance=args.tol_init, **common))
    if args.condition in ("boundary", "all"):
        results.extend(verify_boundary(net, pde, tolerance=args.tol_bound, **common))
    if args.condition in ("residual", "all"):
        results.append(verify_residual(net, pde, tolerance=args.tol_res, **common))
    cert = build_certificate(args.net, pde, results)
    sys.stdout.write(emit_certificate(cert, args.out))
    return 0 if cert["pass"] else 1


def _cmd_bound(args) -> int:
    net = load_network(args.net)
    box = _parse_box(args.box)
    target, i, j = args.target, args.i, args.j

    def bound_fn(b: Box):
        bounder = BoxBounder(net, b)
        if target == "u":
            _, _, y_lo, y_hi = bounder.output()
            return float(y_lo[j]), float(y_hi[j])
        src = bounder.first(i) if target == "du" else bounder.second(i)
        return float(src.out_lo[j]), float(src.out_hi[j])

    def sample_fn(x):
        if target == "u":
            return net.forward(x)[:, j]
        if target == "du":
            return net.first_derivative(x, i)[:, j]
        return net.second_derivative(x, i)[:, j]

    report = greedy_branch(
        bound_fn, box, args.nb, sample_fn=sample_fn, n_samples=args.ns,
        rng=np.random.default_rng(args.seed),
    )
    sys.stdout.write(json.dumps({
        "target": target, "i": i, "j": j,
        "lo": report.lo, "hi": report.hi,
        "empirical_lo": report.anchor_lo, "empirical_hi": report.anchor_hi,
        "branches": report.n_processed, "leaves": report.n_leaves,
    }, indent=2, sort_keys=True) + "\n")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "certify":
            return _cmd_certify(args)
        return _cmd_bound(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
