"""Certification of PINN correctness conditions over box domains.

Three squared-error conditions are checked against user tolerances:

* initial   -- max over space of sum_j |u_j(t0, x) - g_j(x)|^2
* boundary  -- max over time of each boundary condition's squared error
* residual  -- max over the domain of the summed squared PDE residuals

Each condition is bounded with greedy input branching around the certified
box bounds, anchored by a Monte-Carlo estimate that also serves as the
reported empirical value.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass
from typing import List, Optional, Tuple

import numpy as np

from .branching import BranchReport, greedy_branch
from .derivatives import BoundConfig, BoxBounder
from .linbounds import Box, affine_max, affine_min, interval_square
from .network import DenseNetwork, network_sha256
from .residual import BoundarySpec, PDEProblem, bound_residual, residual_values

CERTIFICATE_VERSION = 1
DEFAULT_TOL_INITIAL = 1e-3
DEFAULT_TOL_BOUNDARY = 1e-3
DEFAULT_TOL_RESIDUAL = 1e-1


@dataclass
class ConditionResult:
    tag: str
    certified: float
    empirical: float
    tolerance: float
    passed: bool
    n_branches: int
    n_samples: int
    seed: int
    seconds: float


def _squared_hi(lo: float, hi: float) -> Tuple[float, float]:
    lo_a, hi_a = interval_square(np.array([lo]), np.array([hi]))
    return float(lo_a[0]), float(hi_a[0])


def _pinned_box(domain: Box, index: int, value: float) -> Box:
    lower = domain.lower.copy()
    upper = domain.upper.copy()
    lower[index] = value
    upper[index] = value
    return Box(lower, upper)


def _scalar_interval(u_row, u_off, l_row, l_off, box: Box) -> Tuple[float, float]:
    lo = float(affine_min(l_row[None, :], np.array([l_off]), box)[0])
    hi = float(affine_max(u_row[None, :], np.array([u_off]), box)[0])
    return lo, hi


def _run_condition(
    tag: str,
    bound_fn,
    sample_fn,
    box: Box,
    tolerance: float,
    n_branches: int,
    n_samples: int,
    seed: int,
    threads: int,
    dump_path: Optional[str],
) -> ConditionResult:
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    report = greedy_branch(
        bound_fn, box, n_branches,
        sample_fn=sample_fn, n_samples=n_samples, rng=rng,
        threads=threads, dump_path=dump_path,
    )
    seconds = time.perf_counter() - start
    certified = report.hi
    empirical = report.anchor_hi
    return ConditionResult(
        tag, certified, empirical, tolerance, bool(certified <= tolerance),
        n_branches, n_samples, seed, seconds,
    )


# ---------------------------------------------------------------------------
# initial condition
# ---------------------------------------------------------------------------

def verify_initial(
    net: DenseNetwork,
    pde: PDEProblem,
    tolerance: float = DEFAULT_TOL_INITIAL,
    n_branches: int = 200,
    n_samples: int = 10_000,
    seed: int = 0,
    config: BoundConfig = BoundConfig(),
    threads: int = 0,
    dump_path: Optional[str] = None,
) -> ConditionResult:
    """Certified max squared error of u(t0, .) against the initial targets."""
    if net.out_dim != pde.out_dim:
        raise ValueError(f"network has {net.out_dim} outputs, PDE expects {pde.out_dim}")
    ti, xi = pde.t_index, pde.x_index
    root = _pinned_box(pde.domain, ti, pde.initial.t0)
    targets = pde.initial.targets

    def bound_fn(box: Box) -> Tuple[float, float]:
        bounder = BoxBounder(net, box, config)
        up, lo_f, _, _ = bounder.output()
        x_lo, x_hi = float(box.lower[xi]), float(box.upper[xi])
        total_lo, total_hi = 0.0, 0.0
        for j, target in enumerate(targets):
            r = target.relax(x_lo, x_hi)
            # error e_j = u_j - g_j: subtract the opposite side of the target line
            u_row = up.rows[j].copy()
            u_row[xi] -= r.alpha_l
            u_off = float(up.offset[j]) - r.beta_l
            l_row = lo_f.rows[j].copy()
            l_row[xi] -= r.alpha_u
            l_off = float(lo_f.offset[j]) - r.beta_u
            e_lo, e_hi = _scalar_interval(u_row, u_off, l_row, l_off, box)
            sq_lo, sq_hi = _squared_hi(e_lo, e_hi)
            total_lo += sq_lo
            total_hi += sq_hi
        return total_lo, total_hi

    def sample_fn(x: np.ndarray) -> np.ndarray:
        u = net.forward(x)
        total = np.zeros(x.shape[0])
        for j, target in enumerate(targets):
            total += (u[:, j] - target.fn(x[:, xi])) ** 2
        return total

    return _run_condition(
        "initial", bound_fn, sample_fn, root, tolerance,
        n_branches, n_samples, seed, threads, dump_path,
    )


# ---------------------------------------------------------------------------
# boundary conditions
# ---------------------------------------------------------------------------

def _boundary_condition(
    net: DenseNetwork,
    pde: PDEProblem,
    spec: BoundarySpec,
    tolerance: float,
    n_branches: int,
    n_samples: int,
    seed: int,
    config: BoundConfig,
    threads: int,
    dump_path: Optional[str],
) -> ConditionResult:
    ti, xi = pde.t_index, pde.x_index
    j = spec.j

    if spec.kind in ("dirichlet", "robin"):
        root = _pinned_box(pde.domain, xi, spec.x_value)

        def bound_fn(box: Box) -> Tuple[float, float]:
            bounder = BoxBounder(net, box, config)
            up, lo_f, _, _ = bounder.output()
            u_row, u_off = up.rows[j], float(up.offset[j])
            l_row, l_off = lo_f.rows[j], float(lo_f.offset[j])
            if spec.kind == "robin":
                fb = bounder.first(xi)
                c = spec.robin_coef
                if c >= 0.0:
                    u_row = u_row - c * fb.out_lower.rows[j]
                    u_off = u_off - c * float(fb.out_lower.offset[j])
                    l_row = l_row - c * fb.out_upper.rows[j]
                    l_off = l_off - c * float(fb.out_upper.offset[j])
                else:
                    u_row = u_row - c * fb.out_upper.rows[j]
                    u_off = u_off - c * float(fb.out_upper.offset[j])
                    l_row = l_row - c * fb.out_lower.rows[j]
                    l_off = l_off - c * float(fb.out_lower.offset[j])
            e_lo, e_hi = _scalar_interval(
                u_row, u_off - spec.target, l_row, l_off - spec.target, box
            )
            return _squared_hi(e_lo, e_hi)

        def sample_fn(x: np.ndarray) -> np.ndarray:
            vals = net.forward(x)[:, j]
            if spec.kind == "robin":
                vals = vals - spec.robin_coef * net.first_derivative(x, xi)[:, j]
            return (vals - spec.target) ** 2

    elif spec.kind == "periodic":
        x_low = float(pde.domain.lower[xi])
        x_high = float(pde.domain.upper[xi])
        root = _pinned_box(pde.domain, xi, x_low)

        def _side_interval(box: Box) -> Tuple[float, float]:
            bounder = BoxBounder(net, box, config)
            if spec.deriv:
                fb = bounder.first(xi)
                return float(fb.out_lo[j]), float(fb.out_hi[j])
            _, _, y_lo, y_hi = bounder.output()
            return float(y_lo[j]), float(y_hi[j])

        def bound_fn(box: Box) -> Tuple[float, float]:
            lo1, hi1 = _side_interval(box)
            lo2, hi2 = _side_interval(_pinned_box(box, xi, x_high))
            return _squared_hi(lo1 - hi2, hi1 - lo2)

        def sample_fn(x: np.ndarray) -> np.ndarray:
            x2 = x.copy()
            x2[:, xi] = x_high
            if spec.deriv:
                diff = net.first_derivative(x, xi)[:, j] - net.first_derivative(x2, xi)[:, j]
            else:
                diff = net.forward(x)[:, j] - net.forward(x2)[:, j]
            return diff ** 2

    else:
        raise ValueError(f"unknown boundary kind {spec.kind!r}")

    tag = f"boundary[{spec.label or spec.kind}]"
    return _run_condition(
        tag, bound_fn, sample_fn, root, tolerance,
        n_branches, n_samples, seed, threads, dump_path,
    )


def verify_boundary(
    net: DenseNetwork,
    pde: PDEProblem,
    tolerance: float = DEFAULT_TOL_BOUNDARY,
    n_branches: int = 200,
    n_samples: int = 10_000,
    seed: int = 0,
    config: BoundConfig = BoundConfig(),
    threads: int = 0,
    dump_path: Optional[str] = None,
) -> List[ConditionResult]:
    """One certified result per boundary condition of the problem."""
    if net.out_dim != pde.out_dim:
        raise ValueError(f"network has {net.out_dim} outputs, PDE expects {pde.out_dim}")
    return [
        _boundary_condition(
            net, pde, spec, tolerance, n_branches, n_samples, seed,
            config, threads, dump_path,
        )
        for spec in pde.boundaries
    ]


# ---------------------------------------------------------------------------
# residual condition
# ---------------------------------------------------------------------------

def verify_residual(
    net: DenseNetwork,
    pde: PDEProblem,
    tolerance: float = DEFAULT_TOL_RESIDUAL,
    n_branches: int = 200,
    n_samples: int = 10_000,
    seed: int = 0,
    config: BoundConfig = BoundConfig(),
    threads: int = 0,
    dump_path: Optional[str] = None,
) -> ConditionResult:
    """Certified max of the summed squared PDE residuals over the domain."""
    if pde.residual_exprs is None:
        raise ValueError(
            f"PDE {pde.name!r} has a non-polynomial residual; "
            "residual certification is not supported for it"
        )
    if net.out_dim != pde.out_dim:
        raise ValueError(f"network has {net.out_dim} outputs, PDE expects {pde.out_dim}")
    exprs = pde.residual_exprs

    def bound_fn(box: Box) -> Tuple[float, float]:
        bounder = BoxBounder(net, box, config)
        total_lo, total_hi = 0.0, 0.0
        for expr in exprs:
            sb = bound_residual(bounder, expr)
            sq_lo, sq_hi = _squared_hi(sb.lo, sb.hi)
            total_lo += sq_lo
            total_hi += sq_hi
        return total_lo, total_hi

    def sample_fn(x: np.ndarray) -> np.ndarray:
        total = np.zeros(x.shape[0])
        for expr in exprs:
            total += residual_values(net, expr, x) ** 2
        return total

    return _run_condition(
        "residual", bound_fn, sample_fn, pde.domain, tolerance,
        n_branches, n_samples, seed, threads, dump_path,
    )


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------

def build_certificate(
    net_path: str, pde: PDEProblem, results: List[ConditionResult]
) -> dict:
    return {
        "version": CERTIFICATE_VERSION,
        "net_sha256": network_sha256(net_path),
        "pde": pde.name,
        "conditions": [asdict(r) for r in results],
        "pass": all(r.passed for r in results),
    }


def emit_certificate(cert: dict, path: Optional[str] = None) -> str:
    text = json.dumps(cert, indent=2, sort_keys=True) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
