"""Affine and interval bounding machinery over box input domains.

Provides boxes, affine forms ``A x + a`` in the network input, their exact
optimisation over a box, backward linear-relaxation propagation of
pre-activation bounds through a tanh network, interval arithmetic helpers and
McCormick bilinear envelopes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .network import DenseNetwork
from .relax import relax_tanh

MCCORMICK_MIN_WIDTH = 1e-14


@dataclass(frozen=True)
class Box:
    """Axis-aligned input domain [lower_i, upper_i]^d; degenerate sides allowed."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=np.float64))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=np.float64))
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)
        if lo.shape != hi.shape or lo.ndim != 1:
            raise ValueError(f"box bounds must be matching 1-D arrays, got {lo.shape} / {hi.shape}")
        if np.any(hi < lo):
            raise ValueError("box has upper < lower in some coordinate")

    @property
    def dim(self) -> int:
        return self.lower.shape[0]

    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        u = rng.random((n, self.dim))
        return self.lower + u * (self.upper - self.lower)

    def corners(self) -> np.ndarray:
        """All 2^k corners (degenerate coordinates contribute one value)."""
        cols = []
        for lo, hi in zip(self.lower, self.upper):
            cols.append([lo] if hi == lo else [lo, hi])
        grids = np.meshgrid(*cols, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


@dataclass(frozen=True)
class AffineForm:
    """Row-stacked affine functions of the input: value_r(x) = rows[r] . x + offset[r]."""

    rows: np.ndarray  # (m, d)
    offset: np.ndarray  # (m,)

    def __post_init__(self):
        rows = np.asarray(self.rows, dtype=np.float64)
        off = np.asarray(self.offset, dtype=np.float64)
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "offset", off)
        if rows.ndim != 2 or off.shape != (rows.shape[0],):
            raise ValueError(f"inconsistent affine form shapes {rows.shape} / {off.shape}")

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return x @ self.rows.T + self.offset


def affine_max(rows: np.ndarray, offset, box: Box) -> np.ndarray:
    """Exact max of v.x + c over the box: positive parts hit the upper corner."""
    rows = np.asarray(rows, dtype=np.float64)
    pos = np.clip(rows, 0.0, None)
    neg = rows - pos
    return pos @ box.upper + neg @ box.lower + offset


def affine_min(rows: np.ndarray, offset, box: Box) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    pos = np.clip(rows, 0.0, None)
    neg = rows - pos
    return pos @ box.lower + neg @ box.upper + offset


def concretize(upper: AffineForm, lower: AffineForm, box: Box) -> Tuple[np.ndarray, np.ndarray]:
    """Interval enclosure implied by an affine sandwich over a box."""
    return affine_min(lower.rows, lower.offset, box), affine_max(upper.rows, upper.offset, box)


@dataclass
class LayerBounds:
    """Affine sandwich and concrete interval for one layer's pre-activation."""

    upper: AffineForm
    lower: AffineForm
    y_lo: np.ndarray
    y_hi: np.ndarray
    # tanh relaxation lines over [y_lo, y_hi]; None for the linear output layer
    act_alpha_u: np.ndarray | None = None
    act_beta_u: np.ndarray | None = None
    act_alpha_l: np.ndarray | None = None
    act_beta_l: np.ndarray | None = None


def _relax_tanh_rows(y_lo: np.ndarray, y_hi: np.ndarray):
    au = np.empty_like(y_lo)
    bu = np.empty_like(y_lo)
    al = np.empty_like(y_lo)
    bl = np.empty_like(y_lo)
    for j, (lo, hi) in enumerate(zip(y_lo, y_hi)):
        r = relax_tanh(float(lo), float(hi))
        au[j], bu[j], al[j], bl[j] = r.alpha_u, r.beta_u, r.alpha_l, r.beta_l
    return au, bu, al, bl


def _substitute(rows, offset, up_slope, up_off, lo_slope, lo_off, maximize: bool):
    """Replace each substituted quantity q_m (rows act on q) by its affine
    sandwich slope*y_m + off, picking sides by coefficient sign."""
    pos = np.clip(rows, 0.0, None)
    neg = rows - pos
    if maximize:
        new_rows = pos * up_slope + neg * lo_slope
        new_off = offset + pos @ up_off + neg @ lo_off
    else:
        new_rows = pos * lo_slope + neg * up_slope
        new_off = offset + pos @ lo_off + neg @ up_off
    return new_rows, new_off


def _backward_bound(net: DenseNetwork, k: int, layers: List[LayerBounds], maximize: bool):
    """Affine bound (in x) on y^(k+1) by backward substitution through layers k..1."""
    rows = net.weights[k].copy()
    offset = net.biases[k].copy()
    for j in range(k - 1, -1, -1):
        lb = layers[j]
        rows, offset = _substitute(
            rows, offset, lb.act_alpha_u, lb.act_beta_u, lb.act_alpha_l, lb.act_beta_l, maximize
        )
        offset = offset + rows @ net.biases[j]
        rows = rows @ net.weights[j]
    return AffineForm(rows, offset)


def crown_propagate(net: DenseNetwork, box: Box) -> List[LayerBounds]:
    """Pre-activation affine sandwiches for every layer, output layer included.

    Each layer is bounded by full backward substitution using the tanh
    relaxations of all earlier layers, so the cost is quadratic in depth.
    """
    if box.dim != net.in_dim:
        raise ValueError(f"box dimension {box.dim} != network input dim {net.in_dim}")
    layers: List[LayerBounds] = []
    for k in range(net.n_layers):
        up = _backward_bound(net, k, layers, maximize=True)
        lo = _backward_bound(net, k, layers, maximize=False)
        y_lo = affine_min(lo.rows, lo.offset, box)
        y_hi = affine_max(up.rows, up.offset, box)
        bounds = LayerBounds(up, lo, y_lo, y_hi)
        if k < net.n_layers - 1:
            (
                bounds.act_alpha_u,
                bounds.act_beta_u,
                bounds.act_alpha_l,
                bounds.act_beta_l,
            ) = _relax_tanh_rows(y_lo, y_hi)
        layers.append(bounds)
    return layers


# ---------------------------------------------------------------------------
# interval arithmetic
# ---------------------------------------------------------------------------

def interval_mul(a_lo, a_hi, b_lo, b_hi):
    """Elementwise interval product (broadcasting)."""
    cands = np.stack(
        [np.asarray(a_lo * b_lo), np.asarray(a_lo * b_hi), np.asarray(a_hi * b_lo), np.asarray(a_hi * b_hi)]
    )
    return cands.min(axis=0), cands.max(axis=0)


def interval_square(lo, hi):
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    sq_lo = np.minimum(lo * lo, hi * hi)
    sq_hi = np.maximum(lo * lo, hi * hi)
    straddle = (lo <= 0.0) & (hi >= 0.0)
    return np.where(straddle, 0.0, sq_lo), sq_hi


# ---------------------------------------------------------------------------
# McCormick bilinear envelopes
# ---------------------------------------------------------------------------

def _widen(lo, hi):
    lo = np.asarray(lo, dtype=np.float64).copy()
    hi = np.asarray(hi, dtype=np.float64).copy()
    pad = 0.5 * np.clip(MCCORMICK_MIN_WIDTH - (hi - lo), 0.0, None)
    return lo - pad, hi + pad


def mccormick(a_lo, a_hi, b_lo, b_hi, eta: float = 0.5, zeta: float = 0.5):
    """Convex combinations of the McCormick planes for the product a*b.

    Returns (upper, lower) where each side is a triple of arrays
    (coef_a, coef_b, const) such that

        a*b <= coef_a * a + coef_b * b + const     (upper)
        a*b >= coef_a * a + coef_b * b + const     (lower)

    for all a in [a_lo, a_hi], b in [b_lo, b_hi].  Degenerate ranges are
    widened to a tiny width so the planes stay valid.
    """
    if not (0.0 <= eta <= 1.0 and 0.0 <= zeta <= 1.0):
        raise ValueError(f"mixing coefficients must lie in [0, 1], got {eta}, {zeta}")
    a_lo, a_hi = _widen(a_lo, a_hi)
    b_lo, b_hi = _widen(b_lo, b_hi)
    # upper: eta*(a_hi*b + a*b_lo - a_hi*b_lo) + (1-eta)*(a_lo*b + a*b_hi - a_lo*b_hi)
    ua = eta * b_lo + (1.0 - eta) * b_hi
    ub = eta * a_hi + (1.0 - eta) * a_lo
    uc = -eta * a_hi * b_lo - (1.0 - eta) * a_lo * b_hi
    # lower: zeta*(a_lo*b + a*b_lo - a_lo*b_lo) + (1-zeta)*(a_hi*b + a*b_hi - a_hi*b_hi)
    la = zeta * b_lo + (1.0 - zeta) * b_hi
    lb = zeta * a_lo + (1.0 - zeta) * a_hi
    lc = -zeta * a_lo * b_lo - (1.0 - zeta) * a_hi * b_hi
    return (ua, ub, uc), (la, lb, lc)
