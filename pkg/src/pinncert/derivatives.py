"""Certified affine bounds on first and second input derivatives of tanh nets.

The exact derivative recursions are

    v^(k) = sigma'(y^(k)) . (W^(k) v^(k-1)),            v^(0) = e_i
    s^(k) = sigma''(y^(k)) . (W^(k) v^(k-1))^2
            + sigma'(y^(k)) . (W^(k) s^(k-1)),          s^(0) = 0

Every nonlinear factor is replaced by a sound linear sandwich in the input x:
sigma'/sigma'' are relaxed over the pre-activation interval, the relaxation
lines are substituted into the pre-activation affine sandwich, and every
product of two bounded quantities is handled with a McCormick envelope.
Accumulating layer by layer yields affine sandwiches (and intervals) on the
derivatives of every layer and of the network output.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .linbounds import (
    AffineForm,
    Box,
    LayerBounds,
    affine_max,
    affine_min,
    crown_propagate,
    interval_mul,
    mccormick,
)
from .network import DenseNetwork
from .relax import (
    INFLECTIONS,
    relax_tanh_prime,
    relax_tanh_second,
    sigma_prime,
    sigma_second,
)


@dataclass(frozen=True)
class BoundConfig:
    """Convex mixing coefficients of the McCormick planes and tangent combos.

    eta/zeta   -- products with a first-derivative factor (upper/lower)
    gamma/delta -- products with a second-derivative factor (upper/lower)
    rho/tau    -- the sigma''(y) * (W v) product (upper/lower)
    alpha      -- mixing of the two candidate upper/lower tangents in the
                  multi-region sigma'/sigma'' relaxations
    """

    eta: float = 0.5
    zeta: float = 0.5
    gamma: float = 0.5
    delta: float = 0.5
    rho: float = 0.5
    tau: float = 0.5
    alpha: float = 0.5

    def __post_init__(self):
        for name in ("eta", "zeta", "gamma", "delta", "rho", "tau", "alpha"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


def sigma_prime_range(y_lo: np.ndarray, y_hi: np.ndarray):
    """Exact range of sigma' = sech^2 over [y_lo, y_hi] (peak 1 at 0)."""
    f_lo, f_hi = sigma_prime(y_lo), sigma_prime(y_hi)
    hi = np.where((y_lo <= 0.0) & (y_hi >= 0.0), 1.0, np.maximum(f_lo, f_hi))
    return np.minimum(f_lo, f_hi), hi


def sigma_second_range(y_lo: np.ndarray, y_hi: np.ndarray):
    """Exact range of sigma'' over [y_lo, y_hi] (odd bump, extrema cached)."""
    y_at_max, y_at_min = INFLECTIONS["tanh_second"].extrema
    f_lo, f_hi = sigma_second(y_lo), sigma_second(y_hi)
    hi = np.maximum(f_lo, f_hi)
    lo = np.minimum(f_lo, f_hi)
    hi = np.where(
        (y_lo <= y_at_max) & (y_hi >= y_at_max),
        np.maximum(hi, sigma_second(y_at_max)),
        hi,
    )
    lo = np.where(
        (y_lo <= y_at_min) & (y_hi >= y_at_min),
        np.minimum(lo, sigma_second(y_at_min)),
        lo,
    )
    return lo, hi


def _pos_neg(a: np.ndarray):
    p = np.clip(a, 0.0, None)
    return p, a - p


def _lines_into_sandwich(alpha_u, beta_u, alpha_l, beta_l, lb: LayerBounds):
    """Substitute per-neuron lines in y into the pre-activation sandwich,
    giving affine upper/lower forms (in x) of the relaxed function."""
    pu, nu = _pos_neg(alpha_u)
    up_rows = pu[:, None] * lb.upper.rows + nu[:, None] * lb.lower.rows
    up_off = pu * lb.upper.offset + nu * lb.lower.offset + beta_u
    pl, nl = _pos_neg(alpha_l)
    lo_rows = pl[:, None] * lb.lower.rows + nl[:, None] * lb.upper.rows
    lo_off = pl * lb.lower.offset + nl * lb.upper.offset + beta_l
    return up_rows, up_off, lo_rows, lo_off


def _relax_rows(relax_fn, y_lo, y_hi, alpha):
    au = np.empty_like(y_lo)
    bu = np.empty_like(y_lo)
    al = np.empty_like(y_lo)
    bl = np.empty_like(y_lo)
    for j, (lo, hi) in enumerate(zip(y_lo, y_hi)):
        r = relax_fn(float(lo), float(hi), alpha)
        au[j], bu[j], al[j], bl[j] = r.alpha_u, r.beta_u, r.alpha_l, r.beta_l
    return au, bu, al, bl


def _tighten(lo_a, hi_a, lo_b, hi_b):
    """Intersect two enclosures of the same quantity (guarding fp inversion)."""
    lo = np.maximum(lo_a, lo_b)
    hi = np.minimum(hi_a, hi_b)
    return lo, np.maximum(hi, lo)


@dataclass
class _LayerDeriv:
    """Per-layer affine data produced while bounding a first derivative."""

    cu_rows: np.ndarray  # (d_k, d0)   upper form of v^(k)
    cu_off: np.ndarray
    cl_rows: np.ndarray
    cl_off: np.ndarray
    v_lo: np.ndarray  # (d_k,)
    v_hi: np.ndarray
    du_rows: np.ndarray  # (d_k, d_prev, d0)  upper form of sigma'(y_j) W_jn
    du_off: np.ndarray  # (d_k, d_prev)
    dl_rows: np.ndarray
    dl_off: np.ndarray
    d_lo: np.ndarray  # (d_k, d_prev)
    d_hi: np.ndarray


@dataclass
class FirstDerivBounds:
    i: int
    layers: List[_LayerDeriv]
    out_upper: AffineForm
    out_lower: AffineForm
    out_lo: np.ndarray  # (out_dim,)
    out_hi: np.ndarray


@dataclass
class SecondDerivBounds:
    i: int
    out_upper: AffineForm
    out_lower: AffineForm
    out_lo: np.ndarray
    out_hi: np.ndarray


def _input_seed(net: DenseNetwork, i: int):
    """Affine forms / interval of v^(0) = e_i (a constant)."""
    d = net.in_dim
    rows = np.zeros((d, d))
    off = np.zeros(d)
    off[i] = 1.0
    return rows, off, off.copy(), off.copy()


def _sigma_prime_layer(net, layers, cfg, t):
    """sigma' sandwich forms, range and sign-split D data for hidden layer t."""
    lb = layers[t]
    au, bu, al, bl = _relax_rows(relax_tanh_prime, lb.y_lo, lb.y_hi, cfg.alpha)
    gu_rows, gu_off, gl_rows, gl_off = _lines_into_sandwich(au, bu, al, bl, lb)
    s_lo, s_hi = sigma_prime_range(lb.y_lo, lb.y_hi)
    W = net.weights[t]
    Wp, Wn = _pos_neg(W)
    du_rows = Wp[:, :, None] * gu_rows[:, None, :] + Wn[:, :, None] * gl_rows[:, None, :]
    du_off = Wp * gu_off[:, None] + Wn * gl_off[:, None]
    dl_rows = Wp[:, :, None] * gl_rows[:, None, :] + Wn[:, :, None] * gu_rows[:, None, :]
    dl_off = Wp * gl_off[:, None] + Wn * gu_off[:, None]
    d_lo, d_hi = interval_mul(s_lo[:, None], s_hi[:, None], W, W)
    return du_rows, du_off, dl_rows, dl_off, d_lo, d_hi


def bound_first(
    net: DenseNetwork,
    box: Box,
    layers: List[LayerBounds],
    i: int,
    config: BoundConfig = BoundConfig(),
    sigma_prime_data: Optional[list] = None,
) -> FirstDerivBounds:
    """Affine sandwich on d(output)/d(x_i) over the box.

    `layers` is the result of crown_propagate on the same box.
    `sigma_prime_data` optionally carries precomputed per-layer sigma' data
    (it does not depend on i, so callers bounding several coordinates reuse it).
    """
    if not 0 <= i < net.in_dim:
        raise ValueError(f"input coordinate {i} out of range for dim {net.in_dim}")
    seed_rows, seed_off, _, _ = _input_seed(net, i)
    pcu_rows, pcu_off = seed_rows, seed_off
    pcl_rows, pcl_off = seed_rows.copy(), seed_off.copy()
    pv_lo = seed_off.copy()
    pv_hi = seed_off.copy()

    records: List[_LayerDeriv] = []
    for t in range(net.n_layers - 1):
        if sigma_prime_data is not None:
            du_rows, du_off, dl_rows, dl_off, d_lo, d_hi = sigma_prime_data[t]
        else:
            du_rows, du_off, dl_rows, dl_off, d_lo, d_hi = _sigma_prime_layer(
                net, layers, config, t
            )
        # v^(t+1)_j = sum_n D_jn * v^(t)_n via McCormick on each product
        (ua, ub, uc), (la, lb_, lc) = mccormick(
            d_lo, d_hi, pv_lo[None, :], pv_hi[None, :], config.eta, config.zeta
        )
        uap, uan = _pos_neg(ua)
        ubp, ubn = _pos_neg(ub)
        cu_rows = (
            np.einsum("jn,jnd->jd", uap, du_rows)
            + np.einsum("jn,jnd->jd", uan, dl_rows)
            + ubp @ pcu_rows
            + ubn @ pcl_rows
        )
        cu_off = (
            np.sum(uap * du_off + uan * dl_off + uc, axis=1)
            + ubp @ pcu_off
            + ubn @ pcl_off
        )
        lap, lan = _pos_neg(la)
        lbp, lbn = _pos_neg(lb_)
        cl_rows = (
            np.einsum("jn,jnd->jd", lap, dl_rows)
            + np.einsum("jn,jnd->jd", lan, du_rows)
            + lbp @ pcl_rows
            + lbn @ pcu_rows
        )
        cl_off = (
            np.sum(lap * dl_off + lan * du_off + lc, axis=1)
            + lbp @ pcl_off
            + lbn @ pcu_off
        )
        prod_lo, prod_hi = interval_mul(d_lo, d_hi, pv_lo[None, :], pv_hi[None, :])
        v_lo, v_hi = _tighten(
            affine_min(cl_rows, cl_off, box),
            affine_max(cu_rows, cu_off, box),
            prod_lo.sum(axis=1),
            prod_hi.sum(axis=1),
        )
        records.append(
            _LayerDeriv(
                cu_rows, cu_off, cl_rows, cl_off, v_lo, v_hi,
                du_rows, du_off, dl_rows, dl_off, d_lo, d_hi,
            )
        )
        pcu_rows, pcu_off, pcl_rows, pcl_off = cu_rows, cu_off, cl_rows, cl_off
        pv_lo, pv_hi = v_lo, v_hi

    Wp, Wn = _pos_neg(net.weights[-1])
    out_u = AffineForm(Wp @ pcu_rows + Wn @ pcl_rows, Wp @ pcu_off + Wn @ pcl_off)
    out_l = AffineForm(Wp @ pcl_rows + Wn @ pcu_rows, Wp @ pcl_off + Wn @ pcu_off)
    out_lo, out_hi = _tighten(
        affine_min(out_l.rows, out_l.offset, box),
        affine_max(out_u.rows, out_u.offset, box),
        Wp @ pv_lo + Wn @ pv_hi,
        Wp @ pv_hi + Wn @ pv_lo,
    )
    return FirstDerivBounds(i, records, out_u, out_l, out_lo, out_hi)


def bound_second(
    net: DenseNetwork,
    box: Box,
    layers: List[LayerBounds],
    first: FirstDerivBounds,
    config: BoundConfig = BoundConfig(),
) -> SecondDerivBounds:
    """Affine sandwich on d^2(output)/d(x_i)^2 over the box, reusing the
    per-layer data already produced for the matching first derivative."""
    i = first.i
    seed_rows, seed_off, _, _ = _input_seed(net, i)
    pcu_rows, pcu_off = seed_rows, seed_off
    pcl_rows, pcl_off = seed_rows.copy(), seed_off.copy()
    pv_lo = seed_off.copy()
    pv_hi = seed_off.copy()

    d_in = net.in_dim
    psu_rows = np.zeros((d_in, d_in))
    psu_off = np.zeros(d_in)
    psl_rows = psu_rows.copy()
    psl_off = psu_off.copy()
    pw_lo = np.zeros(d_in)
    pw_hi = np.zeros(d_in)

    for t in range(net.n_layers - 1):
        lb = layers[t]
        rec = first.layers[t]
        W = net.weights[t]
        Wp, Wn = _pos_neg(W)

        # E_j = (W v^(t))_j as an affine sandwich plus interval
        eu_rows = Wp @ pcu_rows + Wn @ pcl_rows
        eu_off = Wp @ pcu_off + Wn @ pcl_off
        el_rows = Wp @ pcl_rows + Wn @ pcu_rows
        el_off = Wp @ pcl_off + Wn @ pcu_off
        th_lo, th_hi = _tighten(
            affine_min(el_rows, el_off, box),
            affine_max(eu_rows, eu_off, box),
            Wp @ pv_lo + Wn @ pv_hi,
            Wp @ pv_hi + Wn @ pv_lo,
        )

        # sigma''(y_j) sandwich forms and exact range
        au, bu, al, bl = _relax_rows(relax_tanh_second, lb.y_lo, lb.y_hi, config.alpha)
        hu_rows, hu_off, hl_rows, hl_off = _lines_into_sandwich(au, bu, al, bl, lb)
        io_lo, io_hi = sigma_second_range(lb.y_lo, lb.y_hi)

        # q_j = sigma''(y_j) * E_j via McCormick, then P_jn = q_j * W_jn
        (qa, qb, qc), (ra, rb, rc) = mccormick(
            io_lo, io_hi, th_lo, th_hi, config.rho, config.tau
        )
        qap, qan = _pos_neg(qa)
        qbp, qbn = _pos_neg(qb)
        qu_rows = (
            qap[:, None] * hu_rows + qan[:, None] * hl_rows
            + qbp[:, None] * eu_rows + qbn[:, None] * el_rows
        )
        qu_off = qap * hu_off + qan * hl_off + qbp * eu_off + qbn * el_off + qc
        rap, ran = _pos_neg(ra)
        rbp, rbn = _pos_neg(rb)
        ql_rows = (
            rap[:, None] * hl_rows + ran[:, None] * hu_rows
            + rbp[:, None] * el_rows + rbn[:, None] * eu_rows
        )
        ql_off = rap * hl_off + ran * hu_off + rbp * el_off + rbn * eu_off + rc
        q_lo_i, q_hi_i = interval_mul(io_lo, io_hi, th_lo, th_hi)
        q_lo, q_hi = _tighten(
            affine_min(ql_rows, ql_off, box),
            affine_max(qu_rows, qu_off, box),
            q_lo_i,
            q_hi_i,
        )

        mu_rows = Wp[:, :, None] * qu_rows[:, None, :] + Wn[:, :, None] * ql_rows[:, None, :]
        mu_off = Wp * qu_off[:, None] + Wn * ql_off[:, None]
        ml_rows = Wp[:, :, None] * ql_rows[:, None, :] + Wn[:, :, None] * qu_rows[:, None, :]
        ml_off = Wp * ql_off[:, None] + Wn * qu_off[:, None]
        p_lo, p_hi = interval_mul(q_lo[:, None], q_hi[:, None], W, W)

        # s^(t+1)_j = sum_n [ P_jn * v^(t)_n + D_jn * s^(t)_n ]
        (m1ua, m1ub, m1uc), (m1la, m1lb, m1lc) = mccormick(
            p_lo, p_hi, pv_lo[None, :], pv_hi[None, :], config.eta, config.zeta
        )
        (m2ua, m2ub, m2uc), (m2la, m2lb, m2lc) = mccormick(
            rec.d_lo, rec.d_hi, pw_lo[None, :], pw_hi[None, :], config.gamma, config.delta
        )

        def acc(ca, forms_hi_rows, forms_hi_off, forms_lo_rows, forms_lo_off):
            cp, cn = _pos_neg(ca)
            rows = np.einsum("jn,jnd->jd", cp, forms_hi_rows) + np.einsum(
                "jn,jnd->jd", cn, forms_lo_rows
            )
            off = np.sum(cp * forms_hi_off + cn * forms_lo_off, axis=1)
            return rows, off

        def acc_vec(cb, hi_rows, hi_off, lo_rows, lo_off):
            cp, cn = _pos_neg(cb)
            return cp @ hi_rows + cn @ lo_rows, cp @ hi_off + cn @ lo_off

        su_rows, su_off = acc(m1ua, mu_rows, mu_off, ml_rows, ml_off)
        r2, o2 = acc_vec(m1ub, pcu_rows, pcu_off, pcl_rows, pcl_off)
        r3, o3 = acc(m2ua, rec.du_rows, rec.du_off, rec.dl_rows, rec.dl_off)
        r4, o4 = acc_vec(m2ub, psu_rows, psu_off, psl_rows, psl_off)
        su_rows = su_rows + r2 + r3 + r4
        su_off = su_off + o2 + o3 + o4 + np.sum(m1uc + m2uc, axis=1)

        sl_rows, sl_off = acc(m1la, ml_rows, ml_off, mu_rows, mu_off)
        r2, o2 = acc_vec(m1lb, pcl_rows, pcl_off, pcu_rows, pcu_off)
        r3, o3 = acc(m2la, rec.dl_rows, rec.dl_off, rec.du_rows, rec.du_off)
        r4, o4 = acc_vec(m2lb, psl_rows, psl_off, psu_rows, psu_off)
        sl_rows = sl_rows + r2 + r3 + r4
        sl_off = sl_off + o2 + o3 + o4 + np.sum(m1lc + m2lc, axis=1)

        pv_prod_lo, pv_prod_hi = interval_mul(p_lo, p_hi, pv_lo[None, :], pv_hi[None, :])
        dw_prod_lo, dw_prod_hi = interval_mul(
            rec.d_lo, rec.d_hi, pw_lo[None, :], pw_hi[None, :]
        )
        w_lo, w_hi = _tighten(
            affine_min(sl_rows, sl_off, box),
            affine_max(su_rows, su_off, box),
            (pv_prod_lo + dw_prod_lo).sum(axis=1),
            (pv_prod_hi + dw_prod_hi).sum(axis=1),
        )

        psu_rows, psu_off, psl_rows, psl_off = su_rows, su_off, sl_rows, sl_off
        pw_lo, pw_hi = w_lo, w_hi
        pcu_rows, pcu_off = rec.cu_rows, rec.cu_off
        pcl_rows, pcl_off = rec.cl_rows, rec.cl_off
        pv_lo, pv_hi = rec.v_lo, rec.v_hi

    Wp, Wn = _pos_neg(net.weights[-1])
    out_u = AffineForm(Wp @ psu_rows + Wn @ psl_rows, Wp @ psu_off + Wn @ psl_off)
    out_l = AffineForm(Wp @ psl_rows + Wn @ psu_rows, Wp @ psl_off + Wn @ psu_off)
    out_lo, out_hi = _tighten(
        affine_min(out_l.rows, out_l.offset, box),
        affine_max(out_u.rows, out_u.offset, box),
        Wp @ pw_lo + Wn @ pw_hi,
        Wp @ pw_hi + Wn @ pw_lo,
    )
    return SecondDerivBounds(i, out_u, out_l, out_lo, out_hi)


class BoxBounder:
    """Caches everything computable once per (network, box): the CROWN layer
    sandwiches, per-layer sigma' data, and derivative bounds per coordinate."""

    def __init__(self, net: DenseNetwork, box: Box, config: BoundConfig = BoundConfig()):
        self.net = net
        self.box = box
        self.config = config
        self.layers = crown_propagate(net, box)
        self._sigma_prime_data = [
            _sigma_prime_layer(net, self.layers, config, t)
            for t in range(net.n_layers - 1)
        ]
        self._first: Dict[int, FirstDerivBounds] = {}
        self._second: Dict[int, SecondDerivBounds] = {}

    def output(self) -> Tuple[AffineForm, AffineForm, np.ndarray, np.ndarray]:
        ob = self.layers[-1]
        return ob.upper, ob.lower, ob.y_lo, ob.y_hi

    def first(self, i: int) -> FirstDerivBounds:
        if i not in self._first:
            self._first[i] = bound_first(
                self.net, self.box, self.layers, i, self.config, self._sigma_prime_data
            )
        return self._first[i]

    def second(self, i: int) -> SecondDerivBounds:
        if i not in self._second:
            self._second[i] = bound_second(
                self.net, self.box, self.layers, self.first(i), self.config
            )
        return self._second[i]
