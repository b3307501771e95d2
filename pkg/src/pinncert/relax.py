"""Scalar linear relaxations of the nonlinearities appearing in tanh-PINN certification.

Each relaxation returns a :class:`LinRelax` holding two lines ``h(y) = slope * y
+ offset`` that sandwich the target function over a construction interval
``[l_b, u_b]``.  Lines are stored in slope/offset form so that horizontal
bounds (slope 0, nonzero height) are representable.

Covered functions: tanh, its first and second derivatives, ``-sin(pi*x)`` on
[-1, 1] and ``2*sech(x)``.  The case analysis follows the convexity structure
of each function; multi-region cases are cross-checked on a grid and fall back
to a parallel-chord construction if the tangent search fails.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

TANGENT_TOL = 1e-10
TANGENT_MAX_ITER = 200
REGION_SNAP = 1e-12
# soundness slack granted to the internal grid cross-check
GRID_CHECK_TOL = 1e-11


# ---------------------------------------------------------------------------
# elementary functions
# ---------------------------------------------------------------------------

def tanh(y):
    return np.tanh(y)


def sigma_prime(y):
    t = np.tanh(y)
    return 1.0 - t * t


def sigma_second(y):
    t = np.tanh(y)
    return -2.0 * t * (1.0 - t * t)


def sigma_third(y):
    t2 = np.tanh(y) ** 2
    return -2.0 + 8.0 * t2 - 6.0 * t2 * t2


def sigma_fourth(y):
    t = np.tanh(y)
    return (16.0 * t - 24.0 * t ** 3) * (1.0 - t * t)


def neg_sin_pi(x):
    return -np.sin(np.pi * x)


def neg_sin_pi_prime(x):
    return -np.pi * np.cos(np.pi * x)


def two_sech(x):
    return 2.0 / np.cosh(x)


def two_sech_prime(x):
    return -2.0 * np.tanh(x) / np.cosh(x)


def two_sech_second(x):
    t = np.tanh(x)
    return -2.0 * (1.0 - 2.0 * t * t) / np.cosh(x)


# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LinRelax:
    """Linear sandwich ``alpha_l*y + beta_l <= f(y) <= alpha_u*y + beta_u``."""

    alpha_u: float
    beta_u: float
    alpha_l: float
    beta_l: float

    def upper(self, y):
        return self.alpha_u * y + self.beta_u

    def lower(self, y):
        return self.alpha_l * y + self.beta_l


@dataclass(frozen=True)
class InflectionTable:
    """Cached inflection abscissas / extrema of one scalar function."""

    tag: str
    inflections: Tuple[float, ...]
    extrema: Tuple[float, ...] = ()


def _root(fn: Callable[[float], float], lo: float, hi: float) -> float:
    return float(brentq(fn, lo, hi, xtol=1e-14, rtol=8.8817841970012523e-16))


def _build_tables() -> dict:
    # sigma' inflections = roots of sigma'''  (tanh^2 = 1/3)
    y1 = _root(sigma_third, -2.0, -0.1)
    # sigma'' inflections = roots of sigma'''' (tanh^2 = 2/3), plus 0
    s1 = _root(lambda y: sigma_fourth(y), -3.0, -0.7)
    # sigma'' extrema = roots of sigma''' (same abscissa as sigma' inflections)
    y_max = y1
    # 2 sech inflections: roots of its second derivative (tanh^2 = 1/2)
    x1 = _root(two_sech_second, -3.0, -0.1)
    return {
        "tanh_prime": InflectionTable("tanh_prime", (y1, -y1)),
        "tanh_second": InflectionTable(
            "tanh_second", (s1, 0.0, -s1), extrema=(y_max, -y_max)
        ),
        "two_sech": InflectionTable("two_sech", (x1, -x1)),
    }


INFLECTIONS = _build_tables()


# ---------------------------------------------------------------------------
# line construction helpers
# ---------------------------------------------------------------------------

def _line_through(f, p: float, slope: float) -> Tuple[float, float]:
    return slope, float(f(p)) - slope * p


def _chord(f, l: float, u: float) -> Tuple[float, float]:
    slope = (float(f(u)) - float(f(l))) / (u - l)
    return _line_through(f, l, slope)


def _tangent(f, fprime, d: float) -> Tuple[float, float]:
    slope = float(fprime(d))
    return slope, float(f(d)) - slope * d


def _tau(f, fprime, p: float, d: float) -> float:
    """Secant-minus-tangent slope; zero when the tangent at d passes through p."""
    if abs(p - d) < 1e-15:
        return 0.0
    return (float(f(p)) - float(f(d))) / (p - d) - float(fprime(d))


def tangent_point(f, fprime, p: float, d_lo: float, d_hi: float) -> float:
    """Find d in [d_lo, d_hi] such that the tangent to f at d passes through
    (p, f(p)), by bisection on the secant/tangent slope mismatch.

    Requires a sign change (or an exact zero) over the bracket.
    """
    t_lo = _tau(f, fprime, p, d_lo)
    t_hi = _tau(f, fprime, p, d_hi)
    if t_lo == 0.0:
        return d_lo
    if t_hi == 0.0:
        return d_hi
    if t_lo * t_hi > 0.0:
        raise ValueError(
            f"tangent_point: no sign change on [{d_lo}, {d_hi}] "
            f"(tau={t_lo:.3e}, {t_hi:.3e})"
        )
    lo, hi = d_lo, d_hi
    for _ in range(TANGENT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        t_mid = _tau(f, fprime, p, mid)
        if abs(t_mid) <= TANGENT_TOL or (hi - lo) < 1e-15:
            return mid
        if t_mid * t_lo < 0.0:
            hi = mid
        else:
            lo, t_lo = mid, t_mid
    return 0.5 * (lo + hi)


def _find_tangent(f, fprime, p, lo, hi, n: int = 64) -> Optional[float]:
    """Locate a tangent-through-p point inside [lo, hi] by scanning for a sign
    change of the slope mismatch, then bisecting.  Returns None on failure."""
    if hi < lo:
        return None
    grid = np.linspace(lo, hi, n + 1)
    vals = [_tau(f, fprime, p, d) for d in grid]
    for a, b, ta, tb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
        if ta == 0.0:
            return float(a)
        if ta * tb < 0.0:
            return tangent_point(f, fprime, p, float(a), float(b))
    if vals[-1] == 0.0:
        return float(grid[-1])
    return None


def _expanding_tangent(f, fprime, p, start, direction) -> float:
    """Tangent point search on an unbounded side: expand the bracket away from
    `start` in `direction` (+1/-1) until the slope mismatch changes sign."""
    step = 1.0
    lo = start
    for _ in range(64):
        hi = start + direction * step
        d = _find_tangent(f, fprime, p, min(lo, hi), max(lo, hi), n=32)
        if d is not None:
            return d
        step *= 2.0
    raise ValueError("tangent bracket expansion failed")


def chord_offset_relax(f, fprime, l_b: float, u_b: float, n: int = 256) -> LinRelax:
    """Generic sound relaxation: shift the chord up/down by the extreme
    deviation of f from it over [l_b, u_b].

    Deviation extrema are located where f' equals the chord slope (sign-change
    scan + Brent refinement) or at the endpoints.
    """
    if u_b - l_b < 1e-15:
        slope, off = _tangent(f, fprime, 0.5 * (l_b + u_b))
        return LinRelax(slope, off, slope, off)
    slope = (float(f(u_b)) - float(f(l_b))) / (u_b - l_b)
    grid = np.linspace(l_b, u_b, n + 1)
    resid = np.asarray(fprime(grid)) - slope
    candidates = [l_b, u_b]
    for a, b, ra, rb in zip(grid[:-1], grid[1:], resid[:-1], resid[1:]):
        if ra == 0.0:
            candidates.append(float(a))
        elif ra * rb < 0.0:
            candidates.append(_root(lambda x: float(fprime(x)) - slope, float(a), float(b)))
    dev = [float(f(c)) - slope * c for c in candidates]
    margin = 1e-12
    return LinRelax(slope, max(dev) + margin, slope, min(dev) - margin)


def _line_sound(f, line, l_b, u_b, side: str, n: int = 129) -> bool:
    y = np.linspace(l_b, u_b, n)
    fy = np.asarray(f(y))
    hy = line[0] * y + line[1]
    if side == "upper":
        return bool(np.all(fy <= hy + GRID_CHECK_TOL))
    return bool(np.all(hy <= fy + GRID_CHECK_TOL))


def _checked(f, fprime, l_b, u_b, upper, lower) -> LinRelax:
    """Assemble a relaxation from candidate lines.  Each line is cross-checked
    on a grid and independently replaced by the parallel-chord construction if
    it is missing or fails (e.g. when a tangent degenerates into the chord)."""
    fallback = None
    if upper is None or not _line_sound(f, upper, l_b, u_b, "upper"):
        fallback = chord_offset_relax(f, fprime, l_b, u_b)
        upper = (fallback.alpha_u, fallback.beta_u)
    if lower is None or not _line_sound(f, lower, l_b, u_b, "lower"):
        if fallback is None:
            fallback = chord_offset_relax(f, fprime, l_b, u_b)
        lower = (fallback.alpha_l, fallback.beta_l)
    return LinRelax(upper[0], upper[1], lower[0], lower[1])


def _combo(line1, line2, alpha: float) -> Optional[Tuple[float, float]]:
    if line1 is None or line2 is None:
        return None
    return (
        alpha * line1[0] + (1.0 - alpha) * line2[0],
        alpha * line1[1] + (1.0 - alpha) * line2[1],
    )


def _point_relax(f, fprime, p: float) -> LinRelax:
    slope, off = _tangent(f, fprime, p)
    return LinRelax(slope, off, slope, off)


def _convex_relax(f, fprime, l_b, u_b) -> LinRelax:
    su, ou = _chord(f, l_b, u_b)
    sl, ol = _tangent(f, fprime, 0.5 * (l_b + u_b))
    return LinRelax(su, ou, sl, ol)


def _concave_relax(f, fprime, l_b, u_b) -> LinRelax:
    su, ou = _tangent(f, fprime, 0.5 * (l_b + u_b))
    sl, ol = _chord(f, l_b, u_b)
    return LinRelax(su, ou, sl, ol)


def _check_interval(l_b: float, u_b: float) -> None:
    if not (math.isfinite(l_b) and math.isfinite(u_b)):
        raise ValueError(f"non-finite relaxation interval [{l_b}, {u_b}]")
    if l_b > u_b:
        raise ValueError(f"invalid relaxation interval [{l_b}, {u_b}]")


# ---------------------------------------------------------------------------
# sigmoid-shaped functions: tanh and -sin(pi x)
# ---------------------------------------------------------------------------

def relax_tanh(l_b: float, u_b: float) -> LinRelax:
    """CROWN-style relaxation of tanh: convex below 0, concave above."""
    _check_interval(l_b, u_b)
    if u_b - l_b < 1e-15:
        return _point_relax(tanh, sigma_prime, 0.5 * (l_b + u_b))
    if u_b <= 0.0:
        return _convex_relax(tanh, sigma_prime, l_b, u_b)
    if l_b >= 0.0:
        return _concave_relax(tanh, sigma_prime, l_b, u_b)
    d1 = _expanding_tangent(tanh, sigma_prime, l_b, 0.0, +1)
    d2 = _expanding_tangent(tanh, sigma_prime, u_b, 0.0, -1)
    upper = _line_through(tanh, l_b, float(sigma_prime(d1)))
    lower = _line_through(tanh, u_b, float(sigma_prime(d2)))
    return _checked(tanh, sigma_prime, l_b, u_b, upper, lower)


def relax_neg_sin_pi(l_b: float, u_b: float) -> LinRelax:
    """Relaxation of -sin(pi x) on [-1, 1]: concave left of 0, convex right."""
    _check_interval(l_b, u_b)
    if l_b < -1.0 - 1e-12 or u_b > 1.0 + 1e-12:
        raise ValueError(f"-sin(pi x) relaxation only valid on [-1, 1], got [{l_b}, {u_b}]")
    f, fp = neg_sin_pi, neg_sin_pi_prime
    if u_b - l_b < 1e-15:
        return _point_relax(f, fp, 0.5 * (l_b + u_b))
    if u_b <= 0.0:
        return _concave_relax(f, fp, l_b, u_b)
    if l_b >= 0.0:
        return _convex_relax(f, fp, l_b, u_b)
    # straddle: upper tangent through the right endpoint touches the concave
    # part, lower tangent through the left endpoint touches the convex part
    d1 = _find_tangent(f, fp, u_b, -1.0, 0.0)
    d2 = _find_tangent(f, fp, l_b, 0.0, 1.0)
    upper = None if d1 is None else _line_through(f, u_b, float(fp(d1)))
    lower = None if d2 is None else _line_through(f, l_b, float(fp(d2)))
    return _checked(f, fp, l_b, u_b, upper, lower)


# ---------------------------------------------------------------------------
# bump-shaped functions: sigma' and 2 sech (Table-3 case logic)
# ---------------------------------------------------------------------------

def _bump_relax(f, fprime, l_b, u_b, y1, y2, alpha) -> LinRelax:
    """Three-region relaxation of an even bump with inflections y1 < 0 < y2:
    convex on (-inf, y1], concave on [y1, y2], convex on [y2, inf)."""
    if u_b - l_b < 1e-15:
        return _point_relax(f, fprime, 0.5 * (l_b + u_b))

    def region(v):
        if v <= y1 + REGION_SNAP:
            return 1
        if v <= y2 + REGION_SNAP:
            return 2
        return 3

    rl, ru = region(l_b), region(u_b)
    if (rl, ru) in ((1, 1), (3, 3)):
        return _convex_relax(f, fprime, l_b, u_b)
    if (rl, ru) == (2, 2):
        return _concave_relax(f, fprime, l_b, u_b)

    if (rl, ru) == (1, 2):
        d1 = _find_tangent(f, fprime, l_b, y1, u_b)
        d2 = _find_tangent(f, fprime, u_b, l_b, y1)
        upper = None if d1 is None else _line_through(f, l_b, float(fprime(d1)))
        lower = None if d2 is None else _line_through(f, u_b, float(fprime(d2)))
    elif (rl, ru) == (2, 3):
        d1 = _find_tangent(f, fprime, u_b, l_b, y2)
        d2 = _find_tangent(f, fprime, l_b, y2, u_b)
        upper = None if d1 is None else _line_through(f, u_b, float(fprime(d1)))
        lower = None if d2 is None else _line_through(f, l_b, float(fprime(d2)))
    else:  # (1, 3)
        d1 = _find_tangent(f, fprime, l_b, y1, 0.0)
        d2 = _find_tangent(f, fprime, u_b, 0.0, y2)
        line1 = None if d1 is None else _line_through(f, l_b, float(fprime(d1)))
        line2 = None if d2 is None else _line_through(f, u_b, float(fprime(d2)))
        upper = _combo(line1, line2, alpha)
        if -l_b >= u_b:
            d3 = _find_tangent(f, fprime, u_b, l_b, y1)
            lower = None if d3 is None else _line_through(f, u_b, float(fprime(d3)))
        else:
            d4 = _find_tangent(f, fprime, l_b, y2, u_b)
            lower = None if d4 is None else _line_through(f, l_b, float(fprime(d4)))
    return _checked(f, fprime, l_b, u_b, upper, lower)


def relax_tanh_prime(l_b: float, u_b: float, alpha: float = 0.5) -> LinRelax:
    _check_interval(l_b, u_b)
    y1, y2 = INFLECTIONS["tanh_prime"].inflections
    return _bump_relax(sigma_prime, sigma_second, l_b, u_b, y1, y2, alpha)


def relax_two_sech(l_b: float, u_b: float, alpha: float = 0.5) -> LinRelax:
    _check_interval(l_b, u_b)
    x1, x2 = INFLECTIONS["two_sech"].inflections
    return _bump_relax(two_sech, two_sech_prime, l_b, u_b, x1, x2, alpha)


# ---------------------------------------------------------------------------
# sigma'': four convexity regions (Table-4 case logic)
# ---------------------------------------------------------------------------

def relax_tanh_second(l_b: float, u_b: float, alpha: float = 0.5) -> LinRelax:
    _check_interval(l_b, u_b)
    f, fp = sigma_second, sigma_third
    if u_b - l_b < 1e-15:
        return _point_relax(f, fp, 0.5 * (l_b + u_b))

    table = INFLECTIONS["tanh_second"]
    y1, y2, y3 = table.inflections
    y_max, y_min = table.extrema

    def region(v):
        if v <= y1 + REGION_SNAP:
            return 1
        if v <= y2 + REGION_SNAP:
            return 2
        if v <= y3 + REGION_SNAP:
            return 3
        return 4

    rl, ru = region(l_b), region(u_b)
    if (rl, ru) in ((1, 1), (3, 3)):
        return _convex_relax(f, fp, l_b, u_b)
    if (rl, ru) in ((2, 2), (4, 4)):
        return _concave_relax(f, fp, l_b, u_b)

    def thru(p, d):
        return None if d is None else _line_through(f, p, float(fp(d)))

    if (rl, ru) == (1, 2):
        upper = thru(l_b, _find_tangent(f, fp, l_b, y1, u_b))
        lower = thru(u_b, _find_tangent(f, fp, u_b, l_b, y1))
    elif (rl, ru) == (3, 4):
        upper = thru(l_b, _find_tangent(f, fp, l_b, y3, u_b))
        lower = thru(u_b, _find_tangent(f, fp, u_b, l_b, y3))
    elif (rl, ru) == (2, 3):
        upper = thru(u_b, _find_tangent(f, fp, u_b, l_b, y2))
        lower = thru(l_b, _find_tangent(f, fp, l_b, y2, u_b))
    elif (rl, ru) == (1, 3):
        upper = _combo(
            thru(l_b, _find_tangent(f, fp, l_b, y1, y_max)),
            thru(u_b, _find_tangent(f, fp, u_b, y_max, u_b)),
            alpha,
        )
        lower = thru(l_b, _find_tangent(f, fp, l_b, y2, u_b))
    elif (rl, ru) == (2, 4):
        upper = thru(u_b, _find_tangent(f, fp, u_b, l_b, y2))
        lower = _combo(
            thru(l_b, _find_tangent(f, fp, l_b, y2, y_min)),
            thru(u_b, _find_tangent(f, fp, u_b, y_min, u_b)),
            alpha,
        )
    else:  # (1, 4)
        upper = _combo(
            thru(l_b, _find_tangent(f, fp, l_b, y1, y_max)),
            thru(u_b, _find_tangent(f, fp, u_b, y_max, y2)),
            alpha,
        )
        lower = _combo(
            thru(l_b, _find_tangent(f, fp, l_b, y2, y_min)),
            thru(u_b, _find_tangent(f, fp, u_b, y_min, u_b)),
            alpha,
        )
    return _checked(f, fp, l_b, u_b, upper, lower)
