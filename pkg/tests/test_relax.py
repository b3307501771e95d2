"""Grid-oracle soundness and construction properties of the scalar relaxations."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import grid_violation
from pinncert.relax import (
    INFLECTIONS,
    LinRelax,
    chord_offset_relax,
    neg_sin_pi,
    neg_sin_pi_prime,
    relax_neg_sin_pi,
    relax_tanh,
    relax_tanh_prime,
    relax_tanh_second,
    relax_two_sech,
    sigma_fourth,
    sigma_prime,
    sigma_second,
    sigma_third,
    tangent_point,
    two_sech,
)

TOL = 1e-9

FAMILIES = [
    ("tanh", lambda l, u: relax_tanh(l, u), np.tanh, (-6.0, 6.0)),
    ("tanh_prime", lambda l, u: relax_tanh_prime(l, u), sigma_prime, (-6.0, 6.0)),
    ("tanh_second", lambda l, u: relax_tanh_second(l, u), sigma_second, (-6.0, 6.0)),
    ("neg_sin_pi", relax_neg_sin_pi, neg_sin_pi, (-1.0, 1.0)),
    ("two_sech", lambda l, u: relax_two_sech(l, u), two_sech, (-8.0, 8.0)),
]


def _random_interval(rng, lo, hi):
    a, b = sorted(rng.uniform(lo, hi, 2))
    return float(a), float(b)


@pytest.mark.parametrize("name,relax_fn,f,dom", FAMILIES, ids=[f[0] for f in FAMILIES])
def test_grid_soundness(name, relax_fn, f, dom):
    rng = np.random.default_rng(hash(name) % 2**32)
    worst = 0.0
    for _ in range(200):
        l, u = _random_interval(rng, *dom)
        worst = max(worst, grid_violation(f, relax_fn(l, u), l, u, n=2000))
    assert worst <= TOL, f"{name}: violation {worst:.2e}"


@pytest.mark.parametrize("name,relax_fn,f,dom", FAMILIES, ids=[f[0] for f in FAMILIES])
def test_degenerate_interval_is_tangent(name, relax_fn, f, dom):
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = float(rng.uniform(*dom))
        r = relax_fn(p, p)
        assert abs(r.upper(p) - f(p)) < 1e-12
        assert abs(r.lower(p) - f(p)) < 1e-12
        # still a valid local sandwich nearby (tangent of a smooth function)
        assert grid_violation(f, r, p - 1e-4, p + 1e-4) <= 1e-7


def test_inflection_constants():
    # sigma' inflections are roots of sigma'''
    for y in INFLECTIONS["tanh_prime"].inflections:
        assert abs(sigma_third(y)) < 1e-12
    # sigma'' inflections are roots of sigma'''', extrema roots of sigma'''
    for y in INFLECTIONS["tanh_second"].inflections:
        assert abs(sigma_fourth(y)) < 1e-12
    for y in INFLECTIONS["tanh_second"].extrema:
        assert abs(sigma_third(y)) < 1e-12
    # symmetry
    y1, y2 = INFLECTIONS["tanh_prime"].inflections
    assert y1 == -y2 and y1 < 0


def test_region_misclassification_guard():
    # an interval inside the outer convex region of sigma'' must get a sound
    # relaxation; this is sensitive to the inflection constant being right
    l, u = -0.95, -0.7
    assert grid_violation(sigma_second, relax_tanh_second(l, u), l, u) <= TOL
    l, u = -1.4, -1.2
    assert grid_violation(sigma_second, relax_tanh_second(l, u), l, u) <= TOL


def test_neg_sin_pi_orientation():
    # concave left of zero (peak +1 at -1/2), convex right
    r = relax_neg_sin_pi(-0.9, -0.1)
    # concave: the chord is the lower bound, so the midpoint lies above it
    mid = -0.5
    assert neg_sin_pi(mid) > r.lower(mid)
    assert grid_violation(neg_sin_pi, r, -0.9, -0.1) <= TOL
    r = relax_neg_sin_pi(0.1, 0.9)
    assert neg_sin_pi(0.5) < r.upper(0.5)
    assert grid_violation(neg_sin_pi, r, 0.1, 0.9) <= TOL


def test_neg_sin_pi_domain_check():
    with pytest.raises(ValueError):
        relax_neg_sin_pi(-2.0, 0.0)


def test_tangent_point_property():
    # tangent to tanh at the returned point passes through (p, tanh(p))
    p = -2.0
    d = tangent_point(np.tanh, sigma_prime, p, 0.05, 6.0)
    slope = sigma_prime(d)
    assert abs((np.tanh(p) - np.tanh(d)) - slope * (p - d)) < 1e-8


def test_tangent_point_requires_sign_change():
    with pytest.raises(ValueError):
        tangent_point(np.tanh, sigma_prime, -2.0, 3.0, 6.0)


def test_chord_offset_fallback_sound():
    f = lambda x: np.asarray(x) ** 2 * np.cos(np.pi * np.asarray(x))
    fp = lambda x: 2 * np.asarray(x) * np.cos(np.pi * np.asarray(x)) - np.pi * np.asarray(x) ** 2 * np.sin(np.pi * np.asarray(x))
    rng = np.random.default_rng(11)
    for _ in range(100):
        l, u = _random_interval(rng, -1.0, 1.0)
        assert grid_violation(f, chord_offset_relax(f, fp, l, u), l, u) <= TOL


def test_invalid_interval():
    with pytest.raises(ValueError):
        relax_tanh(1.0, -1.0)
    with pytest.raises(ValueError):
        relax_tanh(float("nan"), 1.0)


@given(
    st.floats(-6.0, 6.0),
    st.floats(0.0, 12.0),
)
@settings(max_examples=200, deadline=None)
def test_tanh_relax_sound_property(lo, width):
    hi = min(lo + width, 6.0)
    r = relax_tanh(lo, hi)
    assert grid_violation(np.tanh, r, lo, hi, n=500) <= TOL


@given(st.floats(-4.0, 4.0), st.floats(0.0, 8.0))
@settings(max_examples=200, deadline=None)
def test_tanh_second_relax_sound_property(lo, width):
    hi = min(lo + width, 4.0)
    r = relax_tanh_second(lo, hi)
    assert grid_violation(sigma_second, r, lo, hi, n=500) <= TOL


def test_mixing_coefficient_changes_upper_line():
    # interval spanning all three sigma' regions: alpha trades off two tangents
    r0 = relax_tanh_prime(-2.0, 2.0, alpha=0.0)
    r1 = relax_tanh_prime(-2.0, 2.0, alpha=1.0)
    assert r0.alpha_u != r1.alpha_u
    for r in (r0, r1):
        assert grid_violation(sigma_prime, r, -2.0, 2.0) <= TOL
