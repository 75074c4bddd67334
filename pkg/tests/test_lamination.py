import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdlab.domain import PlanarDomain
from qdlab.errors import AmbientMismatch, InterleavingWithinLamination
from qdlab.expr import QuadDiff
from qdlab.lamination import (DiscreteLamination, Leaf, brute_force_crossings, build_quad_cover, crosses,
                              crossing_matrix, geodesic_min_radius, intersection_fraction, intersection_from_qds,
                              intersection_number, minsky_verify, random_lamination)

seeds = st.integers(min_value=0, max_value=2 ** 32 - 1)


def pair(seed):
    rng = np.random.default_rng(seed)
    return random_lamination(rng), random_lamination(rng)


def test_two_crossing_leaves():
    mu = DiscreteLamination([Leaf(0.0, 0.5, 0.5)])
    nu = DiscreteLamination([Leaf(0.25, 0.75, 0.25)])
    assert intersection_number(mu, nu) == 0.125
    assert intersection_number(mu, DiscreteLamination([Leaf(0.1, 0.2, 1.0)])) == 0.0


def test_shared_endpoint_never_crosses():
    assert crosses((0.1, 0.5), (0.5, 0.9)) == (False, True)
    assert crosses((0.1, 0.5), (0.3, 0.9)) == (True, False)
    assert crosses((0.1, 0.5), (0.5 + 1e-9, 0.9), tol=1e-6) == (False, True)


def test_interleaving_rejected():
    with pytest.raises(InterleavingWithinLamination):
        DiscreteLamination([Leaf(0.0, 0.5, 1), Leaf(0.25, 0.75, 1)])


def test_ambient_mismatch():
    mu = DiscreteLamination([Leaf(0.0, 0.5, 1)])
    nu = DiscreteLamination([Leaf(0.25, 0.75, 1)], PlanarDomain.unit_disk())
    with pytest.raises(AmbientMismatch):
        intersection_number(mu, nu)


def test_json_round_trip():
    mu, _ = pair(7)
    back = DiscreteLamination.from_json(mu.to_json())
    assert back.endpoints().tolist() == mu.endpoints().tolist()
    assert back.weights() == mu.weights()


def test_exact_arithmetic_beats_float_summation():
    # 0.1 * 0.1 summed ten times is not 0.1 in floating point; the exact count is
    mu = DiscreteLamination([Leaf(0.0, 0.5, 1.0)])
    nu = DiscreteLamination([Leaf(0.2 - 0.01 * k, 0.7 + 0.01 * k, 0.1) for k in range(10)])
    assert sum([0.1] * 10) != 1.0
    assert intersection_fraction(mu, nu) == 10 * Fraction(0.1)


def test_random_laminations_are_valid():
    rng = np.random.default_rng(3)
    for _ in range(50):
        lam = random_lamination(rng, 20)
        assert 1 <= len(lam) <= 20
        assert not crossing_matrix(lam.endpoints(), lam.endpoints()).any()


@settings(max_examples=200, deadline=None)
@given(seed=seeds)
def test_symmetry(seed):
    mu, nu = pair(seed)
    assert intersection_fraction(mu, nu) == intersection_fraction(nu, mu)
    assert crossing_matrix(mu.endpoints(), nu.endpoints()).T.tolist() == \
        crossing_matrix(nu.endpoints(), mu.endpoints()).tolist()


@settings(max_examples=200, deadline=None)
@given(seed=seeds, k=st.integers(min_value=-8, max_value=8))
def test_scaling_by_powers_of_two_is_exact(seed, k):
    mu, nu = pair(seed)
    c = 2.0 ** k
    assert intersection_fraction(mu.scaled(c), nu) == Fraction(c) * intersection_fraction(mu, nu)


@settings(max_examples=200, deadline=None)
@given(seed=seeds, split=st.integers(min_value=0, max_value=2 ** 20))
def test_additivity_over_sub_laminations(seed, split):
    mu, nu = pair(seed)
    pick = [(split >> (k % 20)) & 1 for k in range(len(mu))]
    a = DiscreteLamination([l for l, p in zip(mu.leaves, pick) if p])
    b = DiscreteLamination([l for l, p in zip(mu.leaves, pick) if not p])
    assert intersection_fraction(a, nu) + intersection_fraction(b, nu) == intersection_fraction(mu, nu)


@settings(max_examples=200, deadline=None)
@given(seed=seeds)
def test_cover_consistency(seed):
    mu, nu = pair(seed)
    cover = build_quad_cover(mu, nu)
    assert cover.certify()
    assert cover.total_fraction() == intersection_fraction(mu, nu)
    assert brute_force_crossings(mu, nu) == intersection_fraction(mu, nu)


@settings(max_examples=100, deadline=None)
@given(seed=seeds)
def test_self_intersection_is_zero(seed):
    mu, _ = pair(seed)
    assert intersection_fraction(mu, mu) == 0


def test_geodesic_min_radius():
    assert geodesic_min_radius(0.0, 0.5) == pytest.approx(0.0, abs=1e-12)
    # endpoints a quarter turn apart: distance tan(pi/8)
    assert geodesic_min_radius(0.0, 0.25) == pytest.approx(math.tan(math.pi / 8))
    assert geodesic_min_radius(0.0, 0.01) > 0.9


def test_sampled_intersection_of_horizontal_and_vertical():
    rect = PlanarDomain.rectangle(0, 0, 2, 1)
    est = intersection_from_qds(QuadDiff("(dz2)", rect), QuadDiff("(mul (const -1 0) (dz2))", rect), samples=64)
    assert est.value == pytest.approx(2.0, abs=1e-6)
    assert est.unassigned == (0.0, 0.0)


def test_minsky_on_a_rotated_pair():
    sq = PlanarDomain.unit_square()
    phi = QuadDiff("(mul (exp (const 0 0.5)) (dz2))", sq)
    psi = QuadDiff("(mul (const -1 0) (dz2))", sq)
    r = minsky_verify(phi, psi, samples=200)
    assert r.holds and r.slack > 0
    assert r.i == pytest.approx(math.cos(0.25), abs=5e-3)
