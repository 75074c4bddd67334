import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdlab.domain import CompactExhaustion, PlanarDomain, q_domain
from qdlab.errors import DomainMismatch
from qdlab.expr import QuadDiff
from qdlab.quadrature import classify_convergence, integrate, l1_distance, l1_norm

TOL = 1e-9


def test_constant_norms():
    assert l1_norm(QuadDiff("(dz2)"), TOL) == pytest.approx(1.0, abs=2 * TOL)
    assert l1_norm(QuadDiff("(dz2)", q_domain(4)), TOL) == pytest.approx(1.75, abs=2 * TOL)
    assert l1_norm(QuadDiff("(dz2)", PlanarDomain.unit_disk()), TOL) == pytest.approx(math.pi, abs=1e-8)


def test_abs_z_closed_forms():
    # mean distance to a corner of the unit square, and 2 pi / 3 on the disk
    sq = (math.sqrt(2) + math.log(1 + math.sqrt(2))) / 3
    assert l1_norm(QuadDiff("(mul (z) (dz2))"), TOL) == pytest.approx(sq, abs=2 * TOL)
    disk = l1_norm(QuadDiff("(mul (z) (dz2))", PlanarDomain.unit_disk()), TOL)
    assert disk == pytest.approx(2 * math.pi / 3, abs=1e-8)


def test_error_estimate_is_honest():
    r = l1_norm(QuadDiff("(mul (z) (dz2))"), 1e-6, with_error=True)
    exact = (math.sqrt(2) + math.log(1 + math.sqrt(2))) / 3
    assert r.error <= 1e-6
    assert abs(r.value - exact) <= max(r.error, 1e-12) * 10


def test_integrate_polynomial():
    r = integrate(lambda z: z.real ** 2 * z.imag, [(0.0, 0.0, 1.0, 2.0)], tol=1e-12)
    assert r.value == pytest.approx(2 / 3, abs=1e-12)


def test_pullback_norm_is_target_area():
    q = QuadDiff("(pullback f2 (dz2))")
    assert l1_norm(q, 1e-8) == pytest.approx(1.5, abs=1e-6)


def test_distance_requires_same_domain():
    with pytest.raises(DomainMismatch):
        l1_distance(QuadDiff("(dz2)"), QuadDiff("(dz2)", PlanarDomain.unit_disk()))


def test_distance_to_negative():
    assert l1_distance(QuadDiff("(dz2)"), QuadDiff("(mul (const -1 0) (dz2))"), TOL) == pytest.approx(2.0)


def test_classification_scaled_sequence():
    sq = PlanarDomain.unit_square()
    seq = [QuadDiff(f"(mul (const {1 + 1 / n!r} 0) (dz2))", sq) for n in range(1, 21)]
    r = classify_convergence(seq, QuadDiff("(dz2)", sq), CompactExhaustion.geometric(sq))
    assert r["locally_uniform"] and r["norm_limsup_ok"] and r["l1_convergent"]
    assert r["flags_consistent"]


coef = st.complex_numbers(min_magnitude=0.1, max_magnitude=3, allow_nan=False, allow_infinity=False)


def poly(a, b):
    return f"(mul (add (const {a.real!r} {a.imag!r}) (mul (const {b.real!r} {b.imag!r}) (z))) (dz2))"


@settings(max_examples=25, deadline=None)
@given(a=coef, b=coef, c=coef)
def test_norm_scales_with_modulus_squared(a, b, c):
    q = QuadDiff(poly(a, b))
    scaled = q.scaled(c * c)
    lhs = l1_norm(scaled, TOL)
    rhs = abs(c) ** 2 * l1_norm(q, TOL)
    assert abs(lhs - rhs) <= 2 * TOL * max(1.0, abs(c) ** 2)


@settings(max_examples=25, deadline=None)
@given(a=coef, b=coef, c=coef, d=coef)
def test_reverse_triangle_inequality(a, b, c, d):
    p, q = QuadDiff(poly(a, b)), QuadDiff(poly(c, d))
    dist = l1_distance(p, q, TOL)
    gap = abs(l1_norm(p, TOL) - l1_norm(q, TOL))
    assert dist >= gap - 2 * TOL


@settings(max_examples=15, deadline=None)
@given(a=coef, b=coef)
def test_distance_is_symmetric(a, b):
    p, q = QuadDiff(poly(a, b)), QuadDiff("(dz2)")
    assert l1_distance(p, q, TOL) == pytest.approx(l1_distance(q, p, TOL), abs=2 * TOL)
    assert l1_distance(p, p, TOL) == 0.0
    assert np.isfinite(l1_norm(p, TOL))
