import csv
import io
import math

import numpy as np
import pytest

from qdlab.domain import PlanarDomain
from qdlab.errors import PointOutsideDomain, StartAtZero
from qdlab.expr import QuadDiff
from qdlab.trajectory import (ChartField, SingularityInfo, find_zeros, sample_on_transversal, trace_field,
                              trace_horizontal)

SQ = PlanarDomain.unit_square()


def test_constant_leaves_are_straight():
    t = trace_horizontal(QuadDiff("(dz2)", SQ), 0.3 + 0.4j)
    assert t.classification == "cross-cut"
    assert sorted(p.real for p in t.endpoints) == [0.0, 1.0]
    assert all(p.imag == 0.4 for p in t.endpoints)
    v = trace_horizontal(QuadDiff("(mul (const -1 0) (dz2))", SQ), 0.3 + 0.4j)
    assert sorted(p.imag for p in v.endpoints) == [0.0, 1.0]
    assert t.length == pytest.approx(1.0)


def test_budget_makes_transient():
    t = trace_horizontal(QuadDiff("(dz2)", SQ), 0.5 + 0.5j, budget=0.2)
    assert t.classification == "transient"
    assert {e.kind for e in t.ends} == {"budget"}


def test_leaf_keeps_the_integral_invariant():
    # on [1/4,1]^2, z dz^2 has Im((2/3) z^(3/2)) constant along each leaf
    dom = PlanarDomain.rectangle(0.25, 0.25, 1, 1)
    t = trace_horizontal(QuadDiff("(mul (z) (dz2))", dom), 0.6 + 0.5j)
    v = (2 / 3 * t.points ** 1.5).imag
    assert t.classification == "cross-cut"
    assert np.ptp(v) < 1e-9
    assert t.residual <= 1e-8


def test_natural_length_matches_invariant():
    dom = PlanarDomain.rectangle(0.25, 0.25, 1, 1)
    t = trace_horizontal(QuadDiff("(mul (z) (dz2))", dom), 0.6 + 0.5j)
    a, b = t.endpoints
    assert t.length == pytest.approx(abs((2 / 3 * (b ** 1.5 - a ** 1.5)).real), abs=1e-7)


def test_closed_leaves_around_a_double_pole():
    D = PlanarDomain.unit_disk(punctures=[0j])
    q = QuadDiff("(mul (div (const -1 0) (mul (z) (z))) (dz2))", D)
    t = trace_horizontal(q, 0.5, budget=20)
    assert t.classification == "closed"
    assert t.length == pytest.approx(2 * math.pi, abs=1e-8)
    assert np.max(np.abs(np.abs(t.points) - 0.5)) < 1e-8


def test_leaf_into_a_puncture():
    dom = PlanarDomain.unit_square(punctures=[0.5 + 0.5j])
    t = trace_horizontal(QuadDiff("(dz2)", dom), 0.2 + 0.5j)
    assert "puncture" in {e.kind for e in t.ends}


def test_start_errors():
    q = QuadDiff("(mul (z) (dz2))", PlanarDomain.rectangle(-1, -1, 1, 1))
    with pytest.raises(StartAtZero):
        trace_horizontal(q, 0j)
    with pytest.raises(PointOutsideDomain):
        trace_horizontal(q, 2 + 0j)


def test_find_zeros_square_and_disk():
    z = find_zeros(QuadDiff("(mul (z) (dz2))", PlanarDomain.rectangle(-1, -1, 1, 1)))
    assert len(z) == 1 and z[0].order == 1 and abs(z[0].location) < 1e-9
    d = find_zeros(QuadDiff("(mul (add (mul (z) (z)) (const 0.25 0)) (dz2))", PlanarDomain.unit_disk()))
    locs = sorted((s.location for s in d), key=lambda w: w.imag)
    assert len(locs) == 2
    assert np.allclose(locs, [-0.5j, 0.5j], atol=1e-8)
    assert find_zeros(QuadDiff("(mul (exp (z)) (dz2))", SQ)) == []


def test_double_zero():
    z = find_zeros(QuadDiff("(mul (mul (z) (z)) (dz2))", PlanarDomain.rectangle(-1, -1, 1, 1)))
    assert len(z) == 1 and z[0].order == 2


def test_prong_directions():
    s = SingularityInfo(0j, 1, 1.0)
    assert s.prong_count == 3
    assert s.prong_directions == pytest.approx([0.0, 2 * math.pi / 3, 4 * math.pi / 3])


def test_leaf_into_a_zero():
    q = QuadDiff("(mul (z) (dz2))", PlanarDomain.rectangle(-1, -1, 1, 1))
    t = trace_horizontal(q, 0.5 + 0j)
    assert t.classification == "singular-hit"
    assert any(e.kind == "zero" and abs(e.point) < 1e-6 for e in t.ends)


def test_chart_field_traces_level_sets():
    # v = x y has gradient y + i x; its level sets are hyperbolas
    dom = PlanarDomain.rectangle(0.2, 0.2, 1, 1)
    t = trace_field(ChartField(lambda z: z.imag + 1j * z.real, dom), 0.5 + 0.5j)
    assert np.ptp((t.points.real * t.points.imag)) < 1e-9


def test_transversal_sampling_is_equidistributed():
    q = QuadDiff("(mul (const -1 0) (dz2))", SQ)
    pts, total = sample_on_transversal(q_field := __import__("qdlab.trajectory").trajectory.QDField(q),
                                       np.array([0j, 1 + 0j]), 4)
    assert total == pytest.approx(1.0)
    assert np.allclose(pts, [0.125, 0.375, 0.625, 0.875])
    assert q_field.qd is q


def test_csv_export():
    t = trace_horizontal(QuadDiff("(dz2)", SQ), 0.3 + 0.4j)
    rows = list(csv.DictReader(io.StringIO(t.to_csv())))
    assert list(rows[0]) == ["t", "x", "y", "branch"]
    assert float(rows[0]["t"]) == pytest.approx(-0.3)
    assert float(rows[-1]["x"]) == 1.0
