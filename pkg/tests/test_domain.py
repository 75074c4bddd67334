import json

import numpy as np
import pytest

from qdlab.domain import CompactExhaustion, PlanarDomain, punctured_square, q_domain
from qdlab.errors import DomainError


def test_rectangle_basics():
    r = PlanarDomain.rectangle(0, 0, 2, 1)
    assert r.area == 2 and r.perimeter == 6
    assert r.contains(1 + 0.5j) and not r.contains(3 + 0.5j)
    assert set(("bottom", "right", "top", "left")) <= set(r.boundary_arcs)


def test_q_domain_area():
    for n in (2, 4, 8):
        assert q_domain(n).area == pytest.approx(2 - 1 / n, abs=1e-15)
    assert q_domain(4, 2.0).area == pytest.approx(1.25)


def test_json_round_trip():
    d = PlanarDomain.rectangle(0, 0, 1, 1, punctures=[0.25 + 0.5j])
    e = PlanarDomain.from_json(json.loads(json.dumps(d.to_json())))
    assert e == d
    disk = PlanarDomain.from_json({"kind": "unit-disk"})
    assert disk.kind == "disk"


def test_boundary_coordinate_round_trip():
    d = PlanarDomain.rectangle(0, 0, 2, 1)
    for t in np.linspace(0, 0.99, 17):
        assert d.boundary_coordinate(d.boundary_point(t)) == pytest.approx(t, abs=1e-12)


def test_segment_exit():
    d = PlanarDomain.unit_square()
    s = d.segment_exit(0.5 + 0.5j, 2.5 + 0.5j)
    assert s == pytest.approx(0.25)
    assert d.segment_exit(0.2 + 0.2j, 0.3 + 0.3j) is None


def test_punctured_square():
    X = punctured_square(12)
    assert len(X.punctures) == 20
    assert all(X.contains(p) for p in X.punctures)


def test_non_rectilinear_rejected():
    with pytest.raises(DomainError):
        PlanarDomain("rectilinear", [0, 1, 1j + 0.5])


def test_exhaustion_is_nested():
    ex = CompactExhaustion.geometric(PlanarDomain.unit_square())
    for k in range(3):
        pts = ex.sample(k)
        assert np.all(PlanarDomain.unit_square().contains(pts))
