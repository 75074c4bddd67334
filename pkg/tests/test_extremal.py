import math

import numpy as np
import pytest

from qdlab import laplace as lp
from qdlab.domain import PlanarDomain, q_domain
from qdlab.errors import DomainError, FamilyNotRepresentable, RegionsOverlap
from qdlab.expr import DEFAULT_REGISTRY
from qdlab.extremal import (Annulus, ConformalMetric, Quadrilateral, el_lower_bound, el_multicurve,
                            el_weighted_curve, modulus, modulus_report, rectangle_uniformize)


def test_rectangle_modulus_and_duality():
    q = Quadrilateral.rectangle(2, 1)
    m = modulus(q, 64)
    assert m == pytest.approx(2.0, abs=1e-10)
    assert modulus(q.swapped(), 64) * m == pytest.approx(1.0, abs=1e-10)


def test_annulus_core_extremal_length():
    a = Annulus(math.exp(-math.pi))
    r = modulus_report(a, 128)
    assert r.value == pytest.approx(2.0, abs=1e-3)
    assert r.order == pytest.approx(2.0, abs=0.2)


def test_with_modulus_convention():
    a = Annulus.with_modulus(0.5)
    assert a.conventional_modulus == pytest.approx(0.5)
    assert a.core_el == pytest.approx(1 / 0.5)
    with pytest.raises(DomainError):
        Annulus(1.5)


def test_q2_modulus_with_mapped_corners():
    # the square's corners map to the four marked points of Q_2, so its modulus is 1;
    # the map is normalized to fix 0, 1 and 1+i
    f = DEFAULT_REGISTRY.get("f2")
    marked = (0j, 1 + 0j, 1 + 1j, complex(f.fourth_corner_image))
    q = Quadrilateral(q_domain(2), marked)
    assert modulus(q, 128) == pytest.approx(1.0, abs=1e-3)


def test_disk_quadrilateral_symmetry():
    # the lens with half-width 1/2 is symmetric under the side swap rotation only up
    # to the clipping, so check duality instead
    q = Quadrilateral.clipped_disk("y", 0.5)
    assert modulus(q, 64) * modulus(q.swapped(), 64) == pytest.approx(1.0, abs=1e-3)


def test_marked_points_validated():
    r = PlanarDomain.unit_square()
    with pytest.raises(DomainError):
        Quadrilateral(r, (0, 1, 1 + 1j))
    with pytest.raises(DomainError):
        Quadrilateral(r, (0, 1j, 1 + 1j, 1))
    with pytest.raises(DomainError):
        Quadrilateral(r, (0, 1, 1 + 1j, 0.5 + 0.5j))


def test_rectangle_uniformization_is_identity_on_rectangles():
    q = Quadrilateral.rectangle(2, 1)
    f, w, v = rectangle_uniformize(q, 32)
    assert (w, v) == pytest.approx((2.0, 1.0), abs=1e-9)
    z = np.array([0.3 + 0.2j, 1.7 + 0.9j])
    assert np.allclose(f(z), z, atol=1e-9)
    _, w1, v1 = rectangle_uniformize(q, 32, normalization="unit-height")
    assert (w1, v1) == pytest.approx((2.0, 1.0), abs=1e-9)


def test_weighted_curves():
    assert el_weighted_curve(2.0, 3.0) == 18.0
    with pytest.raises(ValueError):
        el_weighted_curve(-1.0, 1.0)
    a1 = Annulus(0.1, 0.2)
    a2 = Annulus(0.3, 0.5)
    total = el_multicurve([a1, a2], [1.0, 2.0])
    assert total == pytest.approx(a1.core_el + 4 * a2.core_el, rel=1e-3)
    with pytest.raises(RegionsOverlap):
        el_multicurve([Annulus(0.1, 0.4), Annulus(0.3, 0.5)], [1, 1])


def test_lower_bound_uniform_metric():
    # rho = 1 on the 2x1 rectangle: curves joining the short sides have length 2,
    # so l^2 / A = 2, the extremal length
    rect = PlanarDomain.rectangle(0, 0, 2, 1)
    rho = ConformalMetric.on_grid(rect, 32, lambda z: np.ones(z.shape))
    lb = el_lower_bound(rho, {"kind": "join", "from": "left", "to": "right"})
    assert lb == pytest.approx(2.0, abs=1e-9)
    with pytest.raises(FamilyNotRepresentable):
        el_lower_bound(rho, {"kind": "spiral"})


def test_richardson_helpers():
    assert lp.richardson(1.0 + 4e-2, 1.0 + 1e-2) == pytest.approx(1.0)
    assert lp.observed_order(1 + 16e-2, 1 + 4e-2, 1 + 1e-2) == pytest.approx(2.0)
    assert math.isnan(lp.observed_order(2.0, 2.0, 2.0))
