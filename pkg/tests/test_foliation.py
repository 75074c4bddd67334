import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qdlab.domain import PlanarDomain, punctured_square
from qdlab.errors import ArcExitsDomain, ClassSpecInvalid
from qdlab.expr import QuadDiff
from qdlab.foliation import (Deformation, PartialFoliation, PushforwardFoliation, competitor_catalog,
                             parse_class_spec, standard_square_foliation)
from qdlab.quadrature import l1_norm

SQ = PlanarDomain.unit_square()
UP = {"type": "crosscut", "from": "bottom", "to": "top"}


def test_strip_dirichlet_and_height():
    F = PartialFoliation.strip(SQ, 0, 0, 1, 0.25)
    assert F.dirichlet_integral() == pytest.approx(0.25, abs=1e-12)
    assert F.height(UP).value == pytest.approx(0.25, abs=1e-12)


def test_qd_foliation_dirichlet_is_norm():
    dom = PlanarDomain.rectangle(0.25, 0.25, 1, 1)
    q = QuadDiff("(mul (z) (dz2))", dom)
    F = PartialFoliation.from_quad_diff(q)
    assert F.dirichlet_integral(1e-9) == pytest.approx(l1_norm(q, 1e-9), abs=1e-8)


def test_chart_overlaps_agree():
    dom = PlanarDomain.rectangle(0.25, 0.25, 1, 1)
    F = PartialFoliation.from_quad_diff(QuadDiff("(mul (z) (dz2))", dom))
    assert F.check_overlaps() < 1e-9


def test_transverse_measure_matches_invariant():
    dom = PlanarDomain.rectangle(0.25, 0.25, 1, 1)
    F = PartialFoliation.from_quad_diff(QuadDiff("(mul (z) (dz2))", dom))
    a, b = 0.5 + 0.3j, 0.5 + 0.9j
    exact = abs((2 / 3 * (b ** 1.5 - a ** 1.5)).imag)
    assert F.transverse_measure(np.array([a, b])) == pytest.approx(exact, abs=1e-9)


def test_transverse_measure_of_vertical_foliation():
    F = PartialFoliation.from_quad_diff(QuadDiff("(mul (const -1 0) (dz2))", SQ))
    assert F.transverse_measure(np.array([0.1 + 0.5j, 0.9 + 0.5j])) == pytest.approx(0.8)
    assert F.transverse_measure(np.array([0.5 + 0.1j, 0.5 + 0.9j])) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ArcExitsDomain):
        F.transverse_measure(np.array([0.5 + 0.5j, 1.5 + 0.5j]))


def test_cycle_heights_vanish_for_the_strip():
    # the strip 1/4 < y < 1/2 misses the punctures, so loops around them avoid it
    X = punctured_square(6)
    F = PartialFoliation.strip(X, -0.5, 0.25, 0.5, 0.5)
    for spec in ({"type": "cycle", "punctures": [0]}, {"type": "cycle", "punctures": [0, 2]},
                 {"type": "cycle", "punctures": list(range(len(X.punctures)))}):
        assert F.height(spec, grid_n=33).value == 0.0
    assert F.height(UP, grid_n=33).value == pytest.approx(0.25, abs=1e-12)


def test_small_loops_shrink_with_the_grid():
    # in the full foliation the infimum 0 is approached by loops two cells high
    X = punctured_square(6)
    F = PartialFoliation.from_quad_diff(QuadDiff("(dz2)", X))
    spec = {"type": "cycle", "punctures": [0]}
    coarse, fine = F.height(spec, grid_n=33).value, F.height(spec, grid_n=65).value
    assert fine < coarse <= 2 / 33 + 1e-12


def test_cycle_height_around_separated_punctures():
    # v = x on a square with punctures on a horizontal line: a loop around both
    # must cross the vertical leaves between them twice
    dom = PlanarDomain.unit_square(punctures=[0.3 + 0.5j, 0.7 + 0.5j])
    F = PartialFoliation.from_quad_diff(QuadDiff("(mul (const -1 0) (dz2))", dom))
    h = F.height({"type": "cycle", "punctures": [0, 1]}, grid_n=41).value
    assert h == pytest.approx(0.8, abs=0.06)
    assert F.height({"type": "cycle", "punctures": [0]}, grid_n=41).value < 0.06


@pytest.mark.parametrize("spec", ['{"type": "crosscut", "from": "bottom"}', '{"type": "cycle", "punctures": []}',
                                  '{"type": "cycle", "punctures": [5]}', '{"type": "loop"}', "not json"])
def test_class_spec_validation(spec):
    dom = PlanarDomain.unit_square(punctures=[0.5 + 0.5j])
    with pytest.raises(ClassSpecInvalid):
        parse_class_spec(spec, dom)


def test_identity_competitor_is_exact():
    S = standard_square_foliation()
    D = PushforwardFoliation(S, Deformation("identity", {})).dirichlet_integral()
    assert D == pytest.approx(1.0, abs=1e-12)


def test_catalogue_is_seeded_and_diffeomorphic():
    a = competitor_catalog((0, 0, 1, 1), 10, seed=4)
    b = competitor_catalog((0, 0, 1, 1), 10, seed=4)
    assert [d.params for d in a] == [d.params for d in b]
    assert all(d.min_jacobian((0, 0, 1, 1)) > 0 for d in a)


def test_deformations_fix_the_boundary():
    rect = (0, 0, 1, 1)
    t = np.linspace(0, 1, 21)
    edge = np.concatenate([t + 0j, 1 + 1j * t, t + 1j, 1j * t])
    for d in competitor_catalog(rect, 10, seed=1):
        w, _ = d.apply(edge, rect)
        assert np.max(np.abs(w - edge)) < 1e-12


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(min_value=0, max_value=10_000))
def test_dirichlet_principle(seed):
    S = standard_square_foliation()
    for d in competitor_catalog((0, 0, 1, 1), 4, seed=seed)[1:]:
        assert PushforwardFoliation(S, d).dirichlet_integral(1e-9) >= 1 - 1e-6
