import math

import numpy as np
import pytest

from qdlab.domain import PlanarDomain
from qdlab.errors import EvaluationAtPuncture, ExpressionError, PointOutsideDomain
from qdlab.expr import DEFAULT_REGISTRY, MapRegistry, QuadDiff, parse
from qdlab.sc import SCMap

# frozen from tests/oracles/halfplane_sc.py (mpmath, 30 digits)
F2_AT_CENTRE = 0.49555265693520395 + 0.5029172706834885j
PHI2_AT_CENTRE = 1.035802798911522 + 0.015692017558300794j


def test_const_is_real_then_imaginary():
    assert QuadDiff("(mul (const -1 0) (dz2))")(0.3 + 0.4j) == -1
    assert QuadDiff("(mul (const 0 -1) (dz2))")(0.3 + 0.4j) == -1j


def test_polynomial_and_exp():
    q = QuadDiff("(mul (add (mul (z) (z)) (const 0.25 0)) (dz2))", PlanarDomain.unit_disk())
    z = 0.2 - 0.3j
    assert q(z) == pytest.approx(z * z + 0.25, abs=1e-15)
    e = QuadDiff("(mul (exp (mul (const 0 1) (z))) (dz2))")
    assert e(0.5 + 0.5j) == pytest.approx(np.exp(1j * (0.5 + 0.5j)), abs=1e-15)


def test_sub_div_neg_pow():
    q = QuadDiff("(mul (div (sub (z) (const 1 0)) (neg (pow (z) 1/2))) (dz2))")
    z = 0.4 + 0.6j
    assert q(z) == pytest.approx(-(z - 1) / np.sqrt(z), abs=1e-14)


def test_sexpr_round_trip():
    text = "(mul (add (mul (z) (z)) (const 0.25 0)) (dz2))"
    q = QuadDiff(text)
    assert QuadDiff(q.sexpr()).sexpr() == q.sexpr()


@pytest.mark.parametrize("bad", ["", "(z", "(mul (z) (dz2)) (z)", "(foo)", "(mul (dz2) (dz2))",
                                 "(pullback nomap (dz2))", "(pullback f1 (dz2))"])
def test_malformed_expressions(bad):
    with pytest.raises(ExpressionError):
        QuadDiff(bad)


def test_outside_and_puncture():
    dom = PlanarDomain.unit_square(punctures=[0.5 + 0.5j])
    q = QuadDiff("(dz2)", dom)
    with pytest.raises(PointOutsideDomain):
        q(1.5 + 0.5j)
    with pytest.raises(EvaluationAtPuncture):
        q(0.5 + 0.5j)


def test_pullback_matches_independent_oracle():
    f = DEFAULT_REGISTRY.get("f2")
    assert complex(f(0.5 + 0.5j)) == pytest.approx(F2_AT_CENTRE, abs=1e-9)
    q = QuadDiff("(pullback f2 (dz2))")
    assert q(0.5 + 0.5j) == pytest.approx(PHI2_AT_CENTRE, abs=1e-8)


def test_pullback_is_square_of_derivative():
    f = DEFAULT_REGISTRY.get("f2")
    q = QuadDiff("(pullback f2 (mul (z) (dz2)))")
    z = np.array([0.3 + 0.2j, 0.7 + 0.8j])
    assert np.allclose(q(z), f(z) * f.deriv(z) ** 2, atol=1e-12)


def test_map_cache_round_trip(tmp_path):
    reg = MapRegistry(str(tmp_path))
    a = reg.get("f2")
    assert (tmp_path / "f2.json").exists()
    b = MapRegistry(str(tmp_path)).get("f2")
    z = np.array([0.1 + 0.9j, 0.5 + 0.5j])
    assert np.array_equal(a(z), b(z))


def test_stale_cache_is_ignored(tmp_path):
    import json

    MapRegistry(str(tmp_path)).get("f2")
    p = tmp_path / "f2.json"
    d = json.loads(p.read_text())
    d["version"] = -1
    p.write_text(json.dumps(d))
    m = MapRegistry(str(tmp_path)).get("f2")
    assert isinstance(m, SCMap)
    assert json.loads(p.read_text())["version"] != -1


def test_map_images_land_in_target():
    f = DEFAULT_REGISTRY.get("f4")
    z = np.array([0.01 + 0.99j, 0.99 + 0.99j, 0.5 + 0.01j, 0.02 + 0.5j])
    w = f(z)
    assert np.all(f.target.contains(w))


def test_weight_zero_expression_is_coefficient():
    assert parse("(z)").weight == 0
    assert QuadDiff("(z)")(0.25 + 0.5j) == pytest.approx(0.25 + 0.5j)
    assert math.isclose(abs(QuadDiff.constant(2j)(0.5 + 0.5j)), 2.0)
