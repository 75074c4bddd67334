"""Quadratic differentials as expression trees, parsed from s-expressions.

Grammar::

    (const RE IM)  (z)  (dz2)
    (add A B ...)  (sub A B)  (mul A B ...)  (div A B)  (neg A)
    (pow A P/Q)    (exp A)    (pullback MAP-NAME A)

Every node carries a weight: 0 for functions, 2 for ``dz2`` and pullbacks.
An expression of weight 0 is read as ``expr * dz2``. Evaluation happens in a
*context* that knows the chart: plain points (``z``, ``dz = 1``) or strip
coordinates of a Schwarz-Christoffel map, where a weight-w node evaluates to
``value * G'(zeta) ** (w / 2)``. That is what lets the L1 machinery integrate
pullbacks by crowded maps in the coordinates where they are tame.
"""

from __future__ import annotations

import math
import os
import re
from fractions import Fraction
from functools import cached_property

import numpy as np

from . import sc as scmod
from .domain import PlanarDomain, q_domain
from .errors import (EvaluationAtPuncture, ExpressionError, MapNotConverged,
                     PointOutsideDomain)


# ---------------------------------------------------------------------------
# evaluation contexts
# ---------------------------------------------------------------------------


class PointContext:
    """Plain evaluation at points of the domain."""

    chart = None

    def __init__(self, z):
        self.points = np.asarray(z, dtype=complex)

    @property
    def z(self):
        return self.points

    def dz2(self):
        return np.ones_like(self.points)


class StripContext:
    """Evaluation at strip coordinates ``zeta`` of an SC map's source square."""

    def __init__(self, chart, zeta):
        self.chart = chart
        self.points = np.asarray(zeta, dtype=complex)

    @cached_property
    def z(self):
        return self.chart.z(self.points)

    def dz2(self):
        return np.exp(2.0 * self.chart.log_dz(self.points))


# ---------------------------------------------------------------------------
# nodes
# ---------------------------------------------------------------------------


class Node:
    weight = 0
    uses_z = False

    def children(self):
        return ()

    def maps(self):
        out = {}
        for c in self.children():
            out.update(c.maps())
        return out


class Const(Node):
    def __init__(self, value):
        self.value = complex(value)

    def eval(self, ctx):
        return np.full(ctx.points.shape, self.value, dtype=complex)

    def sexpr(self):
        return f"(const {self.value.real!r} {self.value.imag!r})"


class Z(Node):
    uses_z = True

    def eval(self, ctx):
        return np.asarray(ctx.z, dtype=complex)

    def sexpr(self):
        return "(z)"


class DZ2(Node):
    weight = 2

    def eval(self, ctx):
        return ctx.dz2()

    def sexpr(self):
        return "(dz2)"


def _promote(node, value, target_weight, ctx):
    if node.weight == target_weight:
        return value
    if node.weight == 0 and target_weight == 2:
        return value * ctx.dz2()
    raise ExpressionError(f"cannot combine weights {node.weight} and {target_weight}")


class Add(Node):
    def __init__(self, *args, signs=None):
        self.args = args
        self.signs = signs or (1,) * len(args)
        self.weight = max(a.weight for a in args)
        for a in args:
            if a.weight not in (0, self.weight):
                raise ExpressionError("sum of terms with incompatible weights")
        self.uses_z = any(a.uses_z for a in args)

    def children(self):
        return self.args

    def eval(self, ctx):
        out = 0
        for s, a in zip(self.signs, self.args):
            out = out + s * _promote(a, a.eval(ctx), self.weight, ctx)
        return out

    def sexpr(self):
        if len(self.args) == 2 and self.signs == (1, -1):
            return f"(sub {self.args[0].sexpr()} {self.args[1].sexpr()})"
        return "(add " + " ".join(a.sexpr() for a in self.args) + ")"


class Mul(Node):
    def __init__(self, *args):
        self.args = args
        self.weight = sum(a.weight for a in args)
        self.uses_z = any(a.uses_z for a in args)

    def children(self):
        return self.args

    def eval(self, ctx):
        out = 1
        for a in self.args:
            out = out * a.eval(ctx)
        return out

    def sexpr(self):
        return "(mul " + " ".join(a.sexpr() for a in self.args) + ")"


class Div(Node):
    def __init__(self, a, b):
        self.a, self.b = a, b
        self.weight = a.weight - b.weight
        self.uses_z = a.uses_z or b.uses_z

    def children(self):
        return (self.a, self.b)

    def eval(self, ctx):
        return self.a.eval(ctx) / self.b.eval(ctx)

    def sexpr(self):
        return f"(div {self.a.sexpr()} {self.b.sexpr()})"


class Neg(Node):
    def __init__(self, a):
        self.a = a
        self.weight = a.weight
        self.uses_z = a.uses_z

    def children(self):
        return (self.a,)

    def eval(self, ctx):
        return -self.a.eval(ctx)

    def sexpr(self):
        return f"(neg {self.a.sexpr()})"


class Pow(Node):
    def __init__(self, a, exponent):
        self.a = a
        self.exponent = Fraction(exponent)
        w = a.weight * self.exponent
        if w.denominator != 1:
            raise ExpressionError("fractional weight in pow")
        self.weight = int(w)
        self.uses_z = a.uses_z

    def children(self):
        return (self.a,)

    def eval(self, ctx):
        return np.power(self.a.eval(ctx), float(self.exponent))

    def sexpr(self):
        return f"(pow {self.a.sexpr()} {self.exponent})"


class Exp(Node):
    def __init__(self, a):
        if a.weight != 0:
            raise ExpressionError("exp of a weighted term")
        self.a = a
        self.uses_z = a.uses_z

    def children(self):
        return (self.a,)

    def eval(self, ctx):
        return np.exp(self.a.eval(ctx))

    def sexpr(self):
        return f"(exp {self.a.sexpr()})"


class Pullback(Node):
    """(f')^2 * (psi o f) for a conformal map f and differential psi on f's target."""

    weight = 2
    uses_z = True

    def __init__(self, name, fmap, inner):
        self.name = name
        self.fmap = fmap
        self.inner = inner  # Node of weight 0 or 2, evaluated on the target

    def children(self):
        return (self.inner,)

    def maps(self):
        out = {self.name: self.fmap}
        # inner maps live on the target domain and are evaluated there
        return out

    def _inner_at(self, w):
        ctx = PointContext(w)
        val = self.inner.eval(ctx)
        return val

    def eval(self, ctx):
        f = self.fmap
        if not getattr(f, "converged", True):
            raise MapNotConverged(f"map {self.name} did not converge")
        needs_w = self.inner.uses_z or bool(self.inner.maps())
        if ctx.chart is not None and ctx.chart is getattr(f, "chart", None):
            zeta = ctx.points
            d2 = np.exp(2.0 * f.h.log_deriv(zeta))
            inner = self._inner_at(f.h(zeta)) if needs_w else self._inner_at(np.zeros_like(zeta))
            return d2 * inner
        z = ctx.z
        if needs_w and hasattr(f, "value_and_deriv"):
            w, d = f.value_and_deriv(z)
        else:
            d = f.deriv(z)
            w = f(z) if needs_w else np.zeros_like(z)
        return d * d * self._inner_at(w) * ctx.dz2()

    def sexpr(self):
        return f"(pullback {self.name} {self.inner.sexpr()})"


# ---------------------------------------------------------------------------
# map registry
# ---------------------------------------------------------------------------


class MapRegistry:
    """Named conformal maps; ``f<n>`` and ``s<n>`` are built on demand.

    ``f<n>``: unit square onto [0,1]^2 + [0,1/n] x [1,n].
    ``s<n>``: unit square onto [0,1]^2 + [0,1/n] x [1,sqrt(n)].
    ``e<n>``: unit square onto [0,1]^2 + [0,1/n] x [1,n+1] (tail of area exactly 1).
    """

    def __init__(self, cache_dir=None):
        self._maps = {}
        self.cache_dir = cache_dir

    def set_cache(self, cache_dir):
        """Read and write solved maps as versioned JSON files in ``cache_dir``."""
        self.cache_dir = cache_dir

    def register(self, name, fmap):
        self._maps[name] = fmap

    def __contains__(self, name):
        return name in self._maps or re.fullmatch(r"[fse]\d+", name) is not None

    def get(self, name):
        if name not in self._maps:
            m = re.fullmatch(r"([fse])(\d+)", name)
            if m is None:
                raise ExpressionError(f"unknown map {name!r}")
            n = int(m.group(2))
            if n < 2:
                raise ExpressionError("map index must be at least 2")
            top = {"f": n, "s": math.sqrt(n), "e": n + 1}[m.group(1)]
            if top <= 1.0:
                raise ExpressionError("tail would be empty")
            cached = self._cached(name)
            self._maps[name] = cached or scmod.sc_map(q_domain(n, top))
            if cached is None:
                self._store(name)
        return self._maps[name]

    def _path(self, name):
        return os.path.join(self.cache_dir, f"{name}.json") if self.cache_dir else None

    def _cached(self, name):
        path = self._path(name)
        if path is None or not os.path.exists(path):
            return None
        try:
            with open(path) as fh:
                return scmod.SCMap.from_json(fh.read())
        except (MapNotConverged, KeyError, ValueError):
            return None  # stale or foreign cache entry: solve again

    def _store(self, name):
        path = self._path(name)
        if path is None:
            return
        os.makedirs(self.cache_dir, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(self._maps[name].to_json())


DEFAULT_REGISTRY = MapRegistry()


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _tokenize(text):
    return _TOKEN.findall(text)


def _parse_tokens(tokens, pos, registry):
    if tokens[pos] != "(":
        raise ExpressionError(f"expected '(' at token {pos}")
    head = tokens[pos + 1]
    pos += 2
    args = []
    raw = []
    while tokens[pos] != ")":
        if tokens[pos] == "(":
            node, pos = _parse_tokens(tokens, pos, registry)
            args.append(node)
        else:
            raw.append(tokens[pos])
            pos += 1
    pos += 1
    if head == "const":
        re_, im_ = (float(x) for x in (raw + ["0"])[:2]) if raw else (0.0, 0.0)
        return Const(complex(re_, im_)), pos
    if head == "z":
        return Z(), pos
    if head == "dz2":
        return DZ2(), pos
    if head == "add":
        return Add(*args), pos
    if head == "sub":
        if len(args) != 2:
            raise ExpressionError("sub takes two arguments")
        return Add(args[0], args[1], signs=(1, -1)), pos
    if head == "mul":
        return Mul(*args), pos
    if head == "div":
        return Div(*args), pos
    if head == "neg":
        return Neg(*args), pos
    if head == "exp":
        return Exp(*args), pos
    if head == "pow":
        if len(args) != 1 or len(raw) != 1:
            raise ExpressionError("pow takes an expression and a rational exponent")
        return Pow(args[0], Fraction(raw[0])), pos
    if head == "pullback":
        if len(raw) != 1 or len(args) != 1:
            raise ExpressionError("pullback takes a map name and an expression")
        name = raw[0]
        return Pullback(name, registry.get(name), args[0]), pos
    raise ExpressionError(f"unknown head {head!r}")


def parse(text, registry=None):
    registry = registry or DEFAULT_REGISTRY
    tokens = _tokenize(text)
    if not tokens:
        raise ExpressionError("empty expression")
    try:
        node, pos = _parse_tokens(tokens, 0, registry)
    except IndexError:
        raise ExpressionError("unbalanced parentheses") from None
    if pos != len(tokens):
        raise ExpressionError("trailing tokens after expression")
    return node


# ---------------------------------------------------------------------------
# quadratic differentials
# ---------------------------------------------------------------------------


class QuadDiff:
    """A holomorphic quadratic differential ``phi(z) dz^2`` on a planar domain."""

    def __init__(self, expr, domain=None, registry=None, norm_check=None):
        if isinstance(expr, str):
            expr = parse(expr, registry)
        if expr.weight not in (0, 2):
            raise ExpressionError(f"expression has weight {expr.weight}, expected 2")
        self.expr = expr
        maps = expr.maps()
        if domain is None:
            sources = {id(m.source): m.source for m in maps.values()}
            domain = next(iter(sources.values())) if sources else PlanarDomain.unit_square()
        for name, m in maps.items():
            if m.source != domain:
                raise ExpressionError(f"map {name} is not defined on this domain")
        self.domain = domain
        if norm_check is not None:
            from .errors import QuadratureNotConverged
            from .quadrature import l1_norm
            try:
                l1_norm(self, norm_check)
            except QuadratureNotConverged as exc:
                raise ExpressionError(f"L1 norm is not finite to tolerance {norm_check}") from exc

    @classmethod
    def parse(cls, text, domain=None, registry=None):
        return cls(parse(text, registry), domain)

    @classmethod
    def constant(cls, c, domain=None):
        return cls(Mul(Const(c), DZ2()), domain)

    def sexpr(self):
        return self.expr.sexpr()

    def __repr__(self):
        return f"QuadDiff({self.sexpr()!r})"

    @property
    def maps(self):
        return self.expr.maps()

    def strip_chart(self):
        """The strip chart to integrate in, if the expression pulls back by an SC map."""
        for m in self.maps.values():
            if getattr(m, "chart", None) is not None:
                return m.chart
        return None

    def pulled(self, ctx):
        """Coefficient times (dz/dchart)^2 in the context's chart."""
        val = self.expr.eval(ctx)
        if self.expr.weight == 0:
            val = val * ctx.dz2()
        return np.asarray(val, dtype=complex)

    def values(self, z):
        """Vectorized evaluation without domain checks."""
        return self.pulled(PointContext(np.asarray(z, dtype=complex)))

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        if not np.all(self.domain.contains(z)):
            raise PointOutsideDomain(f"point(s) outside the domain: {z[~self.domain.contains(z)][:3]}")
        if np.any(self.domain.is_puncture(z)):
            raise EvaluationAtPuncture("evaluation at a puncture")
        out = self.values(z)
        return out if out.shape else complex(out)

    __call__ = evaluate

    def scaled(self, c):
        return QuadDiff(Mul(Const(c), self.expr), self.domain)

    def minus(self, other):
        return QuadDiff(Add(self.expr, other.expr, signs=(1, -1)), self.domain)
