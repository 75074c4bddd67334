"""Schwarz-Christoffel maps from the strip 0 < Im z < 1 onto rectilinear polygons.

A conformal map from the unit square onto a rectilinear polygon fixing three
corners is assembled as ``h o G^{-1}`` where ``G`` and ``h`` are strip maps
onto the square and the polygon. Putting the strip ends at the two most
distant parts of the polygon keeps elongated polygons (long thin channels)
free of prevertex crowding: a channel of aspect ratio L becomes a strip
segment of length ~L instead of an exponentially small prevertex cluster.

Strip map derivative, with prevertices x_k on the bottom edge (sinh factor)
or at x_k + i on the top edge (cosh factor)::

    h'(z) = C exp(pi (a_minus - a_plus) z / 2) prod_k F_k(z) ** (alpha_k - 1)

Everything is evaluated in log form so very long channels do not overflow.
"""

from __future__ import annotations

import json
import math
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq, least_squares
from scipy.special import roots_jacobi, roots_legendre

from .domain import PlanarDomain
from .errors import MapNotConverged, ParameterSolverDivergence

LN2 = math.log(2.0)
NODES = 16
MAX_PIECE = 1.0
CROWDING_GAP = 1e-8


@lru_cache(maxsize=None)
def _legendre(n):
    return roots_legendre(n)


@lru_cache(maxsize=None)
def _jacobi(n, a, b):
    return roots_jacobi(n, a, b)


def _log_sinh(u):
    """Principal log sinh(u) for Im u in [0, pi/2] (values in the closed upper half plane)."""
    u = np.asarray(u, dtype=complex)
    pos = u.real >= 0
    up = np.where(pos, u, -u)
    val = up - LN2 + np.log(-np.expm1(-2 * up))
    val = np.where(pos, val, val + 1j * np.pi)
    im = np.mod(val.imag + np.pi, 2 * np.pi) - np.pi
    im = np.where(im < -np.pi / 2, im + 2 * np.pi, im)
    return val.real + 1j * np.clip(im, 0.0, np.pi)


def _log_cosh(u):
    """Principal log cosh(u) for Im u in [0, pi/2] (values in the closed right half plane)."""
    u = np.asarray(u, dtype=complex)
    pos = u.real >= 0
    up = np.where(pos, u, -u)
    val = up - LN2 + np.log1p(np.exp(-2 * up))
    im = np.mod(val.imag + np.pi, 2 * np.pi) - np.pi
    return val.real + 1j * np.clip(im, -np.pi / 2, np.pi / 2)


class StripSC:
    """Schwarz-Christoffel map from the strip {0 < Im z < 1}.

    ``pre`` holds prevertex positions (real for the bottom edge, ``x + 1j`` for
    the top edge) and ``alphas`` the interior angles divided by pi.
    """

    def __init__(self, alpha_minus, alpha_plus, pre, alphas):
        self.alpha_minus = float(alpha_minus)
        self.alpha_plus = float(alpha_plus)
        self.pre = np.asarray(pre, dtype=complex)
        self.alphas = np.asarray(alphas, dtype=float)
        self.beta = self.alphas - 1.0
        self.top = self.pre.imag > 0.5
        self.logC = 0j
        self.A = 0j
        self.images = None
        self._ref_z = None
        self._ref_w = None

    # -- derivative -----------------------------------------------------------

    def log_dfactor(self, z):
        """log(h'(z) / C)."""
        z = np.asarray(z, dtype=complex)
        out = 0.5 * np.pi * (self.alpha_minus - self.alpha_plus) * z
        with np.errstate(divide="ignore", invalid="ignore"):
            for xk, bk, top in zip(self.pre.real, self.beta, self.top):
                u = 0.5 * np.pi * (z - xk)
                out = out + bk * (_log_cosh(u) if top else _log_sinh(u))
        return out

    def log_deriv(self, z):
        return self.logC + self.log_dfactor(z)

    def deriv(self, z):
        return np.exp(self.log_deriv(z))

    # -- integration ----------------------------------------------------------

    def _dist_to_sing(self, z, skip=None):
        d = np.abs(self.pre - z)
        if skip is not None:
            d[skip] = np.inf
        return float(d.min()) if d.size else np.inf

    def _piece(self, a, b, ia=None):
        """Integral of h'/C over the straight segment a->b; only a may be singular."""
        half = 0.5 * (b - a)
        if ia is None:
            t, w = _legendre(NODES)
            z = a + (t + 1.0) * half
            vals = np.exp(self.log_dfactor(z))
        else:
            beta = float(self.beta[ia])
            t, w = _jacobi(NODES, 0.0, beta)
            z = a + (t + 1.0) * half
            vals = np.exp(self.log_dfactor(z) - beta * np.log1p(t))
        return complex(np.sum(w * vals) * half)

    def integral(self, a, b, ia=None, ib=None):
        """Integral of h'/C from a to b along a straight path (compound Gauss-Jacobi)."""
        a = complex(a)
        b = complex(b)
        if a == b:
            return 0j
        if ib is not None and ia is not None:
            m = 0.5 * (a + b)
            return self.integral(a, m, ia, None) - self.integral(b, m, ib, None)
        if ib is not None:
            return -self.integral(b, a, ib, None)
        total = 0j
        cur, sing = a, ia
        length = abs(b - a)
        direction = (b - a) / length
        travelled = 0.0
        while True:
            dist = self._dist_to_sing(cur, skip=sing)
            step = min(length - travelled, 0.5 * dist, MAX_PIECE)
            if step <= 0:
                raise MapNotConverged("integration path runs into a prevertex")
            end = b if travelled + step >= length * (1 - 1e-15) else cur + step * direction
            total += self._piece(cur, end, sing)
            travelled += step
            if end == b:
                return total
            cur, sing = end, None

    def end_integral(self, start, index, sign):
        """Integral of h'/C from prevertex ``index`` to the +-infinity end along its edge."""
        alpha = self.alpha_plus if sign > 0 else self.alpha_minus
        rate = math.pi * max(alpha, 1e-3)
        L = 45.0 / rate + 2.0
        return self.integral(start, start + sign * L, index, None)

    # -- evaluation -----------------------------------------------------------

    def finalize(self, images):
        """Attach the known prevertex images (polygon vertices) and build the lookup lattice."""
        self.images = np.asarray(images, dtype=complex)
        self.A = complex(self.images[0])
        self._build_lattice()

    def _build_lattice(self, spacing=0.5):
        xs = self.pre.real
        lo, hi = xs.min() - 6.0, xs.max() + 6.0
        grid_x = np.arange(lo, hi + spacing, spacing)
        C = np.exp(self.logC)
        refs, vals = [], []
        ys = (0.25, 0.5, 0.75)
        # chain along the midline, starting from the prevertex nearest the left end
        for y in ys:
            k0 = int(np.argmin(np.abs(self.pre - (grid_x[0] + 1j * y))))
            prev_z = grid_x[0] + 1j * y
            prev_w = self.images[k0] + C * self.integral(self.pre[k0], prev_z, k0, None)
            refs.append(prev_z)
            vals.append(prev_w)
            for x in grid_x[1:]:
                z = x + 1j * y
                w = prev_w + C * self.integral(prev_z, z)
                refs.append(z)
                vals.append(w)
                prev_z, prev_w = z, w
        self._ref_z = np.array(list(self.pre) + refs)
        self._ref_w = np.array(list(self.images) + vals)
        self._ref_sing = [k for k in range(len(self.pre))] + [None] * len(refs)

    def _eval_one(self, z):
        d = np.abs(self._ref_z - z)
        j = int(np.argmin(d))
        return self._ref_w[j] + np.exp(self.logC) * self.integral(self._ref_z[j], z, self._ref_sing[j], None)

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        flat = z.ravel()
        out = np.array([self._eval_one(complex(v)) for v in flat], dtype=complex)
        return out.reshape(z.shape)

    def lattice(self, nx_per_unit=4, ny=10):
        """Sample table (zeta, h(zeta)) over the strip; used for inverse initial guesses."""
        xs = self.pre.real
        lo, hi = xs.min() - 6.0, xs.max() + 6.0
        gx = np.arange(lo, hi, 1.0 / nx_per_unit)
        gy = (np.arange(ny) + 0.5) / ny
        zs, ws = [], []
        C = np.exp(self.logC)
        for y in gy:
            z0 = gx[0] + 1j * y
            w0 = self._eval_one(z0)
            zs.append(z0)
            ws.append(w0)
            for x in gx[1:]:
                z1 = x + 1j * y
                w0 = w0 + C * self.integral(z0, z1)
                z0 = z1
                zs.append(z1)
                ws.append(w0)
        return np.array(zs), np.array(ws)

    def inverse(self, w, table=None, tol=1e-13, maxiter=60):
        """Solve h(z) = w by damped Newton from the nearest table entry."""
        w = np.asarray(w, dtype=complex)
        if table is None:
            table = self.lattice()
        tz, tw = table
        out = np.empty(w.size, dtype=complex)
        C = np.exp(self.logC)
        for idx, target in enumerate(w.ravel()):
            j = int(np.argmin(np.abs(tw - target)))
            z, hz = tz[j], tw[j]
            for _ in range(maxiter):
                r = hz - target
                if abs(r) <= tol * max(1.0, abs(target)):
                    break
                dz = -r / (C * np.exp(self.log_dfactor(z)))
                step = 1.0
                while True:
                    zn = z + step * dz
                    if 0.0 < zn.imag < 1.0:
                        hn = hz + C * self.integral(z, zn)
                        if abs(hn - target) < abs(r) or step < 1e-6:
                            break
                    step *= 0.5
                    if step < 1e-12:
                        raise MapNotConverged(f"inverse map Newton stalled at w={target}")
                z, hz = zn, hn
            else:
                raise MapNotConverged(f"inverse map did not converge at w={target}")
            out[idx] = z
        return out.reshape(w.shape)

    # -- serialization --------------------------------------------------------

    def to_dict(self):
        return {
            "alpha_minus": self.alpha_minus,
            "alpha_plus": self.alpha_plus,
            "prevertices": [[p.real, p.imag] for p in self.pre],
            "alphas": self.alphas.tolist(),
            "logC": [self.logC.real, self.logC.imag],
            "images": [[w.real, w.imag] for w in self.images],
            "residual": float(getattr(self, "residual", 0.0)),
        }

    @classmethod
    def from_dict(cls, d):
        obj = cls(d["alpha_minus"], d["alpha_plus"], [complex(*p) for p in d["prevertices"]], d["alphas"])
        obj.logC = complex(*d["logC"])
        obj.residual = d.get("residual", 0.0)
        obj.finalize([complex(*p) for p in d["images"]])
        return obj


# ---------------------------------------------------------------------------
# parameter problems
# ---------------------------------------------------------------------------


def _interior_angles(verts):
    """Interior angle / pi at each vertex of a ccw rectilinear polygon (1/2 or 3/2)."""
    n = len(verts)
    out = []
    for k in range(n):
        d_in = verts[k] - verts[k - 1]
        d_out = verts[(k + 1) % n] - verts[k]
        cross = d_in.real * d_out.imag - d_in.imag * d_out.real
        out.append(0.5 if cross > 0 else 1.5)
    return out


def _seg_dist(p, a, b):
    d = b - a
    t = min(max(((p - a) * np.conj(d)).real / abs(d) ** 2, 0.0), 1.0)
    return abs(p - (a + t * d))


def _fit_polygon(verts, i_minus, i_plus, i_anchor, tol=1e-13):
    """Strip map onto the polygon with ends at vertices i_minus (-inf) and i_plus (+inf).

    Vertices after ``i_minus`` (ccw) up to ``i_plus`` sit on the bottom edge,
    the rest on the top edge. Vertex ``i_anchor`` (a bottom vertex) is placed
    at 0. Returns ``(StripSC, bottom_indices, top_indices)``.
    """
    m = len(verts)
    alphas = _interior_angles(verts)
    order = [(i_minus + k) % m for k in range(m)]
    pos_plus = order.index(i_plus)
    bottom = order[1:pos_plus]
    top = order[pos_plus + 1:]
    if not bottom or not top:
        raise ParameterSolverDivergence("each strip edge needs at least one prevertex")
    if i_anchor not in bottom:
        raise ParameterSolverDivergence("anchor vertex must lie on the bottom edge")

    def side_width(a, b, other_chain):
        mid = 0.5 * (verts[a] + verts[b])
        return max(min(_seg_dist(mid, verts[p], verts[q]) for p, q in other_chain), 1e-3)

    bottom_chain = [(order[k], order[k + 1]) for k in range(0, pos_plus)]
    top_chain = [(order[k], order[(k + 1) % m]) for k in range(pos_plus, m)]
    gaps_b = [min(max(abs(verts[b] - verts[a]) / side_width(a, b, top_chain), 0.05), 2000.0)
              for a, b in zip(bottom, bottom[1:])]
    gaps_t = [min(max(abs(verts[b] - verts[a]) / side_width(a, b, bottom_chain), 0.05), 2000.0)
              for a, b in zip(top, top[1:])]
    u0 = np.array([math.log(g) for g in gaps_b] + [0.0] + [math.log(g) for g in gaps_t])
    nb = len(gaps_b)

    def positions(u):
        xb = np.concatenate([[0.0], np.cumsum(np.exp(u[:nb]))])
        xt_last = u[nb]
        gt = np.exp(u[nb + 1:])
        # top vertices in ccw order have decreasing x
        xt = xt_last + np.concatenate([np.cumsum(gt[::-1])[::-1], [0.0]])
        return xb, xt

    def build(u):
        xb, xt = positions(u)
        pre = list(xb) + [x + 1j for x in xt]
        al = [alphas[i] for i in bottom] + [alphas[i] for i in top]
        return StripSC(alphas[i_minus], alphas[i_plus], pre, al)

    nbot = len(bottom)

    def images(sc):
        """Unscaled vertex images relative to bottom[0], in ccw order starting at i_minus."""
        W = {}
        W[bottom[0]] = 0j
        for k in range(1, nbot):
            W[bottom[k]] = W[bottom[k - 1]] + sc.integral(sc.pre[k - 1], sc.pre[k], k - 1, k)
        kt_last = len(sc.pre) - 1
        W[top[-1]] = sc.integral(sc.pre[0], sc.pre[kt_last], 0, kt_last)
        for k in range(len(top) - 2, -1, -1):
            j = nbot + k
            W[top[k]] = W[top[k + 1]] + sc.integral(sc.pre[j + 1], sc.pre[j], j + 1, j)
        W[i_plus] = W[bottom[-1]] + sc.end_integral(sc.pre[nbot - 1], nbot - 1, +1)
        W[i_minus] = W[bottom[0]] + sc.end_integral(sc.pre[0], 0, -1)
        return W

    def residual(u):
        sc = build(u)
        W = images(sc)
        ref_a, ref_b = bottom[0], top[-1]
        C = (verts[ref_b] - verts[ref_a]) / (W[ref_b] - W[ref_a])
        res = []
        for k in range(m):
            a, b = order[k], order[(k + 1) % m]
            r = np.log(C * (W[b] - W[a]) / (verts[b] - verts[a]))
            res.extend([r.real, r.imag])
        return np.array(res)

    sol = least_squares(residual, u0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=4000)
    resid = float(np.max(np.abs(sol.fun)))
    if not np.all(np.isfinite(sol.fun)) or resid > 1e-6:
        raise ParameterSolverDivergence(f"SC parameter problem residual {resid:.3e}")
    sc = build(sol.x)
    W = images(sc)
    ref_a, ref_b = bottom[0], top[-1]
    sc.logC = complex(np.log((verts[ref_b] - verts[ref_a]) / (W[ref_b] - W[ref_a])))
    # translate so the anchor prevertex sits at 0
    shift = sc.pre[bottom.index(i_anchor)].real
    sc = StripSC(sc.alpha_minus, sc.alpha_plus, sc.pre - shift, sc.alphas)
    sc.logC = complex(np.log((verts[ref_b] - verts[ref_a]) / (W[ref_b] - W[ref_a])))
    sc.residual = resid
    sc.finalize([verts[i] for i in bottom + top])
    return sc, bottom, top


def _fit_square(x_t, x_c_max=80.0):
    """Strip map onto the unit square: c1=(1,0) at -inf, c2=(1,1) at 0, c0=(0,0) at x_t+i,
    c3=(0,1) at x_c+i, and +inf at a point of the top side."""

    def make(x_c):
        return StripSC(0.5, 1.0, [0.0, x_c + 1j, x_t + 1j], [0.5, 0.5, 0.5])

    def g(x_c):
        sc = make(x_c)
        side_top = sc.integral(sc.pre[0], sc.pre[1], 0, 1)  # c2 -> c3
        side_left = sc.integral(sc.pre[1], sc.pre[2], 1, 2)  # c3 -> c0
        return math.log(abs(side_left) / abs(side_top))

    lo = x_t + 1e-9
    hi = x_t + 1.0
    glo = g(lo)
    while g(hi) * glo > 0:
        hi = x_t + 2 * (hi - x_t)
        if hi - x_t > x_c_max:
            raise ParameterSolverDivergence(
                "square map has no top-edge prevertex for (0,1); the image of (0,1) precedes the +inf vertex")
    x_c = brentq(g, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    sc = make(x_c)
    W = sc.integral(sc.pre[0], sc.pre[2], 0, 2)  # c2 -> c0
    sc.logC = complex(np.log((0j - (1 + 1j)) / W))
    sc.residual = abs(g(x_c))
    sc.finalize([1 + 1j, 1j, 0j])
    return sc


# ---------------------------------------------------------------------------
# conformal maps
# ---------------------------------------------------------------------------


class ConformalMap:
    """Base class: a conformal map from ``source`` onto ``target``."""

    kind = "identity"

    def __init__(self, source, target):
        self.source = source
        self.target = target
        self.converged = True
        self.report = {}

    def __call__(self, z):
        return np.asarray(z, dtype=complex)

    def deriv(self, z):
        return np.ones_like(np.asarray(z, dtype=complex))

    chart = None


class IdentityMap(ConformalMap):
    pass


class AffineMap(ConformalMap):
    kind = "affine"

    def __init__(self, source, target, a, b):
        super().__init__(source, target)
        self.a = complex(a)
        self.b = complex(b)

    def __call__(self, z):
        return self.a * np.asarray(z, dtype=complex) + self.b

    def deriv(self, z):
        return np.full(np.shape(z), self.a, dtype=complex)


class StripChart:
    """Strip coordinates for the source square of an :class:`SCMap`.

    ``z(zeta) = G(zeta)`` and ``dz(zeta) = G'(zeta)``; integrals over the source
    are computed as integrals over ``rect`` in zeta with Jacobian ``|G'|^2``.
    """

    def __init__(self, G, h, rect):
        self.G = G
        self.h = h
        self.rect = rect

    def z(self, zeta):
        return self.G(zeta)

    def log_dz(self, zeta):
        return self.G.log_deriv(zeta)

    def dz(self, zeta):
        return self.G.deriv(zeta)


class SCMap(ConformalMap):
    """Conformal map from the unit square onto a rectilinear polygon fixing three corners."""

    kind = "schwarz-christoffel"
    VERSION = 1

    def __init__(self, target, normalization, G, h, far_vertex):
        super().__init__(PlanarDomain.unit_square(), target)
        self.normalization = tuple(normalization)
        self.G = G
        self.h = h
        self.far_vertex = far_vertex
        self._table = None
        # strip rectangle outside of which |G'|^2 and |h'|^2 are negligible
        xs = np.concatenate([G.pre.real, h.pre.real])
        lo = xs.min() - 45.0 / (math.pi * min(G.alpha_minus, h.alpha_minus))
        hi = xs.max() + 45.0 / (math.pi * min(G.alpha_plus, h.alpha_plus))
        self.chart = StripChart(G, h, (lo, 0.0, hi, 1.0))
        gaps = np.diff(np.sort(h.pre.real))
        crowd = bool(gaps.size and gaps.min() < CROWDING_GAP)
        self.report = {
            "h_residual": float(getattr(h, "residual", 0.0)),
            "G_residual": float(getattr(G, "residual", 0.0)),
            "crowding": crowd,
            "min_prevertex_gap": float(gaps.min()) if gaps.size else None,
        }
        self.crowding = crowd
        self.converged = max(self.report["h_residual"], self.report["G_residual"]) < 1e-6

    @property
    def fourth_corner_image(self):
        """Image of the corner (0,1) of the square."""
        return complex(self.h(self.G.pre[1]))

    def _inverse_G(self, z):
        if self._table is None:
            self._table = self.G.lattice()
        return self.G.inverse(z, self._table)

    def to_strip(self, z):
        return self._inverse_G(np.asarray(z, dtype=complex))

    def __call__(self, z):
        zeta = self.to_strip(z)
        return self.h(zeta)

    def deriv(self, z):
        zeta = self.to_strip(z)
        return np.exp(self.h.log_deriv(zeta) - self.G.log_deriv(zeta))

    def value_and_deriv(self, z):
        zeta = self.to_strip(z)
        return self.h(zeta), np.exp(self.h.log_deriv(zeta) - self.G.log_deriv(zeta))

    # -- cache files ----------------------------------------------------------

    def to_json(self):
        return json.dumps({
            "version": self.VERSION,
            "kind": self.kind,
            "target": self.target.to_json(),
            "normalization": [[c.real, c.imag] for c in self.normalization],
            "far_vertex": self.far_vertex,
            "G": self.G.to_dict(),
            "h": self.h.to_dict(),
            "report": self.report,
        })

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        if d.get("version") != cls.VERSION:
            raise MapNotConverged("map cache version mismatch")
        target = PlanarDomain.from_json(d["target"])
        norm = [complex(*c) for c in d["normalization"]]
        G = StripSC.from_dict(d["G"])
        h = StripSC.from_dict(d["h"])
        return cls(target, norm, G, h, d["far_vertex"])


def sc_map(target, normalization=None, far_vertex=None):
    """Conformal map of the unit square onto ``target`` sending (0,0), (1,0), (1,1)
    to the three given target vertices.

    ``normalization`` defaults to the vertices equal to 0, 1 and 1+i. The
    strip's +infinity end is placed at ``far_vertex`` (index into the target's
    vertices; defaults to the vertex between the images of (1,1) and (0,0)
    farthest from the image of (1,0)). The image of (0,1) must lie after that
    vertex in counter-clockwise order.
    """
    if target.kind != "rectilinear":
        raise ParameterSolverDivergence("sc_map targets rectilinear polygons")
    verts = list(target.vertices)
    if normalization is None:
        normalization = (0j, 1 + 0j, 1 + 1j)
    norm = [complex(c) for c in normalization]
    try:
        i0, i1, i2 = (verts.index(c) for c in norm)
    except ValueError:
        raise ParameterSolverDivergence("normalization points must be target vertices") from None
    m = len(verts)
    if (i1 - i0) % m == 0 or (i2 - i1) % m == 0:
        raise ParameterSolverDivergence("normalization vertices must be distinct")
    if m == 4:
        # three corners of a square determine a similarity
        a = norm[1] - norm[0]
        if abs((norm[2] - norm[1]) - 1j * a) > 1e-12 * abs(a):
            raise ParameterSolverDivergence("four-vertex targets must be squares")
        return AffineMap(PlanarDomain.unit_square(), target, a, norm[0])
    between = [(i2 + k) % m for k in range(1, (i0 - i2) % m)]
    if not between:
        raise ParameterSolverDivergence("no target vertex between the images of (1,1) and (0,0)")
    if far_vertex is None:
        far_vertex = max(between, key=lambda k: abs(verts[k] - verts[i1]))
    if far_vertex not in between:
        raise ParameterSolverDivergence("far vertex must lie between the images of (1,1) and (0,0)")
    h, bottom, top = _fit_polygon(verts, i1, far_vertex, i2)
    x_t = h.pre[len(bottom) + top.index(i0)].real
    G = _fit_square(x_t)
    f = SCMap(target, norm, G, h, far_vertex)
    return f
