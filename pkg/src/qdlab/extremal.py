"""Conformal moduli, rectangle uniformization and extremal length bounds.

Conventions. A quadrilateral has four marked boundary points p0..p3 in ccw
order; side k runs from p_k to p_{k+1}. Sides 1 and 3 are the *vertical*
sides. Its modulus is the aspect ratio w / v of the conformally equivalent
rectangle [0,w] x [0,v] whose vertical sides are {0} x [0,v] and {w} x [0,v],
i.e. the extremal length of the curves joining the vertical sides. It equals
1 / D(u) for the potential u = 0 on side 3, 1 on side 1, and D(u~) for the
potential u~ = 0 on side 0, 1 on side 2; the two discrete energies bracket it.

For an annulus r < |z - c| < R the reported quantity is the extremal length
of the core curve, 2 pi / log(R / r), the energy of the radial potential.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np
from matplotlib.path import Path
from matplotlib.tri import LinearTriInterpolator, Triangulation

from . import laplace as lp
from .domain import PlanarDomain
from .errors import (ConfigurationInvalid, DomainError, FamilyNotRepresentable,
                     GridDegenerate, RegionsOverlap)
from .sc import ConformalMap


# ---------------------------------------------------------------------------
# regions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ClippedDisk:
    """The unit disk intersected with the strip {|y| < a} (axis 'y') or {|x| < a} (axis 'x')."""

    axis: str
    a: float

    def __post_init__(self):
        if self.axis not in ("x", "y") or not 0 < self.a < 1:
            raise DomainError("clipped disk needs axis 'x' or 'y' and 0 < a < 1")

    @property
    def corners(self):
        """The four points where the clip lines meet the circle, ccw from angle -asin(a)."""
        s = math.sqrt(1 - self.a ** 2)
        a = self.a
        if self.axis == "y":
            return (complex(s, -a), complex(s, a), complex(-s, a), complex(-s, -a))
        return (complex(a, s), complex(-a, s), complex(-a, -s), complex(a, -s))

    def boundary_path(self):
        c = self.corners
        ang = [math.atan2(z.imag, z.real) for z in c]
        pieces = []
        for k in (0, 2):
            t0, t1 = ang[k], ang[k + 1]
            if t1 < t0:
                t1 += 2 * math.pi
            pieces.append(lp.Piece("arc", c=0j, r=1.0, t0=t0, t1=t1))
            pieces.append(lp.Piece("seg", c[k + 1], c[(k + 2) % 4]))
        return lp.BoundaryPath(pieces)

    @property
    def area(self):
        a = self.a
        # area of {|y| < a} inside the unit disk
        return 2 * (a * math.sqrt(1 - a * a) + math.asin(a))

    def contains(self, z):
        z = np.asarray(z, dtype=complex)
        c = z.imag if self.axis == "y" else z.real
        return (np.abs(z) < 1.0) & (np.abs(c) < self.a)


def _boundary_path(region):
    if isinstance(region, ClippedDisk):
        return region.boundary_path()
    if region.kind == "disk":
        return lp.BoundaryPath([lp.Piece("arc", c=0j, r=1.0, t0=0.0, t1=2 * math.pi)])
    pieces = [lp.Piece("seg", a, b) for a, b in region.edges]
    return lp.BoundaryPath(pieces)


def _area(region):
    if isinstance(region, ClippedDisk):
        return region.area
    if region.kind == "disk":
        return math.pi
    return region.area


@dataclass(frozen=True)
class Quadrilateral:
    """A Jordan region with four marked boundary points (ccw); sides 1 and 3 are vertical."""

    region: object
    marked: tuple

    def __post_init__(self):
        m = tuple(complex(z) for z in self.marked)
        if len(m) != 4:
            raise DomainError("a quadrilateral needs four marked points")
        object.__setattr__(self, "marked", m)
        path = _boundary_path(self.region)
        t = [path.coordinate(z) for z in m]
        if any(v is None for v in t):
            raise DomainError("marked points must lie on the boundary")
        gaps = [(t[(k + 1) % 4] - t[k]) % 1.0 for k in range(4)]
        if any(g <= 0 for g in gaps) or abs(sum(gaps) - 1.0) > 1e-9:
            raise DomainError("marked points must be distinct and in ccw order")

    @classmethod
    def rectangle(cls, w, h, x0=0.0, y0=0.0):
        r = PlanarDomain.rectangle(x0, y0, x0 + w, y0 + h)
        return cls(r, (complex(x0, y0), complex(x0 + w, y0), complex(x0 + w, y0 + h), complex(x0, y0 + h)))

    @classmethod
    def clipped_disk(cls, axis, a):
        """Disk cut by two parallel chords; the circular arcs are the vertical sides."""
        cd = ClippedDisk(axis, a)
        c = cd.corners
        # corners start on an arc: side 0 is an arc, so rotate to make arcs sides 1 and 3
        return cls(cd, (c[1], c[2], c[3], c[0]))

    def swapped(self):
        """Same region with the roles of the side pairs exchanged."""
        m = self.marked
        return Quadrilateral(self.region, (m[1], m[2], m[3], m[0]))

    @property
    def area(self):
        return _area(self.region)

    def boundary_path(self):
        return _boundary_path(self.region).split_at(self.marked)

    def side_polyline(self, k, h=0.01):
        """Points along side k from p_k to p_{k+1}."""
        path = self.boundary_path()
        t0 = path.coordinate(self.marked[k])
        t1 = path.coordinate(self.marked[(k + 1) % 4])
        span = (t1 - t0) % 1.0
        n = max(2, int(math.ceil(span * path.total / h)))
        return np.array([path.point(t0 + span * s) for s in np.linspace(0, 1, n + 1)])


@dataclass(frozen=True)
class Annulus:
    r_inner: float
    r_outer: float = 1.0
    center: complex = 0j

    def __post_init__(self):
        if not 0 < self.r_inner < self.r_outer:
            raise DomainError("annulus radii must satisfy 0 < r < R")

    @classmethod
    def with_modulus(cls, m, r_outer=1.0, center=0j):
        """Annulus with conventional modulus log(R/r) / (2 pi) = m."""
        return cls(r_outer * math.exp(-2 * math.pi * m), r_outer, center)

    @property
    def conventional_modulus(self):
        return math.log(self.r_outer / self.r_inner) / (2 * math.pi)

    @property
    def core_el(self):
        return 2 * math.pi / math.log(self.r_outer / self.r_inner)


# ---------------------------------------------------------------------------
# meshing and potentials
# ---------------------------------------------------------------------------


def _mesh_quad(q: Quadrilateral, n):
    """Mesh plus the boundary node lists of the four sides."""
    reg = q.region
    if isinstance(reg, PlanarDomain) and reg.kind == "rectilinear":
        mesh = lp.tensor_mesh(reg.vertices, n, extra_points=q.marked)
    else:
        path = q.boundary_path()
        mesh = lp.convex_mesh(path, 2.0 / n)
    loop = mesh.loops[0]
    pts = mesh.points[loop]
    idx = []
    for z in q.marked:
        d = np.abs(pts - z)
        j = int(np.argmin(d))
        if d[j] > 1e-9:
            raise GridDegenerate(f"marked point {z} is not a mesh node")
        idx.append(j)
    if len(set(idx)) < 4:
        raise GridDegenerate("marked points collide on the grid")
    sides = []
    L = len(loop)
    for k in range(4):
        a, b = idx[k], idx[(k + 1) % 4]
        span = (b - a) % L
        sides.append([loop[(a + s) % L] for s in range(span + 1)])
    return mesh, sides


@dataclass
class QuadSolution:
    mesh: lp.Mesh
    sides: list
    u: np.ndarray          # 0 on side 3, 1 on side 1
    u_dual: np.ndarray     # 0 on side 0, 1 on side 2
    energy: float
    energy_dual: float

    @property
    def modulus_primal(self):
        return 1.0 / self.energy

    @property
    def modulus_dual(self):
        return self.energy_dual


def solve_quad(q: Quadrilateral, n):
    mesh, sides = _mesh_quad(q, n)
    K = lp.stiffness(mesh)
    nodes = np.array(sides[3] + sides[1])
    vals = np.array([0.0] * len(sides[3]) + [1.0] * len(sides[1]))
    u = lp.solve_dirichlet(K, nodes, vals)
    nodes_d = np.array(sides[0] + sides[2])
    vals_d = np.array([0.0] * len(sides[0]) + [1.0] * len(sides[2]))
    ud = lp.solve_dirichlet(K, nodes_d, vals_d)
    return QuadSolution(mesh, sides, u, ud, lp.energy(K, u), lp.energy(K, ud))


@dataclass
class ModulusReport:
    value: float
    grids: list
    primal: list
    dual: list
    order: float
    bracket: tuple
    error: float

    def __float__(self):
        return float(self.value)


def modulus_report(q, grid_n=128, levels=3):
    """Modulus with grid doubling: values on grid_n / 2^k, Richardson value, observed order."""
    if isinstance(q, Annulus):
        grids = [max(4, grid_n >> k) for k in reversed(range(levels))]
        vals = []
        for g in grids:
            mesh = lp.annulus_mesh(q.r_inner, q.r_outer, g, q.center)
            K = lp.stiffness(mesh)
            outer, inner = mesh.loops
            u = lp.solve_dirichlet(K, np.array(outer + inner), np.array([1.0] * len(outer) + [0.0] * len(inner)))
            vals.append(lp.energy(K, u))
        value = lp.richardson(vals[-2], vals[-1])
        order = lp.observed_order(*vals[-3:]) if len(vals) >= 3 else float("nan")
        return ModulusReport(value, grids, vals, [], order, (min(vals[-1], value), max(vals[-1], value)),
                             abs(value - vals[-1]))
    grids = [max(4, grid_n >> k) for k in reversed(range(levels))]
    prim, dual = [], []
    for g in grids:
        s = solve_quad(q, g)
        prim.append(s.modulus_primal)
        dual.append(s.modulus_dual)
    # Richardson in log space on both bounds, then the geometric mean: the
    # leading errors of the two bounds nearly cancel and side swaps invert the
    # value exactly
    lp_r = lp.richardson(math.log(prim[-2]), math.log(prim[-1]))
    ld_r = lp.richardson(math.log(dual[-2]), math.log(dual[-1]))
    value = math.exp(0.5 * (lp_r + ld_r))
    order = lp.observed_order(*prim[-3:]) if len(prim) >= 3 else float("nan")
    bracket = (prim[-1], dual[-1])
    err = max(abs(value - prim[-1]), abs(dual[-1] - value), abs(math.exp(lp_r) - math.exp(ld_r)) / 2)
    return ModulusReport(value, grids, prim, dual, order, bracket, err)


def modulus(q, grid_n=128):
    """Conformal modulus (see module docstring) from grids grid_n / 2 and grid_n."""
    return modulus_report(q, grid_n, levels=2).value


# ---------------------------------------------------------------------------
# rectangle uniformization
# ---------------------------------------------------------------------------


class UniformizationMap(ConformalMap):
    """z -> w * u(z) + i v * u~(z) onto [0,w] x [0,v], from the two potentials."""

    kind = "rectangle-uniformization"

    def __init__(self, quad, sol: QuadSolution, w, v):
        super().__init__(quad.region, PlanarDomain.rectangle(0.0, 0.0, w, v))
        self.quad = quad
        self.solution = sol
        self.w = w
        self.v = v
        pts = sol.mesh.points
        tri = Triangulation(pts.real, pts.imag, sol.mesh.tris)
        self._iu = LinearTriInterpolator(tri, sol.u)
        self._iv = LinearTriInterpolator(tri, sol.u_dual)
        self.converged = True
        self.report = {"energy": sol.energy, "energy_dual": sol.energy_dual,
                       "product": sol.energy * sol.energy_dual}

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        a = np.asarray(self._iu(z.real, z.imag).filled(np.nan))
        b = np.asarray(self._iv(z.real, z.imag).filled(np.nan))
        return self.w * a + 1j * self.v * b

    def deriv(self, z):
        z = np.asarray(z, dtype=complex)
        ux, _ = self._iu.gradient(z.real, z.imag)
        vx, _ = self._iv.gradient(z.real, z.imag)
        return self.w * np.asarray(ux.filled(np.nan)) + 1j * self.v * np.asarray(vx.filled(np.nan))


def rectangle_uniformize(q: Quadrilateral, grid_n=128, normalization="area"):
    """Map q onto a rectangle with its vertical sides on the rectangle's vertical sides.

    ``normalization="area"`` scales the rectangle to the area of q (so a
    Euclidean rectangle is returned unchanged); ``"unit-height"`` gives v = 1
    and w = modulus. Returns ``(map, w, v)``.
    """
    M = modulus(q, grid_n)
    sol = solve_quad(q, grid_n)
    if normalization == "area":
        A = q.area
        v = math.sqrt(A / M)
        w = math.sqrt(A * M)
    elif normalization == "unit-height":
        v, w = 1.0, M
    else:
        raise ValueError(f"unknown normalization {normalization!r}")
    return UniformizationMap(q, sol, w, v), w, v


# ---------------------------------------------------------------------------
# extremal length
# ---------------------------------------------------------------------------


def el_weighted_curve(el_c, b):
    if el_c <= 0 or b <= 0:
        raise ValueError("extremal length and weight must be positive")
    return b * b * el_c


def _region_polygon(r, h=0.01):
    if isinstance(r, Annulus):
        t = np.linspace(0, 2 * math.pi, 256, endpoint=False)
        return r.center + r.r_outer * np.exp(1j * t), r.center + r.r_inner * np.exp(1j * t)
    if isinstance(r, Quadrilateral):
        return _boundary_path(r.region).sample(h), None
    raise DomainError(f"unsupported region {r!r}")


def _regions_overlap(r1, r2):
    if isinstance(r1, Annulus) and isinstance(r2, Annulus):
        d = abs(r1.center - r2.center)
        if d >= r1.r_outer + r2.r_outer:
            return False
        # nested: one annulus inside the other's hole, or surrounding it
        if d + r2.r_outer <= r1.r_inner or d + r1.r_outer <= r2.r_inner:
            return False
        return True
    p1, hole1 = _region_polygon(r1)
    p2, hole2 = _region_polygon(r2)
    path1, path2 = Path(np.column_stack([p1.real, p1.imag])), Path(np.column_stack([p2.real, p2.imag]))
    g = np.linspace(0, 1, 41)
    for pa, pb, holea, pathb, holeb in ((p1, p2, hole1, path2, hole2), (p2, p1, hole2, path1, hole1)):
        x0, x1, y0, y1 = pa.real.min(), pa.real.max(), pa.imag.min(), pa.imag.max()
        X, Y = np.meshgrid(x0 + g * (x1 - x0), y0 + g * (y1 - y0))
        z = (X + 1j * Y).ravel()
        pa_path = Path(np.column_stack([pa.real, pa.imag]))
        ina = pa_path.contains_points(np.column_stack([z.real, z.imag]), radius=-1e-9)
        if holea is not None:
            ina &= ~Path(np.column_stack([holea.real, holea.imag])).contains_points(np.column_stack([z.real, z.imag]))
        inb = pathb.contains_points(np.column_stack([z.real, z.imag]), radius=-1e-9)
        if holeb is not None:
            inb &= ~Path(np.column_stack([holeb.real, holeb.imag])).contains_points(np.column_stack([z.real, z.imag]))
        if np.any(ina & inb):
            return True
    return False


def el_multicurve(regions, weights, grid_n=64):
    """Sum of b_n^2 EL(R_n) over a given disjoint family (an upper-bound witness)."""
    regions = list(regions)
    weights = list(weights)
    if len(regions) != len(weights):
        raise ValueError("one weight per region")
    for i in range(len(regions)):
        for j in range(i + 1, len(regions)):
            if _regions_overlap(regions[i], regions[j]):
                raise RegionsOverlap(f"regions {i} and {j} overlap")
    return math.fsum(el_weighted_curve(modulus(r, grid_n), b) for r, b in zip(regions, weights))


@dataclass
class ConformalMetric:
    """Density rho sampled at the nodes of a uniform grid over a rectilinear domain.

    ``values[i, j]`` is rho at (x0 + i h, y0 + j h); nodes outside the domain are ignored.
    """

    domain: PlanarDomain
    h: float
    values: np.ndarray
    origin: complex = 0j
    _mask: np.ndarray = field(default=None, repr=False)

    @classmethod
    def on_grid(cls, domain, n, func):
        x0, y0, x1, y1 = domain.bbox()
        h = max(x1 - x0, y1 - y0) / n
        nx = int(round((x1 - x0) / h))
        ny = int(round((y1 - y0) / h))
        X, Y = np.meshgrid(x0 + h * np.arange(nx + 1), y0 + h * np.arange(ny + 1), indexing="ij")
        Z = X + 1j * Y
        return cls(domain, h, np.asarray(func(Z), dtype=float), complex(x0, y0))

    def nodes(self):
        nx, ny = self.values.shape
        X, Y = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
        return self.origin + self.h * (X + 1j * Y)

    def mask(self):
        if self._mask is None:
            Z = self.nodes()
            dist = self.domain.boundary_distance(Z.ravel()).reshape(Z.shape)
            inside = self.domain.contains(Z.ravel()).reshape(Z.shape)
            self._mask = inside | (dist < 1e-9 * self.h)
        return self._mask

    def area(self):
        """Trapezoid-weighted integral of rho^2 over the grid cells inside the domain."""
        m = self.mask()
        cells = m[:-1, :-1] & m[1:, :-1] & m[:-1, 1:] & m[1:, 1:]
        Z = self.nodes()
        c = Z[:-1, :-1] + 0.5 * self.h * (1 + 1j)
        cells &= self.domain.contains(c.ravel()).reshape(c.shape)
        r2 = self.values ** 2
        corner_avg = 0.25 * (r2[:-1, :-1] + r2[1:, :-1] + r2[:-1, 1:] + r2[1:, 1:])
        return float(math.fsum((corner_avg * cells).ravel()) * self.h ** 2)


def _grid_graph_shortest(metric, sources, targets, blocked=None):
    """Dijkstra over the 8-neighbour grid graph; edge weight = length x mean rho."""
    m = metric.mask()
    nx, ny = m.shape
    rho = metric.values
    h = metric.h
    Z = metric.nodes()
    dist = np.full((nx, ny), np.inf)
    heap = []
    for (i, j) in sources:
        dist[i, j] = 0.0
        heap.append((0.0, i, j))
    heapq.heapify(heap)
    tset = set(targets)
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]
    while heap:
        d, i, j = heapq.heappop(heap)
        if d > dist[i, j]:
            continue
        if (i, j) in tset:
            return d
        for di, dj in steps:
            a, b = i + di, j + dj
            if not (0 <= a < nx and 0 <= b < ny) or not m[a, b]:
                continue
            mid = 0.5 * (Z[i, j] + Z[a, b])
            if not metric.domain.contains(np.array([mid]))[0] and metric.domain.boundary_distance(np.array([mid]))[0] > 1e-9 * h:
                continue
            if blocked is not None and blocked(i, j, a, b):
                continue
            nd = d + math.hypot(di, dj) * h * 0.5 * (rho[i, j] + rho[a, b])
            if nd < dist[a, b]:
                dist[a, b] = nd
                heapq.heappush(heap, (nd, a, b))
    raise FamilyNotRepresentable("no grid path joins the two boundary sets")


def _arc_nodes(metric, name):
    dom = metric.domain
    t0, t1 = dom.arc(name)
    Z = metric.nodes()
    m = metric.mask()
    out = []
    nx, ny = m.shape
    for i in range(nx):
        for j in range(ny):
            if not m[i, j]:
                continue
            z = Z[i, j]
            if dom.boundary_distance(np.array([z]))[0] > 1e-9 * metric.h:
                continue
            t = float(dom.boundary_coordinate(np.array([z]))[0])
            span = (t1 - t0) % 1.0 or 1.0
            if (t - t0) % 1.0 <= span + 1e-12:
                out.append((i, j))
    if not out:
        raise FamilyNotRepresentable(f"arc {name!r} has no grid nodes")
    return out


def el_lower_bound(rho: ConformalMetric, family):
    """l_rho(family)^2 / A_rho with l_rho the minimum grid-path rho-length.

    ``family`` is ``{"kind": "join", "from": arc, "to": arc}`` for curves
    joining two boundary arcs, or ``{"kind": "enclose", "point": z}`` for
    closed curves around a puncture or hole at z.
    """
    A = rho.area()
    if A <= 0:
        raise FamilyNotRepresentable("metric has zero area")
    kind = family.get("kind")
    if kind == "join":
        src = _arc_nodes(rho, family["from"])
        tgt = _arc_nodes(rho, family["to"])
        ell = _grid_graph_shortest(rho, src, tgt)
    elif kind == "enclose":
        ell = _shortest_enclosing(rho, complex(family["point"]))
    else:
        raise FamilyNotRepresentable(f"unknown curve family {kind!r}")
    return ell * ell / A


def _shortest_enclosing(rho, p):
    """Shortest closed grid path winding once around p: cut along the ray to the right of p."""
    Z = rho.nodes()
    m = rho.mask()
    nx, ny = m.shape
    h = rho.h
    jc = (p.imag - rho.origin.imag) / h
    ic = (p.real - rho.origin.real) / h
    if abs(jc - round(jc)) < 1e-9:
        raise FamilyNotRepresentable("enclosed point lies on a grid row; shift the grid")

    def crosses(i, j, a, b):
        # edge crosses the horizontal ray y = p.y, x > p.x
        y0, y1 = j, b
        if (y0 < jc) == (y1 < jc):
            return False
        x = i + (a - i) * (jc - y0) / (y1 - y0)
        return x > ic

    best = math.inf
    # paths start just above the ray and must end just below it, not crossing it
    j_above = int(math.ceil(jc))
    for i in range(int(math.ceil(ic)), nx):
        if not (0 <= j_above < ny) or not m[i, j_above]:
            continue
        # a closed curve crossing the ray once: from (i, j_above) step to a node below, then return
        for di in (-1, 0, 1):
            a, b = i + di, j_above - 1
            if not (0 <= a < nx and 0 <= b < ny) or not m[a, b]:
                continue
            if not crosses(i, j_above, a, b):
                continue
            step = math.hypot(di, 1) * h * 0.5 * (rho.values[i, j_above] + rho.values[a, b])
            try:
                d = _grid_graph_shortest(rho, [(a, b)], [(i, j_above)], blocked=crosses)
            except FamilyNotRepresentable:
                continue
            best = min(best, d + step)
    if not math.isfinite(best):
        raise FamilyNotRepresentable("no enclosing grid cycle")
    return best


# ---------------------------------------------------------------------------
# two-quadrilateral configuration
# ---------------------------------------------------------------------------


def _boundary_crossings(q1, q2, h=0.002):
    """Number of transverse crossings between the interior boundary arcs of two regions."""
    def interior_segments(q):
        path = _boundary_path(q.region)
        segs = []
        for p in path.pieces:
            if p.kind == "seg":
                segs.append((p.a, p.b))
        return segs

    def cross(a, b, c, d):
        def orient(p, q, r):
            return (q - p).real * (r - p).imag - (q - p).imag * (r - p).real
        o1, o2 = orient(a, b, c), orient(a, b, d)
        o3, o4 = orient(c, d, a), orient(c, d, b)
        return o1 * o2 < 0 and o3 * o4 < 0

    count = 0
    for a, b in interior_segments(q1):
        for c, d in interior_segments(q2):
            count += cross(a, b, c, d)
    return count


def _vertical_leaves(q, sol, v, samples, ambient):
    """Leaves of the pulled-back horizontal foliation as endpoint pairs on the ambient boundary."""
    def side_points(k):
        nodes = sol.sides[k]
        return sol.mesh.points[nodes], sol.u_dual[nodes]

    # side 3 runs from p3 (u~ = 1) to p0 (u~ = 0); side 1 from p1 (0) to p2 (1)
    z3, c3 = side_points(3)
    z1, c1 = side_points(1)
    levels = (np.arange(samples) + 0.5) / samples
    o3 = np.argsort(c3)
    o1 = np.argsort(c1)

    def interp(zs, cs, c):
        return np.interp(c, cs, zs.real) + 1j * np.interp(c, cs, zs.imag)

    ends_a = interp(z3[o3], c3[o3], levels)
    ends_b = interp(z1[o1], c1[o1], levels)
    ta = ambient.boundary_coordinate(ends_a)
    tb = ambient.boundary_coordinate(ends_b)
    return [(float(a), float(b), v / samples) for a, b in zip(ta, tb)]


def two_quadrilateral_experiment(J1: Quadrilateral, J2: Quadrilateral, samples=64, grid_n=128, allow_invalid=False,
                     ambient=None):
    """Heights v_i of the rectangles conformal to J_i and the intersection number of
    the two pulled-back horizontal foliations, viewed as laminations of ``ambient``
    (the unit disk by default). The vertical sides of each J_i must lie on the
    ambient boundary.

    The heights use the area normalization and the Richardson-extrapolated
    primal modulus; the laminations use the dual potential on the finest grid,
    so ``|i - v1 v2|`` measures agreement between the two solvers.
    """
    from .lamination import DiscreteLamination, Leaf, intersection_number

    ambient = ambient if ambient is not None else PlanarDomain.unit_disk()
    crossings = _boundary_crossings(J1, J2)
    valid = crossings == 4
    if not valid and not allow_invalid:
        raise ConfigurationInvalid(f"boundaries cross in {crossings} points, expected 4")
    out = {"boundary_crossings": crossings, "configuration_valid": valid, "grid": grid_n}
    lams = []
    for k, J in enumerate((J1, J2), start=1):
        for k_side in (1, 3):
            pts = J.side_polyline(k_side)
            if np.max(ambient.boundary_distance(pts)) > 1e-6:
                raise ConfigurationInvalid("vertical sides must lie on the ambient boundary")
        M_fine = modulus(J, grid_n)
        M_coarse = modulus(J, grid_n // 2)
        A = J.area
        v = math.sqrt(A / M_fine)
        v_coarse = math.sqrt(A / M_coarse)
        sol = solve_quad(J, grid_n)
        v_dual = math.sqrt(A / sol.modulus_dual)
        out[f"v{k}"] = v
        out[f"v{k}_coarse"] = v_coarse
        out[f"v{k}_stability"] = abs(v - v_coarse)
        out[f"v{k}_dual"] = v_dual
        out[f"modulus{k}"] = M_fine
        leaves = [Leaf(a, b, w) for a, b, w in _vertical_leaves(J, sol, v_dual, samples, ambient)]
        lams.append(DiscreteLamination(leaves, ambient))
    i = intersection_number(lams[0], lams[1]) if valid or allow_invalid else 0.0
    out["i"] = float(i)
    out["v1v2"] = out["v1"] * out["v2"]
    out["abs_diff"] = abs(out["i"] - out["v1v2"])
    out["laminations"] = lams
    return out
