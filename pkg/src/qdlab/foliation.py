"""Partial measured foliations given by chart functions, their Dirichlet
integrals, transverse measures of arcs and heights of curve classes."""

from __future__ import annotations

import heapq
import json
import math
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from .domain import PlanarDomain
from .errors import ArcExitsDomain, ClassSpecInvalid, GridTooCoarse, ZeroOnChartBoundary
from .quadrature import integrate, l1_norm

_GAUSS_X, _GAUSS_W = np.polynomial.legendre.leggauss(6)
_GAUSS_X = 0.5 * (_GAUSS_X + 1.0)
_GAUSS_W = 0.5 * _GAUSS_W


@dataclass
class Chart:
    """One triple (U, v, E): ``v`` is real on the rectangle ``rect``, ``grad``
    returns v_x + i v_y, and ``core`` is the tile of the partition of unity."""

    rect: tuple
    v: object
    grad: object
    core: tuple = None
    E: object = None
    sides: tuple = ("left", "right")

    def __post_init__(self):
        if self.core is None:
            self.core = self.rect

    def in_rect(self, z, which="rect"):
        x0, y0, x1, y1 = getattr(self, which)
        return (z.real >= x0) & (z.real <= x1) & (z.imag >= y0) & (z.imag <= y1)

    def weight(self, z):
        w = self.in_rect(z, "core").astype(float)
        if self.E is not None:
            w = w * np.asarray(self.E(z), dtype=float)
        return w


def _clip_segments(a, b, rect):
    """Liang-Barsky clip of segments a->b (arrays) to rect; returns (t0, t1) with t0 >= t1 when empty."""
    x0, y0, x1, y1 = rect
    d = b - a
    t0 = np.zeros(a.shape)
    t1 = np.ones(a.shape)
    for p, q in ((-d.real, a.real - x0), (d.real, x1 - a.real), (-d.imag, a.imag - y0), (d.imag, y1 - a.imag)):
        with np.errstate(divide="ignore", invalid="ignore"):
            r = q / p
        neg = p < 0
        pos = p > 0
        t0 = np.where(neg, np.maximum(t0, r), t0)
        t1 = np.where(pos, np.minimum(t1, r), t1)
        t1 = np.where((p == 0) & (q < 0), -1.0, t1)
    return t0, t1


class PartialFoliation:
    """A countable family of charts on a planar domain (finite here)."""

    def __init__(self, domain, charts, qd=None, name=""):
        self.domain = domain
        self.charts = list(charts)
        self.qd = qd
        self.name = name

    # -- constructors ---------------------------------------------------------

    @classmethod
    def strip(cls, domain, x0, y0, x1, y1):
        """Horizontal leaves of the rectangle [x0,x1]x[y0,y1] with Euclidean transverse measure (v = y)."""
        chart = Chart((x0, y0, x1, y1), lambda z: np.asarray(z).imag,
                      lambda z: np.full(np.shape(z), 1j))
        return cls(domain, [chart], name=f"strip[{y0},{y1}]")

    @classmethod
    def from_quad_diff(cls, qd, tiles_per_unit=4, overlap=0.1):
        """Charts v = Im of a primitive of sqrt(phi) on a tiling of the domain.

        Each chart's rectangle is its tile grown by ``overlap`` of its size where
        that stays inside the domain. A zero inside a tile is allowed: the chart
        is then slit along the ray from the tile centre through the zero.
        """
        dom = qd.domain
        if dom.kind != "rectilinear":
            raise ZeroOnChartBoundary("chart covers are built for rectilinear domains")
        from .trajectory import find_zeros

        zeros = [z.location for z in find_zeros(qd)]
        charts = []
        for (a, b, c, d) in dom.rectangles():
            nx_ = max(1, int(math.ceil((c - a) * tiles_per_unit - 1e-9)))
            ny_ = max(1, int(math.ceil((d - b) * tiles_per_unit - 1e-9)))
            xs = np.linspace(a, c, nx_ + 1)
            ys = np.linspace(b, d, ny_ + 1)
            for i in range(nx_):
                for j in range(ny_):
                    tile = (xs[i], ys[j], xs[i + 1], ys[j + 1])
                    for z0 in zeros:
                        on_x = z0.real in (tile[0], tile[2]) and tile[1] <= z0.imag <= tile[3]
                        on_y = z0.imag in (tile[1], tile[3]) and tile[0] <= z0.real <= tile[2]
                        if on_x or on_y:
                            raise ZeroOnChartBoundary(f"zero {z0} lies on a tile edge")
                    charts.append(_qd_chart(qd, tile, _grow(dom, tile, overlap)))
        return cls(dom, charts, qd=qd, name=qd.sexpr())

    # -- measures -------------------------------------------------------------

    def dirichlet_integral(self, tol=1e-8, with_error=False):
        """Sum over charts of the integral of |grad v_i|^2 over the chart's tile."""
        if self.qd is not None:
            # |grad v|^2 = |phi| for every chart, so the tiled sum is the L1 norm
            r = l1_norm(self.qd, tol=tol, with_error=True)
            return (r.value, r.error) if with_error else r.value
        total, err = [], 0.0
        for ch in self.charts:
            def f(z, ch=ch):
                g = ch.grad(z)
                return np.abs(g) ** 2 * ch.weight(z)
            r = integrate(f, [ch.core], tol=tol / max(1, len(self.charts)))
            total.append(r.value)
            err += r.error
        val = math.fsum(total)
        return (val, err) if with_error else val

    def norm(self, tol=1e-8, with_error=False):
        return self.dirichlet_integral(tol, with_error)

    def edge_measures(self, a, b):
        """Transverse measure (total variation of v) along each segment a[k]->b[k]."""
        a = np.asarray(a, dtype=complex)
        b = np.asarray(b, dtype=complex)
        out = np.zeros(a.shape)
        if self.qd is not None:
            d = b - a
            for x, w in zip(_GAUSS_X, _GAUSS_W):
                z = a + x * d
                val = np.sqrt(self.qd.values(z))
                out += w * np.abs((val * d).imag)
            return out
        for ch in self.charts:
            t0, t1 = _clip_segments(a, b, ch.core)
            live = t1 > t0
            if not live.any():
                continue
            aa = a[live] + t0[live] * (b[live] - a[live])
            dd = (t1[live] - t0[live]) * (b[live] - a[live])
            acc = np.zeros(aa.shape)
            for x, w in zip(_GAUSS_X, _GAUSS_W):
                z = aa + x * dd
                g = ch.grad(z)
                acc += w * np.abs(g.real * dd.real + g.imag * dd.imag) * ch.weight(z)
            out[live] += acc
        return out

    def transverse_measure(self, arc, subdivisions=64):
        """Total variation of the chart functions along a polyline inside the domain."""
        pts = np.asarray(arc, dtype=complex)
        if pts.size < 2:
            return 0.0
        for p, q in zip(pts[:-1], pts[1:]):
            for pp in self.domain.punctures:
                d = q - p
                t = np.clip(((pp - p) * np.conj(d)).real / max(abs(d) ** 2, 1e-300), 0, 1)
                if abs(pp - (p + t * d)) < 1e-12:
                    raise ArcExitsDomain(f"arc passes through the puncture {pp}")
        t = np.linspace(0.0, 1.0, subdivisions + 1)
        a = (pts[:-1, None] + t[None, :-1, ] * (pts[1:] - pts[:-1])[:, None]).ravel()
        b = (pts[:-1, None] + t[None, 1:] * (pts[1:] - pts[:-1])[:, None]).ravel()
        probe = np.concatenate([a, b, 0.5 * (a + b)])
        if not np.all(self.domain.contains(probe) | (self.domain.boundary_distance(probe) < 1e-12)):
            raise ArcExitsDomain("arc leaves the domain")
        return math.fsum(self.edge_measures(a, b))

    def check_overlaps(self, samples=5, tol=1e-8):
        """Largest deviation of v_i -/+ v_j from a constant on chart overlaps."""
        worst = 0.0
        for i, ci in enumerate(self.charts):
            for cj in self.charts[i + 1:]:
                x0 = max(ci.rect[0], cj.rect[0])
                y0 = max(ci.rect[1], cj.rect[1])
                x1 = min(ci.rect[2], cj.rect[2])
                y1 = min(ci.rect[3], cj.rect[3])
                if x1 <= x0 or y1 <= y0:
                    continue
                g = np.linspace(0.1, 0.9, samples)
                X, Y = np.meshgrid(x0 + g * (x1 - x0), y0 + g * (y1 - y0))
                z = (X + 1j * Y).ravel()
                vi, vj = ci.v(z), cj.v(z)
                dev = min(np.ptp(vi - vj), np.ptp(vi + vj))
                worst = max(worst, float(dev))
        return worst

    # -- leaves ---------------------------------------------------------------

    def sample_leaves(self, count, budget=10.0, step_tol=1e-8):
        """Weighted leaves equidistributed in transverse measure; see ``leaves_of``."""
        from .lamination import boundary_leaf_samples

        if self.qd is not None:
            return boundary_leaf_samples(self.qd, count, budget, step_tol)
        out = []
        masses = [self._side_mass(ch) for ch in self.charts]
        total = math.fsum(masses)
        for ch, m in zip(self.charts, masses):
            k = max(1, int(round(count * m / total))) if total > 0 else 0
            out.extend(_chart_leaves(self.domain, ch, k, budget, step_tol))
        return out

    def _side_mass(self, ch):
        side = _side_segment(ch.core, ch.sides[0])
        return self.transverse_measure(side)

    # -- heights --------------------------------------------------------------

    def height(self, class_spec, grid_n=64):
        """Infimum of the transverse measure over curves in a class, on a grid graph."""
        spec = parse_class_spec(class_spec, self.domain)
        grid = CurveGrid(self.domain, grid_n)
        w = self.edge_measures(grid.edge_a, grid.edge_b)
        if spec["type"] == "crosscut":
            return grid.shortest_crosscut(w, spec["from"], spec["to"])
        return grid.min_enclosing_cut(w, spec["punctures"])


def _grow(dom, tile, overlap):
    a, b, c, d = tile
    m = overlap * max(c - a, d - b)
    grown = [a - m, b - m, c + m, d + m]
    for k in range(4):
        trial = list(tile)
        trial[k] = grown[k]
        x0, y0, x1, y1 = trial
        g = np.linspace(0.0, 1.0, 9)
        edge = np.concatenate([x0 + g * (x1 - x0) + 1j * y0, x0 + g * (x1 - x0) + 1j * y1,
                               x0 + 1j * (y0 + g * (y1 - y0)), x1 + 1j * (y0 + g * (y1 - y0))])
        if not np.all(dom.contains(edge)):
            grown[k] = tile[k]
    return tuple(grown)


def _qd_chart(qd, tile, rect):
    centre = complex(0.5 * (tile[0] + tile[2]), 0.5 * (tile[1] + tile[3]))
    root0 = np.sqrt(complex(qd.values(np.array([centre]))[0]))
    nodes, weights = np.polynomial.legendre.leggauss(12)
    nodes = 0.5 * (nodes + 1.0)
    weights = 0.5 * weights
    steps = np.linspace(0.0, 1.0, 9)

    def roots_along(z):
        """sqrt(phi) at z, continued from the centre along the straight path."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        ref = np.full(z.shape, root0)
        for s in steps[1:]:
            r = np.sqrt(qd.values(centre + s * (z - centre)))
            ref = np.where(np.abs(r - ref) <= np.abs(r + ref), r, -r)
        return ref

    def v(z):
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        acc = np.zeros(z.shape, dtype=complex)
        ref = np.full(z.shape, root0)
        for x, w in zip(nodes, weights):
            r = np.sqrt(qd.values(centre + x * (z - centre)))
            ref = np.where(np.abs(r - ref) <= np.abs(r + ref), r, -r)
            acc += w * ref
        return (acc * (z - centre)).imag

    def grad(z):
        r = roots_along(z)
        return 1j * np.conj(r)

    return Chart(rect, v, grad, core=tile)


def _side_segment(rect, side):
    x0, y0, x1, y1 = rect
    return {"left": [complex(x0, y0), complex(x0, y1)], "right": [complex(x1, y0), complex(x1, y1)],
            "bottom": [complex(x0, y0), complex(x1, y0)], "top": [complex(x0, y1), complex(x1, y1)]}[side]


def _chart_leaves(domain, ch, count, budget, step_tol):
    """Level sets of v crossing the chart from side a1, equidistributed in v."""
    from .trajectory import ChartField, sample_on_transversal, trace_field

    x0, y0, x1, y1 = ch.core
    box = PlanarDomain.rectangle(x0, y0, x1, y1)
    fld = ChartField(ch.grad, box)
    side = np.array(_side_segment(ch.core, ch.sides[0]))
    inward = {"left": 1, "right": -1, "bottom": 1j, "top": -1j}[ch.sides[0]]
    eps = 1e-9 * max(x1 - x0, y1 - y0)
    pts, total = sample_on_transversal(fld, side + inward * eps, count)
    w = total / count if count else 0.0
    out = []
    for p in pts:
        tr = trace_field(fld, p, budget, step_tol, closure=False)
        # the backward end sits on side a1 up to eps; snap it onto the side
        e = tr.ends[0]
        snapped = complex(x0, e.point.imag) if ch.sides[0] == "left" else e.point
        tr.points[0] = snapped
        tr.ends = (type(e)(e.kind, snapped, e.length), tr.ends[1])
        out.append((tr, w))
    return out


# ---------------------------------------------------------------------------
# class specifications and grids
# ---------------------------------------------------------------------------


def parse_class_spec(spec, domain):
    if isinstance(spec, str):
        try:
            spec = json.loads(spec)
        except json.JSONDecodeError as e:
            raise ClassSpecInvalid(f"class spec is not JSON: {e}") from None
    if not isinstance(spec, dict) or "type" not in spec:
        raise ClassSpecInvalid("class spec needs a 'type'")
    kind = spec["type"]
    if kind == "crosscut":
        for key in ("from", "to"):
            if spec.get(key) not in domain.boundary_arcs:
                raise ClassSpecInvalid(f"unknown boundary arc {spec.get(key)!r}")
        return {"type": "crosscut", "from": spec["from"], "to": spec["to"]}
    if kind == "cycle":
        idx = spec.get("punctures")
        if not isinstance(idx, list) or not idx:
            raise ClassSpecInvalid("cycle class needs a non-empty puncture list")
        n = len(domain.punctures)
        if any((not isinstance(k, int)) or k < 0 or k >= n for k in idx):
            raise ClassSpecInvalid(f"puncture index out of range 0..{n - 1}")
        return {"type": "cycle", "punctures": sorted(set(idx))}
    raise ClassSpecInvalid(f"unknown class type {kind!r}")


def _grid_lines(lo, hi, n, avoid, vertex_coords):
    """Uniform lines plus separators between the coordinates in ``avoid``; no line
    passes within a quarter spacing of an avoided coordinate."""
    h = (hi - lo) / n
    lines = set(np.round(lo + h * np.arange(n + 1), 15).tolist())
    lines |= set(v for v in vertex_coords if lo <= v <= hi)
    av = sorted(set(avoid))
    lines = {x for x in lines if all(abs(x - a) > 0.25 * h for a in av) or x in (lo, hi) or x in vertex_coords}
    for p, q in zip(av[:-1], av[1:]):
        if q - p > 1e-12:
            lines.add(0.5 * (p + q))
    return np.array(sorted(lines))


class CurveGrid:
    """Tensor grid graph in the domain: nodes at grid vertices, edges along grid lines."""

    def __init__(self, domain, n):
        if domain.kind != "rectilinear":
            raise GridTooCoarse("curve grids are built on rectilinear domains")
        self.domain = domain
        x0, y0, x1, y1 = domain.bbox()
        side = max(x1 - x0, y1 - y0)
        px = [p.real for p in domain.punctures]
        py = [p.imag for p in domain.punctures]
        vx = [v.real for v in domain.vertices]
        vy = [v.imag for v in domain.vertices]
        self.xs = _grid_lines(x0, x1, max(1, int(round(n * (x1 - x0) / side))), px, vx)
        self.ys = _grid_lines(y0, y1, max(1, int(round(n * (y1 - y0) / side))), py, vy)
        for p in domain.punctures:
            if np.any(np.abs(self.xs - p.real) < 1e-12) or np.any(np.abs(self.ys - p.imag) < 1e-12):
                raise GridTooCoarse(f"puncture {p} lies on a grid line")
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        Z = X + 1j * Y
        closed = domain.contains(Z) | (domain.boundary_distance(Z) < 1e-12)
        self.Z = Z
        self.node_ok = closed
        ea, eb, ids = [], [], []
        nxs, nys = len(self.xs), len(self.ys)
        for i in range(nxs):
            for j in range(nys):
                if not closed[i, j]:
                    continue
                for di, dj in ((1, 0), (0, 1)):
                    k, l = i + di, j + dj
                    if k < nxs and l < nys and closed[k, l]:
                        mid = 0.5 * (Z[i, j] + Z[k, l])
                        if domain.contains(np.array([mid]))[0] or domain.boundary_distance(np.array([mid]))[0] < 1e-12:
                            ea.append(Z[i, j])
                            eb.append(Z[k, l])
                            ids.append(((i, j), (k, l)))
        self.edge_a = np.array(ea)
        self.edge_b = np.array(eb)
        self.edge_ids = ids

    def _on_arc(self, node, name):
        z = self.Z[node]
        if self.domain.boundary_distance(np.array([z]))[0] > 1e-12:
            return False
        t = float(self.domain.boundary_coordinate(np.array([z]))[0])
        t0, t1 = self.domain.arc(name)
        if t0 <= t1:
            return t0 - 1e-12 <= t <= t1 + 1e-12
        return t >= t0 - 1e-12 or t <= t1 + 1e-12

    def shortest_crosscut(self, w, src, dst):
        """Dijkstra from arc ``src`` to arc ``dst``; ties broken by hop count then node id."""
        adj = {}
        for (u, v), c in zip(self.edge_ids, w):
            adj.setdefault(u, []).append((v, float(c)))
            adj.setdefault(v, []).append((u, float(c)))
        nodes = sorted(adj)
        starts = [u for u in nodes if self._on_arc(u, src)]
        goals = {u for u in nodes if self._on_arc(u, dst)}
        if not starts or not goals:
            raise GridTooCoarse("a boundary arc holds no grid nodes")
        best = {u: (0.0, 0) for u in starts}
        prev = {}
        heap = [(0.0, 0, u) for u in starts]
        heapq.heapify(heap)
        while heap:
            d, hops, u = heapq.heappop(heap)
            if best.get(u, (math.inf, 0)) < (d, hops):
                continue
            if u in goals:
                path = [u]
                while path[-1] in prev:
                    path.append(prev[path[-1]])
                pts = [complex(self.Z[p]) for p in reversed(path)]
                return HeightResult(d, pts, "path")
            for v, c in adj[u]:
                key = (d + c, hops + 1)
                if key < best.get(v, (math.inf, 0)):
                    best[v] = key
                    prev[v] = u
                    heapq.heappush(heap, (key[0], key[1], v))
        raise GridTooCoarse(f"no grid path joins {src} to {dst}")

    def min_enclosing_cut(self, w, inside):
        """Cheapest closed grid curve separating the punctures ``inside`` from the
        other punctures and the outer boundary (minimum cut on the dual graph)."""
        xs, ys = self.xs, self.ys
        cell_of = {}
        for k, p in enumerate(self.domain.punctures):
            i = int(np.searchsorted(xs, p.real)) - 1
            j = int(np.searchsorted(ys, p.imag)) - 1
            cell_of[k] = (i, j)
        tagged = {}
        for k, c in cell_of.items():
            side = "in" if k in inside else "out"
            if tagged.get(c, side) != side:
                raise GridTooCoarse("a grid cell holds punctures on both sides of the class")
            tagged[c] = side
        G = nx.Graph()
        nxs, nys = len(xs), len(ys)
        CX, CY = np.meshgrid(0.5 * (xs[:-1] + xs[1:]), 0.5 * (ys[:-1] + ys[1:]), indexing="ij")
        live = self.domain.contains(CX + 1j * CY)

        def cell_ok(i, j):
            return 0 <= i < nxs - 1 and 0 <= j < nys - 1 and bool(live[i, j])

        for ((i, j), (k, l)), c in zip(self.edge_ids, w):
            # the primal edge (i,j)-(k,l) separates two cells
            if k == i + 1:   # horizontal edge at y = ys[j]
                c1, c2 = (i, j - 1), (i, j)
            else:            # vertical edge at x = xs[i]
                c1, c2 = (i - 1, j), (i, j)
            n1 = c1 if cell_ok(*c1) else "OUT"
            n2 = c2 if cell_ok(*c2) else "OUT"
            if n1 == n2:
                continue
            if G.has_edge(n1, n2):
                G[n1][n2]["capacity"] += float(c)
            else:
                G.add_edge(n1, n2, capacity=float(c))
        inner = sorted(c for c, side in tagged.items() if side == "in")
        # a single curve must enclose a connected region: pin a cheapest cell path
        # between the enclosed punctures (avoiding the excluded ones) to the source
        blocked = {c for c, side in tagged.items() if side == "out"} | {"OUT"}
        H = G.subgraph([n for n in G.nodes if n not in blocked])
        spine = set(inner)
        for c in inner[1:]:
            try:
                spine.update(nx.shortest_path(H, inner[0], c, weight="capacity"))
            except nx.NetworkXNoPath:
                raise GridTooCoarse("enclosed punctures cannot be joined on the grid") from None
        for cell in sorted(spine):
            G.add_edge("SRC", cell)  # no capacity: infinite
        for cell in sorted(blocked - {"OUT"}):
            G.add_edge("OUT", cell)
        value, (S, _) = nx.minimum_cut(G, "SRC", "OUT")
        cells = sorted(c for c in S if c != "SRC")
        return HeightResult(float(value), cells, "cut")


@dataclass
class HeightResult:
    value: float
    witness: list = field(repr=False)
    kind: str = "path"

    def __float__(self):
        return self.value


# ---------------------------------------------------------------------------
# Dirichlet competitors: pushforwards by boundary-fixing diffeomorphisms
# ---------------------------------------------------------------------------


@dataclass
class Deformation:
    """A diffeomorphism of a rectangle fixing its boundary, with its Jacobian."""

    kind: str
    params: dict

    def _bumps(self, z, rect):
        x0, y0, x1, y1 = rect
        Lx, Ly = x1 - x0, y1 - y0
        sx = (z.real - x0) / Lx
        sy = (z.imag - y0) / Ly
        bx, by = np.sin(np.pi * sx), np.sin(np.pi * sy)
        dbx, dby = np.pi / Lx * np.cos(np.pi * sx), np.pi / Ly * np.cos(np.pi * sy)
        return bx, by, dbx, dby

    def apply(self, z, rect):
        """Image points and Jacobian entries (J11, J12, J21, J22)."""
        z = np.asarray(z, dtype=complex)
        one, zero = np.ones(z.shape), np.zeros(z.shape)
        p = self.params
        if self.kind == "identity":
            return z, (one, zero, zero, one)
        if self.kind in ("shear", "shear-y"):
            # displacement a b(x) b(y) in the direction theta
            a = p["a"]
            th = p.get("theta", np.pi / 2)
            ca, sa = a * np.cos(th), a * np.sin(th)
            bx, by, dbx, dby = self._bumps(z, rect)
            bump = bx * by
            return (z + (ca + 1j * sa) * bump,
                    (one + ca * dbx * by, ca * bx * dby, sa * dbx * by, one + sa * bx * dby))
        if self.kind == "squeeze":
            a, c, r = p["a"], complex(*p["centre"]), p["radius"]
            dz = z - c
            s = np.abs(dz) ** 2 / r**2
            inside = s < 1
            beta = np.where(inside, (1 - s) ** 3, 0.0)
            dbeta = np.where(inside, -3 * (1 - s) ** 2, 0.0)
            g = 1 + a * beta
            k = a * dbeta * 2 / r**2
            X, Y = dz.real, dz.imag
            return c + dz * g, (g + k * X * X, k * X * Y, k * X * Y, g + k * Y * Y)
        raise ValueError(f"unknown deformation {self.kind!r}")

    def min_jacobian(self, rect, n=101):
        x0, y0, x1, y1 = rect
        g = np.linspace(0, 1, n)
        X, Y = np.meshgrid(x0 + g * (x1 - x0), y0 + g * (y1 - y0))
        _, (a, b, c, d) = self.apply(X + 1j * Y, rect)
        return float(np.min(a * d - b * c))


def competitor_catalog(rect, count=10, seed=0):
    """``count`` deformations of ``rect``: the identity first, then seeded shears and squeezes."""
    rng = np.random.default_rng(seed)
    x0, y0, x1, y1 = rect
    L = min(x1 - x0, y1 - y0)
    out = [Deformation("identity", {})]
    kinds = ("shear-y", "shear", "squeeze")
    k = 0
    while len(out) < count:
        kind = kinds[k % 3]
        k += 1
        if kind == "squeeze":
            r = float(rng.uniform(0.15, 0.35)) * L
            cx = float(rng.uniform(x0 + r, x1 - r))
            cy = float(rng.uniform(y0 + r, y1 - r))
            # keep the radial derivative positive: |a| * max|d/dr(r beta)| < 1
            a = float(rng.uniform(-0.6, 0.6))
            d = Deformation(kind, {"a": a, "centre": [cx, cy], "radius": r})
        elif kind == "shear":
            a = float(rng.uniform(-0.8, 0.8)) * L / np.pi
            d = Deformation(kind, {"a": a, "theta": float(rng.uniform(np.pi / 6, 5 * np.pi / 6))})
        else:
            a = float(rng.uniform(-0.8, 0.8)) * L / np.pi
            d = Deformation(kind, {"a": a})
        if d.min_jacobian(rect) > 0.05:
            out.append(d)
    return out


class PushforwardFoliation(PartialFoliation):
    """Image of a single-chart foliation under a boundary-fixing deformation T.

    The chart function of the image is v o T^-1; its Dirichlet integral is
    computed in the source coordinates as the integral of |J^-T grad v|^2 det J.
    """

    def __init__(self, base, deformation):
        if len(base.charts) != 1:
            raise ValueError("pushforwards are built from single-chart foliations")
        super().__init__(base.domain, [], name=f"{base.name}*{deformation.kind}")
        self.base = base
        self.T = deformation

    def dirichlet_integral(self, tol=1e-9, with_error=False):
        ch = self.base.charts[0]
        rect = ch.core

        def f(z):
            g = ch.grad(z)
            _, (a, b, c, d) = self.T.apply(z, rect)
            det = a * d - b * c
            # J^-T grad = (1/det) [[d, -c], [-b, a]] (gx, gy)
            gx = (d * g.real - c * g.imag) / det
            gy = (-b * g.real + a * g.imag) / det
            return (gx * gx + gy * gy) * det * ch.weight(z)

        r = integrate(f, [rect], tol=tol)
        return (r.value, r.error) if with_error else r.value

    def sample_leaves(self, count, budget=10.0, step_tol=1e-8):
        out = []
        rect = self.base.charts[0].core
        for tr, w in self.base.sample_leaves(count, budget, step_tol):
            pts, _ = self.T.apply(tr.points, rect)
            tr.points = pts
            e0, e1 = tr.ends
            tr.ends = (type(e0)(e0.kind, pts[0], e0.length), type(e1)(e1.kind, pts[-1], e1.length))
            out.append((tr, w))
        return out


def standard_square_foliation(rect=(0.0, 0.0, 1.0, 1.0)):
    """Horizontal foliation v = y of a rectangle (the foliation of dz^2)."""
    dom = PlanarDomain.rectangle(*rect)
    return PartialFoliation.strip(dom, *rect)

