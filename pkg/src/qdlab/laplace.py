"""Meshes and a P1 finite-element Laplace solver for mixed boundary problems.

On a tensor grid with every cell cut along the same diagonal, the P1
stiffness matrix is the 5-point finite-difference Laplacian, so rectilinear
domains get the classical scheme with insulating (natural) boundaries for
free. Curved convex regions are meshed with boundary-fitted Delaunay
triangulations and annuli with polar grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from matplotlib.path import Path
from scipy.sparse.linalg import spsolve
from scipy.spatial import Delaunay

from .errors import GridDegenerate


@dataclass
class Mesh:
    points: np.ndarray          # complex node positions
    tris: np.ndarray            # (M, 3) node indices, counter-clockwise
    loops: list                 # boundary loops, each a ccw list of node indices
    h: float

    @property
    def area(self):
        p = self.points[self.tris]
        return float(np.sum(_tri_area(p)))


def _tri_area(p):
    a, b, c = p[:, 0], p[:, 1], p[:, 2]
    return 0.5 * ((b - a).real * (c - a).imag - (b - a).imag * (c - a).real)


# ---------------------------------------------------------------------------
# boundary paths
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Piece:
    """A boundary piece: a segment a->b, or an arc of |z - c| = r from angle t0 to t1."""

    kind: str
    a: complex = 0j
    b: complex = 0j
    c: complex = 0j
    r: float = 0.0
    t0: float = 0.0
    t1: float = 0.0

    @property
    def length(self):
        if self.kind == "seg":
            return abs(self.b - self.a)
        return abs(self.t1 - self.t0) * self.r

    def point(self, s):
        """Point at fraction s in [0, 1] along the piece."""
        s = np.asarray(s, dtype=float)
        if self.kind == "seg":
            return self.a + s * (self.b - self.a)
        return self.c + self.r * np.exp(1j * (self.t0 + s * (self.t1 - self.t0)))

    def locate(self, z, tol=1e-9):
        """Fraction s of the point z on this piece, or None."""
        if self.kind == "seg":
            d = self.b - self.a
            s = ((z - self.a) * np.conj(d)).real / abs(d) ** 2
            if -tol <= s <= 1 + tol and abs(z - (self.a + s * d)) <= tol:
                return float(min(max(s, 0.0), 1.0))
            return None
        if abs(abs(z - self.c) - self.r) > tol:
            return None
        ang = math.atan2((z - self.c).imag, (z - self.c).real)
        span = self.t1 - self.t0
        s = ((ang - self.t0) % (2 * math.pi)) / span if span > 0 else None
        if s is None:
            return None
        if s > 1 + tol / self.r:
            # angle just below t0 wraps to ~2pi
            s2 = s - 2 * math.pi / span
            if abs(s2) <= tol / self.r:
                return 0.0
            return None
        return float(min(s, 1.0))

    def split(self, s):
        if self.kind == "seg":
            m = self.a + s * (self.b - self.a)
            return Piece("seg", self.a, m), Piece("seg", m, self.b)
        tm = self.t0 + s * (self.t1 - self.t0)
        return (Piece("arc", c=self.c, r=self.r, t0=self.t0, t1=tm),
                Piece("arc", c=self.c, r=self.r, t0=tm, t1=self.t1))


class BoundaryPath:
    """A closed ccw boundary made of pieces, with cyclic arc-length coordinate in [0, 1)."""

    def __init__(self, pieces):
        self.pieces = list(pieces)
        self.lengths = np.array([p.length for p in self.pieces])
        self.total = float(self.lengths.sum())
        self.offsets = np.concatenate([[0.0], np.cumsum(self.lengths)[:-1]])

    def coordinate(self, z, tol=1e-9):
        for p, off, L in zip(self.pieces, self.offsets, self.lengths):
            s = p.locate(complex(z), tol)
            if s is not None:
                return float(((off + s * L) / self.total) % 1.0)
        return None

    def point(self, t):
        t = float(t) % 1.0
        s = t * self.total
        for p, off, L in zip(self.pieces, self.offsets, self.lengths):
            if s <= off + L or p is self.pieces[-1]:
                return complex(p.point(min((s - off) / L, 1.0)))
        raise AssertionError

    def split_at(self, pts, tol=1e-9):
        """Split pieces so that each listed point is a piece endpoint."""
        pieces = list(self.pieces)
        for z in pts:
            for k, p in enumerate(pieces):
                s = p.locate(complex(z), tol)
                if s is None:
                    continue
                if 1e-12 < s < 1 - 1e-12:
                    pieces[k:k + 1] = list(p.split(s))
                break
            else:
                raise GridDegenerate(f"marked point {z} is not on the boundary")
        return BoundaryPath(pieces)

    def sample(self, h):
        """Points along the boundary with spacing <= h, piece endpoints included."""
        pts = []
        for p in self.pieces:
            n = max(1, int(math.ceil(p.length / h - 1e-9)))
            pts.extend(complex(v) for v in p.point(np.arange(n) / n))
        return np.array(pts)

    def polygon(self, h):
        return self.sample(h)


# ---------------------------------------------------------------------------
# meshes
# ---------------------------------------------------------------------------


def tensor_mesh(vertices, n, extra_points=()):
    """Tensor-grid mesh of a rectilinear polygon.

    The grid has ``n`` cells along the longer bounding-box side; vertex and
    ``extra_points`` coordinates are added as grid lines so they land on nodes.
    """
    verts = np.asarray(vertices, dtype=complex)
    x0, x1 = verts.real.min(), verts.real.max()
    y0, y1 = verts.imag.min(), verts.imag.max()
    h = max(x1 - x0, y1 - y0) / n
    if h <= 0:
        raise GridDegenerate("empty bounding box")
    extra = np.asarray(extra_points, dtype=complex)

    def lines(lo, hi, fixed):
        k = max(1, int(round((hi - lo) / h)))
        base = list(np.linspace(lo, hi, k + 1))
        for f in fixed:
            if all(abs(f - b) > 1e-9 * h for b in base):
                base.append(float(f))
        return np.array(sorted(base))

    xs = lines(x0, x1, list(verts.real) + list(extra.real))
    ys = lines(y0, y1, list(verts.imag) + list(extra.imag))
    path = Path(np.column_stack([verts.real, verts.imag]))
    cx = 0.5 * (xs[:-1] + xs[1:])
    cy = 0.5 * (ys[:-1] + ys[1:])
    CX, CY = np.meshgrid(cx, cy, indexing="ij")
    inside = path.contains_points(np.column_stack([CX.ravel(), CY.ravel()])).reshape(CX.shape)
    nx, ny = len(xs), len(ys)
    node_id = -np.ones((nx, ny), dtype=np.int64)
    ii, jj = np.nonzero(inside)
    for di in (0, 1):
        for dj in (0, 1):
            node_id[ii + di, jj + dj] = 0
    used = np.argwhere(node_id == 0)
    node_id[used[:, 0], used[:, 1]] = np.arange(len(used))
    points = xs[used[:, 0]] + 1j * ys[used[:, 1]]
    a = node_id[ii, jj]
    b = node_id[ii + 1, jj]
    c = node_id[ii + 1, jj + 1]
    d = node_id[ii, jj + 1]
    tris = np.concatenate([np.column_stack([a, b, c]), np.column_stack([a, c, d])])
    # boundary loop: walk the polygon edges through grid nodes
    xi = {float(x): k for k, x in enumerate(xs)}
    yi = {float(y): k for k, y in enumerate(ys)}
    loop = []
    m = len(verts)
    for k in range(m):
        p, q = verts[k], verts[(k + 1) % m]
        ip, jp = xi[float(p.real)], yi[float(p.imag)]
        iq, jq = xi[float(q.real)], yi[float(q.imag)]
        if ip == iq:
            step = 1 if jq > jp else -1
            loop.extend(int(node_id[ip, j]) for j in range(jp, jq, step))
        else:
            step = 1 if iq > ip else -1
            loop.extend(int(node_id[i, jp]) for i in range(ip, iq, step))
    return Mesh(points, tris, [loop], h)


def _polyline_distance(z, poly):
    a = poly
    b = np.roll(poly, -1)
    d = b - a
    t = ((z[:, None] - a[None, :]) * np.conj(d)[None, :]).real / np.abs(d)[None, :] ** 2
    t = np.clip(t, 0.0, 1.0)
    return np.min(np.abs(z[:, None] - (a[None, :] + t * d[None, :])), axis=1)


def convex_mesh(path: BoundaryPath, h):
    """Delaunay mesh of a convex region bounded by ``path`` with spacing about ``h``."""
    bnd = path.sample(h)
    xs, ys = bnd.real, bnd.imag
    x0, x1, y0, y1 = xs.min(), xs.max(), ys.min(), ys.max()
    # triangular lattice
    dy = h * math.sqrt(3) / 2
    rows = np.arange(y0, y1 + dy, dy)
    pts = []
    for k, y in enumerate(rows):
        off = 0.5 * h if k % 2 else 0.0
        row = np.arange(x0 + off, x1 + h, h)
        pts.append(row + 1j * y)
    cand = np.concatenate(pts)
    poly = Path(np.column_stack([xs, ys]))
    cand = cand[poly.contains_points(np.column_stack([cand.real, cand.imag]))]
    if cand.size:
        dist = np.concatenate([_polyline_distance(chunk, bnd) for chunk in np.array_split(cand, max(1, cand.size // 2000))])
        cand = cand[dist > 0.45 * h]
    points = np.concatenate([bnd, cand])
    tri = Delaunay(np.column_stack([points.real, points.imag]))
    tris = tri.simplices.astype(np.int64)
    area = _tri_area(points[tris])
    flip = area < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    area = np.abs(area)
    cent = points[tris].mean(axis=1)
    keep = (area > 1e-12 * h * h) & poly.contains_points(np.column_stack([cent.real, cent.imag]), radius=-1e-12)
    tris = tris[keep]
    return Mesh(points, tris, [list(range(bnd.size))], h)


def annulus_mesh(r_in, r_out, n, center=0j):
    """Polar mesh with ``n`` radial intervals, uniform in log r, near-square cells."""
    L = math.log(r_out / r_in)
    dl = L / n
    m = max(8, int(round(2 * math.pi / dl)))
    rs = r_in * np.exp(dl * np.arange(n + 1))
    th = 2 * math.pi * np.arange(m) / m
    R, T = np.meshgrid(rs, th, indexing="ij")
    points = (center + R * np.exp(1j * T)).ravel()
    idx = np.arange((n + 1) * m).reshape(n + 1, m)
    a = idx[:-1, :]
    b = idx[:-1, np.r_[1:m, 0]]
    c = idx[1:, np.r_[1:m, 0]]
    d = idx[1:, :]
    # outward radial direction is the second index, so a,d,c / a,c,b are ccw
    tris = np.concatenate([np.column_stack([a.ravel(), c.ravel(), d.ravel()]),
                           np.column_stack([a.ravel(), b.ravel(), c.ravel()])])
    area = _tri_area(points[tris])
    flip = area < 0
    tris[flip] = tris[flip][:, [0, 2, 1]]
    inner = list(idx[0, ::-1])
    outer = list(idx[-1, :])
    return Mesh(points, tris, [outer, inner], dl * r_out)


# ---------------------------------------------------------------------------
# finite elements
# ---------------------------------------------------------------------------


def stiffness(mesh: Mesh):
    p = mesh.points[mesh.tris]
    x, y = p.real, p.imag
    area = np.abs(_tri_area(p))
    # gradients of barycentric coordinates
    bx = np.stack([y[:, 1] - y[:, 2], y[:, 2] - y[:, 0], y[:, 0] - y[:, 1]], axis=1)
    by = np.stack([x[:, 2] - x[:, 1], x[:, 0] - x[:, 2], x[:, 1] - x[:, 0]], axis=1)
    ke = (bx[:, :, None] * bx[:, None, :] + by[:, :, None] * by[:, None, :]) / (4 * area[:, None, None])
    rows = np.repeat(mesh.tris, 3, axis=1).ravel()
    cols = np.tile(mesh.tris, (1, 3)).ravel()
    n = mesh.points.size
    return sp.csr_matrix((ke.ravel(), (rows, cols)), shape=(n, n))


def solve_dirichlet(K, nodes, values):
    """Harmonic (discrete) function with prescribed values on ``nodes``, natural BC elsewhere."""
    n = K.shape[0]
    nodes = np.asarray(nodes, dtype=np.int64)
    fixed = np.zeros(n, dtype=bool)
    fixed[nodes] = True
    u = np.zeros(n)
    u[nodes] = values
    free = ~fixed
    if not free.any():
        return u
    Kff = K[free][:, free].tocsc()
    rhs = -K[free][:, fixed] @ u[fixed]
    u[free] = spsolve(Kff, rhs)
    return u


def energy(K, u):
    return float(u @ (K @ u))


def richardson(coarse, fine, order=2.0):
    return fine + (fine - coarse) / (2.0 ** order - 1.0)


def observed_order(m1, m2, m3, floor=1e-13):
    """Convergence order from three values on grids h, h/2, h/4 (nan if at round-off)."""
    d1, d2 = abs(m1 - m2), abs(m2 - m3)
    scale = max(abs(m3), 1.0)
    if d1 <= floor * scale or d2 <= floor * scale:
        return float("nan")
    return math.log2(d1 / d2)
