"""Planar domains: rectilinear polygons and the unit disk, with punctures."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError

DISK_MARGIN = 1e-12


def _as_complex_list(points):
    out = []
    for p in points:
        if isinstance(p, (list, tuple)):
            out.append(complex(float(p[0]), float(p[1])))
        else:
            out.append(complex(p))
    return tuple(out)


def _signed_area(verts):
    x = np.array([v.real for v in verts])
    y = np.array([v.imag for v in verts])
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _segments_cross(a, b, c, d):
    """Proper intersection of closed segments ab and cd (touching excluded)."""

    def orient(p, q, r):
        return (q.real - p.real) * (r.imag - p.imag) - (q.imag - p.imag) * (r.real - p.real)

    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 * o2 < 0 and o3 * o4 < 0


@dataclass(frozen=True)
class PlanarDomain:
    """A rectilinear polygon or the unit disk, possibly punctured.

    Vertices are stored counter-clockwise. ``boundary_arcs`` maps a name to a
    ``(t0, t1)`` pair in the normalized cyclic boundary coordinate ``[0, 1)``
    (arc length from vertex 0 for polygons, angle / 2pi for the disk).
    """

    kind: str
    vertices: tuple = ()
    punctures: tuple = ()
    boundary_arcs: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.kind not in ("rectilinear", "disk"):
            raise DomainError(f"unknown domain kind {self.kind!r}")
        object.__setattr__(self, "punctures", _as_complex_list(self.punctures))
        if self.kind == "rectilinear":
            verts = _as_complex_list(self.vertices)
            if len(verts) < 4:
                raise DomainError("a rectilinear polygon needs at least 4 vertices")
            if _signed_area(verts) < 0:
                verts = (verts[0],) + tuple(reversed(verts[1:]))
            object.__setattr__(self, "vertices", verts)
            self._check_polygon()
        else:
            object.__setattr__(self, "vertices", ())
        for p in self.punctures:
            if not bool(self.contains(np.array([p]))[0]):
                raise DomainError(f"puncture {p} is not strictly inside the domain")
        arcs = dict(self.boundary_arcs) if self.boundary_arcs else self._default_arcs()
        object.__setattr__(self, "boundary_arcs", arcs)

    # -- construction helpers ------------------------------------------------

    @classmethod
    def rectangle(cls, x0, y0, x1, y1, punctures=()):
        return cls("rectilinear", (complex(x0, y0), complex(x1, y0), complex(x1, y1), complex(x0, y1)),
                   punctures)

    @classmethod
    def unit_square(cls, punctures=()):
        return cls.rectangle(0.0, 0.0, 1.0, 1.0, punctures)

    @classmethod
    def unit_disk(cls, punctures=()):
        return cls("disk", (), punctures)

    @classmethod
    def from_json(cls, data):
        if isinstance(data, str):
            data = json.loads(data)
        kind = data.get("kind", "rectilinear")
        if kind in ("unit-disk", "disk"):
            kind = "disk"
        arcs = {k: tuple(v) for k, v in data.get("boundary_arcs", {}).items()}
        return cls(kind, data.get("vertices", ()), data.get("punctures", ()), arcs)

    def to_json(self):
        d = {"kind": "rectilinear" if self.kind == "rectilinear" else "unit-disk"}
        if self.kind == "rectilinear":
            d["vertices"] = [[v.real, v.imag] for v in self.vertices]
        d["punctures"] = [[p.real, p.imag] for p in self.punctures]
        d["boundary_arcs"] = {k: list(v) for k, v in self.boundary_arcs.items()}
        return d

    def _check_polygon(self):
        verts = self.vertices
        n = len(verts)
        for k in range(n):
            a, b = verts[k], verts[(k + 1) % n]
            if a == b:
                raise DomainError("repeated polygon vertex")
            if a.real != b.real and a.imag != b.imag:
                raise DomainError(f"edge {a}->{b} is not axis-parallel")
        for i in range(n):
            for j in range(i + 2, n):
                if i == 0 and j == n - 1:
                    continue
                if _segments_cross(verts[i], verts[(i + 1) % n], verts[j], verts[(j + 1) % n]):
                    raise DomainError("polygon is self-intersecting")

    def _default_arcs(self):
        if self.kind == "disk":
            return {"right": (0.875, 0.125), "top": (0.125, 0.375),
                    "left": (0.375, 0.625), "bottom": (0.625, 0.875)}
        starts = self.vertex_coordinates()
        n = len(self.vertices)
        arcs = {f"edge{k}": (starts[k], starts[(k + 1) % n] if k + 1 < n else 1.0) for k in range(n)}
        if n == 4:
            # name the four sides of a rectangle by their outward normal
            for k in range(4):
                d = self.vertices[(k + 1) % 4] - self.vertices[k]
                name = {1: "bottom", 1j: "right", -1: "top", -1j: "left"}[complex(np.sign(d.real), np.sign(d.imag))]
                arcs[name] = arcs[f"edge{k}"]
        return arcs

    # -- geometry -------------------------------------------------------------

    @property
    def edges(self):
        v = self.vertices
        return [(v[k], v[(k + 1) % len(v)]) for k in range(len(v))]

    @property
    def area(self):
        if self.kind == "disk":
            return float(np.pi)
        return _signed_area(self.vertices)

    @property
    def perimeter(self):
        if self.kind == "disk":
            return 2 * np.pi
        return float(sum(abs(b - a) for a, b in self.edges))

    def bbox(self):
        if self.kind == "disk":
            return -1.0, -1.0, 1.0, 1.0
        xs = [v.real for v in self.vertices]
        ys = [v.imag for v in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)

    def contains(self, z):
        """Strict interior membership (punctures count as inside)."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            return np.abs(z) < 1.0 - DISK_MARGIN
        x, y = z.real, z.imag
        inside = np.zeros(z.shape, dtype=bool)
        on_edge = np.zeros(z.shape, dtype=bool)
        for a, b in self.edges:
            if a.real == b.real:  # vertical edge
                y0, y1 = sorted((a.imag, b.imag))
                hit = (y >= y0) & (y < y1) & (x < a.real)
                inside ^= hit
                on_edge |= (x == a.real) & (y >= y0) & (y <= y1)
            else:
                x0, x1 = sorted((a.real, b.real))
                on_edge |= (y == a.imag) & (x >= x0) & (x <= x1)
        return inside & ~on_edge

    def is_puncture(self, z, tol=1e-12):
        z = np.asarray(z, dtype=complex)
        hit = np.zeros(z.shape, dtype=bool)
        for p in self.punctures:
            hit |= np.abs(z - p) <= tol
        return hit

    def boundary_distance(self, z):
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            return np.abs(1.0 - np.abs(z))
        best = np.full(z.shape, np.inf)
        for a, b in self.edges:
            d = b - a
            t = np.clip(((z - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
            best = np.minimum(best, np.abs(z - (a + t * d)))
        return best

    def vertex_coordinates(self):
        """Normalized boundary coordinate of each polygon vertex."""
        lengths = [abs(b - a) for a, b in self.edges]
        total = sum(lengths)
        return [float(sum(lengths[:k]) / total) for k in range(len(lengths))]

    def boundary_coordinate(self, z):
        """Cyclic coordinate in [0, 1) of the boundary point nearest to ``z``."""
        z = np.asarray(z, dtype=complex)
        if self.kind == "disk":
            return np.mod(np.angle(z) / (2 * np.pi), 1.0)
        best = np.full(z.shape, np.inf)
        coord = np.zeros(z.shape)
        offset = 0.0
        total = self.perimeter
        for a, b in self.edges:
            d = b - a
            t = np.clip(((z - a) * np.conj(d)).real / abs(d) ** 2, 0.0, 1.0)
            dist = np.abs(z - (a + t * d))
            better = dist < best
            best = np.where(better, dist, best)
            coord = np.where(better, (offset + t * abs(d)) / total, coord)
            offset += abs(d)
        return np.mod(coord, 1.0)

    def boundary_point(self, t):
        t = np.mod(np.asarray(t, dtype=float), 1.0)
        if self.kind == "disk":
            return np.exp(2j * np.pi * t)
        s = t * self.perimeter
        out = np.zeros(t.shape, dtype=complex)
        offset = 0.0
        for a, b in self.edges:
            L = abs(b - a)
            sel = (s >= offset) & (s <= offset + L)
            out = np.where(sel, a + (s - offset) / L * (b - a), out)
            offset += L
        return out

    def arc(self, name):
        try:
            return self.boundary_arcs[name]
        except KeyError:
            raise DomainError(f"no boundary arc named {name!r}") from None

    def segment_exit(self, a, b):
        """First parameter s in [0, 1] where segment a->b meets the boundary, or None."""
        if self.kind == "disk":
            d = b - a
            # |a + s d|^2 = 1
            A = abs(d) ** 2
            B = 2 * (a * np.conj(d)).real
            C = abs(a) ** 2 - 1.0
            disc = B * B - 4 * A * C
            if A == 0 or disc < 0:
                return None
            s = (-B + np.sqrt(disc)) / (2 * A)
            return float(s) if 0.0 <= s <= 1.0 else None
        best = None
        d = b - a
        for p, q in self.edges:
            e = q - p
            den = d.real * e.imag - d.imag * e.real
            if den == 0:
                continue
            w = p - a
            s = (w.real * e.imag - w.imag * e.real) / den
            u = (w.real * d.imag - w.imag * d.real) / den
            if 0.0 <= s <= 1.0 and -1e-15 <= u <= 1.0 + 1e-15:
                if best is None or s < best:
                    best = s
        return best

    def rectangles(self):
        """Disjoint axis-aligned cells covering a rectilinear polygon exactly."""
        if self.kind != "rectilinear":
            raise DomainError("rectangle decomposition needs a rectilinear polygon")
        xs = sorted({v.real for v in self.vertices})
        ys = sorted({v.imag for v in self.vertices})
        cells = []
        for j in range(len(ys) - 1):
            for i in range(len(xs) - 1):
                c = complex(0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1]))
                if self.contains(np.array([c]))[0]:
                    cells.append((xs[i], ys[j], xs[i + 1], ys[j + 1]))
        # merge horizontally adjacent cells in a row to cut the cell count
        merged = []
        for cell in cells:
            if merged and merged[-1][1] == cell[1] and merged[-1][3] == cell[3] and merged[-1][2] == cell[0]:
                last = merged.pop()
                merged.append((last[0], last[1], cell[2], last[3]))
            else:
                merged.append(cell)
        return merged

    def grid_points(self, n, margin=0.0):
        """Points of an n-per-unit-bbox grid inside the domain at distance >= margin."""
        x0, y0, x1, y1 = self.bbox()
        xs = np.linspace(x0, x1, n + 1)
        ys = np.linspace(y0, y1, n + 1)
        X, Y = np.meshgrid(xs, ys)
        z = (X + 1j * Y).ravel()
        keep = self.contains(z) & (self.boundary_distance(z) >= margin)
        return z[keep]

    def rational_key(self):
        return tuple((Fraction(v.real).limit_denominator(10**9), Fraction(v.imag).limit_denominator(10**9))
                     for v in self.vertices)


def q_domain(n, tail_top=None):
    """The polygon [0,1]^2 with the slit tail [0,1/n] x [1, tail_top] attached.

    ``tail_top`` defaults to ``n``; pass ``sqrt(n)`` for the variant whose
    pullbacks converge in L1.
    """
    top = float(n) if tail_top is None else float(tail_top)
    w = 1.0 / n
    return PlanarDomain("rectilinear", (0j, 1 + 0j, 1 + 1j, complex(w, 1), complex(w, top), complex(0, top)))


def punctured_square(n_max=12):
    """[-1/2,1/2]^2 minus the points +-(1/2 - 1/k), 3 <= k <= n_max."""
    pts = []
    for k in range(3, n_max + 1):
        pts.append(complex(0.5 - 1.0 / k, 0))
        pts.append(complex(-(0.5 - 1.0 / k), 0))
    return PlanarDomain.rectangle(-0.5, -0.5, 0.5, 0.5, punctures=pts)


@dataclass(frozen=True)
class CompactExhaustion:
    """Nested compact regions {z : dist(z, boundary) >= m_k} with m_k decreasing to 0."""

    domain: PlanarDomain
    margins: tuple

    def __post_init__(self):
        m = tuple(float(x) for x in self.margins)
        if any(b >= a for a, b in zip(m, m[1:])) or any(x <= 0 for x in m):
            raise DomainError("exhaustion margins must be positive and strictly decreasing")
        object.__setattr__(self, "margins", m)

    @classmethod
    def geometric(cls, domain, first=0.25, ratio=0.5, count=4):
        return cls(domain, tuple(first * ratio**k for k in range(count)))

    def sample(self, k, n=40):
        return self.domain.grid_points(n, margin=self.margins[k])

    def __len__(self):
        return len(self.margins)
