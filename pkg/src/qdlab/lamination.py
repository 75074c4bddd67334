"""Discrete measured laminations: weighted chords with endpoints on the boundary.

Endpoints are cyclic boundary coordinates in [0, 1). Two leaves cross iff their
endpoint pairs strictly interleave; shared endpoints never count. Sums of
weight products are computed exactly: floats are dyadic rationals, so scaling
by a power of two turns them into integers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .domain import PlanarDomain
from .errors import (AmbientMismatch, ExcessiveUnassignedMass,
                     InterleavingWithinLamination, QDLabError)


@dataclass(frozen=True)
class Leaf:
    a: float
    b: float
    w: float
    witness: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not self.w > 0:
            raise ValueError("leaf weights must be positive")
        object.__setattr__(self, "a", float(self.a) % 1.0)
        object.__setattr__(self, "b", float(self.b) % 1.0)


def _norm_pair(a, b):
    return (a, b) if a <= b else (b, a)


def crosses(p, q, tol=0.0):
    """True iff the endpoint pairs p and q strictly interleave on the circle.

    Returns ``(crosses, degenerate)``; ``degenerate`` flags a shared endpoint
    (within ``tol``), which never counts as a crossing.
    """
    a, b = _norm_pair(float(p[0]) % 1.0, float(p[1]) % 1.0)
    c, d = _norm_pair(float(q[0]) % 1.0, float(q[1]) % 1.0)

    def close(x, y):
        dd = abs(x - y)
        return min(dd, 1.0 - dd) <= tol

    if any(close(x, y) for x in (a, b) for y in (c, d)):
        return False, True
    inside_c = a < c < b
    inside_d = a < d < b
    return inside_c != inside_d, False


def crossing_matrix(A, B, tol=0.0):
    """Boolean matrix of strict interleaving between endpoint arrays A (n,2) and B (m,2)."""
    A = np.sort(np.mod(np.asarray(A, dtype=float).reshape(-1, 2), 1.0), axis=1)
    B = np.sort(np.mod(np.asarray(B, dtype=float).reshape(-1, 2), 1.0), axis=1)
    a, b = A[:, 0:1], A[:, 1:2]
    c, d = B[None, :, 0], B[None, :, 1]
    in_c = (a < c) & (c < b)
    in_d = (a < d) & (d < b)
    out = in_c != in_d
    if tol >= 0:
        for x in (a, b):
            for y in (c, d):
                dd = np.abs(x - y)
                out &= np.minimum(dd, 1.0 - dd) > tol
    return out


def _scaled_ints(weights):
    """Integers N_k and exponent E with weights[k] == N_k / 2**E exactly."""
    ratios = [float(w).as_integer_ratio() for w in weights]
    if not ratios:
        return [], 0
    E = max(den.bit_length() - 1 for _, den in ratios)
    return [num << (E - (den.bit_length() - 1)) for num, den in ratios], E


class DiscreteLamination:
    """A finite weighted family of pairwise non-crossing leaves of a planar domain."""

    def __init__(self, leaves, ambient=None, tol=0.0, check=True):
        self.leaves = list(leaves)
        self.ambient = ambient if ambient is not None else PlanarDomain.unit_square()
        self.tol = tol
        if check and len(self.leaves) > 1:
            M = crossing_matrix(self.endpoints(), self.endpoints(), tol)
            if M.any():
                i, j = map(int, np.argwhere(M)[0])
                raise InterleavingWithinLamination(f"leaves {i} and {j} of one lamination cross")

    def __len__(self):
        return len(self.leaves)

    def endpoints(self):
        return np.array([[l.a, l.b] for l in self.leaves], dtype=float).reshape(-1, 2)

    def weights(self):
        return [l.w for l in self.leaves]

    @property
    def total_weight(self):
        ints, E = _scaled_ints(self.weights())
        return float(Fraction(sum(ints), 1 << E))

    def scaled(self, c):
        return DiscreteLamination([Leaf(l.a, l.b, l.w * c, l.witness) for l in self.leaves],
                                  self.ambient, self.tol, check=False)

    # -- serialization ----------------------------------------------------------

    def to_json(self):
        return json.dumps({"leaves": [{"a": l.a, "b": l.b, "w": l.w} for l in self.leaves]})

    @classmethod
    def from_json(cls, text, ambient=None, tol=0.0):
        d = json.loads(text) if isinstance(text, str) else text
        return cls([Leaf(x["a"], x["b"], x["w"]) for x in d["leaves"]], ambient, tol)

    # -- geometry ---------------------------------------------------------------

    def chords(self):
        """Straight chord witnesses: pairs of boundary points."""
        E = self.endpoints()
        if E.size == 0:
            return np.zeros((0, 2), dtype=complex)
        pa = self.ambient.boundary_point(E[:, 0])
        pb = self.ambient.boundary_point(E[:, 1])
        return np.column_stack([pa, pb])


def _check_ambient(mu, nu):
    if mu.ambient != nu.ambient:
        raise AmbientMismatch("laminations live on different domains")


def intersection_fraction(mu, nu, tol=None):
    """Exact intersection number as a Fraction."""
    _check_ambient(mu, nu)
    if len(mu) == 0 or len(nu) == 0:
        return Fraction(0)
    tol = max(mu.tol, nu.tol) if tol is None else tol
    M = crossing_matrix(mu.endpoints(), nu.endpoints(), tol)
    a, Ea = _scaled_ints(mu.weights())
    b, Eb = _scaled_ints(nu.weights())
    return Fraction(_exact_bilinear(M, a, b), 1 << (Ea + Eb))


def _exact_bilinear(M, a, b):
    """sum_ij a_i M_ij b_j in exact integers; leaves sharing a weight are counted together."""
    ua = sorted(set(a))
    ub = sorted(set(b))
    if len(ua) * len(ub) <= 4096:
        ia = {v: k for k, v in enumerate(ua)}
        ib = {v: k for k, v in enumerate(ub)}
        ra = np.array([ia[v] for v in a])
        rb = np.array([ib[v] for v in b])
        total = 0
        for ka, va in enumerate(ua):
            rows = M[ra == ka]
            if rows.size == 0:
                continue
            col_counts = rows.sum(axis=0)
            for kb, vb in enumerate(ub):
                c = int(col_counts[rb == kb].sum())
                if c:
                    total += va * vb * c
        return total
    total = 0
    for i, row in enumerate(M):
        idx = np.nonzero(row)[0]
        if idx.size:
            total += a[i] * sum(b[j] for j in idx.tolist())
    return total


def intersection_number(mu, nu, tol=None):
    """Sum of weight products over crossing leaf pairs (exact, then rounded once)."""
    return float(intersection_fraction(mu, nu, tol))


# ---------------------------------------------------------------------------
# quadrilateral covers
# ---------------------------------------------------------------------------


@dataclass
class Quad:
    mu_block: tuple        # (start, stop) in the sorted mu order
    nu_block: tuple
    mu_mass: Fraction
    nu_mass: Fraction

    @property
    def mass(self):
        return self.mu_mass * self.nu_mass


@dataclass
class QuadCover:
    quads: list
    mu_order: list
    nu_order: list
    mu: DiscreteLamination
    nu: DiscreteLamination

    def total_fraction(self):
        return sum((q.mass for q in self.quads), Fraction(0))

    def total(self):
        return float(self.total_fraction())

    def certify(self):
        """Check that the quads partition the crossing pairs exactly."""
        M = crossing_matrix(self.mu.endpoints()[self.mu_order], self.nu.endpoints()[self.nu_order],
                            max(self.mu.tol, self.nu.tol))
        cover = np.zeros(M.shape, dtype=int)
        for q in self.quads:
            cover[q.mu_block[0]:q.mu_block[1], q.nu_block[0]:q.nu_block[1]] += 1
        return bool(np.array_equal(cover, M.astype(int)))


def _leaf_order(lam):
    E = np.sort(lam.endpoints(), axis=1)
    if E.size == 0:
        return []
    return [int(k) for k in np.lexsort((E[:, 1], E[:, 0]))]


def build_quad_cover(mu, nu, tol=None):
    """Cover the crossing pairs by disjoint rectangles of contiguous leaf blocks.

    Leaves are ordered by their endpoints, so parallel families become
    contiguous runs; the crossing matrix is then partitioned greedily into
    maximal all-crossing blocks. Each block is one quadrilateral whose
    horizontal sides carry the mu-block mass and vertical sides the nu-block mass.
    """
    _check_ambient(mu, nu)
    tol = max(mu.tol, nu.tol) if tol is None else tol
    mo, no = _leaf_order(mu), _leaf_order(nu)
    if not mo or not no:
        return QuadCover([], mo, no, mu, nu)
    M = crossing_matrix(mu.endpoints()[mo], nu.endpoints()[no], tol)
    a, Ea = _scaled_ints([mu.leaves[k].w for k in mo])
    b, Eb = _scaled_ints([nu.leaves[k].w for k in no])
    ca = np.concatenate([[0], np.cumsum(np.array(a, dtype=object))])
    cb = np.concatenate([[0], np.cumsum(np.array(b, dtype=object))])
    used = np.zeros(M.shape, dtype=bool)
    quads = []
    n, m = M.shape
    for i in range(n):
        j = 0
        while j < m:
            if not M[i, j] or used[i, j]:
                j += 1
                continue
            j1 = j
            while j1 < m and M[i, j1] and not used[i, j1]:
                j1 += 1
            i1 = i + 1
            while i1 < n and M[i1, j:j1].all() and not used[i1, j:j1].any():
                i1 += 1
            used[i:i1, j:j1] = True
            quads.append(Quad((i, i1), (j, j1),
                              Fraction(int(ca[i1] - ca[i]), 1 << Ea),
                              Fraction(int(cb[j1] - cb[j]), 1 << Eb)))
            j = j1
    return QuadCover(quads, mo, no, mu, nu)


def brute_force_crossings(mu, nu):
    """Weighted count of crossing chord witnesses by segment intersection (oracle).

    Crossing depends only on the cyclic order of the endpoints, so the witnesses
    are straight chords of the unit circle at the boundary parameters. On a
    polygon, chords between points of one side would be collinear with it.
    """
    from .domain import _segments_cross

    _check_ambient(mu, nu)

    def circle(lam):
        E = lam.endpoints()
        return np.exp(2j * np.pi * E)

    total = Fraction(0)
    for (p, q), lm in zip(circle(mu), mu.leaves):
        for (r, s_), ln in zip(circle(nu), nu.leaves):
            if _segments_cross(p, q, r, s_):
                total += Fraction(lm.w) * Fraction(ln.w)
    return total


def random_lamination(rng, max_leaves=20, ambient=None, weights="mixed"):
    """A random discrete lamination with 1..max_leaves pairwise non-crossing leaves.

    Endpoints are distinct uniform boundary parameters matched by a random
    balanced bracket word, which is non-crossing by construction. ``weights``
    is ``"float"`` (uniform reals), ``"dyadic"`` (k / 2^j) or ``"mixed"``
    (a random choice per lamination, repeats included).
    """
    k = int(rng.integers(1, max_leaves + 1))
    pts = np.sort(rng.uniform(0.0, 1.0, 2 * k))
    while np.any(np.diff(pts) <= 0):
        pts = np.sort(rng.uniform(0.0, 1.0, 2 * k))
    stack, pairs, opened = [], [], 0
    for p in pts:
        if opened < k and (not stack or rng.uniform() < 0.5):
            stack.append(p)
            opened += 1
        else:
            pairs.append((stack.pop(), p))
    mode = weights if weights != "mixed" else ("float", "dyadic", "repeat")[int(rng.integers(0, 3))]
    if mode == "float":
        ws = rng.uniform(0.05, 2.0, k)
    elif mode == "dyadic":
        ws = rng.integers(1, 64, k) / 2.0 ** rng.integers(0, 8, k)
    else:
        ws = rng.choice(rng.uniform(0.05, 2.0, 3), k)
    return DiscreteLamination([Leaf(a, b, float(w)) for (a, b), w in zip(pairs, ws)], ambient)


# ---------------------------------------------------------------------------
# from traced leaves to laminations
# ---------------------------------------------------------------------------


def boundary_transversal(domain, inset=1e-9):
    """The boundary loop pulled inside by ``inset`` (relative to the domain size)."""
    x0, y0, x1, y1 = domain.bbox()
    d = inset * max(x1 - x0, y1 - y0)
    if domain.kind == "disk":
        t = np.linspace(0.0, 1.0, 257)
        return (1.0 - 1e-9 - d) * np.exp(2j * np.pi * t)
    v = list(domain.vertices)
    pts = []
    n = len(v)
    for k in range(n):
        # a vertex moves along the sum of the inward normals of its two edges
        e_in, e_out = v[k] - v[k - 1], v[(k + 1) % n] - v[k]
        nrm = 1j * e_in / abs(e_in) + 1j * e_out / abs(e_out)
        pts.append(v[k] + d * nrm)
    pts.append(pts[0])
    return np.array(pts)


def boundary_leaf_samples(qd, count, budget=10.0, step_tol=1e-8):
    """Leaves traced from ``count`` boundary points equidistributed in transverse measure.

    Almost every leaf of a finite-area differential on a planar domain is a
    cross-cut and meets the boundary twice, so each sample carries half of
    total/count.
    """
    from .trajectory import QDField, find_zeros, sample_on_transversal, trace_field

    fld = QDField(qd)
    zeros = find_zeros(qd)
    pts, total = sample_on_transversal(fld, boundary_transversal(qd.domain), count)
    w = total / count / 2 if count else 0.0
    x0, y0, x1, y1 = qd.domain.bbox()
    nudge = 1e-6 * max(x1 - x0, y1 - y0)
    out = []
    for p in pts:
        try:
            tr = trace_field(fld, p, budget, step_tol, zeros)
            if any(e.kind == "puncture" for e in tr.ends):
                # the leaf through a puncture has measure zero; the bin is represented
                # by a neighbouring leaf instead
                g = np.sqrt(fld.raw(p))
                side = 1j * g / abs(g) * nudge
                q = p + side if qd.domain.contains(np.array([p + side]))[0] else p - side
                tr = trace_field(fld, q, budget, step_tol, zeros)
            out.append((tr, w))
        except QDLabError as e:
            out.append((e, w))
    return out


def straighten(traj, ambient, tol=1e-7):
    """Endpoint pair of a cross-cut in cyclic boundary coordinates, or None."""
    if not hasattr(traj, "ends") or traj.classification != "cross-cut":
        return None
    pa, pb = traj.endpoints
    z = np.array([pa, pb], dtype=complex)
    if np.any(ambient.boundary_distance(z) > tol * max(1.0, ambient.perimeter)):
        return None
    a, b = ambient.boundary_coordinate(z)
    return float(a), float(b)


@dataclass
class SampledLamination:
    lamination: DiscreteLamination
    unassigned: float          # weight of samples that are not boundary cross-cuts
    total: float
    order: list                # leaf index -> sample index (the transversal order)


def from_samples(samples, ambient, max_unassigned=0.05, tol=0.0):
    """Discrete lamination from weighted traced leaves; non-cross-cuts are set aside."""
    leaves, order = [], []
    unassigned = Fraction(0)
    total = Fraction(0)
    for k, (tr, w) in enumerate(samples):
        total += Fraction(w)
        ends = straighten(tr, ambient)
        if ends is None:
            unassigned += Fraction(w)
            continue
        leaves.append(Leaf(ends[0], ends[1], w, witness=tr))
        order.append(k)
    if total > 0 and unassigned / total > max_unassigned:
        raise ExcessiveUnassignedMass(f"{float(unassigned / total):.3f} of the sampled mass is not on cross-cuts")
    lam = DiscreteLamination(leaves, ambient, tol)
    return SampledLamination(lam, float(unassigned), float(total), order)


def _leaf_source(x, count, budget, step_tol):
    """(samples, domain) for a QuadDiff or a PartialFoliation."""
    if hasattr(x, "charts"):
        return x.sample_leaves(count, budget, step_tol), x.domain
    return boundary_leaf_samples(x, count, budget, step_tol), x.domain


@dataclass
class IntersectionEstimate:
    value: float
    error: float
    unassigned: tuple
    mu: SampledLamination
    nu: SampledLamination

    def __float__(self):
        return self.value


def _riemann_error(mu, nu, tol):
    """Half the mass of crossing-matrix cells whose transversal neighbours disagree."""
    A, B = mu.lamination, nu.lamination
    if len(A) == 0 or len(B) == 0:
        return 0.0
    M = crossing_matrix(A.endpoints(), B.endpoints(), tol)
    edge = np.zeros(M.shape, dtype=bool)
    # neighbours in transversal order (the sampled leaves are already in that order)
    d0 = M[1:, :] != M[:-1, :]
    d1 = M[:, 1:] != M[:, :-1]
    edge[1:, :] |= d0
    edge[:-1, :] |= d0
    edge[:, 1:] |= d1
    edge[:, :-1] |= d1
    wa = np.array(A.weights())
    wb = np.array(B.weights())
    return 0.5 * float(wa @ edge.astype(float) @ wb)


def sampled_lamination(x, samples=200, budget=10.0, step_tol=1e-8, max_unassigned=0.05, tol=0.0):
    """Sample, trace and straighten the leaves of a differential or partial foliation."""
    smp, dom = _leaf_source(x, samples, budget, step_tol)
    return from_samples(smp, dom, max_unassigned, tol)


def intersection_from_qds(phi, psi, samples=200, budget=10.0, step_tol=1e-8, tol=0.0,
                          max_unassigned=0.05, psi_lamination=None):
    """Intersection number of the horizontal foliations of two differentials (or partial
    foliations) by sampling leaves, straightening them and counting crossings exactly.

    ``psi_lamination`` reuses an already sampled second family.
    """
    mu = sampled_lamination(phi, samples, budget, step_tol, max_unassigned, tol)
    nu = psi_lamination or sampled_lamination(psi, samples, budget, step_tol, max_unassigned, tol)
    if mu.lamination.ambient != nu.lamination.ambient:
        raise AmbientMismatch("the two foliations live on different domains")
    val = intersection_number(mu.lamination, nu.lamination, tol)
    err = (_riemann_error(mu, nu, tol) + mu.unassigned * nu.total + nu.unassigned * mu.total)
    return IntersectionEstimate(val, err, (mu.unassigned, nu.unassigned), mu, nu)


@dataclass
class MinskyReport:
    i: float
    i_error: float
    norm_phi: float
    norm_psi: float
    bound: float
    combined_error: float
    holds: bool
    slack: float


def minsky_verify(phi, psi, samples=200, tol=1e-8, budget=10.0):
    """Check i(phi, psi)^2 <= ||phi|| ||psi|| up to the combined numerical error."""
    est = intersection_from_qds(phi, psi, samples, budget)
    na, ea = _leaf_norm(phi, tol)
    nb, eb = _leaf_norm(psi, tol)
    bound = na * nb
    err = 2 * est.value * est.error + est.error ** 2 + na * eb + nb * ea + ea * eb
    lhs = est.value ** 2
    return MinskyReport(est.value, est.error, na, nb, bound, err, lhs <= bound + err, bound - lhs)


def _leaf_norm(x, tol):
    if hasattr(x, "charts"):
        return x.dirichlet_integral(tol, with_error=True)
    from .quadrature import l1_norm

    r = l1_norm(x, tol=tol, with_error=True)
    return r.value, r.error


def continuity_experiment(seq, limit, fixed, samples=400, tol=1e-8, budget=10.0, distances=True):
    """Rows (n, ||phi_n - phi||, i(phi_n, psi), |i(phi_n, psi) - i(phi, psi)|)."""
    from .quadrature import l1_distance

    nu = sampled_lamination(fixed, samples, budget)
    ref = intersection_from_qds(limit, fixed, samples, budget, psi_lamination=nu)
    rows = []
    for n, q in enumerate(seq, start=1):
        est = intersection_from_qds(q, fixed, samples, budget, psi_lamination=nu)
        dist = l1_distance(q, limit, tol=tol) if distances else float("nan")
        rows.append({"n": n, "distance": float(dist), "i": est.value, "i_error": est.error,
                     "abs_diff": abs(est.value - ref.value)})
    return {"limit_i": ref.value, "limit_error": ref.error, "rows": rows}


# ---------------------------------------------------------------------------
# confinement on the disk
# ---------------------------------------------------------------------------


def geodesic_min_radius(a, b):
    """Euclidean distance from 0 to the hyperbolic geodesic of the disk with ideal
    endpoints at angles 2 pi a and 2 pi b: tan(pi/4 - delta/2), delta the half opening."""
    gap = np.abs(np.mod(np.asarray(a) - np.asarray(b) + 0.5, 1.0) - 0.5)  # in [0, 1/2]
    delta = np.pi * gap
    return np.tan(np.pi / 4 - delta / 2)


def confinement_table(qds, r=0.5, grid=9, budget=20.0, step_tol=1e-8):
    """For each differential on the unit disk, trace leaves through a grid of points of
    the disk of radius r and report R = the largest distance from 0 to the geodesic
    sharing a traced leaf's endpoints. R < 1 confirms confinement at this resolution."""
    from .trajectory import trace_horizontal

    g = np.linspace(-r, r, grid)
    X, Y = np.meshgrid(g, g)
    starts = (X + 1j * Y).ravel()
    starts = starts[np.abs(starts) < r]
    rows = []
    for qd in qds:
        if qd.domain.kind != "disk":
            raise AmbientMismatch("confinement is measured on the unit disk")
        radii, skipped = [], 0
        for z0 in starts:
            try:
                tr = trace_horizontal(qd, z0, budget, step_tol)
            except QDLabError:
                skipped += 1
                continue
            ends = straighten(tr, qd.domain)
            if ends is None:
                skipped += 1
                continue
            radii.append(float(geodesic_min_radius(*ends)))
        R = max(radii) if radii else float("nan")
        rows.append({"phi": qd.sexpr(), "r": r, "leaves": len(radii), "skipped": skipped,
                     "R": R, "confined": bool(radii) and R < 1.0})
    return rows
