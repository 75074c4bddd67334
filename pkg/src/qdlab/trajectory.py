"""Horizontal trajectories of quadratic differentials.

A leaf solves dz/ds = 1/g(z) where g = sqrt(phi) is continued along the curve
(nearest-value branch matching) and s is arc length in the |phi|^(1/2)
metric, so Im(g dz) = 0 holds along it. The same integrator traces level sets
of a foliation chart function v, with g = v_y + i v_x.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BranchContinuationFailure, MapNotConverged,
                     PointOutsideDomain, StartAtZero, StepCollapse, ZeroOnBoundary)

DISK_INSET = 1e-9

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


@dataclass
class SingularityInfo:
    location: complex
    order: int
    coefficient: complex = 1.0 + 0j

    @property
    def prong_count(self):
        return self.order + 2

    @property
    def prong_directions(self):
        """Angles of the horizontal directions at the zero: (2 pi j - arg c) / (k + 2)."""
        k = self.order
        a = math.atan2(self.coefficient.imag, self.coefficient.real)
        return [((2 * math.pi * j - a) / (k + 2)) % (2 * math.pi) for j in range(k + 2)]

    def singular_radius(self, step_tol):
        return step_tol ** (2.0 / (self.order + 2))


@dataclass
class End:
    kind: str             # boundary | puncture | zero | budget | closed
    point: complex
    length: float         # natural length travelled on this half


@dataclass
class Trajectory:
    points: np.ndarray    # complex, ordered from end_a to end_b
    t: np.ndarray         # natural-parameter stamps (0 at the start point)
    branch: np.ndarray    # +-1: sign of the continued root relative to the principal root at z0
    classification: str  # closed | cross-cut | transient | singular-hit
    ends: tuple           # (End, End) for the backward and forward halves
    residual: float = 0.0  # max transverse defect |Im(sqrt(phi) dz)| per unit length
    z0: complex = 0j
    budget: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def endpoints(self):
        return self.ends[0].point, self.ends[1].point

    @property
    def length(self):
        return float(self.t[-1] - self.t[0])

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", "x", "y", "branch"])
        for t, z, b in zip(self.t, self.points, self.branch):
            w.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag)), int(b)])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# fields
# ---------------------------------------------------------------------------


class QDField:
    """g = sqrt(phi) with nearest-value branch continuation."""

    def __init__(self, qd):
        self.qd = qd
        self.domain = qd.domain

    def raw(self, z):
        return complex(self.qd.values(np.array([z]))[0])

    def value(self, z, ref):
        s = np.sqrt(self.raw(z))
        if ref is None:
            return s
        a, b = abs(s - ref), abs(s + ref)
        if abs(a - b) <= 1e-9 * (a + b):
            raise BranchContinuationFailure("branch ambiguity during continuation")
        return s if a <= b else -s

    def constant(self):
        q = self.qd
        if q.expr.uses_z or q.maps:
            return None
        return complex(q.values(np.array([0.5 + 0.5j]))[0])


class ChartField:
    """g = v_y + i v_x for a scalar chart function with gradient ``grad(z) = v_x + i v_y``."""

    def __init__(self, grad, domain):
        self.grad = grad
        self.domain = domain

    def raw(self, z):
        g = complex(np.asarray(self.grad(np.array([z])))[0])
        w = g.imag + 1j * g.real
        return w * w

    def value(self, z, ref):
        g = complex(np.asarray(self.grad(np.array([z])))[0])
        return g.imag + 1j * g.real

    def constant(self):
        return None


# ---------------------------------------------------------------------------
# tracing
# ---------------------------------------------------------------------------


def _seg_point_distance(a, b, p):
    d = b - a
    L2 = abs(d) ** 2
    if L2 == 0:
        return abs(p - a), 0.0
    t = min(max(((p - a) * np.conj(d)).real / L2, 0.0), 1.0)
    return abs(p - (a + t * d)), t


class _Tracer:
    def __init__(self, fld, zeros, step_tol, budget, punct_tol):
        self.f = fld
        self.dom = fld.domain
        self.zeros = list(zeros)
        self.step_tol = step_tol
        self.budget = budget
        self.punct_tol = punct_tol
        x0, y0, x1, y1 = self.dom.bbox()
        self.diag = math.hypot(x1 - x0, y1 - y0)
        self.bnd_tol = 1e-11 * self.diag
        self.residual = 0.0
        self.near_bnd = 1e-7 * self.diag

    def _finish(self, z, direction, s, pts, ts, br):
        # linear extrapolation to the boundary along the current tangent
        far = z + direction / abs(direction) * 4 * self.near_bnd
        ex = self.dom.segment_exit(z, far)
        pe = z + (ex if ex is not None else 0.0) * (far - z)
        s_end = s + abs(pe - z) * abs(1.0 / direction)
        pts.append(pe)
        ts.append(s_end)
        br.append(br[-1])
        return pts, ts, br, End("boundary", pe, s_end)

    def _rhs(self, z, ref):
        g = self.f.value(z, ref)
        if g == 0:
            raise StepCollapse("field vanishes")
        return 1.0 / g, g

    def _dp(self, z, h, k1, g1, sign):
        ks = [k1]
        ref = g1
        for i in range(1, 7):
            zi = z + h * sign * sum(a * k for a, k in zip(_A[i], ks))
            k, ref = self._rhs(zi, ref)
            ks.append(k)
        z5 = z + h * sign * sum(b * k for b, k in zip(_B5, ks))
        z4 = z + h * sign * sum(b * k for b, k in zip(_B4, ks))
        self._last_diff = z5 - z4
        return z5, abs(z5 - z4), ks[-1], ref

    def _hit_special(self, a, b):
        """Earliest puncture or zero met by the chord a->b: (kind, point, fraction) or None."""
        best = None
        for p in self.dom.punctures:
            d, t = _seg_point_distance(a, b, p)
            if d <= self.punct_tol and (best is None or t < best[2]):
                best = ("puncture", p, t)
        for zi in self.zeros:
            r = zi.singular_radius(self.step_tol)
            d, t = _seg_point_distance(a, b, zi.location)
            if d <= r and (best is None or t < best[2]):
                best = ("zero", zi.location, t)
        return best

    def _section_point(self, z, h, k1, g, sign, z0, d0, p0, p1):
        """Step length and point where the integrated leaf meets the section through z0.

        A linear chord misses the section point by the chord's sagitta, so the
        crossing is located by secant iteration on the Runge-Kutta step itself.
        """
        a, fa, b, fb = 0.0, p0, h, p1
        hc, zc = 0.0, z
        for _ in range(30):
            hc = a - fa * (b - a) / (fb - fa)
            try:
                zc = self._dp(z, hc, k1, g, sign)[0]
            except (BranchContinuationFailure, StepCollapse, MapNotConverged, PointOutsideDomain):
                break
            fc = ((zc - z0) * np.conj(d0)).real
            if abs(fc) <= 1e-15 * self.diag:
                break
            # Illinois variant keeps the bracket
            if (fc < 0) == (fa < 0):
                a, fa = hc, fc
                fb *= 0.5
            else:
                b, fb = hc, fc
                fa *= 0.5
        return hc, zc

    def _inside(self, z):
        return bool(self.dom.contains(np.array([z]))[0])

    def half(self, z0, g0, sign, check_closure):
        """Trace one direction from z0; returns (points, stamps, branch, End)."""
        z = z0
        k1, g = 1.0 / g0, g0
        s = 0.0
        pts, ts, br = [z0], [0.0], [1]
        scale = abs(g0)
        h = min(0.01 * self.diag * scale, self.budget)
        h_max = 0.05 * self.diag * max(scale, 1e-300)
        h_min = 1e-14 * self.diag * max(scale, 1e-300)
        d0 = k1 * sign  # leaf direction at z0
        section_prev = 0.0
        while True:
            if s >= self.budget:
                return pts, ts, br, End("budget", z, s)
            h = min(h, self.budget - s, h_max)
            if h < h_min:
                raise StepCollapse(f"step size collapsed near {z}")
            try:
                zn, err, kn, gn = self._dp(z, h, k1, g, sign)
                diff = self._last_diff
            except (BranchContinuationFailure, StepCollapse, FloatingPointError,
                    MapNotConverged, PointOutsideDomain):
                # a stage left the domain or the branch became ambiguous
                if self.dom.boundary_distance(np.array([z]))[0] < self.near_bnd:
                    return self._finish(z, k1 * sign, s, pts, ts, br)
                h *= 0.25
                continue
            nat_err = err * abs(g)
            tol = self.step_tol * max(h, 1e-3 * scale * self.diag)
            if not np.isfinite(nat_err) or nat_err > tol:
                fac = 0.9 * (tol / nat_err) ** 0.2 if np.isfinite(nat_err) and nat_err > 0 else 0.2
                h *= min(max(fac, 0.1), 0.5)
                continue
            # boundary crossing
            exit_s = None if self._inside(zn) else 1.0
            ex = self.dom.segment_exit(z, zn)
            if ex is not None:
                exit_s = ex if exit_s is None else min(exit_s, ex)
            special = self._hit_special(z, zn)
            if special is not None and (exit_s is None or special[2] <= exit_s):
                kind, p, frac = special
                s_hit = s + frac * h
                pts.append(p)
                ts.append(s_hit)
                br.append(br[-1])
                return pts, ts, br, End(kind, p, s_hit)
            if exit_s is not None:
                chord = abs(zn - z)
                if chord * exit_s <= max(1e-6 * self.diag, 1e3 * self.bnd_tol) or h <= 4 * h_min:
                    # short final chord: the exit point along it is accurate to curvature * chord^2
                    pe = z + exit_s * (zn - z)
                    s_end = s + exit_s * h
                    pts.append(pe)
                    ts.append(s_end)
                    br.append(br[-1])
                    return pts, ts, br, End("boundary", pe, s_end)
                h = h * max(exit_s, 1e-3) * 0.98
                continue
            # closure: crossing the section through z0 orthogonal to the leaf, close to z0
            if check_closure and s > 0:
                proj = ((zn - z0) * np.conj(d0)).real
                if section_prev < 0 <= proj:
                    hc, zc = self._section_point(z, h, k1, g, sign, z0, d0, section_prev, proj)
                    same_branch = abs(gn - g0) < abs(gn + g0)
                    gap_tol = 10 * self.step_tol * (self.diag + (s + hc) / max(abs(g), 1e-300))
                    if abs(zc - z0) <= gap_tol and same_branch:
                        pts.append(z0)
                        ts.append(s + hc)
                        br.append(br[-1])
                        return pts, ts, br, End("closed", z0, s + hc)
                section_prev = proj
            elif check_closure:
                section_prev = ((zn - z0) * np.conj(d0)).real
            # leaf-condition defect: transverse part of the local error per unit natural length
            self.residual = max(self.residual, abs((g * diff).imag) / h)
            z, k1, g = zn, kn, gn
            s += h
            pts.append(z)
            ts.append(s)
            br.append(1 if abs(g - g0) <= abs(g + g0) else -1)
            if nat_err > 0:
                h *= min(5.0, 0.9 * (tol / nat_err) ** 0.2)
            else:
                h *= 5.0


def _straight_half(dom, z0, direction, c_abs_sqrt, budget, punct_tol, diag):
    far = z0 + direction * 4 * diag
    ex = dom.segment_exit(z0, far)
    end = z0 + (ex if ex is not None else 1.0) * (far - z0)
    kind = "boundary"
    for p in dom.punctures:
        d, t = _seg_point_distance(z0, end, p)
        if d <= punct_tol:
            end = p
            kind = "puncture"
    L = abs(end - z0) * c_abs_sqrt
    if L > budget:
        end = z0 + direction * budget / c_abs_sqrt
        kind = "budget"
        L = budget
    return end, kind, L


def _classify(e_back, e_fwd):
    kinds = {e_back.kind, e_fwd.kind}
    if "closed" in kinds:
        return "closed"
    if "zero" in kinds:
        return "singular-hit"
    if "budget" in kinds:
        return "transient"
    return "cross-cut"


def trace_field(fld, z0, budget=10.0, step_tol=1e-8, zeros=(), punct_tol=1e-9, closure=True):
    """Trace the leaf of a field through z0 in both directions."""
    dom = fld.domain
    z0 = complex(z0)
    if not dom.contains(np.array([z0]))[0]:
        raise PointOutsideDomain(f"start point {z0} is outside the domain")
    for zi in zeros:
        if abs(z0 - zi.location) <= zi.singular_radius(step_tol):
            raise StartAtZero(f"start point {z0} is at a zero of order {zi.order}")
    x0, y0, x1, y1 = dom.bbox()
    diag = math.hypot(x1 - x0, y1 - y0)
    c = fld.constant()
    if c is not None:
        if c == 0:
            raise StartAtZero("the differential vanishes identically")
        g0 = np.sqrt(c)
        direction = (1.0 / g0) / abs(1.0 / g0)
        ends = []
        for sign in (-1, 1):
            p, kind, L = _straight_half(dom, z0, sign * direction, abs(g0), budget, punct_tol, diag)
            ends.append(End(kind, p, L))
        pts = np.array([ends[0].point, z0, ends[1].point])
        t = np.array([-ends[0].length, 0.0, ends[1].length])
        return Trajectory(pts, t, np.ones(3, dtype=int), _classify(*ends), tuple(ends), 0.0, z0, budget)
    g0 = fld.value(z0, None)
    if g0 == 0:
        raise StartAtZero(f"start point {z0} is a zero")
    tr = _Tracer(fld, zeros, step_tol, budget, punct_tol)
    pf, tf, bf, ef = tr.half(z0, g0, +1, closure)
    if ef.kind == "closed":
        return Trajectory(np.array(pf), np.array(tf), np.array(bf), "closed", (ef, ef), tr.residual, z0, budget)
    pb, tb, bb, eb = tr.half(z0, g0, -1, False)
    pts = np.array(pb[::-1] + pf[1:])
    t = np.array([-v for v in tb[::-1]] + tf[1:])
    br = np.array(bb[::-1] + bf[1:])
    return Trajectory(pts, t, br, _classify(eb, ef), (eb, ef), tr.residual, z0, budget)


def trace_horizontal(qd, z0, budget=10.0, step_tol=1e-8, zeros=None, punct_tol=1e-9):
    """Horizontal leaf of ``qd`` through ``z0``; see :class:`Trajectory` for the result."""
    if zeros is None:
        zeros = find_zeros(qd)
    return trace_field(QDField(qd), z0, budget, step_tol, zeros, punct_tol)


# ---------------------------------------------------------------------------
# zeros
# ---------------------------------------------------------------------------


def _zero_free(node):
    from . import expr as E

    if isinstance(node, E.Const):
        return node.value != 0
    if isinstance(node, (E.DZ2, E.Exp)):
        return True
    if isinstance(node, E.Pullback):
        return _zero_free(node.inner)
    if isinstance(node, (E.Mul,)):
        return all(_zero_free(a) for a in node.args)
    if isinstance(node, (E.Neg, E.Pow)):
        return _zero_free(node.a)
    if isinstance(node, E.Div):
        return _zero_free(node.a)
    return False


def _winding(func, corners, n0=16, max_pts=65536):
    """Winding number of func around the closed polygon through ``corners``, and the
    contour sum of z dlog(func) / 2 pi i (which locates a single zero)."""
    c = np.asarray(list(corners) + [corners[0]], dtype=complex)
    # one parameter per edge: edge k spans t in [k, k+1]
    t = (np.arange(len(c) - 1)[:, None] + np.linspace(0.0, 1.0, n0 + 1)[None, :-1]).ravel()
    t = np.append(t, len(c) - 1.0)

    def at(t):
        k = np.minimum(np.floor(t).astype(int), len(c) - 2)
        return c[k] + (t - k) * (c[k + 1] - c[k])

    for _ in range(40):
        z = at(t)
        v = func(z)
        if np.any(v == 0) or not np.all(np.isfinite(v)):
            raise ZeroOnBoundary("differential vanishes on a cell edge")
        dl = np.log(v[1:] / v[:-1])
        bad = np.abs(dl.imag) > math.pi / 4
        if not bad.any():
            break
        if t.size > max_pts:
            raise ZeroOnBoundary("argument not resolved along a cell edge")
        t = np.sort(np.concatenate([t, 0.5 * (t[:-1] + t[1:])[bad]]))
    else:
        # a zero sits (numerically) on the contour
        raise ZeroOnBoundary("argument not resolved along a cell edge")
    zm = 0.5 * (z[1:] + z[:-1])
    total = float(np.sum(dl.imag))
    return int(round(total / (2 * math.pi))), complex(np.sum(zm * dl)) / (2j * math.pi)


def _lines(a, b, n, shift):
    k = max(1, int(math.ceil((b - a) * n - 1e-9)))
    t = (np.arange(1, k) + shift) / k
    return [a] + list(a + t * (b - a)) + [b]


def _cells(domain, n, attempt=0, inset=1e-9):
    """Closed polygons (vertex lists) tiling the domain, with cell lines perturbed
    by ``attempt`` and sides on the domain boundary pulled inside by ``inset``."""
    shift = 0.1234567 * attempt - 0.0061803 * (attempt > 0)
    out = []
    if domain.kind == "disk":
        r_out = 1.0 - DISK_INSET
        nr = max(2, n // 2)
        nt = 4 * max(2, n // 2)
        rs = [r_out * (k + (0.3 * shift if 0 < k < nr else 0.0)) / nr for k in range(nr + 1)]
        th = 2 * math.pi * (np.arange(nt + 1) + shift) / nt
        sub = 4
        out.append([rs[1] * np.exp(1j * t) for t in np.linspace(th[0], th[0] + 2 * math.pi, nt * sub + 1)[:-1]])
        for i in range(1, nr):
            for j in range(nt):
                arc = np.linspace(th[j], th[j + 1], sub + 1)
                poly = [rs[i + 1] * np.exp(1j * t) for t in arc] + [rs[i] * np.exp(1j * t) for t in arc[::-1]]
                out.append(poly)
        return out
    xs = sorted({v.real for v in domain.vertices})
    ys = sorted({v.imag for v in domain.vertices})
    x0, y0, x1, y1 = domain.bbox()
    scale = max(x1 - x0, y1 - y0)
    X = [xs[0]]
    for a, b in zip(xs[:-1], xs[1:]):
        X += _lines(a, b, n / scale, shift)[1:]
    Y = [ys[0]]
    for a, b in zip(ys[:-1], ys[1:]):
        Y += _lines(a, b, n / scale, shift * 0.7)[1:]
    eps = 1e-7 * scale
    for i in range(len(X) - 1):
        for j in range(len(Y) - 1):
            a, b, c, d = X[i], Y[j], X[i + 1], Y[j + 1]
            mid = complex(0.5 * (a + c), 0.5 * (b + d))
            if not domain.contains(np.array([mid]))[0]:
                continue
            my = 0.5 * (b + d)
            mx = 0.5 * (a + c)
            probe = np.array([complex(a - eps, my), complex(c + eps, my), complex(mx, b - eps), complex(mx, d + eps)])
            ins = domain.contains(probe)
            if not ins[0]:
                a += inset * scale
            if not ins[1]:
                c -= inset * scale
            if not ins[2]:
                b += inset * scale
            if not ins[3]:
                d -= inset * scale
            out.append([complex(a, b), complex(c, b), complex(c, d), complex(a, d)])
    return out


def find_zeros(qd, resolution=16, tol=1e-10):
    """Zeros of phi in the domain by argument-principle cell counting and refinement."""
    if getattr(qd, "_zeros_cache", None) is not None and qd._zeros_cache[0] == resolution:
        return qd._zeros_cache[1]
    if _zero_free(qd.expr):
        qd._zeros_cache = (resolution, [])
        return []
    dom = qd.domain
    func = qd.values
    for attempt in range(4):
        found = []
        try:
            for poly in _cells(dom, resolution, attempt):
                k, _ = _winding(func, poly)
                if k > 0:
                    found.extend(_refine_zero(func, poly, k, tol))
            break
        except ZeroOnBoundary:
            continue
    else:
        raise ZeroOnBoundary("could not place cell edges away from zeros")
    uniq = []
    for zi in found:
        if not any(abs(zi.location - u.location) < 1e-8 for u in uniq):
            uniq.append(zi)
    for zi in uniq:
        if dom.boundary_distance(np.array([zi.location]))[0] < 1e-8:
            raise ZeroOnBoundary(f"zero at {zi.location} lies on the domain boundary")
    uniq = [zi for zi in uniq if dom.contains(np.array([zi.location]))[0]]
    qd._zeros_cache = (resolution, uniq)
    return uniq


def _refine_zero(func, corners, k, tol):
    xs = [z.real for z in corners]
    ys = [z.imag for z in corners]
    x0, x1, y0, y1 = min(xs), max(xs), min(ys), max(ys)
    k_here, centre = _winding(func, corners)
    # split until each cell holds zeros at a single point
    size = max(x1 - x0, y1 - y0)
    if size > 1e-3:
        xm, ym = 0.5 * (x0 + x1) + 1e-11, 0.5 * (y0 + y1) + 1e-11
        subs = [(x0, y0, xm, ym), (xm, y0, x1, ym), (x0, ym, xm, y1), (xm, ym, x1, y1)]
        out = []
        for (a, b, c, d) in subs:
            cs = [complex(a, b), complex(c, b), complex(c, d), complex(a, d)]
            try:
                kk, _ = _winding(func, cs)
            except ZeroOnBoundary:
                cs = [z + 1e-9 * (1 + 1j) for z in cs]
                kk, _ = _winding(func, cs)
            if kk > 0:
                out.extend(_refine_zero(func, cs, kk, tol))
        return out
    # single cluster: centroid from the contour integral, then shrink around it
    z = centre / k
    r = size
    for _ in range(20):
        r = max(r * 0.1, tol)
        cs = [z + r * c for c in (-1 - 1j, 1 - 1j, 1 + 1j, -1 + 1j)]
        kk, zc = _winding(func, cs, n0=32)
        if kk != k:
            break
        z = zc / k
        if r <= tol:
            break
    rho = max(1e-4, 10 * r)
    ang = 2 * math.pi * np.arange(8) / 8
    pts = z + rho * np.exp(1j * ang)
    coeff = complex(np.mean(func(pts) / (pts - z) ** k))
    return [SingularityInfo(complex(z), int(k), coeff)]


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------


def _transverse_density(fld, a, b, n=64):
    """|Im(g dz)| integrated over each of n sub-segments of a->b (midpoint rule)."""
    t = (np.arange(n) + 0.5) / n
    z = a + t * (b - a)
    vals = np.array([abs((np.sqrt(fld.raw(complex(p))) * (b - a) / n).imag) for p in z])
    return vals


def sample_on_transversal(fld, polyline, count, per_segment=64):
    """``count`` points equidistributed in transverse measure along the polyline, and the total."""
    poly = np.asarray(polyline, dtype=complex)
    pieces, locs = [], []
    for a, b in zip(poly[:-1], poly[1:]):
        m = _transverse_density(fld, a, b, per_segment)
        pieces.append(m)
        t = (np.arange(per_segment + 1)) / per_segment
        locs.append(a + t * (b - a))
    masses = np.concatenate(pieces)
    total = math.fsum(masses)
    if total <= 0 or count <= 0:
        return [], total
    cum = np.concatenate([[0.0], np.cumsum(masses)])
    bounds = np.concatenate([loc[:-1] for loc in locs] + [locs[-1][-1:]])
    targets = (np.arange(count) + 0.5) / count * total
    out = []
    for tv in targets:
        j = int(np.searchsorted(cum, tv, side="right") - 1)
        j = min(j, masses.size - 1)
        frac = (tv - cum[j]) / masses[j] if masses[j] > 0 else 0.5
        out.append(complex(bounds[j] + frac * (bounds[j + 1] - bounds[j])))
    return out, total


def sample_leaves(qd, transversal, count, budget=10.0, step_tol=1e-8):
    """Leaves through ``count`` points of the transversal, equidistributed in transverse
    measure; each carries weight total/count."""
    fld = QDField(qd)
    zeros = find_zeros(qd)
    pts, total = sample_on_transversal(fld, transversal, count)
    w = total / count if count else 0.0
    return [(trace_field(fld, p, budget, step_tol, zeros), w) for p in pts]
