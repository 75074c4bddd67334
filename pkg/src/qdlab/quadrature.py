"""Adaptive tensor Gauss-Legendre quadrature on quadtrees, and L1 norms of differentials."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainMismatch, QuadratureNotConverged
from .expr import PointContext, QuadDiff, StripContext

ORDER = 8
EXCISION = 1e-8
# the coarse/children difference can undershoot the true error several-fold on
# cells touching a zero of |phi| (a cone point), so refinement targets tol / SAFETY
SAFETY = 8.0


@dataclass
class QuadResult:
    value: float
    error: float
    leaves: int
    evaluations: int

    def __float__(self):
        return float(self.value)


@dataclass
class _Leaves:
    x0: np.ndarray
    y0: np.ndarray
    x1: np.ndarray
    y1: np.ndarray
    val: np.ndarray = field(default=None)


_GL_CACHE = {}


def _gl(order):
    if order not in _GL_CACHE:
        t, w = np.polynomial.legendre.leggauss(order)
        _GL_CACHE[order] = (t, w)
    return _GL_CACHE[order]


def _estimate(f, x0, y0, x1, y1, order):
    """Tensor GL estimate on each cell (vectorized over cells)."""
    t, w = _gl(order)
    hx = 0.5 * (x1 - x0)
    hy = 0.5 * (y1 - y0)
    cx = 0.5 * (x0 + x1)
    cy = 0.5 * (y0 + y1)
    X = cx[:, None, None] + hx[:, None, None] * t[None, :, None]
    Y = cy[:, None, None] + hy[:, None, None] * t[None, None, :]
    pts = (X + 1j * Y).ravel()
    vals = np.asarray(f(pts), dtype=float).reshape(x0.size, order, order)
    W = w[:, None] * w[None, :]
    return np.einsum("kij,ij->k", vals, W) * hx * hy


def _children(x0, y0, x1, y1):
    xm = 0.5 * (x0 + x1)
    ym = 0.5 * (y0 + y1)
    cx0 = np.concatenate([x0, xm, x0, xm])
    cx1 = np.concatenate([xm, x1, xm, x1])
    cy0 = np.concatenate([y0, y0, ym, ym])
    cy1 = np.concatenate([ym, ym, y1, y1])
    return cx0, cy0, cx1, cy1


def integrate(f, rects, tol=1e-8, order=ORDER, max_rounds=60, max_leaves=2_000_000,
              singular_points=(), raise_on_failure=True):
    """Integrate a real vectorized ``f(points)`` over a union of axis-parallel rectangles.

    Every leaf carries the 4-child estimate and the error |coarse - children|.
    With ``target = tol / SAFETY``, leaves with error above ``target / #leaves``
    are split until the summed error is below ``target``. Leaves within
    ``EXCISION`` of a point in ``singular_points`` are frozen: their (tiny) contribution is kept at the
    current estimate and its error is counted.
    """
    r = np.asarray(rects, dtype=float).reshape(-1, 4)
    x0, y0, x1, y1 = r.T.copy()
    sing = np.asarray(singular_points, dtype=complex).ravel()
    evals = 0
    coarse = _estimate(f, x0, y0, x1, y1, order)
    evals += x0.size * order * order

    def refine(x0, y0, x1, y1, coarse):
        nonlocal evals
        cx0, cy0, cx1, cy1 = _children(x0, y0, x1, y1)
        cv = _estimate(f, cx0, cy0, cx1, cy1, order)
        evals += cx0.size * order * order
        k = x0.size
        fine = cv[:k] + cv[k:2 * k] + cv[2 * k:3 * k] + cv[3 * k:]
        return (cx0, cy0, cx1, cy1, cv), fine, np.abs(fine - coarse)

    target = tol / SAFETY
    kids, val, err = refine(x0, y0, x1, y1, coarse)
    frozen = np.zeros(x0.size, dtype=bool)
    for _ in range(max_rounds):
        total_err = math.fsum(err)
        if total_err <= target:
            break
        thresh = target / max(err.size, 1)
        split = (err > thresh) & ~frozen
        if not split.any() or err.size > max_leaves:
            break
        keep = ~split
        cx0, cy0, cx1, cy1, cv = kids
        k = x0.size
        sel = np.concatenate([split] * 4)
        nx0, ny0, nx1, ny1, ncoarse = cx0[sel], cy0[sel], cx1[sel], cy1[sel], cv[sel]
        nkids, nval, nerr = refine(nx0, ny0, nx1, ny1, ncoarse)
        nfrozen = np.zeros(nx0.size, dtype=bool)
        if sing.size:
            cxm = 0.5 * (nx0 + nx1)
            cym = 0.5 * (ny0 + ny1)
            rad = 0.5 * np.hypot(nx1 - nx0, ny1 - ny0)
            d = np.min(np.abs((cxm + 1j * cym)[:, None] - sing[None, :]), axis=1) - rad
            nfrozen = (d < EXCISION) & (rad < EXCISION)
        # reassemble leaf arrays: kept leaves first, then the new ones
        keep4 = np.concatenate([keep] * 4)
        kids = tuple(np.concatenate([a[keep4].reshape(4, -1), b.reshape(4, -1)], axis=1).ravel()
                     for a, b in zip(kids, nkids))
        x0 = np.concatenate([x0[keep], nx0])
        y0 = np.concatenate([y0[keep], ny0])
        x1 = np.concatenate([x1[keep], nx1])
        y1 = np.concatenate([y1[keep], ny1])
        val = np.concatenate([val[keep], nval])
        err = np.concatenate([err[keep], nerr])
        frozen = np.concatenate([frozen[keep], nfrozen])
    # fixed summation order: sort leaves by position so the reduction is deterministic
    order_idx = np.lexsort((y0, x0))
    value = math.fsum(val[order_idx])
    total_err = math.fsum(err[order_idx])
    res = QuadResult(value, total_err, int(x0.size), evals)
    if total_err > tol and raise_on_failure:
        raise QuadratureNotConverged(
            f"quadrature error estimate {total_err:.3g} above tolerance {tol:.3g}", value, total_err)
    return res


def _split_rects(rects, xs, ys):
    """Split rectangles along the given lines so listed points land on cell corners."""
    out = []
    for x0, y0, x1, y1 in rects:
        bx = sorted({x0, x1, *[x for x in xs if x0 < x < x1]})
        by = sorted({y0, y1, *[y for y in ys if y0 < y < y1]})
        for a, b in zip(bx[:-1], bx[1:]):
            for c, d in zip(by[:-1], by[1:]):
                out.append((a, c, b, d))
    return out


def _unit_cells(rects, size=1.0):
    out = []
    for x0, y0, x1, y1 in rects:
        nx = max(1, int(math.ceil((x1 - x0) / size - 1e-9)))
        ny = max(1, int(math.ceil((y1 - y0) / size - 1e-9)))
        xs = np.linspace(x0, x1, nx + 1)
        ys = np.linspace(y0, y1, ny + 1)
        for i in range(nx):
            for j in range(ny):
                out.append((xs[i], ys[j], xs[i + 1], ys[j + 1]))
    return out


def integrate_domain(f, domain, tol=1e-8, **kw):
    """Integrate a real vectorized function over a planar domain."""
    if domain.kind == "disk":
        rmax = 1.0 - 1e-12

        def g(p):
            r, th = p.real, p.imag
            return f(r * np.exp(1j * th)) * r

        rects = [(0.0, 2 * math.pi * k / 8, rmax, 2 * math.pi * (k + 1) / 8) for k in range(8)]
        return integrate(g, rects, tol, **kw)
    rects = [(r[0], r[1], r[2], r[3]) for r in domain.rectangles()]
    punct = list(domain.punctures)
    rects = _split_rects(rects, [p.real for p in punct], [p.imag for p in punct])
    return integrate(f, rects, tol, singular_points=punct, **kw)


def _strip_integrand(chart, qds, combine):
    def f(zeta):
        ctx = StripContext(chart, zeta)
        return combine([q.pulled(ctx) for q in qds])
    return f


def _shared_chart(qds):
    charts = [q.strip_chart() for q in qds]
    charts = [c for c in charts if c is not None]
    if not charts:
        return None
    if any(c is not charts[0] for c in charts):
        return None
    return charts[0]


def _integrate_abs(qds, combine, tol, **kw):
    dom = qds[0].domain
    chart = _shared_chart(qds)
    if chart is not None:
        lo, _, hi, _ = chart.rect
        rects = _unit_cells([(lo, 0.0, hi, 1.0)])
        sing = list(chart.G.pre) + list(chart.h.pre)
        return integrate(_strip_integrand(chart, qds, combine), rects, tol, singular_points=sing, **kw)

    def f(z):
        ctx = PointContext(z)
        return combine([q.pulled(ctx) for q in qds])

    return integrate_domain(f, dom, tol, **kw)


def l1_norm(qd: QuadDiff, tol=1e-8, with_error=False, **kw):
    """Integral of |phi| over the domain, with absolute error estimate at most ``tol``.

    Differentials pulled back by a Schwarz-Christoffel map are integrated in the
    map's strip coordinates, where the Jacobian is |G'|^2.
    """
    res = _integrate_abs([qd], lambda v: np.abs(v[0]), tol, **kw)
    return res if with_error else res.value


def l1_distance(a: QuadDiff, b: QuadDiff, tol=1e-8, with_error=False, **kw):
    """Integral of |a - b| over the common domain."""
    if a.domain != b.domain:
        raise DomainMismatch("differentials live on different domains")
    res = _integrate_abs([a, b], lambda v: np.abs(v[0] - v[1]), tol, **kw)
    return res if with_error else res.value


# ---------------------------------------------------------------------------
# convergence classification
# ---------------------------------------------------------------------------


def _decreasing(seq, slack):
    return all(b <= a + slack for a, b in zip(seq, seq[1:]))


def _vanishing(seq, slack):
    """Decreasing on the prefix and at least halved overall (or already below slack)."""
    if not seq:
        return True
    return _decreasing(seq, slack) and (seq[-1] <= 0.5 * seq[0] or seq[-1] <= slack)


def classify_convergence(seq, limit, exhaustion, tol=1e-6, samples=24):
    """Classify a finite prefix of a sequence of differentials converging to ``limit``.

    Reports the sup-error table over the exhaustion regions, the norm and
    distance sequences, and three verdicts read off the prefix:

    ``locally_uniform``: on every region the sup error is non-increasing (up to
    ``tol``) and has at least halved from the first member to the last.
    ``norm_limsup_ok``: the excess ``||phi_n|| - ||phi||`` is non-increasing and
    has halved or dropped below ``tol``.
    ``l1_convergent``: the distances ``||phi_n - phi||`` are non-increasing and
    halved or below ``tol``.
    ``flags_consistent``: ``l1_convergent`` equals ``locally_uniform and
    norm_limsup_ok``, the equivalence expected of a convergent sequence.
    """
    if any(q.domain != limit.domain for q in seq):
        raise DomainMismatch("sequence members live on different domains")
    table = []
    for k in range(len(exhaustion)):
        pts = exhaustion.sample(k, samples)
        ref = limit.values(pts)
        table.append([float(np.max(np.abs(q.values(pts) - ref))) for q in seq])
    lim_norm = l1_norm(limit, tol)
    norms = [l1_norm(q, tol) for q in seq]
    dists = [l1_distance(q, limit, tol) for q in seq]
    excess = [max(nv - lim_norm, 0.0) for nv in norms]
    lu = all(_vanishing(row, tol) for row in table)
    nl = _vanishing(excess, 4 * tol)
    l1 = _vanishing(dists, 4 * tol)
    return {
        "locally_uniform": bool(lu),
        "norm_limsup_ok": bool(nl),
        "l1_convergent": bool(l1),
        "flags_consistent": bool(l1 == (lu and nl)),
        "sup_errors": table,
        "margins": list(exhaustion.margins),
        "norms": norms,
        "limit_norm": lim_norm,
        "l1_distances": dists,
    }
