"""Registered experiments. Each returns tables, figures and named checks; the
runner writes CSV, SVG and a JSON summary with the achieved tolerances."""

from __future__ import annotations

import csv
import json
import math
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import plotting
from .domain import PlanarDomain, punctured_square
from .expr import DEFAULT_REGISTRY, QuadDiff
from .quadrature import l1_distance, l1_norm

EXPERIMENTS = ("example-4-2", "example-6-1", "thm-6-2", "minsky-suite", "continuity",
               "dirichlet", "confinement")


@dataclass
class ExperimentConfig:
    experiment: str
    grid: int = None
    samples: int = None
    budget: float = 10.0
    tol: float = 1e-8
    seed: int = 0
    out: str = "out"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.grid is not None and self.grid < 2:
            raise ValueError("grid must be at least 2")
        if self.samples is not None and self.samples < 1:
            raise ValueError("samples must be positive")
        if not self.budget > 0 or not self.tol > 0:
            raise ValueError("budget and tol must be positive")

    def get(self, key, default):
        v = getattr(self, key, None) if key in ("grid", "samples") else None
        if v is not None:
            return v
        return self.options.get(key, default)


@dataclass
class Check:
    name: str
    passed: bool
    value: object = None
    tolerance: object = None
    detail: str = ""


@dataclass
class Outcome:
    tables: dict = field(default_factory=dict)     # name -> (header, rows)
    figures: list = field(default_factory=list)    # callables taking an output path
    checks: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(r.get(h, "")) for h in header])


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


# ---------------------------------------------------------------------------
# example-4-2: kernel convergence without L1 convergence
# ---------------------------------------------------------------------------


def _sup_error(fmap, n_grid):
    g = np.linspace(0.1, 0.9, n_grid)
    X, Y = np.meshgrid(g, g)
    z = (X + 1j * Y).ravel()
    return float(np.max(np.abs(fmap(z) - z)))


def run_qn_pullbacks(cfg):
    tol = cfg.tol
    ns = cfg.get("n", [2, 4, 8, 16])
    ns_sqrt = cfg.get("n_sqrt", [4, 16, 64])
    sup_grid = cfg.get("grid", 17)
    reg = DEFAULT_REGISTRY
    previous = reg.cache_dir
    reg.set_cache(os.path.join(cfg.out, "maps"))
    try:
        dz2 = QuadDiff("(dz2)")
        rows, sq_rows, aux_rows = [], [], []
        for n in ns:
            f = reg.get(f"f{n}")
            phi = QuadDiff(f"(pullback f{n} (dz2))", registry=reg)
            nr = l1_norm(phi, tol=tol, with_error=True)
            dist = l1_distance(phi, dz2, tol=tol, with_error=True)
            rows.append({"n": n, "norm": nr.value, "norm_error": nr.error, "area": 2.0 - 1.0 / n,
                         "distance": dist.value, "distance_error": dist.error,
                         "sup_error": _sup_error(f, sup_grid), "map_residual": max(f.report["h_residual"], f.report["G_residual"]),
                         "crowding": f.crowding})
        for n in ns_sqrt:
            phi = QuadDiff(f"(pullback s{n} (dz2))", registry=reg)
            nr = l1_norm(phi, tol=tol, with_error=True)
            dist = l1_distance(phi, dz2, tol=tol, with_error=True)
            oracle = 1.0 / math.sqrt(n) - 1.0 / n
            sq_rows.append({"n": n, "norm": nr.value, "norm_error": nr.error, "gap": nr.value - 1.0,
                            "gap_oracle": oracle, "gap_deviation": abs(nr.value - 1.0 - oracle),
                            "distance": dist.value, "distance_error": dist.error})
        for n in cfg.get("n_aux", [2, 4, 8]):
            phi = QuadDiff(f"(pullback e{n} (dz2))", registry=reg)
            nr = l1_norm(phi, tol=tol, with_error=True)
            aux_rows.append({"n": n, "norm": nr.value, "norm_error": nr.error,
                             "distance": l1_distance(phi, dz2, tol=tol)})
    finally:
        reg.set_cache(previous)
    out = Outcome()
    out.tables["qn"] = (["n", "norm", "norm_error", "area", "distance", "distance_error", "sup_error",
                         "map_residual", "crowding"], rows)
    out.tables["qn_sqrt"] = (["n", "norm", "norm_error", "gap", "gap_oracle", "gap_deviation", "distance",
                              "distance_error"], sq_rows)
    out.tables["qn_equal_area_aux"] = (["n", "norm", "norm_error", "distance"], aux_rows)
    main = [r for r in rows if r["n"] in (2, 4, 8)]
    dev = max((abs(r["norm"] - 2.0) for r in main), default=0.0)
    out.checks.append(Check("norm_equals_2", dev <= 0.02, dev, 0.02,
                            "||pullback(f_n, dz2)|| - 2 for n in {2,4,8}; the literal Q_n has area 2 - 1/n"))
    dmin = min((r["distance"] for r in rows), default=0.0)
    out.checks.append(Check("distance_at_least_0.9", dmin >= 0.9, dmin, 0.9, "L1 distance to dz2"))
    sups = [r["sup_error"] for r in rows]
    out.checks.append(Check("sup_error_strictly_decreasing", all(b < a for a, b in zip(sups, sups[1:])), sups))
    gdev = max((r["gap_deviation"] for r in sq_rows), default=0.0)
    out.checks.append(Check("sqrt_variant_gap_oracle", gdev <= 1e-2, gdev, 1e-2, "||phi_n|| - 1 vs 1/sqrt(n) - 1/n"))
    sd = [r["distance"] for r in sq_rows]
    out.checks.append(Check("sqrt_variant_distance_decreasing", all(b < a for a, b in zip(sd, sd[1:])), sd))
    out.summary = {"achieved": {"max_norm_deviation_from_2": dev, "max_gap_deviation": gdev,
                                "max_norm_quadrature_error": max(r["norm_error"] for r in rows + sq_rows)}}
    x = [r["n"] for r in rows]
    out.figures.append(("qn_norms.svg", lambda p: plotting.series_svg(
        p, x, [("norm", [r["norm"] for r in rows]), ("distance to dz2", [r["distance"] for r in rows]),
               ("area 2-1/n", [r["area"] for r in rows])], ylabel="value", title="pullbacks by f_n")))
    out.figures.append(("qn_sup_error.svg", lambda p: plotting.series_svg(
        p, x, [("sup |f_n - id| on [0.1,0.9]^2", sups)], logy=True, title="locally uniform convergence")))
    return out


# ---------------------------------------------------------------------------
# example-6-1: the punctured square
# ---------------------------------------------------------------------------


def _registered_cycles(n_punctures):
    classes = [[k] for k in range(n_punctures)]
    classes += [[0, 2], [1, 3], list(range(0, n_punctures, 2)), list(range(1, n_punctures, 2)),
                list(range(n_punctures))]
    return classes


def run_punctured_square(cfg):
    from .foliation import PartialFoliation
    from .lamination import build_quad_cover, intersection_from_qds

    n_max = cfg.get("n_max", 12)
    samples = cfg.get("samples", 400)
    grid = cfg.get("grid", 65)
    X = punctured_square(n_max)
    phi = QuadDiff("(mul (const -1 0) (dz2))", X)
    strip = PartialFoliation.strip(X, -0.5, 0.25, 0.5, 0.5)
    est = intersection_from_qds(phi, strip, samples, cfg.budget)
    norm_phi = l1_norm(phi, tol=cfg.tol)
    d_strip = strip.dirichlet_integral(tol=cfg.tol)
    rows = []
    for cls in _registered_cycles(len(X.punctures)):
        spec = {"type": "cycle", "punctures": cls}
        h = strip.height(spec, grid)
        rows.append({"class": json.dumps(spec, separators=(",", ":")), "height": h.value, "grid": grid})
    cross = []
    for a, b in (("bottom", "top"), ("left", "right")):
        spec = {"type": "crosscut", "from": a, "to": b}
        cross.append({"class": json.dumps(spec, separators=(",", ":")), "height": strip.height(spec, grid).value,
                      "grid": grid})
    out = Outcome()
    out.tables["intersection"] = (["i", "i_error", "unassigned_phi", "unassigned_psi", "norm_phi", "dirichlet_strip",
                                   "i_squared", "bound"],
                                  [{"i": est.value, "i_error": est.error, "unassigned_phi": est.unassigned[0],
                                    "unassigned_psi": est.unassigned[1], "norm_phi": norm_phi,
                                    "dirichlet_strip": d_strip, "i_squared": est.value ** 2,
                                    "bound": norm_phi * d_strip}])
    out.tables["cycle_heights"] = (["class", "height", "grid"], rows)
    out.tables["crosscut_heights"] = (["class", "height", "grid"], cross)
    dev = abs(est.value - 0.25)
    out.checks.append(Check("i_equals_quarter", dev <= 1e-3, est.value, 1e-3))
    worst = max(r["height"] for r in rows)
    out.checks.append(Check("cycle_heights_zero", worst == 0.0, worst, 0.0,
                            f"{len(rows)} registered enclosing-cycle classes"))
    out.checks.append(Check("minsky_bound", est.value ** 2 <= norm_phi * d_strip + 1e-12,
                            est.value ** 2, norm_phi * d_strip))
    out.summary = {"achieved": {"i": est.value, "i_error_estimate": est.error, "abs_i_minus_quarter": dev,
                                "max_cycle_height": worst}}
    mu, nu = est.mu.lamination, est.nu.lamination
    out.figures.append(("leaves.svg", lambda p: plotting.leaves_svg(
        p, X, [("-dz2", "tab:blue", [l.witness for l in mu.leaves[::8]]),
               ("strip", "tab:orange", [l.witness for l in nu.leaves[::8]])], "punctured square")))
    out.figures.append(("quad_cover.svg", lambda p: plotting.quad_cover_svg(
        p, build_quad_cover(mu, nu))))
    return out


# ---------------------------------------------------------------------------
# thm-6-2: two quadrilaterals in the disk
# ---------------------------------------------------------------------------


def run_two_quadrilaterals(cfg):
    from .extremal import Quadrilateral, two_quadrilateral_experiment

    grid = cfg.get("grid", 128)
    samples = cfg.get("samples", 64)
    a = cfg.get("half_width", 0.5)
    J1 = Quadrilateral.clipped_disk("y", a)
    J2 = Quadrilateral.clipped_disk("x", a)
    r = two_quadrilateral_experiment(J1, J2, samples=samples, grid_n=grid)
    out = Outcome()
    keys = ["boundary_crossings", "v1", "v1_coarse", "v1_stability", "v1_dual", "modulus1",
            "v2", "v2_coarse", "v2_stability", "v2_dual", "modulus2", "i", "v1v2", "abs_diff"]
    out.tables["two_quadrilaterals"] = (["grid", "samples"] + keys, [dict({"grid": grid, "samples": samples},
                                                             **{k: r[k] for k in keys})])
    out.checks.append(Check("i_equals_v1v2", r["abs_diff"] <= 1e-2, r["abs_diff"], 1e-2))
    stab = max(r["v1_stability"], r["v2_stability"])
    out.checks.append(Check("heights_stable_under_grid_doubling", stab <= 1e-3, stab, 1e-3))
    out.checks.append(Check("i_positive", r["i"] > 0, r["i"]))
    out.summary = {"achieved": {"abs_i_minus_v1v2": r["abs_diff"], "height_stability": stab}}
    lams = r["laminations"]

    def fig(p):
        import matplotlib.pyplot as plt

        fig_, ax = plt.subplots(figsize=(5, 5))
        plotting._outline(ax, PlanarDomain.unit_disk())
        for lam, col in zip(lams, ("tab:blue", "tab:orange")):
            for c in lam.chords():
                ax.plot([c[0].real, c[1].real], [c[0].imag, c[1].imag], color=col, lw=0.5)
        ax.set_title("straightened leaves of the two quadrilaterals", fontsize=9)
        return plotting._save(fig_, p)

    out.figures.append(("chords.svg", fig))
    return out


# ---------------------------------------------------------------------------
# minsky-suite
# ---------------------------------------------------------------------------


def _random_domain(rng):
    kind = int(rng.integers(0, 3))
    w, h = float(rng.uniform(0.6, 1.6)), float(rng.uniform(0.6, 1.6))
    if kind == 0:
        return PlanarDomain.rectangle(0.0, 0.0, w, h), "rectangle"
    a, b = float(rng.uniform(0.3, 0.7)) * w, float(rng.uniform(0.3, 0.7)) * h
    if kind == 1:  # L shape: the top-right corner removed
        v = [0, w, complex(w, b), complex(a, b), complex(a, h), complex(0, h)]
        return PlanarDomain("rectilinear", v), "L"
    # T shape: a stem under a bar
    s0, s1 = float(rng.uniform(0.15, 0.4)) * w, float(rng.uniform(0.6, 0.85)) * w
    v = [complex(s0, 0), complex(s1, 0), complex(s1, b), complex(w, b), complex(w, h), complex(0, h),
         complex(0, b), complex(s0, b)]
    return PlanarDomain("rectilinear", v), "T"


def _random_qd(rng, dom):
    def c():
        r, t = float(rng.uniform(0.5, 2.0)), float(rng.uniform(-math.pi, math.pi))
        return complex(r * math.cos(t), r * math.sin(t))

    if rng.uniform() < 0.5:
        k = c()
        return QuadDiff(f"(mul (const {k.real!r} {k.imag!r}) (dz2))", dom)
    a, b = c(), c()
    return QuadDiff(f"(mul (add (mul (const {a.real!r} {a.imag!r}) (z)) (const {b.real!r} {b.imag!r})) (dz2))",
                    dom)


def run_minsky_suite(cfg):
    from .lamination import minsky_verify

    rng = np.random.default_rng(cfg.seed)
    pairs = cfg.get("pairs", 20)
    samples = cfg.get("samples", 120)
    rows = []
    sq = PlanarDomain.unit_square()
    cases = [("equality", sq, "square", QuadDiff("(dz2)"), QuadDiff("(mul (const -1 0) (dz2))"))]
    for k in range(pairs):
        dom, kind = _random_domain(rng)
        cases.append((f"random-{k}", dom, kind, _random_qd(rng, dom), _random_qd(rng, dom)))
    for name, dom, kind, phi, psi in cases:
        r = minsky_verify(phi, psi, samples=samples, tol=cfg.tol, budget=cfg.budget)
        rows.append({"pair": name, "domain": kind, "vertices": json.dumps(dom.to_json()["vertices"]),
                     "phi": phi.sexpr(), "psi": psi.sexpr(), "i": r.i, "i_error": r.i_error,
                     "norm_phi": r.norm_phi, "norm_psi": r.norm_psi, "bound": r.bound,
                     "combined_error": r.combined_error, "slack": r.slack, "holds": r.holds})
    out = Outcome()
    out.tables["pairs"] = (["pair", "domain", "vertices", "phi", "psi", "i", "i_error", "norm_phi", "norm_psi",
                            "bound", "combined_error", "slack", "holds"], rows)
    bad = [r["pair"] for r in rows if not r["holds"]]
    out.checks.append(Check("inequality_holds_on_all_pairs", not bad, len(rows) - len(bad), len(rows),
                            f"failing pairs: {bad}" if bad else ""))
    eq = rows[0]
    d1 = abs(eq["i"] - 1.0)
    d2 = abs(eq["i"] ** 2 - eq["bound"])
    out.checks.append(Check("equality_case_i", d1 <= 1e-3, d1, 1e-3))
    out.checks.append(Check("equality_case_bound", d2 <= 2e-3, d2, 2e-3))
    out.summary = {"achieved": {"equality_abs_i_minus_1": d1, "equality_abs_i2_minus_bound": d2,
                                "min_slack": min(r["slack"] for r in rows),
                                "max_combined_error": max(r["combined_error"] for r in rows)}}
    out.figures.append(("minsky.svg", lambda p: plotting.series_svg(
        p, list(range(len(rows))), [("i^2", [r["i"] ** 2 for r in rows]), ("||phi|| ||psi||", [r["bound"] for r in rows])],
        xlabel="pair", title="Minsky inequality")))
    return out


# ---------------------------------------------------------------------------
# continuity
# ---------------------------------------------------------------------------


def run_continuity(cfg):
    from .lamination import continuity_experiment, sampled_lamination

    samples = cfg.get("samples", 2000)
    n_max = cfg.get("n_max", 16)
    psi = QuadDiff("(mul (const -1 0) (dz2))")
    limit = QuadDiff("(dz2)")
    fams = {
        "tilt": ([QuadDiff(f"(mul (exp (const 0 {1.0 / n!r})) (dz2))") for n in range(1, n_max + 1)],
                 lambda n: math.cos(1.0 / (2 * n))),
        "scale": ([QuadDiff(f"(mul (const {1.0 + 1.0 / n!r} 0) (dz2))") for n in range(1, n_max + 1)],
                  lambda n: math.sqrt(1.0 + 1.0 / n)),
    }
    out = Outcome()
    achieved = {}
    rows_all = []
    for fam, (seq, oracle) in fams.items():
        res = continuity_experiment(seq, limit, psi, samples=samples, tol=cfg.tol, budget=cfg.budget)
        rows = []
        for r in res["rows"]:
            rows.append(dict(r, family=fam, oracle=oracle(r["n"]), oracle_error=abs(r["i"] - oracle(r["n"]))))
        rows_all += rows
        d = [r["abs_diff"] for r in rows]
        out.checks.append(Check(f"{fam}_decreasing", all(b < a for a, b in zip(d, d[1:])), d))
        out.checks.append(Check(f"{fam}_small_at_end", d[-1] <= 1e-2, d[-1], 1e-2))
        achieved[f"{fam}_final_abs_diff"] = d[-1]
        achieved[f"{fam}_max_oracle_error"] = max(r["oracle_error"] for r in rows)
        achieved[f"{fam}_limit_i"] = res["limit_i"]
    sc = [r for r in rows_all if r["family"] == "scale"]
    worst = max(r["oracle_error"] for r in sc)
    out.checks.append(Check("scale_oracle", worst <= 1e-3, worst, 1e-3, "i_n vs sqrt(1 + 1/n)"))
    out.tables["continuity"] = (["family", "n", "distance", "i", "i_error", "abs_diff", "oracle", "oracle_error"],
                                rows_all)
    out.summary = {"achieved": achieved}
    for fam in fams:
        rs = [r for r in rows_all if r["family"] == fam]
        out.figures.append((f"continuity_{fam}.svg", lambda p, rs=rs, fam=fam: plotting.series_svg(
            p, [r["n"] for r in rs], [("|i_n - i|", [r["abs_diff"] for r in rs]),
                                      ("||phi_n - phi||", [r["distance"] for r in rs])],
            logy=True, title=f"continuity ({fam})")))
    return out


# ---------------------------------------------------------------------------
# dirichlet
# ---------------------------------------------------------------------------


def run_dirichlet(cfg):
    from .foliation import PushforwardFoliation, competitor_catalog, standard_square_foliation

    count = cfg.get("count", 10)
    rect = (0.0, 0.0, 1.0, 1.0)
    base = standard_square_foliation(rect)
    norm = l1_norm(QuadDiff("(dz2)"), tol=cfg.tol)
    rows = []
    for k, d in enumerate(competitor_catalog(rect, count, cfg.seed)):
        D, err = PushforwardFoliation(base, d).dirichlet_integral(tol=min(cfg.tol, 1e-9), with_error=True)
        rows.append({"index": k, "kind": d.kind, "params": json.dumps(d.params, sort_keys=True),
                     "min_jacobian": d.min_jacobian(rect), "D": D, "D_error": err, "excess": D - norm})
    out = Outcome()
    out.tables["competitors"] = (["index", "kind", "params", "min_jacobian", "D", "D_error", "excess"], rows)
    low = min(r["D"] for r in rows)
    out.checks.append(Check("competitors_not_below_minimum", low >= 1 - 1e-6, low, 1 - 1e-6))
    ident = [r for r in rows if r["kind"] == "identity"]
    dev = abs(ident[0]["D"] - 1.0) if ident else float("inf")
    out.checks.append(Check("identity_equals_one", dev <= 1e-6, dev, 1e-6))
    out.checks.append(Check("norm_below_dirichlet", all(norm <= r["D"] + 1e-9 for r in rows), norm))
    out.summary = {"achieved": {"min_D": low, "identity_deviation": dev, "l1_norm_dz2": norm,
                                "max_quadrature_error": max(r["D_error"] for r in rows)}}

    def fig(p):
        import matplotlib.pyplot as plt
        from .foliation import competitor_catalog as cat

        fig_, axes = plt.subplots(2, 5, figsize=(10, 4.4))
        for ax, d in zip(axes.ravel(), cat(rect, count, cfg.seed)):
            for y in np.linspace(0.05, 0.95, 10):
                x = np.linspace(0, 1, 100)
                w, _ = d.apply(x + 1j * y, rect)
                ax.plot(w.real, w.imag, color="tab:blue", lw=0.6)
            ax.set_aspect("equal")
            ax.set_xticks([])
            ax.set_yticks([])
            ax.set_title(d.kind, fontsize=7)
        return plotting._save(fig_, p)

    out.figures.append(("competitors.svg", fig))
    return out


# ---------------------------------------------------------------------------
# confinement
# ---------------------------------------------------------------------------


def run_confinement(cfg):
    from .lamination import confinement_table

    D = PlanarDomain.unit_disk()
    catalog = cfg.get("catalog", ["(dz2)", "(mul (const 0 1) (dz2))", "(mul (z) (dz2))",
                                  "(mul (add (mul (z) (z)) (const 0.25 0)) (dz2))", "(mul (exp (z)) (dz2))"])
    radii = cfg.get("radii", [0.25, 0.5, 0.75])
    grid = cfg.get("grid", 9)
    qds = [QuadDiff(s, D) for s in catalog]
    rows = []
    for r in radii:
        rows += confinement_table(qds, r=r, grid=grid, budget=cfg.budget)
    out = Outcome()
    out.tables["confinement"] = (["phi", "r", "leaves", "skipped", "R", "confined"], rows)
    bad = [(row["phi"], row["r"]) for row in rows if not row["confined"]]
    out.checks.append(Check("all_confined", not bad, len(rows) - len(bad), len(rows), str(bad) if bad else ""))
    for s in catalog:
        Rs = [row["R"] for row in rows if row["phi"] == QuadDiff(s, D).sexpr()]
        ok = all(b >= a for a, b in zip(Rs, Rs[1:]))
        out.checks.append(Check(f"R_monotone_in_r[{s}]", ok, Rs))
    out.summary = {"achieved": {"max_R": max(row["R"] for row in rows)}}
    out.figures.append(("confinement.svg", lambda p: plotting.series_svg(
        p, radii, [(row_phi, [row["R"] for row in rows if row["phi"] == row_phi])
                   for row_phi in dict.fromkeys(row["phi"] for row in rows)],
        xlabel="r", ylabel="R", title="confinement radius")))
    return out


RUNNERS = {
    "example-4-2": run_qn_pullbacks,
    "example-6-1": run_punctured_square,
    "thm-6-2": run_two_quadrilaterals,
    "minsky-suite": run_minsky_suite,
    "continuity": run_continuity,
    "dirichlet": run_dirichlet,
    "confinement": run_confinement,
}


def run(cfg):
    """Run one experiment; write its CSV tables, SVG figures and summary.json into cfg.out."""
    os.makedirs(cfg.out, exist_ok=True)
    t0 = time.perf_counter()
    outcome = RUNNERS[cfg.experiment](cfg)
    elapsed = time.perf_counter() - t0
    files = []
    for name, (header, rows) in outcome.tables.items():
        path = os.path.join(cfg.out, f"{name}.csv")
        write_csv(path, header, rows)
        files.append(os.path.basename(path))
    for name, fig in outcome.figures:
        path = os.path.join(cfg.out, name)
        fig(path)
        files.append(name)
    passed = all(c.passed for c in outcome.checks)
    summary = {
        "experiment": cfg.experiment,
        "config": {k: v for k, v in asdict(cfg).items() if k != "out"},
        "passed": passed,
        "checks": [asdict(c) for c in outcome.checks],
        "files": files,
        "runtime_seconds": round(elapsed, 3),
    }
    summary.update(outcome.summary)
    summary = _jsonable(summary)
    with open(os.path.join(cfg.out, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary
