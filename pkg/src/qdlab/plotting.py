"""Static SVG figures: leaves, quad covers, potentials and convergence tables."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps the SVG bytes identical across runs
_SVG_META = {"Date": None, "Creator": "qdlab"}
plt.rcParams["svg.hashsalt"] = "qdlab"
plt.rcParams["svg.fonttype"] = "none"


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)
    return path


def _outline(ax, domain):
    if domain.kind == "disk":
        t = np.linspace(0, 2 * np.pi, 400)
        ax.plot(np.cos(t), np.sin(t), color="k", lw=1)
    else:
        v = list(domain.vertices) + [domain.vertices[0]]
        ax.plot([p.real for p in v], [p.imag for p in v], color="k", lw=1)
    if domain.punctures:
        p = np.array(domain.punctures)
        ax.plot(p.real, p.imag, "o", ms=2, color="crimson")
    ax.set_aspect("equal")


def leaves_svg(path, domain, families, title=""):
    """``families``: list of (label, colour, trajectories)."""
    fig, ax = plt.subplots(figsize=(5, 5))
    _outline(ax, domain)
    for label, colour, trajs in families:
        first = True
        for tr in trajs:
            if not hasattr(tr, "points"):
                continue
            ax.plot(tr.points.real, tr.points.imag, color=colour, lw=0.6,
                    label=label if first else None)
            first = False
    if families:
        ax.legend(loc="upper right", fontsize=7)
    ax.set_title(title, fontsize=9)
    return _save(fig, path)


def quad_cover_svg(path, cover, title="quadrilateral cover"):
    """Crossing matrix in sorted leaf order with the cover blocks outlined."""
    from .lamination import crossing_matrix

    mu, nu = cover.mu, cover.nu
    fig, ax = plt.subplots(figsize=(5, 5))
    if cover.mu_order and cover.nu_order:
        M = crossing_matrix(mu.endpoints()[cover.mu_order], nu.endpoints()[cover.nu_order],
                            max(mu.tol, nu.tol))
        ax.imshow(M, cmap="Greys", origin="lower", interpolation="nearest", aspect="auto")
        for q in cover.quads:
            (i0, i1), (j0, j1) = q.mu_block, q.nu_block
            ax.add_patch(matplotlib.patches.Rectangle((j0 - 0.5, i0 - 0.5), j1 - j0, i1 - i0,
                                                      fill=False, color="tab:orange", lw=0.8))
    ax.set_xlabel("nu leaves (sorted)")
    ax.set_ylabel("mu leaves (sorted)")
    ax.set_title(f"{title}: {len(cover.quads)} blocks", fontsize=9)
    return _save(fig, path)


def potential_svg(path, mesh, values, title=""):
    fig, ax = plt.subplots(figsize=(5, 5))
    tri = matplotlib.tri.Triangulation(mesh.points.real, mesh.points.imag, mesh.tris)
    cs = ax.tricontourf(tri, values, levels=20, cmap="viridis")
    fig.colorbar(cs, ax=ax, shrink=0.8)
    ax.set_aspect("equal")
    ax.set_title(title, fontsize=9)
    return _save(fig, path)


def series_svg(path, x, series, xlabel="n", ylabel="", logy=False, title=""):
    """``series``: list of (label, values)."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for label, y in series:
        ax.plot(x, y, "o-", ms=3, label=label)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(fontsize=7)
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    return _save(fig, path)


def trajectory_svg(path, traj, domain=None, title=""):
    """A single traced leaf (the per-trajectory SVG export)."""
    fig, ax = plt.subplots(figsize=(4, 4))
    if domain is not None:
        _outline(ax, domain)
    ax.plot(traj.points.real, traj.points.imag, color="tab:blue", lw=1)
    ax.plot([traj.z0.real], [traj.z0.imag], "o", ms=3, color="tab:red")
    ax.set_aspect("equal")
    ax.set_title(title or traj.classification, fontsize=9)
    return _save(fig, path)
