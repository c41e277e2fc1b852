"""Panel renderers for the lattice-loss simulator's CSV/JSON output files.

Each recipe names a panel and its input files; the renderers validate the
documented schemas (reporting the offending column on mismatch) and produce
deterministic images: fixed figure geometry, fixed fonts, no timestamps, so
re-rendering the same inputs is byte-identical.
"""

from __future__ import annotations

import json
import math
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update({
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "figure.dpi": 150,
    "savefig.dpi": 150,
})

E_MINUS_2 = math.exp(-2)


class SchemaError(ValueError):
    """An input file does not match its documented schema."""


def read_csv(path: str):
    meta, columns, rows = {}, None, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if ":" in body:
                    k, v = body.split(":", 1)
                    meta[k.strip()] = v.strip()
                continue
            if columns is None:
                columns = line.split(",")
                continue
            rows.append([float(x) for x in line.split(",")])
    if columns is None or not rows:
        raise SchemaError(f"{path}: empty or headerless data file")
    return meta, columns, np.asarray(rows)


def column(path, meta_cols_rows, name):
    _meta, cols, rows = meta_cols_rows
    if name not in cols:
        raise SchemaError(f"{path}: missing column {name!r}")
    return rows[:, cols.index(name)]


def site_columns(path, meta_cols_rows):
    _meta, cols, _rows = meta_cols_rows
    sites = [c for c in cols if c.startswith("n_") and c[2:].isdigit()]
    if not sites:
        raise SchemaError(f"{path}: missing site-density columns n_0..")
    return sorted(sites, key=lambda c: int(c[2:]))


def read_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def need(doc: dict, path: str, key: str):
    if key not in doc:
        raise SchemaError(f"{path}: missing key {key!r}")
    return doc[key]


def _save(fig, out_path: str):
    kwargs = {}
    if out_path.lower().endswith(".png"):
        kwargs["metadata"] = {"Software": None}
    fig.savefig(out_path, **kwargs)
    plt.close(fig)


# ------------------------------------------------------------------- panels


def render_fig1a(inputs, out_path):
    """Density decay: ensemble points with the closed-form overlay."""
    kmc_path = inputs["kmc"]
    decay_path = inputs["decay"]
    kmc = read_csv(kmc_path)
    dec = read_csv(decay_path)
    t_k = column(kmc_path, kmc, "t")
    p_k = column(kmc_path, kmc, "p_mean")
    err = column(kmc_path, kmc, "p_stderr")
    t_a = column(decay_path, dec, "t")
    p_a = column(decay_path, dec, "p_analytic")

    fig, ax = plt.subplots(figsize=(3.4, 2.6), constrained_layout=True)
    ax.errorbar(t_k, p_k, yerr=3 * err, fmt="o", ms=3, lw=0.8, color="#1f77b4",
                label="stochastic ensemble")
    ax.plot(t_a, p_a, "-", color="#d62728", lw=1.2, label="closed form")
    ax.axhline(E_MINUS_2, color="0.4", lw=0.8, ls=":", label=r"$e^{-2}$")
    ax.set_xlabel(r"$t\ [1/\gamma]$")
    ax.set_ylabel(r"density $p(t)$")
    ax.set_ylim(0, 1.02)
    ax.legend(frameon=False, fontsize=8)
    _save(fig, out_path)


def render_fig1c(inputs, out_path):
    """Stationary-state census: species fractions and complex sizes."""
    path = inputs["stats"]
    doc = read_json(path)
    frac = need(doc, path, "species_fractions")
    sizes = need(doc, path, "size_distribution")
    fig, (ax1, ax2) = plt.subplots(
        1, 2, figsize=(4.6, 2.4), constrained_layout=True
    )
    labels = ["free", "type_one", "type_two"]
    for key in labels:
        if key not in frac:
            raise SchemaError(f"{path}: missing species_fractions[{key!r}]")
    ax1.bar(["single", "type I", "type II"], [frac[k] for k in labels],
            color=["#1f77b4", "#2ca02c", "#d62728"])
    ax1.set_ylabel("probability")
    ks = sorted(sizes, key=int)
    ax2.bar([int(k) for k in ks], [sizes[k] for k in ks], color="#7f7f7f")
    ax2.set_xlabel("bosons per complex")
    ax2.set_ylabel("probability")
    _save(fig, out_path)


def _draw_bands(ax, path, dashed=False, color_cycle=("#1f77b4", "#2ca02c", "#d62728",
                                                     "#9467bd", "#8c564b")):
    doc = read_json(path)
    q = np.asarray(need(doc, path, "q_grid"))
    bands = need(doc, path, "bands")
    style = "--" if dashed else "-"
    for b, band in enumerate(bands):
        ax.plot(q, band, style, lw=1.0, color=color_cycle[b % len(color_cycle)])


def render_fig2a(inputs, out_path):
    """Two-boson dispersions with and without nearest-neighbour interaction."""
    fig, axes = plt.subplots(1, 2, figsize=(5.0, 2.5), constrained_layout=True)
    for ax, tag in zip(axes, ("r3", "r4")):
        _draw_bands(ax, inputs[f"{tag}_v0"])
        _draw_bands(ax, inputs[f"{tag}_v1"], dashed=True)
        ax.set_xlabel(r"$q_K$")
        ax.set_xticks([0, math.pi, 2 * math.pi])
        ax.set_xticklabels(["0", r"$\pi$", r"$2\pi$"])
    axes[0].set_ylabel(r"$\varepsilon\ [J]$")
    _save(fig, out_path)


def render_heatmap(inputs, out_path):
    """Site-resolved density evolution: time vs site, density as color."""
    path = inputs["evolution"]
    data = read_csv(path)
    t = column(path, data, "t")
    cols = site_columns(path, data)
    _meta, all_cols, rows = data
    dens = rows[:, [all_cols.index(c) for c in cols]]
    fig, ax = plt.subplots(figsize=(3.4, 2.6), constrained_layout=True)
    im = ax.imshow(
        dens.T, origin="lower", aspect="auto",
        extent=(t[0], t[-1], -0.5, len(cols) - 0.5),
        cmap="inferno", vmin=0.0,
    )
    ax.set_xlabel(r"$t\ [1/J]$")
    ax.set_ylabel("site")
    fig.colorbar(im, ax=ax, label=r"$\langle n_j\rangle$")
    _save(fig, out_path)


def render_fig3b(inputs, out_path):
    """Type II complex dispersion panel."""
    fig, ax = plt.subplots(figsize=(3.0, 2.5), constrained_layout=True)
    _draw_bands(ax, inputs["bands"])
    ax.set_xlabel(r"$q_K$")
    ax.set_ylabel(r"$\varepsilon\ [J]$")
    ax.set_xticks([0, math.pi, 2 * math.pi])
    ax.set_xticklabels(["0", r"$\pi$", r"$2\pi$"])
    _save(fig, out_path)


PANELS = {
    "fig1a": render_fig1a,
    "fig1c": render_fig1c,
    "fig2a": render_fig2a,
    "fig2b": render_heatmap,
    "fig3a": render_heatmap,
    "fig3b": render_fig3b,
    "fig4a": render_heatmap,
}


def render_recipe(recipe_path: str, out_path: str) -> None:
    """Load a JSON recipe, resolve its inputs, render its panel."""
    with open(recipe_path) as fh:
        recipe = json.load(fh)
    panel = recipe.get("panel")
    if panel not in PANELS:
        raise SchemaError(f"{recipe_path}: unknown panel {panel!r}")
    inputs = recipe.get("inputs")
    if not isinstance(inputs, dict) or not inputs:
        raise SchemaError(f"{recipe_path}: missing inputs mapping")
    base = os.path.dirname(os.path.abspath(recipe_path))
    resolved = {
        key: p if os.path.isabs(p) else os.path.join(base, p)
        for key, p in inputs.items()
    }
    for key, p in resolved.items():
        if not os.path.exists(p):
            raise SchemaError(f"{recipe_path}: input {key!r} not found at {p}")
    PANELS[panel](resolved, out_path)
