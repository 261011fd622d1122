"""Deterministic figure rendering from validated CSV tables.

All statistics live upstream; this module only reshapes table cells into
heatmaps, slices and fit overlays.  Output bytes are reproducible: the Agg
backend, a pinned style and stripped volatile metadata (dates, hash salts)
make repeated renders identical.
"""

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schema import SchemaError, load_table

LN2 = math.log(2.0)

_STYLE = {
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.titlesize": 10,
    "svg.hashsalt": "sparseclifford-figures",
    "figure.autolayout": True,
}


def monna_position(x, n_sites):
    """Binary digit reversal of a site index; the treelike axis ordering.

    Local reimplementation so the plot layer carries no simulation
    dependency; property-tested against the simulator's documented values.
    """
    if n_sites < 2 or n_sites & (n_sites - 1):
        raise ValueError(f"n_sites must be a power of two, got {n_sites}")
    if not 0 <= x < n_sites:
        raise ValueError(f"site {x} out of range")
    out = 0
    for _ in range(n_sites.bit_length() - 1):
        out = (out << 1) | (x & 1)
        x >>= 1
    return out


def save_figure(fig, out_path):
    """Write png or svg with volatile metadata removed, then close."""
    if out_path.endswith(".svg"):
        fig.savefig(out_path, metadata={"Date": None})
    elif out_path.endswith(".png"):
        fig.savefig(out_path, metadata={"Software": None})
    else:
        raise ValueError(f"unsupported output format: {out_path} (use .png or .svg)")
    plt.close(fig)


def _pivot(frame, index, columns, values):
    table = frame.pivot_table(index=index, columns=columns, values=values,
                              aggfunc="first")
    return table.sort_index().sort_index(axis=1)


def _load_overlay(path):
    return load_table(path, "scaling") if path else None


def render_entropy(frame, options):
    """Entropy heatmap over (region size, time), optionally a fixed-t slice."""
    geometry = options.get("geometry")
    if geometry:
        frame = frame[frame["geometry"] == geometry]
        if frame.empty:
            raise SchemaError(f"no rows with geometry={geometry!r}")
    slice_t = options.get("slice_t")
    if slice_t is not None:
        fig, ax = plt.subplots(figsize=(4.2, 3.0))
        cut = frame[frame["t"] == slice_t]
        if cut.empty:
            raise SchemaError(f"no rows at t={slice_t}")
        for geo, group in cut.groupby("geometry"):
            group = group.sort_values("size")
            ax.errorbar(group["size"], group["entropy_mean_nats"] / LN2,
                        yerr=group["entropy_sem"] / LN2, label=geo, lw=1.2)
        ax.set_xlabel("region size |A|")
        ax.set_ylabel("S_A (bits)")
        ax.set_title(f"region entropy at t = {slice_t}")
        ax.legend(frameon=False)
        return fig
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    table = _pivot(frame, "size", "t", "entropy_mean_nats")
    mesh = ax.pcolormesh(table.columns, table.index, table.values / LN2,
                         shading="nearest", cmap="magma")
    fig.colorbar(mesh, ax=ax, label="S_A (bits)")
    ax.set_xlabel("t")
    ax.set_ylabel("region size |A|")
    ax.set_title(f"entropy growth ({frame['geometry'].iloc[0]})")
    return fig


def render_tripartite(frame, options):
    """TMI colormap over (s, t) with the one-bit negativity contour."""
    overlay = _load_overlay(options.get("overlay"))
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    if frame["s"].nunique() > 1:
        table = _pivot(frame, "s", "t", "tmi_mean_nats")
        n = frame["N"].iloc[0]
        mesh = ax.pcolormesh(table.columns, table.index,
                             table.values / (n * LN2),
                             shading="nearest", cmap="Blues_r")
        fig.colorbar(mesh, ax=ax, label="I(A:B:C) / N ln2")
        ax.contour(table.columns, table.index, table.values, levels=[-LN2],
                   colors="red", linewidths=1.0)
        ax.set_ylabel("s")
    else:
        group = frame.sort_values("t")
        ax.errorbar(group["t"], group["tmi_mean_nats"] / LN2,
                    yerr=group["tmi_sem"] / LN2, lw=1.2)
        ax.axhline(-1.0, color="red", lw=0.8, ls="--")
        ax.set_ylabel("I(A:B:C) (bits)")
    if overlay is not None:
        marks = overlay[overlay["observable"] == "t0"]
        if not marks.empty:
            ax.plot(marks["value"], marks["s"], "k.", ms=5, label="t0")
            ax.legend(frameon=False)
    ax.set_xlabel("t")
    ax.set_title(f"tripartite mutual information ({frame['geometry'].iloc[0]})")
    return fig


def render_lightcone(frame, options):
    """Teleportation-fidelity heatmap over (site, t), optionally Monna-ordered."""
    overlay = _load_overlay(options.get("overlay"))
    reorder = options.get("reorder")
    n = int(frame["N"].iloc[0])
    frame = frame.copy()
    if reorder == "monna":
        frame["axis"] = [monna_position(int(j), n) for j in frame["j"]]
        axis_label = "Monna-reordered site M(j)"
    elif reorder in (None, "", "none"):
        frame["axis"] = frame["j"]
        axis_label = "output site j"
    else:
        raise SchemaError(f"unknown reordering {reorder!r}")
    fig, ax = plt.subplots(figsize=(4.6, 3.2))
    table = _pivot(frame, "axis", "t", "fidelity_mean_nats")
    mesh = ax.pcolormesh(table.columns, table.index, table.values / LN2,
                         shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label="I(i;j|m) (bits)")
    if overlay is not None and reorder != "monna":
        guides = overlay[overlay["observable"] == "v_s"]
        for _, row in guides.iterrows():
            ts = np.asarray(sorted(frame["t"].unique()), dtype=float)
            ax.plot(ts, row["value"] * ts, "k--", lw=1.0)
            ax.plot(ts, -row["value"] * ts, "k--", lw=1.0)
        ax.set_ylim(frame["axis"].min(), frame["axis"].max())
    ax.set_xlabel("t")
    ax.set_ylabel(axis_label)
    ax.set_title(f"teleportation lightcone (s = {frame['s'].iloc[0]:g})")
    return fig


def render_scaling(frame, options):
    """Threshold times against system size with the fitted model curve."""
    fig, ax = plt.subplots(figsize=(4.2, 3.2))
    for observable, group in frame.groupby("observable"):
        group = group.sort_values("N")
        ax.errorbar(group["N"], group["value"], yerr=group["value_err"],
                    fmt="o", ms=4, label=observable)
        model = group["model"].iloc[0]
        a = group["fit_param_1"].iloc[0]
        b = group["fit_param_2"].iloc[0]
        sizes = np.geomspace(group["N"].min(), group["N"].max(), 64)
        if model == "linear-in-N":
            fit = a * sizes + b
        elif model == "log-in-N":
            fit = a * np.log(sizes) + b
        elif model == "power-law":
            fit = np.exp(b) * sizes ** a
        else:
            fit = None
        if fit is not None:
            ax.plot(sizes, fit, "-", lw=1.0)
    ax.set_xscale("log", base=2)
    ax.set_yscale("log")
    ax.set_xlabel("N")
    ax.set_ylabel("timescale (dt)")
    ax.legend(frameon=False)
    ax.set_title("finite-size scaling")
    return fig


RENDERERS = {
    "entropy": ("entropy-scan", render_entropy),
    "tripartite": ("tripartite", render_tripartite),
    "lightcone": ("teleport", render_lightcone),
    "scaling": ("scaling", render_scaling),
}


def render(kind, in_path, out_path, **options):
    """Validate the CSV for ``kind``, draw it, and write the image."""
    if kind not in RENDERERS:
        raise SchemaError(f"unknown figure kind {kind!r}; "
                          f"expected one of {sorted(RENDERERS)}")
    schema_kind, fn = RENDERERS[kind]
    frame = load_table(in_path, schema_kind)
    with plt.rc_context(_STYLE):
        fig = fn(frame, options)
        save_figure(fig, out_path)
    return out_path
