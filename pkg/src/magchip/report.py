"""Matplotlib figure rendering for the batch report path.

Figures are written next to the delimited outputs when a directive names a
``figure`` path. Rendering is headless (Agg) and deterministic.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_SAVEFIG = dict(dpi=150, metadata={"Software": "magchip"})


def heatmap_figure(path, x, y, values, title, cbar_label):
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.pcolormesh(
        np.asarray(x) * 1e3, np.asarray(y) * 1e3, values, shading="auto", cmap="viridis"
    )
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("y (mm)")
    ax.set_title(title)
    ax.set_aspect("equal")
    fig.colorbar(im, ax=ax, label=cbar_label)
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def axis_profile_figure(path, z, bmag, title):
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(np.asarray(z) * 1e6, np.asarray(bmag) * 1e6)
    ax.set_xlabel("z (um)")
    ax.set_ylabel("|B| (uT)")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def trap_map_figure(path, traps, extent, title):
    fig, ax = plt.subplots(figsize=(6, 5))
    for t in traps:
        ax.plot(t.position[0] * 1e3, t.position[1] * 1e3, "r+", markersize=12)
        ax.annotate(
            f"z={t.position[2] * 1e6:.0f}um",
            (t.position[0] * 1e3, t.position[1] * 1e3),
            textcoords="offset points",
            xytext=(6, 6),
            fontsize=8,
        )
    ax.set_xlim(-extent[0] / 2 * 1e3, extent[0] / 2 * 1e3)
    ax.set_ylim(-extent[1] / 2 * 1e3, extent[1] / 2 * 1e3)
    ax.set_xlabel("x (mm)")
    ax.set_ylabel("y (mm)")
    ax.set_title(title)
    ax.set_aspect("equal")
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def path_figure(path, positions, title, second=None, labels=("trap", "atom")):
    fig, ax = plt.subplots(figsize=(6, 5))
    p = np.asarray(positions)
    ax.plot(p[:, 0] * 1e6, p[:, 1] * 1e6, "o-", label=labels[0], markersize=3)
    if second is not None:
        q = np.asarray(second)
        ax.plot(q[:, 0] * 1e6, q[:, 1] * 1e6, "x--", label=labels[1], markersize=3)
        ax.legend()
    ax.set_xlabel("x (um)")
    ax.set_ylabel("y (um)")
    ax.set_title(title)
    ax.set_aspect("equal")
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
