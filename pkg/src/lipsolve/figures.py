"""Figure rendering for the report paths.

Each CSV artifact emitted by the CLI gets a companion PNG: convergence
traces, the e(f*) separation histogram, and before/after image panels.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def render_trace(path, trace, title=None):
    """Objective value (or duality gap) against the iteration count."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.semilogy(trace.k, np.maximum(trace.eta, 1e-300), lw=1.5)
    ax.set_xlabel("iteration")
    ax.set_ylabel("objective value")
    if title:
        ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_histogram(path, counts, edges, eps_sq, title=None):
    """Separation histogram of e(f*) with the eps^2 marker line."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge",
           edgecolor="black", linewidth=0.3)
    ax.axvline(eps_sq, color="red", ls="--", label=r"$\epsilon^2$")
    ax.set_xlabel("per-patch residual separation")
    ax.set_ylabel("patch count")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_image_panel(path, images, labels):
    """Side-by-side grayscale panels (e.g. clean / noisy / recovered)."""
    fig, axes = plt.subplots(1, len(images), figsize=(3 * len(images), 3.2))
    if len(images) == 1:
        axes = [axes]
    for ax, img, label in zip(axes, images, labels):
        ax.imshow(np.clip(img.pixels, 0.0, 1.0), cmap="gray", vmin=0.0,
                  vmax=1.0, interpolation="nearest")
        ax.set_title(label, fontsize=9)
        ax.axis("off")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_bench(path, results, title=None):
    """Bar chart of mean iterations-to-threshold per solver."""
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    names = list(results)
    ax.bar(names, [results[s] for s in names])
    ax.set_ylabel("mean iterations to threshold")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
