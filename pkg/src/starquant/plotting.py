"""PNG renderings of the CLI's tabular outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_wigner(f, path, title=None):
    """Heatmap of Re f(q, p) with a symmetric colour scale."""
    s = f.spec
    v = f.values.real
    lim = float(np.max(np.abs(v))) or 1.0
    fig, ax = plt.subplots(figsize=(5, 4.2))
    im = ax.imshow(
        v.T,
        origin="lower",
        extent=(s.q[0], s.q[-1], s.p[0], s.p[-1]),
        cmap="RdBu_r",
        vmin=-lim,
        vmax=lim,
        aspect="auto",
    )
    fig.colorbar(im, ax=ax)
    ax.set_xlabel("q")
    ax.set_ylabel("p")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_marginal(x, values, path, reference=None, axis="q", title=None):
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(x, np.real(values), label="grid")
    if reference is not None:
        ax.plot(x, reference, "--", label="exact")
        ax.legend()
    ax.set_xlabel(axis)
    ax.set_ylabel("density")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_evolution(H, values, path, reference=None, title=None):
    """Real and imaginary parts of Exp(Ht) against H."""
    fig, ax = plt.subplots(figsize=(5, 3.5))
    ax.plot(H, values.real, label="Re")
    ax.plot(H, values.imag, label="Im")
    if reference is not None:
        ax.plot(H, reference.real, "k:", lw=1, label="closed form")
        ax.plot(H, reference.imag, "k:", lw=1)
    ax.set_xlabel("H")
    ax.legend()
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
