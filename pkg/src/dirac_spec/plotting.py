"""Optional figures written next to the CSV output.

matplotlib is imported lazily with the Agg backend so the rest of the
package never depends on a display.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _entries(ax, x, values, label, style="-"):
    r = values.shape[-1]
    for i in range(r):
        for j in range(r):
            tag = f"{label}[{i},{j}]" if r > 1 else label
            ax[0].plot(x, values[:, i, j].real, style, lw=1.2, label=tag)
            ax[1].plot(x, values[:, i, j].imag, style, lw=1.2, label=tag)


def grid_figure(path, x, values, title="", reference=None, ref_x=None):
    """Real and imaginary parts of every entry, optionally over a reference grid."""
    plt = _pyplot()
    fig, ax = plt.subplots(2, 1, figsize=(6.4, 5.2), sharex=True)
    if reference is not None:
        _entries(ax, x if ref_x is None else ref_x, reference, "ref", "k--")
    _entries(ax, x, values, "val")
    ax[0].set_ylabel("Re")
    ax[1].set_ylabel("Im")
    ax[1].set_xlabel("x")
    ax[0].set_title(title)
    if reference is not None or values.shape[-1] > 1:
        ax[0].legend(fontsize=7, ncol=2)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)


def tails_figure(path, N, lam_tail, alpha_tail):
    plt = _pyplot()
    n = np.arange(-N, N + 1)
    fig, ax = plt.subplots(figsize=(6.4, 3.6))
    floor = 1e-18
    ax.semilogy(n, np.maximum(lam_tail, floor), "o-", ms=3, label="eigenvalue tail")
    ax.semilogy(n, np.maximum(alpha_tail, floor), "s-", ms=3, label="norming tail")
    ax.set_xlabel("window n")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(Path(path), dpi=120)
    plt.close(fig)
