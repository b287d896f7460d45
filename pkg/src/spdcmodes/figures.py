"""Matplotlib renderings of the standard outputs.

All functions write a PNG next to the delimited tables and close their
figure; nothing is ever shown interactively.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_intensity_figure",
    "save_correlation_figure",
    "save_spectrum_figure",
    "save_modes_figure",
    "save_sweep_figure",
    "save_bench_figure",
]

_DPI = 150


def save_intensity_figure(path, angles_mrad, values, label="intensity"):
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    ax.plot(angles_mrad, values, lw=1.4)
    ax.set_xlabel("angle (mrad)")
    ax.set_ylabel(f"{label} (arb.)")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def save_correlation_figure(path, angles_mrad, matrix, title="correlation"):
    fig, ax = plt.subplots(figsize=(4.8, 4.2))
    extent = [angles_mrad[0], angles_mrad[-1], angles_mrad[0], angles_mrad[-1]]
    im = ax.imshow(matrix, origin="lower", extent=extent, cmap="magma")
    ax.set_xlabel("q' (mrad)")
    ax.set_ylabel("q (mrad)")
    ax.set_title(title)
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def save_spectrum_figure(path, lambdas, n_show=40, compare=None, labels=("estimate", "reference")):
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    k = np.arange(min(n_show, len(lambdas)))
    ax.semilogy(k, np.maximum(np.asarray(lambdas)[: k.size], 1e-16), "o-",
                ms=3.5, lw=1.0, label=labels[0])
    if compare is not None:
        kc = np.arange(min(n_show, len(compare)))
        ax.semilogy(kc, np.maximum(np.asarray(compare)[: kc.size], 1e-16), "s--",
                    ms=3.0, lw=1.0, label=labels[1])
        ax.legend()
    ax.set_xlabel("mode index")
    ax.set_ylabel("normalized weight")
    ax.grid(alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def save_modes_figure(path, angles_mrad, modes, n_show=4):
    """Leading 1D mode profiles; modes given column-wise."""
    n_show = min(n_show, modes.shape[1])
    fig, ax = plt.subplots(figsize=(5.5, 3.6))
    for i in range(n_show):
        ax.plot(angles_mrad, modes[:, i], lw=1.2, label=f"mode {i}")
    ax.set_xlabel("angle (mrad)")
    ax.set_ylabel("amplitude")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def save_sweep_figure(path, gains, fwhm_mrad, schmidt_numbers):
    fig, ax1 = plt.subplots(figsize=(5.5, 3.6))
    ax1.plot(gains, fwhm_mrad, "o-", color="tab:blue", lw=1.3)
    ax1.set_xlabel("pump amplitude g")
    ax1.set_ylabel("dominant mode FWHM (mrad)", color="tab:blue")
    ax1.tick_params(axis="y", labelcolor="tab:blue")
    ax2 = ax1.twinx()
    ax2.plot(gains, schmidt_numbers, "s--", color="tab:red", lw=1.3)
    ax2.set_ylabel("mode count K", color="tab:red")
    ax2.tick_params(axis="y", labelcolor="tab:red")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)


def save_bench_figure(path, sizes, speedups):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(sizes, speedups, "o-", lw=1.3)
    ax.set_xlabel("frame side (pixels)")
    ax.set_ylabel("speedup vs full 4D")
    ax.set_xticks(list(sizes))
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return Path(path)
