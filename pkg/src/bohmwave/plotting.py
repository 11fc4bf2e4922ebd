"""Figure emission: standalone SVG line plots via the Agg backend."""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_density_profiles(x, curves, path, title=None, xlabel="x", ylabel="density"):
    """Overlaid density profiles; curves is a mapping label -> values."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, y in curves.items():
        ax.plot(x, y, label=label, linewidth=1.2)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_trajectory_fan(ens, path, boundary=None, title=None):
    """All trajectories of an ensemble versus time, colored by origin
    packet, with the optional boundary line dashed."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = {1: "tab:blue", 2: "tab:red"}
    for i in range(len(ens)):
        ax.plot(
            ens.times,
            ens.paths[i],
            color=colors.get(int(ens.origin_labels[i]), "gray"),
            linewidth=0.7,
        )
    if boundary is not None:
        ax.plot(ens.times, boundary.position(ens.times), "k--", linewidth=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("x")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def plot_potential_curves(t, x_min, v0, path, title=None):
    """Well-edge position and depth of the dynamic potential versus time."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))
    ax1.plot(t, x_min, linewidth=1.2)
    ax1.set_xlabel("t")
    ax1.set_ylabel("first-minimum distance")
    ax2.plot(t, v0, linewidth=1.2)
    ax2.set_xlabel("t")
    ax2.set_ylabel("well depth")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
