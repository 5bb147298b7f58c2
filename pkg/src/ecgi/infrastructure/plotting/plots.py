"""Figure writers for reconstructions, scar maps, objective traces and samples."""

import logging
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
DPI = 120


def _save(fig, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=DPI, bbox_inches="tight")
    plt.close(fig)
    logger.debug("wrote %s", path)
    return path


def plot_tmp_traces(
    path: PathLike,
    U_true: np.ndarray,
    estimates: Dict[str, np.ndarray],
    nodes: Sequence[int],
    dt_effective: float = 1.0,
    title: Optional[str] = None,
) -> Path:
    """TMP time courses at selected nodes: truth against every estimate."""
    nodes = list(nodes)
    t = np.arange(U_true.shape[1]) * dt_effective
    fig, axes = plt.subplots(len(nodes), 1, figsize=(7, 1.8 * len(nodes)), sharex=True, squeeze=False)
    for ax, node in zip(axes[:, 0], nodes):
        ax.plot(t, U_true[node], color="black", lw=1.5, label="truth")
        for name, U in estimates.items():
            ax.plot(t, U[node], lw=1.0, label=name)
        ax.set_ylabel(f"node {node}")
    axes[-1, 0].set_xlabel("time")
    axes[0, 0].legend(loc="upper right", fontsize="small")
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def plot_scar_map(
    path: PathLike,
    node_coords: np.ndarray,
    true_scar: Iterable[int],
    detected: Dict[str, Iterable[int]],
    title: Optional[str] = None,
) -> Path:
    """Scatter of the nodes projected on (x, y): true scar against each detection."""
    panels = {"truth": set(true_scar)}
    panels.update({name: set(nodes) for name, nodes in detected.items()})
    fig, axes = plt.subplots(1, len(panels), figsize=(3.2 * len(panels), 3.2), squeeze=False)
    for ax, (name, members) in zip(axes[0], panels.items()):
        mask = np.zeros(len(node_coords), dtype=bool)
        mask[list(members)] = True
        ax.scatter(node_coords[~mask, 0], node_coords[~mask, 1], s=8, c="lightgray")
        ax.scatter(node_coords[mask, 0], node_coords[mask, 1], s=14, c="crimson")
        ax.set_title(name)
        ax.set_aspect("equal")
        ax.set_xticks([])
        ax.set_yticks([])
    if title:
        fig.suptitle(title)
    return _save(fig, path)


def plot_objective_trace(path: PathLike, values: Sequence[float], title: Optional[str] = None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3))
    ax.plot(np.arange(1, len(values) + 1), values, marker="o", ms=3)
    ax.set_xlabel("EM iteration")
    ax.set_ylabel("expected log joint")
    if title:
        ax.set_title(title)
    return _save(fig, path)


def plot_training_curve(path: PathLike, train: Sequence[float], val: Sequence[Optional[float]]) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3))
    epochs = np.arange(1, len(train) + 1)
    ax.plot(epochs, train, label="train")
    if any(v is not None for v in val):
        ax.plot(epochs, [np.nan if v is None else v for v in val], label="validation")
    ax.set_xlabel("epoch")
    ax.set_ylabel("ELBO")
    ax.legend()
    return _save(fig, path)


def plot_samples(path: PathLike, samples: np.ndarray, nodes: Sequence[int], dt_effective: float = 1.0) -> Path:
    """Decoded samples (count, nodes, T) at a few nodes, one panel per sample."""
    count = samples.shape[0]
    t = np.arange(samples.shape[2]) * dt_effective
    fig, axes = plt.subplots(1, count, figsize=(3 * count, 2.5), sharey=True, squeeze=False)
    for k, ax in enumerate(axes[0]):
        for node in nodes:
            ax.plot(t, samples[k, node], lw=1.0)
        ax.set_title(f"sample {k}")
        ax.set_xlabel("time")
    return _save(fig, path)
