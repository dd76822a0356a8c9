"""Figure rendering for trajectory logs (vector output: .pdf or .svg)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import _IDX  # noqa: E402


def _vec(data: np.ndarray, base: str) -> np.ndarray:
    return data[:, [_IDX[f"{base}_x"], _IDX[f"{base}_y"], _IDX[f"{base}_z"]]]


def plot_trajectory(data: np.ndarray, out_path: str | Path) -> Path:
    """3D vehicle/target paths with a few body-axis triads along the way."""
    fig = plt.figure(figsize=(7.0, 6.0))
    ax = fig.add_subplot(projection="3d")
    if data.shape[0]:
        p_b = _vec(data, "p_B")
        p_t = _vec(data, "p_T")
        ax.plot(*p_b.T, color="tab:blue", lw=1.0, label="vehicle")
        ax.plot(*p_t.T, color="tab:red", lw=1.0, label="target")
        ax.scatter(*p_b[0], color="tab:blue", marker="o", s=25)
        ax.scatter(*p_t[0], color="tab:red", marker="o", s=25)

        # body triads, subsampled
        n = data.shape[0]
        picks = np.unique(np.linspace(0, n - 1, 10).astype(int))
        rcols = [_IDX[f"R_{i}{j}"] for i in range(3) for j in range(3)]
        rots = data[np.ix_(picks, rcols)].reshape(-1, 3, 3)
        span = max(np.ptp(p_b, axis=0).max(), 1.0)
        length = 0.08 * span
        for axis, color in ((0, "tab:green"), (1, "tab:orange"), (2, "tab:purple")):
            ax.quiver(
                *p_b[picks].T, *rots[:, :, axis].T,
                length=length, normalize=True, color=color, lw=0.8,
                label=f"body {'xyz'[axis]}",
            )
        ax.legend(loc="upper left", fontsize=8)
    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_zlabel("z [m] (down positive)")
    ax.set_title("vehicle and target paths")
    out_path = Path(out_path)
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)
    return out_path


def plot_time_series(data: np.ndarray, out_path: str | Path) -> Path:
    """Stacked error / reference / estimate histories."""
    fig, axes = plt.subplots(6, 1, sharex=True, figsize=(7.0, 11.0))
    if data.shape[0]:
        t = data[:, _IDX["t"]]
        axes[0].plot(t, np.linalg.norm(_vec(data, "delta1"), axis=1), lw=0.9)
        axes[1].plot(t, data[:, _IDX["delta2"]], lw=0.9)
        axes[2].plot(t, np.linalg.norm(_vec(data, "delta3"), axis=1), lw=0.9)
        for i, lbl in enumerate("xyz"):
            axes[3].plot(t, _vec(data, "w_d")[:, i], lw=0.9, label=lbl)
            axes[4].plot(t, _vec(data, "rho_hat")[:, i], lw=0.9, label=lbl)
        axes[3].legend(fontsize=8, ncol=3)
        axes[5].plot(t, data[:, _IDX["r_hat"]], lw=0.9)
    axes[0].set_ylabel(r"$\|\delta_1\|$")
    axes[1].set_ylabel(r"$\delta_2$")
    axes[2].set_ylabel(r"$\|\delta_3\|$")
    axes[3].set_ylabel(r"$w_d$ [1/s]")
    axes[4].set_ylabel(r"$\hat\rho$ [1/s$^2$]")
    axes[5].set_ylabel(r"$\hat r$ [m]")
    axes[5].set_xlabel("t [s]")
    axes[0].set_title("servo errors, reference velocity and estimates")
    fig.align_ylabels(axes)
    out_path = Path(out_path)
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)
    return out_path
