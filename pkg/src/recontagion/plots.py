"""Static SVG heatmaps for grid experiments."""

from __future__ import annotations

import numpy as np


def heatmap_svg(
    path,
    x_values,
    y_values,
    values: np.ndarray,
    r0: np.ndarray | None = None,
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    contour_levels=(1, 11, 21, 31, 41),
) -> None:
    """Diverging heatmap (red: second contagion better, blue: first better)
    with gray reproduction-number iso-contours overlaid when r0 is given."""
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    values = np.asarray(values, dtype=np.float64)
    x = np.arange(len(x_values))
    y = np.arange(len(y_values))
    vmax = np.nanmax(np.abs(values)) if np.isfinite(values).any() else 1.0
    vmax = max(vmax, 1e-12)
    fig, ax = plt.subplots(figsize=(1.0 + 0.6 * len(x_values), 1.0 + 0.5 * len(y_values)))
    mesh = ax.pcolormesh(
        np.arange(len(x_values) + 1) - 0.5,
        np.arange(len(y_values) + 1) - 0.5,
        np.ma.masked_invalid(values),
        cmap="RdBu_r",
        vmin=-vmax,
        vmax=vmax,
    )
    fig.colorbar(mesh, ax=ax)
    if r0 is not None and values.shape[0] >= 2 and values.shape[1] >= 2:
        r0 = np.ma.masked_invalid(np.asarray(r0, dtype=np.float64))
        levels = [lv for lv in contour_levels if r0.min() < lv < r0.max()]
        if levels:
            cs = ax.contour(x, y, r0, levels=levels, colors="gray", linewidths=0.8)
            ax.clabel(cs, inline=True, fontsize=6, fmt="%g")
    ax.set_xticks(x)
    ax.set_xticklabels([f"{v:g}" for v in x_values], fontsize=7, rotation=45)
    ax.set_yticks(y)
    ax.set_yticklabels([f"{v:g}" for v in y_values], fontsize=7)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title, fontsize=9)
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
