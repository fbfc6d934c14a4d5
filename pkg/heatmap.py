"""
Standalone SVG heatmap of a joint spectral intensity
"""

import logging
from pathlib import Path

import numpy as np

from core import FrequencyGrid

logger = logging.getLogger(__name__)

MAX_CELLS_PER_AXIS = 128


def _stride(n: int) -> int:
    return max(1, int(np.ceil(n / MAX_CELLS_PER_AXIS)))


def write_heatmap(path: Path, intensity: np.ndarray, grid_i: FrequencyGrid,
                  grid_s: FrequencyGrid, title: str = "") -> Path:
    """Render the normalized JSI (rows idler, columns signal) with viridis"""
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    si, ss = _stride(grid_i.n_points), _stride(grid_s.n_points)
    fig, ax = plt.subplots(figsize=(5.0, 4.4))
    mesh = ax.pcolormesh(
        grid_s.offsets[::ss], grid_i.offsets[::si], intensity[::si, ::ss],
        cmap="viridis", shading="nearest", vmin=0.0, vmax=1.0,
    )
    ax.set_xlabel(r"signal detuning $(\omega_s-\omega_{0s})/\kappa_{is}$")
    ax.set_ylabel(r"idler detuning $(\omega_i-\omega_{0i})/\kappa_{is}$")
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.colorbar(mesh, ax=ax, label="normalized JSI")
    fig.tight_layout()

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, format="svg")
    plt.close(fig)
    logger.info("JSI heatmap written to %s", path)
    return path
