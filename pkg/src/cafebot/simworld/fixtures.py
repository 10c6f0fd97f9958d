"""Bundled scene fixture, start poses and the fixed exploration circuit."""

from __future__ import annotations

from importlib import resources

import numpy as np

from .motion import main_free_region
from .scene import WorldScene, load_scene


def cafe_small() -> WorldScene:
    """Six tables, thirty objects, ids 1..30, on an 8 m x 6 m floor."""
    data = resources.files("cafebot").joinpath("data/cafe_small.json").read_bytes()
    return load_scene(data)


def nearest_free(scene: WorldScene, x: float, y: float) -> np.ndarray | None:
    """Closest cell center in the main connected free region."""
    free = main_free_region(scene)
    if not free.any():
        return None
    gx, gy = scene.cell_centers()
    d2 = np.where(free, (gx - x) ** 2 + (gy - y) ** 2, np.inf)
    k = np.unravel_index(int(np.argmin(d2)), d2.shape)
    return np.array([gx[k], gy[k]])


def default_start(scene: WorldScene) -> tuple[float, float, float]:
    """Free cell closest to the middle of the floor, facing +x."""
    xmin, ymin, xmax, ymax = scene.bounds
    p = nearest_free(scene, (xmin + xmax) / 2, (ymin + ymax) / 2)
    if p is None:
        raise ValueError("scene has no free floor cell")
    return float(p[0]), float(p[1]), 0.0


def tour_waypoints(scene: WorldScene, n_cols: int = 5, n_rows: int = 2) -> list[np.ndarray]:
    """A serpentine lattice of ``n_cols * n_rows`` points snapped to free cells.

    Duplicates after snapping are kept so the circuit length is stable.
    """
    xmin, ymin, xmax, ymax = scene.bounds
    xs = xmin + (np.arange(n_cols) + 0.5) / n_cols * (xmax - xmin)
    ys = ymin + (np.arange(n_rows) + 0.5) / n_rows * (ymax - ymin)
    out = []
    for r, y in enumerate(ys):
        row = xs if r % 2 == 0 else xs[::-1]
        for x in row:
            p = nearest_free(scene, x, y)
            if p is not None:
                out.append(p)
    return out
