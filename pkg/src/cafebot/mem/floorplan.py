"""Floor-plane projection of the fused point cloud."""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .cloud import ColoredPointCloud

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

DEFAULT_CELL = 0.10
DEFAULT_Z_BAND = (0.02, 1.8)

PGM_LEVELS = {UNKNOWN: 0, FREE: 128, OCCUPIED: 255}


@dataclass(frozen=True)
class FloorPlan:
    """2D raster indexed ``[ix, iy]``; cell (0, 0) has its lower corner at ``origin``.

    ``min_z`` holds the height of the lowest in-band point per cell (``inf``
    where none); it is what keeps the lowest-point coloring consistent when
    the plan is updated incrementally.
    """

    cell_size: float
    origin: np.ndarray
    state: np.ndarray
    color: np.ndarray
    min_z: np.ndarray
    z_band: tuple[float, float] = DEFAULT_Z_BAND

    @property
    def shape(self) -> tuple[int, int]:
        return self.state.shape

    def occupied_count(self) -> int:
        return int((self.state == OCCUPIED).sum())

    def known_fraction(self) -> float:
        return float((self.state != UNKNOWN).mean()) if self.state.size else 0.0

    def occupied_fraction(self) -> float:
        return float((self.state == OCCUPIED).mean()) if self.state.size else 0.0

    def cell_of(self, x: float, y: float) -> tuple[int, int]:
        return (int(math.floor((x - self.origin[0]) / self.cell_size)),
                int(math.floor((y - self.origin[1]) / self.cell_size)))

    def in_grid(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.shape[0] and 0 <= iy < self.shape[1]

    def summary(self) -> dict:
        nx, ny = self.shape
        return {
            "cell_size": self.cell_size,
            "bounds": [float(self.origin[0]), float(self.origin[1]),
                       float(self.origin[0] + nx * self.cell_size), float(self.origin[1] + ny * self.cell_size)],
            "occupied_fraction": round(self.occupied_fraction(), 4),
            "known_fraction": round(self.known_fraction(), 4),
        }

    def equals(self, other: "FloorPlan") -> bool:
        return (
            self.cell_size == other.cell_size
            and np.array_equal(self.origin, other.origin)
            and np.array_equal(self.state, other.state)
            and np.array_equal(self.color, other.color)
        )


def empty_plan(bounds, cell_size: float = DEFAULT_CELL, z_band=DEFAULT_Z_BAND) -> FloorPlan:
    if not cell_size > 0:
        raise ValueError("cell_size must be > 0")
    xmin, ymin, xmax, ymax = (float(b) for b in bounds)
    nx = max(1, int(math.ceil((xmax - xmin) / cell_size - 1e-9)))
    ny = max(1, int(math.ceil((ymax - ymin) / cell_size - 1e-9)))
    return FloorPlan(
        cell_size=float(cell_size),
        origin=np.array([xmin, ymin, 0.0]),
        state=np.zeros((nx, ny), dtype=np.int8),
        color=np.zeros((nx, ny, 3), dtype=np.uint8),
        min_z=np.full((nx, ny), np.inf),
        z_band=(float(z_band[0]), float(z_band[1])),
    )


def update_floor_plan(plan: FloorPlan, cloud: ColoredPointCloud) -> FloorPlan:
    """Return ``plan`` with the points of ``cloud`` added.

    In-band points make a cell occupied and the cell takes the color of its
    lowest point; an earlier point wins an exact height tie.  Points below
    the band (floor returns) mark an otherwise unknown cell free.  Points
    above the band or outside the grid are ignored.
    """
    state = plan.state.copy()
    color = plan.color.copy()
    min_z = plan.min_z.copy()
    if len(cloud):
        p = cloud.points
        ix = np.floor((p[:, 0] - plan.origin[0]) / plan.cell_size).astype(np.int64)
        iy = np.floor((p[:, 1] - plan.origin[1]) / plan.cell_size).astype(np.int64)
        nx, ny = plan.shape
        inside = (ix >= 0) & (ix < nx) & (iy >= 0) & (iy < ny)
        z = p[:, 2]
        z_lo, z_hi = plan.z_band
        band = inside & (z >= z_lo) & (z <= z_hi)
        floor = inside & (z < z_lo)

        fl = np.zeros((nx, ny), dtype=bool)
        fl[ix[floor], iy[floor]] = True
        state[fl & (state == UNKNOWN)] = FREE

        if band.any():
            bi, bj, bz = ix[band], iy[band], z[band]
            bc = cloud.colors[band]
            flat = bi * ny + bj
            # stable sort on (cell, z): first entry per cell is its lowest, earliest point
            order = np.lexsort((bz, flat))
            flat_s = flat[order]
            first = np.ones(len(order), dtype=bool)
            first[1:] = flat_s[1:] != flat_s[:-1]
            sel = order[first]
            ci, cj, cz = bi[sel], bj[sel], bz[sel]
            lower = cz < min_z[ci, cj]
            ci, cj, cz = ci[lower], cj[lower], cz[lower]
            min_z[ci, cj] = cz
            color[ci, cj] = bc[sel][lower]
            state[ci, cj] = OCCUPIED
    return FloorPlan(plan.cell_size, plan.origin, state, color, min_z, plan.z_band)


def project_floor_plan(
    cloud: ColoredPointCloud,
    cell_size: float = DEFAULT_CELL,
    z_band=DEFAULT_Z_BAND,
    bounds=None,
) -> FloorPlan:
    """Project a cloud onto the floor plane.

    ``bounds`` fixes the raster extent; by default it is the cloud's own
    planar extent.
    """
    if bounds is None:
        if len(cloud):
            lo = cloud.points[:, :2].min(axis=0)
            hi = cloud.points[:, :2].max(axis=0)
            bounds = (lo[0], lo[1], max(hi[0], lo[0] + cell_size), max(hi[1], lo[1] + cell_size))
        else:
            bounds = (0.0, 0.0, cell_size, cell_size)
    return update_floor_plan(empty_plan(bounds, cell_size, z_band), cloud)


def to_pgm(plan: FloorPlan) -> bytes:
    """Binary PGM, north up: unknown 0, free 128, occupied 255."""
    lut = np.zeros(3, dtype=np.uint8)
    for k, v in PGM_LEVELS.items():
        lut[k] = v
    img = lut[plan.state].T[::-1]  # rows = y descending
    h, w = img.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img).tobytes()


def read_pgm(data: bytes) -> np.ndarray:
    parts = data.split(maxsplit=4)
    if parts[0] != b"P5":
        raise ValueError("not a binary PGM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only maxval 255 is supported")
    return np.frombuffer(parts[4][: w * h], dtype=np.uint8).reshape(h, w)


def to_png(plan: FloorPlan) -> bytes:
    """Colored raster: occupied cells in their point color, free light gray, unknown dark."""
    from PIL import Image

    rgb = np.empty(plan.shape + (3,), dtype=np.uint8)
    rgb[:] = (40, 40, 40)
    rgb[plan.state == FREE] = (220, 220, 220)
    occ = plan.state == OCCUPIED
    rgb[occ] = plan.color[occ]
    img = np.ascontiguousarray(np.transpose(rgb, (1, 0, 2))[::-1])
    buf = io.BytesIO()
    Image.fromarray(img, "RGB").save(buf, format="PNG")
    return buf.getvalue()
