"""Planar base motion: straight-line sweeps and grid path planning."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from .robot import RobotState
from .scene import GRID_CELL, WorldScene

SWEEP_STEP = 0.01


class InvalidTargetError(ValueError):
    pass


@dataclass(frozen=True)
class MoveResult:
    reached: bool
    at: np.ndarray
    path_length: float

    @property
    def blocked(self) -> bool:
        return not self.reached


def move_to(scene: WorldScene, robot: RobotState, target) -> MoveResult:
    """Sweep the base in a straight line toward ``target`` (x, y[, z]).

    The robot stops at the last collision-free sample if anything is in the
    way.  ``path_length`` is the distance actually travelled.  The heading is
    turned to face the direction of travel when the robot moves at all.
    """
    tx, ty = float(target[0]), float(target[1])
    xmin, ymin, xmax, ymax = scene.bounds
    if not (math.isfinite(tx) and math.isfinite(ty) and xmin <= tx <= xmax and ymin <= ty <= ymax):
        raise InvalidTargetError(f"target ({tx:.3f}, {ty:.3f}) outside scene bounds")
    start = robot.xy
    delta = np.array([tx, ty]) - start
    dist = float(np.hypot(*delta))
    if dist == 0.0:
        return MoveResult(True, start, 0.0)

    steps = max(1, int(math.ceil(dist / SWEEP_STEP)))
    frac = np.arange(1, steps + 1) / steps
    xs = start[0] + frac * delta[0]
    ys = start[1] + frac * delta[1]
    free = scene.free_mask(xs, ys)
    heading = math.atan2(delta[1], delta[0])
    if free.all():
        robot.set_planar(tx, ty, heading)
        return MoveResult(True, np.array([tx, ty]), dist)
    first_bad = int(np.argmin(free))
    if first_bad == 0:
        return MoveResult(False, start, 0.0)
    stop = np.array([xs[first_bad - 1], ys[first_bad - 1]])
    robot.set_planar(stop[0], stop[1], heading)
    return MoveResult(False, stop, float(frac[first_bad - 1] * dist))


def grid_graph(free: np.ndarray, cell: float = GRID_CELL):
    """Sparse 8-connected graph over ``free`` cells, indexed ``ix * ny + iy``."""
    nx, ny = free.shape
    gx, gy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    gx, gy = gx.ravel(), gy.ravel()
    rows, cols, w = [], [], []
    for dx, dy in ((1, 0), (0, 1), (1, 1), (1, -1)):
        hx, hy = gx + dx, gy + dy
        inside = (hx < nx) & (hy >= 0) & (hy < ny)
        ax, ay, bx, by = gx[inside], gy[inside], hx[inside], hy[inside]
        ok = free[ax, ay] & free[bx, by]
        if dx and dy:
            # no corner cutting past a blocked cell
            ok &= free[bx, ay] & free[ax, by]
        rows.append(ax[ok] * ny + ay[ok])
        cols.append(bx[ok] * ny + by[ok])
        w.append(np.full(int(ok.sum()), math.hypot(dx, dy) * cell))
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    w = np.concatenate(w)
    n = nx * ny
    g = coo_matrix((np.concatenate([w, w]), (np.concatenate([rows, cols]), np.concatenate([cols, rows]))), shape=(n, n))
    return g.tocsr()


def main_free_region(scene: WorldScene) -> np.ndarray:
    """Walkable cells of the largest 8-connected component (ties: lowest label)."""
    free = scene.walkable
    if not free.any():
        return free
    _, labels = connected_components(grid_graph(free), directed=False)
    labels = labels.reshape(free.shape)
    counts = np.bincount(labels[free])
    return free & (labels == int(np.argmax(counts)))


def plan_path(scene: WorldScene, start, goal_mask: np.ndarray) -> list[np.ndarray] | None:
    """Shortest 8-connected grid path from ``start`` to any cell of ``goal_mask``.

    Returns world-frame waypoints (cell centers, string-pulled so that
    consecutive waypoints are joined by collision-free straight lines) or
    ``None`` if no goal cell is reachable.  The start itself is not included.
    """
    free = scene.walkable
    nx, ny = free.shape
    gx, gy = scene.cell_centers()
    start = np.asarray(start, dtype=float)[:2]
    goal = goal_mask & free
    if not goal.any():
        return None

    # Connect the start, as an extra node, to nearby free cells it can see in a straight line.
    d2 = (gx - start[0]) ** 2 + (gy - start[1]) ** 2
    near = np.argwhere(free & (d2 <= (2.5 * GRID_CELL) ** 2))
    if len(near) == 0:
        return None
    n = nx * ny
    src = [int(ix * ny + iy) for ix, iy in near]
    entry = [math.sqrt(d2[ix, iy]) if _segment_free(scene, start, (gx[ix, iy], gy[ix, iy])) else np.inf
             for ix, iy in near]
    keep = [k for k, e in enumerate(entry) if np.isfinite(e)]
    if not keep:
        return None
    grid = grid_graph(free).tocoo()
    rows = np.concatenate([grid.row, np.full(len(keep), n)])
    cols = np.concatenate([grid.col, [src[k] for k in keep]])
    # zero-length entries still need a positive weight to count as edges
    w = np.concatenate([grid.data, [max(entry[k], 1e-12) for k in keep]])
    graph = coo_matrix((w, (rows, cols)), shape=(n + 1, n + 1)).tocsr()
    dist, pred = dijkstra(graph, directed=True, indices=n, return_predecessors=True)
    flat_goal = np.flatnonzero(goal.ravel())
    sub = dist[flat_goal]
    if not np.isfinite(sub).any():
        return None
    target = int(flat_goal[int(np.argmin(sub))])
    chain = [target]
    while pred[chain[-1]] != n:
        chain.append(int(pred[chain[-1]]))
    chain.reverse()
    pts = [np.array([gx.ravel()[c], gy.ravel()[c]]) for c in chain]
    return _string_pull(scene, start, pts)


def _segment_free(scene: WorldScene, a, b) -> bool:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    d = float(np.hypot(*(b - a)))
    n = max(1, int(math.ceil(d / SWEEP_STEP)))
    f = np.arange(1, n + 1) / n
    return bool(scene.free_mask(a[0] + f * (b[0] - a[0]), a[1] + f * (b[1] - a[1])).all())


def _string_pull(scene: WorldScene, start, pts: list[np.ndarray]) -> list[np.ndarray]:
    out = []
    cur = np.asarray(start, dtype=float)
    i = 0
    while i < len(pts):
        j = len(pts) - 1
        while j > i and not _segment_free(scene, cur, pts[j]):
            j -= 1
        out.append(pts[j])
        cur = pts[j]
        i = j + 1
    return out


def follow_path(scene: WorldScene, robot: RobotState, waypoints) -> MoveResult:
    """Execute a waypoint list with :func:`move_to`, summing the distance."""
    total = 0.0
    for wp in waypoints:
        res = move_to(scene, robot, wp)
        total += res.path_length
        if not res.reached:
            return MoveResult(False, res.at, total)
    return MoveResult(True, robot.xy, total)
