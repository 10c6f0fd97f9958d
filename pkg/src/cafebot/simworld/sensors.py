"""Synthetic RGB / depth / segmentation rendering by analytic ray casting."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import CameraExtrinsics, CameraIntrinsics, RobotPose, camera_to_world_transform
from .robot import CameraMount, RobotState
from .scene import CATEGORY_COLORS, FLOOR_COLOR, SKY_COLOR, WorldScene

DEPTH_STEP = 0.001
MAX_RANGE = 10.0
NEAR_PLANE = 0.05


@dataclass(frozen=True)
class SensorFrame:
    rgb: np.ndarray  # (H, W, 3) uint8
    depth: np.ndarray  # (H, W) float, metres; 0 where nothing was hit
    segmentation: np.ndarray  # (H, W) int32 object id, 0 = background
    intr: CameraIntrinsics
    extr: CameraExtrinsics
    pose: RobotPose
    mount: str = "head"

    @property
    def shape(self) -> tuple[int, int]:
        return self.depth.shape

    def ids(self) -> set[int]:
        ids = set(np.unique(self.segmentation).tolist())
        ids.discard(0)
        return ids

    def tobytes(self) -> bytes:
        return self.rgb.tobytes() + self.depth.tobytes() + self.segmentation.tobytes()


def quantize_depth(depth: np.ndarray, step: float = DEPTH_STEP) -> np.ndarray:
    return np.round(depth / step) * step


def _ray_box(origin: np.ndarray, dirs: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Entry parameter of each ray into the box, ``inf`` on a miss.

    Slab method.  Components of ``dirs`` that are exactly zero are handled
    explicitly so no NaN appears from ``0 * inf``.
    """
    n = dirs.shape[0]
    t0 = np.full(n, -np.inf)
    t1 = np.full(n, np.inf)
    for k in range(3):
        d = dirs[:, k]
        o = origin[k]
        par = d == 0.0
        with np.errstate(divide="ignore"):
            inv = 1.0 / np.where(par, 1.0, d)
        a = (lo[k] - o) * inv
        b = (hi[k] - o) * inv
        near = np.where(par, -np.inf, np.minimum(a, b))
        far = np.where(par, np.inf, np.maximum(a, b))
        if not lo[k] <= o <= hi[k]:
            # a parallel ray outside this slab never enters the box
            far = np.where(par, -np.inf, far)
        t0 = np.maximum(t0, near)
        t1 = np.minimum(t1, far)
    hit = (t0 <= t1) & (t0 > NEAR_PLANE)
    return np.where(hit, t0, np.inf)


def pixel_rays(intr: CameraIntrinsics) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Camera-frame ray directions with unit z, one per pixel center, row-major."""
    jj, ii = np.meshgrid(np.arange(intr.height), np.arange(intr.width), indexing="ij")
    ii = ii.ravel().astype(float)
    jj = jj.ravel().astype(float)
    dirs = np.stack([(ii - intr.cx) / intr.fx, (jj - intr.cy) / intr.fy, np.ones_like(ii)], axis=1)
    return ii, jj, dirs


def _outside_frustum(obj, origin: np.ndarray, cam_to_world: np.ndarray, intr: CameraIntrinsics) -> bool:
    """True if the box lies entirely outside one bounding plane of the pixel-ray pyramid.

    Conservative: a box that is not culled may still be missed by every ray.
    """
    corners = np.array([[x, y, z] for x in (obj.lo[0], obj.hi[0]) for y in (obj.lo[1], obj.hi[1])
                        for z in (obj.lo[2], obj.hi[2])])
    c = (corners - origin) @ cam_to_world  # camera-frame coordinates
    xc, yc, zc = c[:, 0], c[:, 1], c[:, 2]
    if np.all(zc <= NEAR_PLANE):
        return True
    eps = 1e-9
    a_lo, a_hi = (0 - intr.cx) / intr.fx - eps, (intr.width - 1 - intr.cx) / intr.fx + eps
    b_lo, b_hi = (0 - intr.cy) / intr.fy - eps, (intr.height - 1 - intr.cy) / intr.fy + eps
    return bool(np.all(xc < a_lo * zc) or np.all(xc > a_hi * zc)
                or np.all(yc < b_lo * zc) or np.all(yc > b_hi * zc))


def render_view(
    scene: WorldScene,
    intr: CameraIntrinsics,
    extr: CameraExtrinsics,
    pose: RobotPose,
    mount: str = "head",
    quantize: bool = True,
) -> SensorFrame:
    """Ray cast one image from an explicit camera configuration."""
    _, _, dirs_c = pixel_rays(intr)
    m, origin = camera_to_world_transform(extr, pose)
    dirs_w = dirs_c @ m.T
    n = dirs_w.shape[0]

    # Because ray directions have unit camera-z, the ray parameter equals depth.
    best_t = np.full(n, np.inf)
    best_id = np.zeros(n, dtype=np.int32)
    best_rgb = np.zeros((n, 3), dtype=np.uint8)
    for obj in sorted(scene.objects, key=lambda o: o.id):
        if _outside_frustum(obj, origin, m, intr):
            continue
        t = _ray_box(origin, dirs_w, obj.lo, obj.hi)
        closer = t < best_t
        best_t = np.where(closer, t, best_t)
        best_id[closer] = obj.id
        best_rgb[closer] = CATEGORY_COLORS[obj.category]

    dz = dirs_w[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t_floor = np.where(dz < 0, -origin[2] / dz, np.inf)
    t_hit = np.where(np.isfinite(t_floor), t_floor, 0.0)  # avoid inf * 0 on level rays
    fx = origin[0] + t_hit * dirs_w[:, 0]
    fy = origin[1] + t_hit * dirs_w[:, 1]
    xmin, ymin, xmax, ymax = scene.bounds
    on_floor = np.isfinite(t_floor) & (fx >= xmin) & (fx <= xmax) & (fy >= ymin) & (fy <= ymax) & (t_floor > NEAR_PLANE)
    floor_wins = on_floor & (t_floor < best_t)
    best_t = np.where(floor_wins, t_floor, best_t)
    best_id[floor_wins] = 0
    best_rgb[floor_wins] = FLOOR_COLOR

    valid = np.isfinite(best_t) & (best_t <= MAX_RANGE)
    best_id[~valid] = 0
    best_rgb[~valid] = SKY_COLOR
    depth = np.where(valid, best_t, 0.0)
    if quantize:
        depth = quantize_depth(depth)

    h, w = intr.height, intr.width
    return SensorFrame(
        rgb=best_rgb.reshape(h, w, 3),
        depth=depth.reshape(h, w),
        segmentation=best_id.reshape(h, w),
        intr=intr,
        extr=extr,
        pose=pose,
        mount=mount,
    )


def render(scene: WorldScene, robot: RobotState, mount: str = "head", quantize: bool = True) -> SensorFrame:
    """Render the named camera mount of ``robot`` in ``scene``."""
    cam: CameraMount = robot.mounts[mount]
    return render_view(scene, cam.intrinsics, cam.extrinsics, robot.pose, mount, quantize)


def observe_four_directions(scene: WorldScene, robot: RobotState, mount: str = "head") -> list[SensorFrame]:
    """Head-camera frames at the current heading and three successive quarter turns.

    The robot is not mutated; each view uses a rotated copy of its pose.
    """
    base = robot.pose
    x, y = base.translation[:2]
    cam = robot.mounts[mount]
    frames = []
    for k in range(4):
        pose = RobotPose.planar(x, y, base.heading + k * math.pi / 2)
        frames.append(render_view(scene, cam.intrinsics, cam.extrinsics, pose, mount))
    return frames
