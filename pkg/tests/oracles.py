"""Independent reference implementations used as test oracles.

None of these import the code under test.  They favour obviousness over
speed: homogeneous 4x4 matrices, exhaustive enumeration, full distance
matrices.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.spatial.transform import Rotation


# -- geometry ----------------------------------------------------------------

def homogeneous(rot, trans) -> np.ndarray:
    m = np.eye(4)
    m[:3, :3] = rot
    m[:3, 3] = trans
    return m


def ref_pixel_to_world(i, j, depth, fx, fy, cx, cy, mount_rot, mount_trans, euler, pose_trans):
    """Pixel + depth -> world via explicit 4x4 chains.

    The body frame is mirrored in y relative to the world, so the chain is
    world <- T_pose * R_zyx * diag(1,-1,1) <- T_mount <- camera.
    """
    alpha, beta, gamma = euler
    r_pose = Rotation.from_euler("ZYX", [gamma, beta, alpha]).as_matrix()
    mirror = np.diag([1.0, -1.0, 1.0, 1.0])
    chain = homogeneous(r_pose, pose_trans) @ mirror @ homogeneous(mount_rot, mount_trans)
    p_c = np.array([(i - cx) * depth / fx, (j - cy) * depth / fy, depth, 1.0])
    return (chain @ p_c)[:3]


def ref_world_to_pixel(p_w, fx, fy, cx, cy, mount_rot, mount_trans, euler, pose_trans):
    alpha, beta, gamma = euler
    r_pose = Rotation.from_euler("ZYX", [gamma, beta, alpha]).as_matrix()
    mirror = np.diag([1.0, -1.0, 1.0, 1.0])
    chain = homogeneous(r_pose, pose_trans) @ mirror @ homogeneous(mount_rot, mount_trans)
    p_c = np.linalg.inv(chain) @ np.append(p_w, 1.0)
    return np.array([p_c[0] / p_c[2] * fx + cx, p_c[1] / p_c[2] * fy + cy, p_c[2]])


def ray_box_entry(origin, direction, lo, hi):
    """Smallest t >= 0 where origin + t*direction is inside the box, by bisection-free case analysis.

    Tests all six face planes and keeps intersections that lie on the face.
    """
    best = math.inf
    for axis in range(3):
        d = direction[axis]
        if d == 0:
            continue
        for plane in (lo[axis], hi[axis]):
            t = (plane - origin[axis]) / d
            if t < 0:
                continue
            p = origin + t * direction
            others = [k for k in range(3) if k != axis]
            if all(lo[k] - 1e-12 <= p[k] <= hi[k] + 1e-12 for k in others):
                best = min(best, t)
    return best


# -- 2-means -----------------------------------------------------------------

def _sse(pts):
    if len(pts) == 0:
        return 0.0
    return float(((pts - pts.mean(axis=0)) ** 2).sum())


def brute_two_means(points):
    """Globally optimal 2-means partition by exhaustive enumeration of linear splits.

    An optimal 2-means partition is separated by a line, so it appears as a
    prefix split of the points sorted along some direction.  Sorting order
    only changes at directions normal to some pair difference, so one
    direction strictly between each pair of consecutive critical angles
    covers every achievable split.  Returns ``(centroids, labels, sse)``
    with cluster 0 holding the lexicographically smallest point.
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    uniq = np.unique(pts, axis=0)
    if len(uniq) == 1:
        return np.stack([uniq[0], uniq[0]]), np.zeros(n, dtype=int), 0.0
    angles = set()
    for a in range(n):
        for b in range(a + 1, n):
            dx, dy = pts[b] - pts[a]
            if dx == 0 and dy == 0:
                continue
            # directions where the projections of a and b tie
            th = math.atan2(dy, dx) + math.pi / 2
            angles.add(th % math.pi)
    crit = sorted(angles)
    probes = [(crit[k] + crit[(k + 1) % len(crit)] + (math.pi if k == len(crit) - 1 else 0)) / 2
              for k in range(len(crit))]
    best = (math.inf, None)
    for th in probes:
        u = np.array([math.cos(th), math.sin(th)])
        order = np.argsort(pts @ u, kind="stable")
        for k in range(1, n):
            left, right = order[:k], order[k:]
            s = _sse(pts[left]) + _sse(pts[right])
            if s < best[0] - 1e-9:
                lab = np.zeros(n, dtype=int)
                lab[right] = 1
                best = (s, lab)
    sse, lab = best
    lexmin = np.lexsort((pts[:, 1], pts[:, 0]))[0]
    if lab[lexmin] == 1:
        lab = 1 - lab
    cent = np.stack([pts[lab == 0].mean(axis=0), pts[lab == 1].mean(axis=0)])
    return cent, lab, sse


def ref_center(points, zeta):
    """Center rule on top of the brute-force partition."""
    cent, lab, _ = brute_two_means(points)
    d = float(np.linalg.norm(cent[0] - cent[1]))
    if d <= zeta:
        return (cent[0] + cent[1]) / 2, "near"
    n0, n1 = int((lab == 0).sum()), int((lab == 1).sum())
    if n0 != n1:
        return cent[0 if n0 > n1 else 1], "far"
    return cent[0 if cent[0, 1] <= cent[1, 1] else 1], "far"


# -- outlier removal ---------------------------------------------------------

def brute_outlier_keep(points, n, std_r):
    """Keep mask by the mean-neighbor-distance rule with a full distance matrix."""
    pts = np.asarray(points, dtype=float)
    m = len(pts)
    md = np.empty(m)
    for a in range(m):
        d = sorted(math.dist(pts[a], pts[b]) for b in range(m) if b != a)
        md[a] = sum(d[:n]) / n
    mean = sum(md) / m
    std = math.sqrt(sum((v - mean) ** 2 for v in md) / m)
    return md <= mean + std_r * std


# -- localization ------------------------------------------------------------

def box_distance(obj, p):
    """Euclidean distance from ``p`` to the closed box of ``obj`` (0 inside)."""
    return float(np.linalg.norm(np.maximum.reduce([obj.lo - p, np.zeros(3), p - obj.hi])))
