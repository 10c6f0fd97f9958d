"""Colored point clouds and statistical outlier removal."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree


class SmallCloudWarning(UserWarning):
    """The cloud has too few points for the requested neighbor count."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ColoredPointCloud:
    points: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))
    colors: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.uint8))

    def __post_init__(self):
        p = np.array(self.points, dtype=float).reshape(-1, 3)
        c = np.array(self.colors, dtype=np.uint8).reshape(-1, 3)
        if len(p) != len(c):
            raise ValueError("points and colors must have the same length")
        if not np.all(np.isfinite(p)):
            raise ValueError("point cloud contains non-finite coordinates")
        object.__setattr__(self, "points", _frozen(p))
        object.__setattr__(self, "colors", _frozen(c))

    def __len__(self) -> int:
        return len(self.points)

    def subset(self, mask) -> "ColoredPointCloud":
        return ColoredPointCloud(self.points[mask], self.colors[mask])

    def concat(self, other: "ColoredPointCloud") -> "ColoredPointCloud":
        if len(other) == 0:
            return self
        return ColoredPointCloud(np.vstack([self.points, other.points]), np.vstack([self.colors, other.colors]))


@dataclass(frozen=True)
class OutlierParams:
    n: int = 16
    std_r: float = 2.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not self.std_r > 0:
            raise ValueError("std_r must be > 0")


def mean_neighbor_distances(points: np.ndarray, n: int) -> np.ndarray:
    """Mean distance from every point to its ``n`` nearest other points."""
    tree = cKDTree(points)
    dist, _ = tree.query(points, k=n + 1)
    # column 0 is the query point itself (or an exact duplicate, also at 0)
    return dist[:, 1:].mean(axis=1)


def outlier_mask(points, params: OutlierParams = OutlierParams()) -> np.ndarray:
    """Boolean mask of points to keep.

    A point is dropped when its mean neighbor distance is greater than
    ``mean + std_r * std`` of those per-point means (population std).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if len(pts) <= params.n:
        warnings.warn(
            f"cloud of {len(pts)} points is too small for n={params.n}; left unchanged",
            SmallCloudWarning,
            stacklevel=2,
        )
        return np.ones(len(pts), dtype=bool)
    md = mean_neighbor_distances(pts, params.n)
    dis_g = md.mean()
    std_g = md.std()
    return md <= dis_g + params.std_r * std_g


def remove_outliers(cloud: ColoredPointCloud, params: OutlierParams = OutlierParams()) -> ColoredPointCloud:
    if len(cloud) <= params.n:
        warnings.warn(
            f"cloud of {len(cloud)} points is too small for n={params.n}; left unchanged",
            SmallCloudWarning,
            stacklevel=2,
        )
        return cloud
    return cloud.subset(outlier_mask(cloud.points, params))
