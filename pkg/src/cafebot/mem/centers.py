"""Object pixel-center positioning with a deterministic 2-means split."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_ZETA = 25.0


class NoObservationError(ValueError):
    pass


@dataclass(frozen=True)
class TwoMeans:
    centroids: np.ndarray  # (2, 2) in (i, j)
    labels: np.ndarray  # (N,) in {0, 1}
    iterations: int

    def counts(self) -> tuple[int, int]:
        n1 = int(self.labels.sum())
        return len(self.labels) - n1, n1


def two_means(points, max_iter: int = 20, tol: float = 1e-6) -> TwoMeans:
    """2-means from a fixed initialization, refined by single-point transfers.

    Seeds are the lexicographically smallest and largest ``(i, j)`` points,
    so the result is a pure function of the input set.  Lloyd assignment
    ties go to cluster 0; an empty cluster keeps its previous centroid.
    Lloyd can stall on tied assignments (the four corners of a square split
    3:1), so the result is then improved by moving one point at a time to
    the other cluster whenever that lowers the within-cluster sum of
    squares.  Labels are finally swapped so that cluster 0 holds the
    lexicographically smallest point.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        raise NoObservationError("empty pixel set")
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    cent = np.stack([pts[order[0]], pts[order[-1]]])
    labels = np.zeros(len(pts), dtype=np.int8)
    it = 0
    for it in range(1, max_iter + 1):
        d0 = ((pts - cent[0]) ** 2).sum(axis=1)
        d1 = ((pts - cent[1]) ** 2).sum(axis=1)
        labels = (d1 < d0).astype(np.int8)
        new = cent.copy()
        for k in (0, 1):
            members = pts[labels == k]
            if len(members):
                new[k] = members.mean(axis=0)
        shift = float(np.max(np.linalg.norm(new - cent, axis=1)))
        cent = new
        if shift <= tol:
            break
    labels, cent = _transfer_refine(pts, labels, cent, order)
    if labels[order[0]] == 1:
        labels = (1 - labels).astype(np.int8)
        cent = cent[::-1].copy()
    return TwoMeans(cent, labels, it)


def _transfer_refine(pts, labels, cent, order, eps: float = 1e-9):
    """Move single points between clusters while that lowers the total SSE.

    Moving x from A (size a, centroid ca) to B changes the SSE by
    ``b/(b+1)|x-cb|^2 - a/(a-1)|x-ca|^2``.  The best move is taken each
    round; equal gains go to the point earliest in lexicographic order.
    """
    labels = labels.copy()
    cent = cent.copy()
    counts = np.array([np.sum(labels == 0), np.sum(labels == 1)], dtype=float)
    rank = np.empty(len(pts), dtype=np.int64)
    rank[order] = np.arange(len(pts))
    for _ in range(4 * len(pts)):
        src = labels.astype(np.int64)
        dst = 1 - src
        a = counts[src]
        b = counts[dst]
        d_src = ((pts - cent[src]) ** 2).sum(axis=1)
        d_dst = ((pts - cent[dst]) ** 2).sum(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            delta = b / (b + 1) * d_dst - np.where(a > 1, a / (a - 1), np.inf) * d_src
        delta[a <= 1] = np.inf  # never empty a cluster
        best = delta.min()
        if not best < -eps:
            break
        cand = np.flatnonzero(delta == best)
        k = cand[np.argmin(rank[cand])]
        s, t = src[k], dst[k]
        x = pts[k]
        cent[s] = (cent[s] * counts[s] - x) / (counts[s] - 1)
        cent[t] = (cent[t] * counts[t] + x) / (counts[t] + 1)
        counts[s] -= 1
        counts[t] += 1
        labels[k] = t
    # recompute exactly to shed incremental rounding
    for k in (0, 1):
        members = pts[labels == k]
        if len(members):
            cent[k] = members.mean(axis=0)
    return labels, cent


def select_cluster(fit: TwoMeans) -> int:
    """Index of the cluster kept when the two centroids are far apart.

    The larger cluster wins; on equal sizes the one with the smaller mean
    row index (``j``), then cluster 0.
    """
    n0, n1 = fit.counts()
    if n0 != n1:
        return 0 if n0 > n1 else 1
    if fit.centroids[0, 1] != fit.centroids[1, 1]:
        return 0 if fit.centroids[0, 1] < fit.centroids[1, 1] else 1
    return 0


def locate_pixel_center(pixels, zeta: float = DEFAULT_ZETA) -> np.ndarray:
    """Center of an object's pixel set as a real ``(i, j)``.

    Splits the pixels into two clusters.  If the centroids are more than
    ``zeta`` pixels apart the object is taken to be split (e.g. by an
    occluder) and the dominant cluster's centroid is returned; otherwise the
    midpoint of the two centroids.
    """
    fit = two_means(pixels)
    c0, c1 = fit.centroids
    d = float(np.hypot(*(c0 - c1)))
    if d > zeta:
        return fit.centroids[select_cluster(fit)].copy()
    return (c0 + c1) / 2.0


def snap_to_pixels(center, pixels) -> np.ndarray:
    """Nearest member of ``pixels`` to ``center``; ties resolve to the first in row-major order."""
    pts = np.asarray(pixels, dtype=float).reshape(-1, 2)
    d2 = ((pts - np.asarray(center, dtype=float)) ** 2).sum(axis=1)
    best = np.flatnonzero(d2 == d2.min())
    # row-major: smaller j first, then smaller i
    k = best[np.lexsort((pts[best, 0], pts[best, 1]))[0]]
    return pts[k]
