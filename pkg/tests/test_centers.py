import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cafebot.mem.centers import (
    NoObservationError,
    TwoMeans,
    locate_pixel_center,
    select_cluster,
    snap_to_pixels,
    two_means,
)

from oracles import brute_two_means, ref_center


def ellipse(ci, cj, a, b, theta=0.0):
    """Integer pixels inside a rotated ellipse centered at ``(ci, cj)`` (centrally symmetric)."""
    r = int(np.ceil(max(a, b))) + 1
    ii, jj = np.meshgrid(np.arange(-r, r + 1), np.arange(-r, r + 1), indexing="ij")
    c, s = np.cos(theta), np.sin(theta)
    u = c * ii + s * jj
    v = -s * ii + c * jj
    inside = (u / a) ** 2 + (v / b) ** 2 <= 1.0
    return np.stack([ii[inside] + ci, jj[inside] + cj], axis=1).astype(float)


def blob(center, n, rng, spread=1.0):
    return rng.normal(center, spread, size=(n, 2))


class TestTwoMeans:
    def test_empty_raises(self):
        with pytest.raises(NoObservationError):
            two_means(np.zeros((0, 2)))

    def test_square_corners(self):
        pts = [(0, 0), (0, 2), (2, 0), (2, 2)]
        np.testing.assert_allclose(locate_pixel_center(pts, zeta=10), [1.0, 1.0])

    def test_single_pixel_repeated(self):
        fit = two_means([(5, 7)] * 6)
        np.testing.assert_allclose(fit.centroids, [[5, 7], [5, 7]])
        np.testing.assert_allclose(locate_pixel_center([(5, 7)] * 6), [5, 7])

    def test_lexicographic_seed_cluster_zero(self, rng):
        pts = np.vstack([blob((30, 30), 20, rng), blob((5, 5), 20, rng)])
        fit = two_means(pts)
        lexmin = pts[np.lexsort((pts[:, 1], pts[:, 0]))[0]]
        assert fit.labels[np.flatnonzero((pts == lexmin).all(axis=1))[0]] == 0

    def test_order_independent(self, rng):
        pts = np.vstack([blob((10, 10), 30, rng), blob((40, 12), 25, rng)])
        perm = rng.permutation(len(pts))
        a = locate_pixel_center(pts)
        b = locate_pixel_center(pts[perm])
        np.testing.assert_allclose(a, b, atol=1e-12)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_matches_brute_partition_on_separated_blobs(self, seed):
        rng = np.random.default_rng(seed)
        n0, n1 = rng.integers(3, 9, size=2)
        sep = rng.uniform(15, 60)
        ang = rng.uniform(0, 2 * np.pi)
        c0 = rng.uniform(0, 100, 2)
        pts = np.vstack([blob(c0, n0, rng), blob(c0 + sep * np.array([np.cos(ang), np.sin(ang)]), n1, rng)])
        fit = two_means(pts)
        cent, lab, _ = brute_two_means(pts)
        np.testing.assert_array_equal(fit.labels, lab)
        np.testing.assert_allclose(fit.centroids, cent, atol=1e-9)


class TestCenterRule:
    def test_far_picks_larger_cluster(self, rng):
        pts = np.vstack([blob((10, 10), 40, rng, 0.5), blob((110, 110), 10, rng, 0.5)])
        got = locate_pixel_center(pts, zeta=20)
        np.testing.assert_allclose(got, pts[:40].mean(axis=0), atol=1e-9)

    def test_far_tie_prefers_smaller_row(self):
        top = [(100, 2), (101, 2), (100, 3)]
        bottom = [(0, 80), (1, 80), (0, 81)]
        got = locate_pixel_center(top + bottom, zeta=10)
        np.testing.assert_allclose(got, np.mean(top, axis=0))

    def test_full_tie_falls_to_cluster_zero(self):
        fit = TwoMeans(np.array([[0.0, 5.0], [9.0, 5.0]]), np.array([0, 1]), 1)
        assert select_cluster(fit) == 0

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10**6), st.sampled_from([5.0, 25.0, 60.0]))
    def test_matches_reference_rule(self, seed, zeta):
        rng = np.random.default_rng(seed)
        pts = np.vstack([blob(rng.uniform(0, 50, 2), 6, rng), blob(rng.uniform(60, 120, 2), 5, rng)])
        ref, _ = ref_center(pts, zeta)
        np.testing.assert_allclose(locate_pixel_center(pts, zeta), ref, atol=1e-9)

    @pytest.mark.parametrize("a,b,theta", [(3, 3, 0), (8, 3, 0.4), (12, 5, 1.1), (20, 9, 2.5)])
    def test_symmetric_blob_center_within_one_pixel(self, a, b, theta):
        pts = ellipse(50, 40, a, b, theta)
        got = locate_pixel_center(pts)
        assert np.linalg.norm(got - pts.mean(axis=0)) <= 1.0

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10**6))
    def test_midpoint_offset_identity(self, seed):
        # centroid - midpoint = (n0 - n1) / (2N) * (c0 - c1) for any split
        rng = np.random.default_rng(seed)
        pts = rng.uniform(0, 40, size=(rng.integers(4, 60), 2))
        fit = two_means(pts)
        n0, n1 = fit.counts()
        c0, c1 = fit.centroids
        if n0 == 0 or n1 == 0:
            return
        mid = (c0 + c1) / 2
        expected = (n0 - n1) / (2 * (n0 + n1)) * (c0 - c1)
        np.testing.assert_allclose(pts.mean(axis=0) - mid, expected, atol=1e-9)


class TestSnap:
    def test_nearest_member(self):
        pix = np.array([[0, 0], [4, 4], [9, 9]])
        np.testing.assert_array_equal(snap_to_pixels([3.6, 3.9], pix), [4, 4])

    def test_tie_goes_row_major(self):
        pix = np.array([[2, 1], [0, 1], [1, 0], [1, 2]])
        np.testing.assert_array_equal(snap_to_pixels([1, 1], pix), [1, 0])

    def test_result_is_member(self, rng):
        pix = rng.integers(0, 100, size=(50, 2))
        out = snap_to_pixels(locate_pixel_center(pix), pix)
        assert (pix == out).all(axis=1).any()
