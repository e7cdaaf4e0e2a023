import numpy as np
import pytest

from sceneguide.errors import DegenerateTriangle
from sceneguide.meshgeom import tri_pairs_intersect, tri_tri_intersect


def sat_disjoint(t1, t2, margin=0.0):
    """Separating-axis oracle: True when some axis strictly separates.

    Independent of the interval-overlap method under test: checks the two
    face normals and all nine edge-cross axes.
    """
    axes = []
    for tri in (t1, t2):
        n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
        axes.append(n)
    for ea in (t1[1] - t1[0], t1[2] - t1[1], t1[0] - t1[2]):
        for eb in (t2[1] - t2[0], t2[2] - t2[1], t2[0] - t2[2]):
            axes.append(np.cross(ea, eb))
    for axis in axes:
        norm = np.linalg.norm(axis)
        if norm < 1e-12:
            continue
        axis = axis / norm
        p1 = t1 @ axis
        p2 = t2 @ axis
        if p1.max() < p2.min() - margin or p2.max() < p1.min() - margin:
            return True
    return False


class TestKnownCases:
    def test_crossing_triangles(self):
        t1 = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 2.0, 0.0]])
        t2 = np.array([[0.5, 0.5, -1.0], [0.5, 0.5, 1.0], [1.5, 0.5, 0.0]])
        assert tri_tri_intersect(t1, t2)

    def test_disjoint_parallel(self):
        t1 = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        t2 = t1 + np.array([0.0, 0.0, 0.5])
        assert not tri_tri_intersect(t1, t2)

    def test_shared_edge_counts_as_intersection(self):
        # Closed convention: touching along an edge intersects.
        t1 = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        t2 = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, -1.0, 1.0]])
        assert tri_tri_intersect(t1, t2)

    def test_single_shared_vertex(self):
        t1 = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        t2 = np.array([[0.0, 0.0, 0.0], [-1.0, 0.0, 1.0], [0.0, -1.0, 1.0]])
        assert tri_tri_intersect(t1, t2)

    def test_coplanar_overlapping(self):
        t1 = np.array([[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 0.0, 2.0]])
        t2 = np.array([[0.5, 0.0, 0.5], [2.5, 0.0, 0.5], [0.5, 0.0, 2.5]])
        assert tri_tri_intersect(t1, t2)

    def test_coplanar_contained(self):
        t1 = np.array([[0.0, 0.0, 0.0], [4.0, 0.0, 0.0], [0.0, 0.0, 4.0]])
        t2 = np.array([[0.5, 0.0, 0.5], [1.0, 0.0, 0.5], [0.5, 0.0, 1.0]])
        assert tri_tri_intersect(t1, t2)
        assert tri_tri_intersect(t2, t1)

    def test_coplanar_disjoint(self):
        t1 = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        t2 = t1 + np.array([5.0, 0.0, 0.0])
        assert not tri_tri_intersect(t1, t2)

    def test_degenerate_raises(self):
        good = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
        sliver = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [2.0, 0.0, 0.0]])
        with pytest.raises(DegenerateTriangle):
            tri_tri_intersect(good, sliver)


class TestAgainstSatOracle:
    def test_random_pairs(self):
        rng = np.random.default_rng(99)
        checked = 0
        while checked < 400:
            t1 = rng.uniform(-1, 1, (3, 3))
            t2 = rng.uniform(-1, 1, (3, 3))
            a1 = np.linalg.norm(np.cross(t1[1] - t1[0], t1[2] - t1[0]))
            a2 = np.linalg.norm(np.cross(t2[1] - t2[0], t2[2] - t2[0]))
            if min(a1, a2) < 1e-3:
                continue
            # Skip near-touching pairs where convention details dominate.
            disj_tight = sat_disjoint(t1, t2, margin=0.0)
            disj_loose = sat_disjoint(t1, t2, margin=1e-7)
            if disj_tight != disj_loose:
                continue
            assert tri_tri_intersect(t1, t2) == (not disj_tight)
            checked += 1

    def test_vectorized_matches_scalar(self):
        rng = np.random.default_rng(4)
        tris_a = rng.uniform(-1, 1, (60, 3, 3))
        tris_b = rng.uniform(-1, 1, (60, 3, 3))
        batch = tri_pairs_intersect(tris_a, tris_b)
        scalar = np.array(
            [tri_tri_intersect(a, b) for a, b in zip(tris_a, tris_b)]
        )
        assert np.array_equal(batch, scalar)
