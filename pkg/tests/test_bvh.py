import numpy as np

from sceneguide.meshgeom import (
    build_bvh,
    candidate_pairs,
    find_collision_pairs,
    tri_tri_intersect,
)
from sceneguide.rotation import random_rotation
from sceneguide.synthdata import make_box, make_cylinder


BOX_EPS = 1e-9  # closed-with-epsilon overlap, same convention as the library


def brute_aabb_pairs(mesh_a, mesh_b):
    """All face pairs whose axis-aligned boxes overlap (closed)."""
    ta = mesh_a.triangles()
    tb = mesh_b.triangles()
    lo_a, hi_a = ta.min(axis=1), ta.max(axis=1)
    lo_b, hi_b = tb.min(axis=1), tb.max(axis=1)
    overlap = np.all(
        (lo_a[:, None, :] <= hi_b[None, :, :] + BOX_EPS)
        & (lo_b[None, :, :] <= hi_a[:, None, :] + BOX_EPS),
        axis=2,
    )
    ii, jj = np.nonzero(overlap)
    return set(zip(ii.tolist(), jj.tolist()))


def brute_collisions(meshes):
    """O(F^2) oracle: every intersecting (a, fi, b, fj) with a < b."""
    out = set()
    for a in range(len(meshes)):
        for b in range(a + 1, len(meshes)):
            ta = meshes[a].triangles()
            tb = meshes[b].triangles()
            for fi, fj in brute_aabb_pairs(meshes[a], meshes[b]):
                if tri_tri_intersect(ta[fi], tb[fj]):
                    out.add((a, fi, b, fj))
    return out


def random_pair(seed):
    rng = np.random.default_rng(seed)
    meshes = []
    for _ in range(2):
        if rng.random() < 0.5:
            mesh = make_box(*rng.uniform(0.3, 1.0, 3))
        else:
            mesh = make_cylinder(rng.uniform(0.15, 0.5), rng.uniform(0.3, 1.0))
        R = random_rotation(rng)
        p = rng.uniform(-0.6, 0.6, 3)
        meshes.append(mesh.transformed(R, p))
    return meshes


def test_candidate_set_equals_brute_aabb_overlap():
    for seed in range(20):
        a, b = random_pair(seed)
        bvh_a, bvh_b = build_bvh(a), build_bvh(b)
        got = {tuple(row) for row in candidate_pairs(bvh_a, bvh_b).tolist()}
        assert got == brute_aabb_pairs(a, b)


def test_collision_pairs_match_brute_force():
    hits = 0
    for seed in range(30):
        meshes = random_pair(seed)
        got = find_collision_pairs(meshes)
        want = brute_collisions(meshes)
        assert got == want
        hits += bool(want)
    assert hits > 5  # the corpus must exercise actual intersections


def test_three_object_scene():
    rng = np.random.default_rng(123)
    meshes = [
        make_box(0.6, 0.6, 0.6).transformed(random_rotation(rng), rng.uniform(-0.4, 0.4, 3))
        for _ in range(3)
    ]
    assert find_collision_pairs(meshes) == brute_collisions(meshes)


def test_disjoint_objects_yield_nothing():
    a = make_box(1.0, 1.0, 1.0)
    b = make_box(1.0, 1.0, 1.0).transformed(np.eye(3), np.array([5.0, 0.0, 0.0]))
    assert find_collision_pairs([a, b]) == set()


def test_identical_overlapping_cubes_hit_everywhere():
    a = make_box(1.0, 1.0, 1.0)
    b = make_box(1.0, 1.0, 1.0).transformed(np.eye(3), np.array([0.5, 0.0, 0.0]))
    pairs = find_collision_pairs([a, b])
    assert pairs == brute_collisions([a, b])
    assert len(pairs) > 0
