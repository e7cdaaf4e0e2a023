import numpy as np
import pytest

from sceneguide.descriptors import DESCRIPTOR_DIM, shape_descriptor
from sceneguide.errors import EmptyMesh, GraphSizeMismatch, ShapeMismatch, UnknownLabel
from sceneguide.mesh import TriMesh
from sceneguide.rotation import matrix_to_rot6d, random_rotation
from sceneguide.scene import (
    RelationGraphs,
    Scene,
    SceneObject,
    flatten_scene,
    scene_from_json,
    scene_to_json,
    unflatten,
)
from sceneguide.synthdata import GenSpec, gen_scene, make_box, make_cylinder, make_table


def unit_cube():
    return make_box(1.0, 1.0, 1.0)


class TestTriMesh:
    def test_cube_quantities(self):
        cube = unit_cube()
        assert cube.volume() == pytest.approx(1.0)
        assert cube.area() == pytest.approx(6.0)
        lo, hi = cube.aabb()
        assert np.allclose(hi - lo, 1.0)
        assert np.allclose(cube.centroid(), 0.0)
        assert np.allclose(cube.volume_centroid(), 0.0, atol=1e-12)

    def test_cylinder_volume_approaches_analytic(self):
        # A 16-gon prism has the area of the inscribed polygon, below pi r^2.
        cyl = make_cylinder(0.5, 2.0, segments=16)
        poly_area = 0.5 * 16 * 0.5**2 * np.sin(2 * np.pi / 16)
        assert cyl.volume() == pytest.approx(poly_area * 2.0, rel=1e-12)

    def test_normals_point_outward(self):
        cube = unit_cube()
        centers = cube.triangles().mean(axis=1)
        assert np.all(np.sum(cube.face_normals() * centers, axis=1) > 0)

    def test_transformed_is_rigid(self):
        rng = np.random.default_rng(5)
        R = random_rotation(rng)
        p = rng.standard_normal(3)
        moved = unit_cube().transformed(R, p)
        assert moved.volume() == pytest.approx(1.0)
        assert np.allclose(moved.centroid(), p)

    def test_validation(self):
        with pytest.raises(EmptyMesh):
            TriMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
        with pytest.raises(ShapeMismatch):
            TriMesh(np.zeros((3, 3)), np.array([[0, 1, 5]]))


class TestGraphs:
    def test_antisymmetry_enforced(self):
        s = np.zeros((2, 2), dtype=np.int64)
        s[0, 1] = 1  # left_of without the paired right_of
        g = RelationGraphs(s, np.zeros((2, 2), dtype=np.int64))
        with pytest.raises(GraphSizeMismatch):
            g.validate()

    def test_support_cycle_rejected(self):
        p = np.zeros((2, 2), dtype=np.int64)
        p[0, 1] = p[1, 0] = 1
        g = RelationGraphs(np.zeros((2, 2), dtype=np.int64), p)
        with pytest.raises(GraphSizeMismatch):
            g.validate()

    def test_generated_graphs_validate(self):
        for seed in range(5):
            gen_scene(GenSpec(), seed=seed).graphs.validate()

    def test_label_range_checked(self):
        with pytest.raises(UnknownLabel):
            RelationGraphs(np.full((2, 2), 99), np.zeros((2, 2), dtype=np.int64))


class TestSceneState:
    def test_flatten_unflatten_round_trip(self):
        scene = gen_scene(GenSpec(), seed=3)
        x = flatten_scene(scene)
        assert x.shape == (scene.n, 9)
        back = unflatten(x, scene)
        for a, b in zip(scene.objects, back.objects):
            assert np.array_equal(a.p, b.p)
            assert np.array_equal(a.r, b.r)

    def test_unflatten_shape_check(self):
        scene = gen_scene(GenSpec(), seed=3)
        with pytest.raises(ShapeMismatch):
            unflatten(np.zeros((scene.n + 1, 9)), scene)

    def test_ids_must_be_dense(self):
        cube = unit_cube()
        desc = shape_descriptor(cube)
        obj = SceneObject(0, "box", cube, np.zeros(3), matrix_to_rot6d(np.eye(3)), desc)
        bad = SceneObject(2, "box", cube, np.ones(3), matrix_to_rot6d(np.eye(3)), desc)
        with pytest.raises(ShapeMismatch):
            Scene((obj, bad), RelationGraphs.empty(2))


class TestJsonCodec:
    def test_round_trip_preserves_poses_bitwise(self):
        scene = gen_scene(GenSpec(n_objects=(8, 8)), seed=11)
        back = scene_from_json(scene_to_json(scene))
        assert back.n == scene.n
        for a, b in zip(scene.objects, back.objects):
            assert np.array_equal(a.p, b.p)
            assert np.array_equal(a.r, b.r)
            assert np.array_equal(a.mesh.vertices, b.mesh.vertices)
            assert np.array_equal(a.mesh.faces, b.mesh.faces)
        assert np.array_equal(back.graphs.spatial, scene.graphs.spatial)
        assert np.array_equal(back.graphs.physical, scene.graphs.physical)

    def test_serialization_deterministic(self):
        scene = gen_scene(GenSpec(), seed=2)
        assert scene_to_json(scene) == scene_to_json(scene_from_json(scene_to_json(scene)))

    def test_unknown_version_rejected(self):
        scene = gen_scene(GenSpec(), seed=2)
        text = scene_to_json(scene).replace('"version": 1', '"version": 99')
        with pytest.raises(ShapeMismatch):
            scene_from_json(text)

    def test_unknown_label_rejected(self):
        scene = gen_scene(GenSpec(n_objects=(2, 2)), seed=2)
        text = scene_to_json(scene).replace('"none"', '"nonsense"', 1)
        with pytest.raises(UnknownLabel):
            scene_from_json(text)


class TestDescriptor:
    def test_dimension_and_determinism(self):
        d1 = shape_descriptor(unit_cube())
        d2 = shape_descriptor(unit_cube())
        assert d1.shape == (DESCRIPTOR_DIM,)
        assert np.array_equal(d1, d2)

    def test_known_entries_for_cube(self):
        d = shape_descriptor(unit_cube())
        assert np.allclose(d[:3], 1.0)  # extents
        assert d[3] == pytest.approx(6.0)  # area
        assert d[4] == pytest.approx(1.0)  # volume

    def test_invariant_to_face_order(self):
        cube = unit_cube()
        perm = np.random.default_rng(0).permutation(len(cube.faces))
        shuffled = TriMesh(cube.vertices, cube.faces[perm])
        assert np.array_equal(shape_descriptor(cube), shape_descriptor(shuffled))

    def test_invariant_to_vertex_relabeling(self):
        cube = unit_cube()
        perm = np.random.default_rng(1).permutation(len(cube.vertices))
        inv = np.argsort(perm)
        relabeled = TriMesh(cube.vertices[perm], inv[cube.faces])
        assert np.array_equal(shape_descriptor(cube), shape_descriptor(relabeled))

    def test_scales_with_size(self):
        small = shape_descriptor(make_box(0.5, 0.5, 0.5))
        big = shape_descriptor(make_box(1.0, 1.0, 1.0))
        assert np.all(small[:5] < big[:5])

    def test_table_descriptor_finite(self):
        d = shape_descriptor(make_table(0.8, 0.6, 0.5))
        assert np.all(np.isfinite(d))
        assert d[4] > 0
