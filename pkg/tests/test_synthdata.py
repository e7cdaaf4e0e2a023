import json

import numpy as np
import pytest

from sceneguide.errors import PlacementFailure
from sceneguide.metrics import col_mesh_rate
from sceneguide.scene import SUPPORT, flatten_scene, scene_from_json
from sceneguide.synthdata import (
    GenSpec,
    gen_dataset,
    gen_scene,
    load_dataset,
    make_box,
    make_cylinder,
    make_table,
)


class TestSpec:
    def test_defaults_valid(self):
        GenSpec()

    def test_empty_range_rejected(self):
        with pytest.raises(ValueError):
            GenSpec(n_objects=(5, 2))

    def test_bad_extent_rejected(self):
        with pytest.raises(ValueError):
            GenSpec(room_half_extent=0.0)

    def test_depth_capped(self):
        with pytest.raises(ValueError):
            GenSpec(max_depth=4)


class TestPrimitives:
    def test_box_centered(self):
        assert np.allclose(make_box(0.7, 0.4, 0.9).centroid(), 0.0)

    def test_cylinder_has_16_segments(self):
        cyl = make_cylinder(0.3, 0.5)
        # 2 rings of 16 + 2 cap centers; 4 triangles per segment
        assert len(cyl.vertices) == 34
        assert len(cyl.faces) == 64

    def test_table_has_flat_top(self):
        table = make_table(0.8, 0.6, 0.5)
        top = table.vertices[:, 1].max()
        n_top = np.sum(np.isclose(table.vertices[:, 1], top))
        assert n_top == 4  # the slab's four top corners
        height = top - table.vertices[:, 1].min()
        assert height == pytest.approx(0.5)


class TestGenScene:
    def test_deterministic(self):
        a = gen_scene(GenSpec(), seed=4)
        b = gen_scene(GenSpec(), seed=4)
        assert np.array_equal(flatten_scene(a), flatten_scene(b))
        assert np.array_equal(a.graphs.physical, b.graphs.physical)

    def test_object_count_in_range(self):
        spec = GenSpec(n_objects=(3, 5))
        for seed in range(10):
            assert 3 <= gen_scene(spec, seed=seed).n <= 5

    def test_stack_has_support_edge(self):
        spec = GenSpec(n_objects=(2, 2), stack_prob=1.0, floor_size=(0.8, 1.0))
        scene = gen_scene(spec, seed=1)
        assert np.any(scene.graphs.physical == SUPPORT)

    def test_no_collisions_in_corpus(self):
        scenes = [gen_scene(GenSpec(), seed=1100 + k) for k in range(10)]
        assert col_mesh_rate(scenes, samples=500) == 0.0

    def test_support_gap_is_construction_gap(self):
        spec = GenSpec(n_objects=(2, 2), stack_prob=1.0, floor_size=(0.8, 1.0))
        scene = gen_scene(spec, seed=2)
        meshes = scene.posed_meshes()
        (i, j) = scene.graphs.support_pairs()[0]
        gap = meshes[i].vertices[:, 1].min() - meshes[j].vertices[:, 1].max()
        assert gap == pytest.approx(spec.eps_gap, abs=1e-12)

    def test_objects_inside_room(self):
        spec = GenSpec()
        for seed in range(6):
            scene = gen_scene(spec, seed=seed)
            for mesh in scene.posed_meshes():
                lo, hi = mesh.aabb()
                assert lo[0] >= -spec.room_half_extent - 1e-9
                assert hi[0] <= spec.room_half_extent + 1e-9
                assert lo[2] >= -spec.room_half_extent - 1e-9
                assert hi[2] <= spec.room_half_extent + 1e-9

    def test_overdense_spec_fails(self):
        spec = GenSpec(n_objects=(30, 30), room_half_extent=0.8, stack_prob=0.0)
        with pytest.raises(PlacementFailure):
            gen_scene(spec, seed=0)


class TestGenDataset:
    def test_split_counts_and_manifest(self, tmp_path):
        manifest = gen_dataset(GenSpec(), 10, 0.8, tmp_path)
        doc = json.loads(manifest.read_text())
        assert len(doc["train"]) == 8
        assert len(doc["test"]) == 2
        assert len(set(doc["seeds"])) == 10
        assert doc["spec"]["n_objects"] == [2, 6]

    def test_files_round_trip_bitwise(self, tmp_path):
        manifest = gen_dataset(GenSpec(n_objects=(2, 3)), 4, 0.5, tmp_path)
        doc = json.loads(manifest.read_text())
        for name in doc["train"] + doc["test"]:
            text = (tmp_path / name).read_text()
            scene = scene_from_json(text)
            from sceneguide.scene import scene_to_json

            assert scene_to_json(scene) == text

    def test_rerun_byte_identical(self, tmp_path):
        a_dir = tmp_path / "a"
        b_dir = tmp_path / "b"
        gen_dataset(GenSpec(), 5, 0.8, a_dir)
        gen_dataset(GenSpec(), 5, 0.8, b_dir)
        for f in sorted(a_dir.iterdir()):
            assert f.read_bytes() == (b_dir / f.name).read_bytes()

    def test_load_dataset(self, tmp_path):
        manifest = gen_dataset(GenSpec(n_objects=(2, 3)), 5, 0.6, tmp_path)
        train, test = load_dataset(manifest)
        assert len(train) == 3
        assert len(test) == 2

    def test_bad_arguments(self, tmp_path):
        with pytest.raises(ValueError):
            gen_dataset(GenSpec(), 1, 0.8, tmp_path)
        with pytest.raises(ValueError):
            gen_dataset(GenSpec(), 5, 1.5, tmp_path)
