import numpy as np
import pytest

from sceneguide.descriptors import shape_descriptor
from sceneguide.guidance import (
    FLOOR,
    GuidanceConfig,
    _freeze_sets,
    collision_energy,
    composite_energy,
    composite_gradient,
    gravity_energy,
    relation_energy,
    resolve_supporters,
)
from sceneguide.rotation import matrix_to_rot6d
from sceneguide.scene import (
    SUPPORT,
    RelationGraphs,
    Scene,
    SceneObject,
    flatten_scene,
    unflatten,
)
from sceneguide.synthdata import GenSpec, gen_scene, make_box


def box_scene(specs, support_edges=()):
    objs = []
    for i, (size, p) in enumerate(specs):
        mesh = make_box(*size)
        objs.append(
            SceneObject(i, "box", mesh, np.asarray(p, dtype=float),
                        matrix_to_rot6d(np.eye(3)), shape_descriptor(mesh))
        )
    physical = np.zeros((len(objs), len(objs)), dtype=np.int64)
    for i, j in support_edges:
        physical[i, j] = SUPPORT
    graphs = RelationGraphs(np.zeros_like(physical), physical)
    return Scene(tuple(objs), graphs, floor_height=0.0)


def frozen_signature(scene, cfg):
    groups, gravity, relation, n_edges = _freeze_sets(scene, cfg)
    return (
        {k: tuple(v) for k, v in groups.items()},
        [(i, j, None if v is None else tuple(v), None if f is None else tuple(f))
         for i, j, v, f in gravity],
        [(i, j, tuple(o), tuple(h)) for i, j, o, h in relation],
        n_edges,
    )


class TestCollisionEnergy:
    def test_zero_when_disjoint(self):
        scene = box_scene([((0.4,) * 3, (0.0, 0.2, 0.0)), ((0.4,) * 3, (2.0, 0.2, 0.0))])
        assert collision_energy(scene) == 0.0

    def test_positive_when_overlapping(self):
        scene = box_scene([((0.6,) * 3, (0.0, 0.3, 0.0)), ((0.6,) * 3, (0.3, 0.3, 0.0))])
        assert collision_energy(scene) > 0.0

    def test_grows_with_penetration(self):
        shallow = box_scene([((0.6,) * 3, (0.0, 0.3, 0.0)), ((0.6,) * 3, (0.55, 0.3, 0.0))])
        deep = box_scene([((0.6,) * 3, (0.0, 0.3, 0.0)), ((0.6,) * 3, (0.35, 0.3, 0.0))])
        assert collision_energy(deep) > collision_energy(shallow) > 0.0


class TestGravityEnergy:
    def test_zero_at_exact_gap(self):
        cfg = GuidanceConfig()
        scene = box_scene([((0.4, 0.4, 0.4), (0.0, 0.2 + cfg.eps_gap, 0.0))])
        assert gravity_energy(scene, cfg) == 0.0

    def test_zero_within_float_band(self):
        cfg = GuidanceConfig()
        # 0.03 above the clearance, below the 0.05 band: tolerated.
        scene = box_scene([((0.4, 0.4, 0.4), (0.0, 0.2 + cfg.eps_gap + 0.03, 0.0))])
        assert gravity_energy(scene, cfg) == 0.0

    def test_floating_above_band_penalized(self):
        cfg = GuidanceConfig()
        scene = box_scene([((0.4, 0.4, 0.4), (0.0, 0.2 + cfg.eps_gap + 0.2, 0.0))])
        assert gravity_energy(scene, cfg) == pytest.approx(0.2)

    def test_penetrating_floor_penalized(self):
        cfg = GuidanceConfig()
        scene = box_scene([((0.4, 0.4, 0.4), (0.0, 0.15, 0.0))])
        # bottom at -0.05: residual -0.055 below the clearance
        assert gravity_energy(scene, cfg) == pytest.approx(0.055)

    def test_supported_object_uses_supporter_surface(self):
        cfg = GuidanceConfig()
        scene = box_scene(
            [((1.0, 0.5, 1.0), (0.0, 0.25 + cfg.eps_gap, 0.0)),
             ((0.3, 0.3, 0.3), (0.0, 0.85, 0.0))],
            support_edges=[(1, 0)],
        )
        # gap of upper over lower top (0.505): 0.7 - 0.505 = 0.195 -> residual 0.19
        assert gravity_energy(scene, cfg) == pytest.approx(0.19, abs=1e-12)

    def test_far_floating_object_exempt(self):
        cfg = GuidanceConfig()
        scene = box_scene([((0.4, 0.4, 0.4), (0.0, 3.0, 0.0))])
        assert resolve_supporters(scene, cfg) == {}
        assert gravity_energy(scene, cfg) == 0.0


class TestRelationEnergy:
    def test_zero_when_contained(self):
        scene = box_scene(
            [((1.0, 0.5, 1.0), (0.0, 0.255, 0.0)), ((0.3, 0.3, 0.3), (0.0, 0.66, 0.0))],
            support_edges=[(1, 0)],
        )
        assert relation_energy(scene) == 0.0

    def test_positive_when_overhanging(self):
        scene = box_scene(
            [((1.0, 0.5, 1.0), (0.0, 0.255, 0.0)), ((0.3, 0.3, 0.3), (0.45, 0.66, 0.0))],
            support_edges=[(1, 0)],
        )
        e = relation_energy(scene)
        # 4 of 8 vertices overhang by 0.1; normalized by (|V|, |E|) = (4, 1)
        assert e == pytest.approx(0.1)

    def test_scales_with_overhang(self):
        near = box_scene(
            [((1.0, 0.5, 1.0), (0.0, 0.255, 0.0)), ((0.3, 0.3, 0.3), (0.45, 0.66, 0.0))],
            support_edges=[(1, 0)],
        )
        far = box_scene(
            [((1.0, 0.5, 1.0), (0.0, 0.255, 0.0)), ((0.3, 0.3, 0.3), (0.6, 0.66, 0.0))],
            support_edges=[(1, 0)],
        )
        assert relation_energy(far) > relation_energy(near)

    def test_no_support_edges_no_energy(self):
        scene = box_scene([((0.4,) * 3, (0.0, 0.2, 0.0)), ((0.4,) * 3, (2.0, 0.2, 0.0))])
        assert relation_energy(scene) == 0.0


class TestComposite:
    def test_weighted_sum(self):
        scene = box_scene(
            [((1.0, 0.5, 1.0), (0.0, 0.255, 0.0)), ((0.3, 0.3, 0.3), (0.45, 0.9, 0.0))],
            support_edges=[(1, 0)],
        )
        cfg = GuidanceConfig()
        total = composite_energy(scene, cfg)
        parts = (
            cfg.lambda_collision * collision_energy(scene, cfg)
            + cfg.lambda_gravity * gravity_energy(scene, cfg)
            + cfg.lambda_relation * relation_energy(scene, cfg)
        )
        assert total == pytest.approx(parts, rel=1e-12)

    def test_zero_set_on_generated_scenes(self):
        for seed in range(30):
            scene = gen_scene(GenSpec(), seed=300 + seed)
            assert collision_energy(scene) == 0.0
            assert gravity_energy(scene) == 0.0
            assert relation_energy(scene) == 0.0


def interior_config(base_scene, rng, cfg, h):
    """Perturbed state whose frozen sets are stable across the FD stencil."""
    for _ in range(100):
        x0 = flatten_scene(base_scene) + 0.02 * rng.standard_normal(
            (base_scene.n, 9)
        )
        sig = frozen_signature(unflatten(x0, base_scene), cfg)
        stable = True
        for i in range(x0.shape[0]):
            for k in range(9):
                for s in (h, -h):
                    xp = x0.copy()
                    xp[i, k] += s
                    if frozen_signature(unflatten(xp, base_scene), cfg) != sig:
                        stable = False
                        break
                if not stable:
                    break
            if not stable:
                break
        if stable:
            return unflatten(x0, base_scene)
    raise AssertionError("could not find an interior configuration")


class TestGradients:
    def test_analytic_matches_fd_at_interior_points(self):
        cfg = GuidanceConfig()
        fd_cfg = GuidanceConfig(grad_mode="finite_difference", fd_step=1e-4)
        rng = np.random.default_rng(17)
        base = box_scene(
            [((0.6, 0.4, 0.5), (0.0, 0.205, 0.0)), ((0.3, 0.3, 0.3), (0.1, 0.56, 0.05))],
            support_edges=[(1, 0)],
        )
        for _ in range(5):
            scene = interior_config(base, rng, cfg, 1e-4)
            g = composite_gradient(scene, cfg)
            gfd = composite_gradient(scene, fd_cfg)
            scale = max(np.abs(gfd.gradient).max(), 1e-12)
            assert np.abs(g.gradient - gfd.gradient).max() / scale < 1e-3

    def test_gradient_descends_energy(self):
        scene = box_scene([((0.6,) * 3, (0.0, 0.3, 0.0)), ((0.6,) * 3, (0.3, 0.32, 0.05))])
        cfg = GuidanceConfig()
        x = flatten_scene(scene)
        e0 = composite_energy(scene, cfg)
        g = composite_gradient(scene, cfg).gradient
        x2 = x - 0.5 * g / max(np.linalg.norm(g), 1e-12)
        e1 = composite_energy(unflatten(x2, scene), cfg)
        assert e1 < e0

    def test_gradient_zero_on_zero_set(self):
        scene = gen_scene(GenSpec(), seed=5)
        g = composite_gradient(scene)
        assert np.all(g.gradient == 0.0)

    def test_floor_supporter_in_frozen_sets(self):
        cfg = GuidanceConfig()
        scene = box_scene([((0.4,) * 3, (0.0, 0.5, 0.0))])
        _, gravity, _, _ = _freeze_sets(scene, cfg)
        assert gravity[0][1] == FLOOR
