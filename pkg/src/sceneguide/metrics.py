"""Physical-plausibility metrics: Col_mesh, GRecall, ASD, Stability."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .meshgeom import (
    find_collision_pairs,
    sample_surface,
    signed_point_mesh_distance,
)
from .relations import RelationParams, derive_relations
from .scene import NONE, RelationGraphs, Scene
from .settle import settle

COL_DEPTH_THRESHOLD = 0.01
METRIC_SAMPLES = 2000
_SAMPLE_SEED = 97531


@dataclass
class MetricReport:
    col_mesh: float
    grecall: float
    asd: float | None  # None when the set has no support pairs
    stability: float
    per_scene: dict = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "col_mesh": self.col_mesh,
            "grecall": self.grecall,
            "asd": self.asd,
            "stability": self.stability,
            "per_scene": self.per_scene,
        }
        return json.dumps(payload, sort_keys=True, indent=2)


def penetration_depth(scene: Scene, a: int, b: int, samples: int = METRIC_SAMPLES) -> float:
    """Estimated penetration depth between two posed objects.

    Maximum magnitude of negative signed distance, over surface samples
    of each object measured against the other's mesh.
    """
    meshes = scene.posed_meshes()
    sa = sample_surface(meshes[a], samples, _SAMPLE_SEED + a)
    sb = sample_surface(meshes[b], samples, _SAMPLE_SEED + b)
    d_ab = signed_point_mesh_distance(sa.points, meshes[b])
    d_ba = signed_point_mesh_distance(sb.points, meshes[a])
    return float(max(0.0, -min(d_ab.min(), d_ba.min())))


def col_mesh_rate(
    scenes: list[Scene],
    threshold: float = COL_DEPTH_THRESHOLD,
    samples: int = METRIC_SAMPLES,
) -> float:
    """Fraction of objects in at least one collision deeper than threshold."""
    flagged = 0
    total = 0
    for scene in scenes:
        total += scene.n
        if scene.n < 2:
            continue
        pairs = find_collision_pairs(scene.posed_meshes())
        object_pairs = sorted({(a, b) for a, _, b, _ in pairs})
        hit: set[int] = set()
        for a, b in object_pairs:
            if a in hit and b in hit:
                continue
            if penetration_depth(scene, a, b, samples) > threshold:
                hit.update((a, b))
        flagged += len(hit)
    return flagged / total if total else 0.0


def grecall(
    generated: list[Scene],
    truth_graphs: list[RelationGraphs],
    params: RelationParams = RelationParams(),
) -> float:
    """Fraction of non-`none` ground-truth edges realized by the poses.

    Spatial and physical edges are counted separately and micro-averaged;
    an empty ground-truth graph scores 1.0 (vacuous).
    """
    if len(generated) != len(truth_graphs):
        from .errors import GraphSizeMismatch

        raise GraphSizeMismatch("scene/truth count mismatch")
    matched = 0
    total = 0
    for scene, truth in zip(generated, truth_graphs):
        if truth.n != scene.n:
            from .errors import GraphSizeMismatch

            raise GraphSizeMismatch("graph size does not match scene")
        derived = derive_relations(scene, params)
        for gt, got in ((truth.spatial, derived.spatial), (truth.physical, derived.physical)):
            mask = gt != NONE
            total += int(mask.sum())
            matched += int((gt[mask] == got[mask]).sum())
    return matched / total if total else 1.0


def asd(scenes: list[Scene], samples: int = METRIC_SAMPLES) -> float | None:
    """Average support distance: |min signed distance| per support pair."""
    dists = []
    for scene in scenes:
        meshes = scene.posed_meshes()
        for i, j in scene.graphs.support_pairs():
            si = sample_surface(meshes[i], samples, _SAMPLE_SEED + i)
            d = signed_point_mesh_distance(si.points, meshes[j])
            dists.append(abs(float(d.min())))
    return float(np.mean(dists)) if dists else None


def stability(
    scenes: list[Scene],
    runs: int = 10,
    jitter: float = 0.002,
    seed: int = 0,
    max_iters: int = 20,
    params: RelationParams = RelationParams(),
) -> float:
    """Fraction of non-`none` relations preserved by repeated settling.

    Each run perturbs positions with small Gaussian jitter (a
    deterministic settler needs it to make repetition meaningful), then
    settles and re-derives relations.
    """
    rng = np.random.default_rng(seed)
    scores = []
    for scene in scenes:
        before = derive_relations(scene, params)
        mask_s = before.spatial != NONE
        mask_p = before.physical != NONE
        total_edges = int(mask_s.sum() + mask_p.sum())
        for _ in range(runs):
            jittered = _jitter_scene(scene, jitter, rng)
            after_scene = settle(jittered, max_iters=max_iters).scene
            after = derive_relations(after_scene, params)
            if total_edges == 0:
                scores.append(1.0)
                continue
            kept = int(
                (before.spatial[mask_s] == after.spatial[mask_s]).sum()
                + (before.physical[mask_p] == after.physical[mask_p]).sum()
            )
            scores.append(kept / total_edges)
    return float(np.mean(scores)) if scores else 1.0


def _jitter_scene(scene: Scene, sigma: float, rng: np.random.Generator) -> Scene:
    objs = tuple(
        replace(o, p=o.p + sigma * rng.standard_normal(3)) for o in scene.objects
    )
    return replace(scene, objects=objs)


def evaluate(
    generated: list[Scene],
    truth_graphs: list[RelationGraphs] | None = None,
    runs: int = 10,
    samples: int = METRIC_SAMPLES,
    seed: int = 0,
) -> MetricReport:
    """Full metric suite over a scene set."""
    truths = truth_graphs if truth_graphs is not None else [s.graphs for s in generated]
    col = col_mesh_rate(generated, samples=samples)
    rec = grecall(generated, truths)
    support = asd(generated, samples=samples)
    stab = stability(generated, runs=runs, seed=seed)
    per_scene = {
        str(k): {"col_mesh": col_mesh_rate([s], samples=samples)}
        for k, s in enumerate(generated)
    }
    return MetricReport(col, rec, support, stab, per_scene)
