"""Pose-to-relation derivation.

Spatial labels fire only when one axis dominates the centroid delta
(|delta_axis| > dominance * ||delta||) and exceeds an absolute margin;
ties yield `none`.  Support is detected by a small vertical gap plus
sufficient XZ hull containment; lateral touching without support is
`contact`.  `attach` is never auto-derived.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import TriMesh
from .meshgeom import (
    hull_overlap_fraction,
    min_sample_distance,
    sample_surface,
    vertical_gap,
    xz_hull,
)
from .meshgeom.sampling import SurfaceSample
from .scene import (
    CONTACT,
    SPATIAL_LABELS,
    SUPPORT,
    RelationGraphs,
    Scene,
)

_CONTACT_SAMPLE_SEED = 24601
_CONTACT_SAMPLES = 256


@dataclass(frozen=True)
class RelationParams:
    dominance: float = 0.6
    margin: float = 0.05
    support_gap_min: float = -0.01
    support_gap_tol: float = 0.02
    support_overlap: float = 0.6
    contact_distance: float = 0.005
    gap_resolution: int = 8


_AXIS_LABELS = {
    # axis -> (label when delta_axis < 0, label when delta_axis > 0)
    0: ("left_of", "right_of"),  # left is -X
    1: ("below", "above"),
    2: ("in_front_of", "behind"),  # front is -Z
}


def _spatial_label(delta: np.ndarray, params: RelationParams) -> int:
    norm = float(np.linalg.norm(delta))
    if norm < params.margin:
        return 0
    axis = int(np.argmax(np.abs(delta)))
    mag = abs(float(delta[axis]))
    if mag <= params.dominance * norm or mag <= params.margin:
        return 0
    neg, pos = _AXIS_LABELS[axis]
    return SPATIAL_LABELS.index(neg if delta[axis] < 0 else pos)


def _contact_points(mesh: TriMesh) -> SurfaceSample:
    sample = sample_surface(mesh, _CONTACT_SAMPLES, _CONTACT_SAMPLE_SEED)
    verts = SurfaceSample(
        mesh.vertices,
        np.zeros_like(mesh.vertices),
        np.full(len(mesh.vertices), -1, dtype=np.int64),
    )
    return SurfaceSample.merge([sample, verts])


def derive_relations(
    scene: Scene, params: RelationParams = RelationParams()
) -> RelationGraphs:
    """Label every ordered object pair from the current poses."""
    meshes = scene.posed_meshes()
    n = scene.n
    centroids = np.stack([m.centroid() for m in meshes])
    hulls = [xz_hull(m) for m in meshes]

    spatial = np.zeros((n, n), dtype=np.int64)
    physical = np.zeros((n, n), dtype=np.int64)

    for i in range(n):
        for j in range(i + 1, n):
            delta = centroids[i] - centroids[j]
            label = _spatial_label(delta, params)
            if label:
                spatial[i, j] = label
                spatial[j, i] = SPATIAL_LABELS.index(
                    {
                        "left_of": "right_of",
                        "right_of": "left_of",
                        "in_front_of": "behind",
                        "behind": "in_front_of",
                        "above": "below",
                        "below": "above",
                    }[SPATIAL_LABELS[label]]
                )

    pts_cache: dict[int, SurfaceSample] = {}

    def pts(k: int) -> SurfaceSample:
        if k not in pts_cache:
            pts_cache[k] = _contact_points(meshes[k])
        return pts_cache[k]

    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            gap = vertical_gap(meshes[i], meshes[j], params.gap_resolution)
            if (
                params.support_gap_min <= gap <= params.support_gap_tol
                and hull_overlap_fraction(hulls[i], hulls[j]) >= params.support_overlap
            ):
                physical[i, j] = SUPPORT

    # Mutual support can only arise from near-coincident geometry; keep
    # the direction with the higher object on top so the graph stays acyclic.
    for i in range(n):
        for j in range(i + 1, n):
            if physical[i, j] == SUPPORT and physical[j, i] == SUPPORT:
                if centroids[i][1] >= centroids[j][1]:
                    physical[j, i] = 0
                else:
                    physical[i, j] = 0

    for i in range(n):
        for j in range(i + 1, n):
            if physical[i, j] or physical[j, i]:
                continue
            if min_sample_distance(pts(i), pts(j)) < params.contact_distance:
                physical[i, j] = CONTACT
                physical[j, i] = CONTACT

    return RelationGraphs(spatial, physical)
