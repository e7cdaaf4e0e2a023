"""Quasi-static settling: a desk-scale stand-in for a physics engine.

Objects are processed in support-topology order.  Each object drops
along -Y until its vertical gap to the first surface below (supporter
from the physical graph, any object underneath, or the floor) closes;
penetration is resolved by lifting back to contact.  A support-polygon
test then runs: if the center of mass projects outside the contact
region, the object topples — its rotation snaps to the nearest
axis-aligned orientation and it is re-dropped to the floor at its
current XZ.  Iterates to a fixpoint or ``max_iters``.

This checks exactly the two failure modes the stability metric cares
about (falling and toppling); it is not a dynamics simulation.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, replace

import numpy as np

from .mesh import TriMesh
from .meshgeom import (
    NO_OVERLAP,
    clip_convex,
    point_in_hull,
    polygon_area,
    vertical_gap,
    xz_hull,
)
from .meshgeom.hull import Hull2D
from .rotation import matrix_to_rot6d, rot6d_to_matrix
from .scene import SUPPORT, Scene, SceneObject, posed_mesh

logger = logging.getLogger(__name__)

_POSE_TOL = 1e-6


def _axis_aligned_rotations() -> list[np.ndarray]:
    mats = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1.0, -1.0), repeat=3):
            R = np.zeros((3, 3))
            for row, (col, s) in enumerate(zip(perm, signs)):
                R[row, col] = s
            if np.linalg.det(R) > 0:
                mats.append(R)
    return mats


_AXIS_ROTATIONS = _axis_aligned_rotations()


def nearest_axis_alignment(R: np.ndarray) -> np.ndarray:
    """Closest (Frobenius) rotation with axis-aligned columns."""
    return max(_AXIS_ROTATIONS, key=lambda A: float(np.trace(A.T @ R)))


def _support_depth_order(scene: Scene) -> list[int]:
    """Supporters before supported; ties by current height."""
    n = scene.n
    depth = [0] * n
    pairs = scene.graphs.support_pairs()
    for _ in range(n):
        for i, j in pairs:
            depth[i] = max(depth[i], depth[j] + 1)
    heights = [float(o.p[1]) for o in scene.objects]
    return sorted(range(n), key=lambda i: (depth[i], heights[i]))


@dataclass
class SettleResult:
    scene: Scene
    converged: bool
    iterations: int


def settle(scene: Scene, max_iters: int = 20, resolution: int = 8) -> SettleResult:
    objects = list(scene.objects)
    order = _support_depth_order(scene)
    converged = False
    iters = 0
    for iters in range(1, max_iters + 1):
        moved = False
        meshes = [posed_mesh(o) for o in objects]
        for i in order:
            obj = objects[i]
            new_obj, changed = _settle_one(obj, i, objects, meshes, scene, resolution)
            if changed:
                objects[i] = new_obj
                meshes[i] = posed_mesh(new_obj)
                moved = True
        if not moved:
            converged = True
            break
    if not converged:
        logger.warning("settle did not converge within %d iterations", max_iters)
    settled = replace(scene, objects=tuple(objects))
    return SettleResult(settled, converged, iters)


def _settle_one(
    obj: SceneObject,
    i: int,
    objects: list[SceneObject],
    meshes: list[TriMesh],
    scene: Scene,
    resolution: int,
) -> tuple[SceneObject, bool]:
    mesh = meshes[i]
    floor_gap = float(mesh.vertices[:, 1].min() - scene.floor_height)
    support_edges = np.nonzero(scene.graphs.physical[i] == SUPPORT)[0]
    com_y = mesh.volume_centroid()[1]

    candidates: list[tuple[float, int]] = []
    for j in range(len(objects)):
        if j == i:
            continue
        below = meshes[j]
        # Only surfaces below the object's center of mass can support it.
        if below.vertices[:, 1].max() >= com_y and j not in support_edges:
            continue
        gap = vertical_gap(mesh, below, resolution)
        if gap != NO_OVERLAP:
            candidates.append((gap, j))

    drop = floor_gap
    supporter = -1  # floor
    for gap, j in candidates:
        if gap < drop:
            drop, supporter = gap, j

    changed = False
    if abs(drop) > _POSE_TOL:
        p = obj.p.copy()
        p[1] -= drop
        obj = replace(obj, p=p)
        mesh = posed_mesh(obj)
        changed = True

    if supporter >= 0 and _topples(mesh, meshes[supporter]):
        R = nearest_axis_alignment(obj.rotation_matrix())
        obj = replace(obj, r=matrix_to_rot6d(R))
        mesh = posed_mesh(obj)
        p = obj.p.copy()
        p[1] -= float(mesh.vertices[:, 1].min() - scene.floor_height)
        obj = replace(obj, p=p)
        changed = True
    return obj, changed


def _topples(mesh: TriMesh, supporter: TriMesh) -> bool:
    """Support-polygon test over the contact region's hull."""
    hull_obj = xz_hull(mesh)
    hull_sup = xz_hull(supporter)
    region = clip_convex(hull_obj.vertices, hull_sup)
    com = mesh.volume_centroid()[[0, 2]]
    if len(region) < 3 or polygon_area(region) < 1e-12:
        return True
    region_hull = Hull2D(region, np.arange(len(region)))
    return not point_in_hull(com, region_hull, tol=1e-9)
