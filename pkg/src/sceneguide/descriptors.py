"""Deterministic geometric shape descriptor.

An 8-dimensional stand-in for a learned shape embedding: bounding-box
extents (3), surface area (1), volume (1), and the principal-component
standard deviations of a fixed-seed 256-point surface sample (3).  The
descriptor is invariant to vertex and face ordering.
"""

from __future__ import annotations

import numpy as np

from .mesh import TriMesh

DESCRIPTOR_DIM = 8
_SAMPLE_COUNT = 256
_SAMPLE_SEED = 1234567


def _canonical_triangles(mesh: TriMesh) -> np.ndarray:
    """Face triangles in an ordering independent of the input mesh layout.

    Each face's vertices are sorted lexicographically by coordinates, then
    faces are sorted by their flattened coordinates.
    """
    tris = mesh.triangles().copy()
    for k in range(len(tris)):
        order = np.lexsort(tris[k].T[::-1])
        tris[k] = tris[k][order]
    flat = tris.reshape(len(tris), 9)
    return tris[np.lexsort(flat.T[::-1])]


def shape_descriptor(mesh: TriMesh) -> np.ndarray:
    lo, hi = mesh.aabb()
    extents = hi - lo
    tris = _canonical_triangles(mesh)
    areas = 0.5 * np.linalg.norm(
        np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0]), axis=1
    )
    rng = np.random.default_rng(_SAMPLE_SEED)
    face_idx = rng.choice(len(tris), size=_SAMPLE_COUNT, p=areas / areas.sum())
    u = rng.random(_SAMPLE_COUNT)
    v = rng.random(_SAMPLE_COUNT)
    flip = u + v > 1.0
    u[flip], v[flip] = 1.0 - u[flip], 1.0 - v[flip]
    t = tris[face_idx]
    pts = t[:, 0] + u[:, None] * (t[:, 1] - t[:, 0]) + v[:, None] * (t[:, 2] - t[:, 0])
    centered = pts - pts.mean(axis=0)
    # Principal-component standard deviations of the sample.
    svals = np.linalg.svd(centered, compute_uv=False)
    pc_std = svals / np.sqrt(len(pts))
    return np.concatenate([extents, [mesh.area(), mesh.volume()], pc_std])
