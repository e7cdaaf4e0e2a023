"""One-way signed Chamfer distance between point samples.

For each query point the exact nearest neighbor in the other cloud is
found (KD-tree); the distance is signed by the side of the neighbor's
surface normal the query falls on, approximating a signed distance
field: negative inside, positive outside.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .sampling import SurfaceSample

# Sentinel used when there are no other objects to measure against.
NO_NEIGHBOR_DISTANCE = 1e3


def signed_chamfer(points: SurfaceSample, others: SurfaceSample | None) -> np.ndarray:
    """Signed nearest-neighbor distance of each point to ``others``.

    Returns the sentinel ``NO_NEIGHBOR_DISTANCE`` for every point when
    there is no other geometry.
    """
    if others is None or len(others) == 0:
        return np.full(len(points), NO_NEIGHBOR_DISTANCE)
    tree = cKDTree(others.points)
    dist, idx = tree.query(points.points)
    delta = points.points - others.points[idx]
    side = np.einsum("ij,ij->i", others.normals[idx], delta)
    sign = np.where(side >= 0.0, 1.0, -1.0)
    return dist * sign


def min_sample_distance(a: SurfaceSample, b: SurfaceSample) -> float:
    """Minimum unsigned distance between two point samples."""
    tree = cKDTree(b.points)
    dist, _ = tree.query(a.points)
    return float(dist.min())


def _closest_on_triangles(p: np.ndarray, tris: np.ndarray) -> np.ndarray:
    """Closest point on each triangle for each query; output (P, F, 3)."""
    a, b, c = tris[:, 0], tris[:, 1], tris[:, 2]
    ab = b - a
    ac = c - a
    ap = p[:, None, :] - a[None, :, :]
    d1 = np.einsum("fk,pfk->pf", ab, ap)
    d2 = np.einsum("fk,pfk->pf", ac, ap)
    bp = p[:, None, :] - b[None, :, :]
    d3 = np.einsum("fk,pfk->pf", ab, bp)
    d4 = np.einsum("fk,pfk->pf", ac, bp)
    cp = p[:, None, :] - c[None, :, :]
    d5 = np.einsum("fk,pfk->pf", ab, cp)
    d6 = np.einsum("fk,pfk->pf", ac, cp)
    vc = d1 * d4 - d3 * d2
    vb = d5 * d2 - d1 * d6
    va = d3 * d6 - d5 * d4

    with np.errstate(divide="ignore", invalid="ignore"):
        t_ab = d1 / (d1 - d3)
        t_ac = d2 / (d2 - d6)
        t_bc = (d4 - d3) / ((d4 - d3) + (d5 - d6))
        denom = va + vb + vc
        v = vb / denom
        w = vc / denom

    interior = (
        a[None] + v[..., None] * ab[None] + w[..., None] * ac[None]
    )
    out = interior
    on_bc = (va <= 0) & (d4 - d3 >= 0) & (d5 - d6 >= 0)
    out = np.where(
        on_bc[..., None],
        b[None] + np.nan_to_num(t_bc)[..., None] * (c - b)[None],
        out,
    )
    on_ac = (vb <= 0) & (d2 >= 0) & (d6 <= 0)
    out = np.where(
        on_ac[..., None], a[None] + np.nan_to_num(t_ac)[..., None] * ac[None], out
    )
    on_ab = (vc <= 0) & (d1 >= 0) & (d3 <= 0)
    out = np.where(
        on_ab[..., None], a[None] + np.nan_to_num(t_ab)[..., None] * ab[None], out
    )
    at_c = (d6 >= 0) & (d5 <= d6)
    out = np.where(at_c[..., None], c[None], out)
    at_b = (d3 >= 0) & (d4 <= d3)
    out = np.where(at_b[..., None], b[None], out)
    at_a = (d1 <= 0) & (d2 <= 0)
    out = np.where(at_a[..., None], a[None], out)
    return out


def signed_point_mesh_distance(points: np.ndarray, mesh) -> np.ndarray:
    """Exact distance of each point to the mesh surface, signed by the
    nearest triangle's outward normal (negative inside)."""
    p = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    tris = mesh.triangles()
    closest = _closest_on_triangles(p, tris)
    delta = p[:, None, :] - closest
    d2 = np.einsum("pfk,pfk->pf", delta, delta)
    best = d2.argmin(axis=1)
    rows = np.arange(len(p))
    dist = np.sqrt(d2[rows, best])
    side = np.einsum(
        "pk,pk->p", mesh.face_normals()[best], delta[rows, best]
    )
    return dist * np.where(side >= 0.0, 1.0, -1.0)
