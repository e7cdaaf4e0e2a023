"""Vertical (Y-axis) surface queries: column heights and gaps.

Columns are vertical lines identified by an XZ coordinate.  A column
"hits" a face when its XZ point lies inside the face's XZ projection;
the hit height comes from the face's plane equation.  Near-vertical
faces (|n_y| below tolerance) are ignored.
"""

from __future__ import annotations

import numpy as np

from ..mesh import TriMesh

_EPS = 1e-12
NO_OVERLAP = np.inf
DEFAULT_RESOLUTION = 8  # 8x8 grid = 64 rays


def column_heights(mesh: TriMesh, xz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Lowest and highest surface heights of ``mesh`` along each column.

    Returns (min_y, max_y) arrays with NaN where a column misses the
    mesh entirely.
    """
    xz = np.asarray(xz, dtype=np.float64).reshape(-1, 2)
    ymin, ymax, _ = _column_scan(mesh, xz)
    return ymin, ymax


def top_faces_below(mesh: TriMesh, xz: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Highest surface height per column plus the face achieving it.

    Returns (max_y, face_idx); face_idx is -1 where the column misses.
    """
    xz = np.asarray(xz, dtype=np.float64).reshape(-1, 2)
    _, ymax, top_face = _column_scan(mesh, xz)
    return ymax, top_face


def _column_scan(mesh: TriMesh, xz: np.ndarray):
    tris = mesh.triangles()
    normals = mesh.face_cross()
    usable = np.abs(normals[:, 1]) > _EPS
    p = xz[:, None, :]  # (P, 1, 2)
    a = tris[None, :, 0][:, :, [0, 2]]
    b = tris[None, :, 1][:, :, [0, 2]]
    c = tris[None, :, 2][:, :, [0, 2]]

    def edge_sign(u, v):
        return (v[..., 0] - u[..., 0]) * (p[..., 1] - u[..., 1]) - (
            v[..., 1] - u[..., 1]
        ) * (p[..., 0] - u[..., 0])

    s0 = edge_sign(a, b)
    s1 = edge_sign(b, c)
    s2 = edge_sign(c, a)
    tol = 1e-12
    inside = ((s0 >= -tol) & (s1 >= -tol) & (s2 >= -tol)) | (
        (s0 <= tol) & (s1 <= tol) & (s2 <= tol)
    )
    inside &= usable[None, :]

    # Plane height at the column: y = v0_y - (nx (x - v0_x) + nz (z - v0_z)) / ny
    v0 = tris[:, 0]
    nx, ny, nz = normals[:, 0], normals[:, 1], normals[:, 2]
    safe_ny = np.where(usable, ny, 1.0)
    y = v0[None, :, 1] - (
        nx[None, :] * (xz[:, None, 0] - v0[None, :, 0])
        + nz[None, :] * (xz[:, None, 1] - v0[None, :, 2])
    ) / safe_ny[None, :]

    y_masked_min = np.where(inside, y, np.inf)
    y_masked_max = np.where(inside, y, -np.inf)
    ymin = y_masked_min.min(axis=1)
    ymax = y_masked_max.max(axis=1)
    top_face = np.where(
        np.isfinite(ymax), y_masked_max.argmax(axis=1), -1
    ).astype(np.int64)
    ymin = np.where(np.isfinite(ymin), ymin, np.nan)
    ymax = np.where(np.isfinite(ymax), ymax, np.nan)
    return ymin, ymax, top_face


def overlap_grid(upper: TriMesh, lower: TriMesh, resolution: int) -> np.ndarray | None:
    """Column-center grid over the XZ overlap of the two meshes' AABBs."""
    lo_u, hi_u = upper.aabb()
    lo_l, hi_l = lower.aabb()
    lo = np.maximum(lo_u[[0, 2]], lo_l[[0, 2]])
    hi = np.minimum(hi_u[[0, 2]], hi_l[[0, 2]])
    if np.any(hi < lo):
        return None
    xs = lo[0] + (np.arange(resolution) + 0.5) / resolution * (hi[0] - lo[0])
    zs = lo[1] + (np.arange(resolution) + 0.5) / resolution * (hi[1] - lo[1])
    gx, gz = np.meshgrid(xs, zs, indexing="ij")
    return np.stack([gx.ravel(), gz.ravel()], axis=1)


def vertical_gap(
    upper: TriMesh, lower: TriMesh, resolution: int = DEFAULT_RESOLUTION
) -> float:
    """Minimal vertical clearance between two meshes.

    Casts a grid of vertical rays over the XZ-overlap box and takes the
    minimum of (upper's lowest surface - lower's highest surface) over
    columns hitting both.  Negative means interpenetration along Y;
    returns the ``NO_OVERLAP`` (+inf) sentinel when projections are
    disjoint or no column hits both meshes.
    """
    grid = overlap_grid(upper, lower, resolution)
    if grid is None:
        return NO_OVERLAP
    up_min, _ = column_heights(upper, grid)
    _, low_max = column_heights(lower, grid)
    valid = ~np.isnan(up_min) & ~np.isnan(low_max)
    if not np.any(valid):
        return NO_OVERLAP
    return float(np.min(up_min[valid] - low_max[valid]))
