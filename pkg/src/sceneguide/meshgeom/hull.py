"""2-D convex hulls of XZ projections, containment, and distance queries."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from ..mesh import TriMesh

_EPS = 1e-9


@dataclass(frozen=True)
class Hull2D:
    """Convex polygon in the XZ plane, vertices CCW.

    ``vertex_ids`` maps hull vertices back to indices into the input
    point set (useful for differentiating through the hull geometry).
    Collinear input degrades to a 2-point segment with ``degenerate``
    set; distance queries still work.
    """

    vertices: np.ndarray  # (K, 2)
    vertex_ids: np.ndarray  # (K,)
    degenerate: bool = False

    def area(self) -> float:
        return polygon_area(self.vertices)

    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


def project_xz(mesh_or_points) -> np.ndarray:
    if isinstance(mesh_or_points, TriMesh):
        pts = mesh_or_points.vertices
    else:
        pts = np.asarray(mesh_or_points, dtype=np.float64)
    if pts.ndim == 2 and pts.shape[1] == 3:
        return pts[:, [0, 2]]
    return pts


def xz_hull(mesh_or_points) -> Hull2D:
    """Convex hull of the XZ projection."""
    pts = project_xz(mesh_or_points)
    try:
        hull = ConvexHull(pts)
    except QhullError:
        # Collinear or coincident input: keep the two extreme points.
        center = pts.mean(axis=0)
        d = pts - center
        direction = d[np.argmax(np.linalg.norm(d, axis=1))]
        if np.linalg.norm(direction) < _EPS:
            ids = np.array([0, 0])
        else:
            proj = d @ direction
            ids = np.array([int(np.argmin(proj)), int(np.argmax(proj))])
        return Hull2D(pts[ids], ids, degenerate=True)
    ids = hull.vertices.astype(np.int64)  # CCW in 2-D
    return Hull2D(pts[ids], ids)


def polygon_area(vertices: np.ndarray) -> float:
    v = np.asarray(vertices, dtype=np.float64)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return float(0.5 * abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def point_in_hull(alpha: np.ndarray, hull: Hull2D, tol: float = _EPS) -> bool:
    """Closed containment test."""
    alpha = np.asarray(alpha, dtype=np.float64).reshape(2)
    if hull.degenerate:
        return _point_segment_distance(alpha, hull.vertices[0], hull.vertices[-1]) <= tol
    v = hull.vertices
    nxt = np.roll(v, -1, axis=0)
    cross = (nxt[:, 0] - v[:, 0]) * (alpha[1] - v[:, 1]) - (nxt[:, 1] - v[:, 1]) * (
        alpha[0] - v[:, 0]
    )
    return bool(np.all(cross >= -tol))


def _point_segment_distance(p, a, b) -> float:
    ab = b - a
    denom = float(ab @ ab)
    if denom < _EPS * _EPS:
        return float(np.linalg.norm(p - a))
    t = np.clip(float((p - a) @ ab) / denom, 0.0, 1.0)
    return float(np.linalg.norm(p - (a + t * ab)))


def point_to_hull_distance(alpha: np.ndarray, hull: Hull2D) -> float:
    """0 inside or on the hull, else distance to the boundary."""
    alpha = np.asarray(alpha, dtype=np.float64).reshape(2)
    if hull.degenerate:
        return _point_segment_distance(alpha, hull.vertices[0], hull.vertices[-1])
    if point_in_hull(alpha, hull):
        return 0.0
    v = hull.vertices
    nxt = np.roll(v, -1, axis=0)
    return min(
        _point_segment_distance(alpha, v[k], nxt[k]) for k in range(len(v))
    )


def clip_convex(subject: np.ndarray, clip_hull: Hull2D) -> np.ndarray:
    """Sutherland-Hodgman clip of a CCW polygon against a convex hull."""
    if clip_hull.degenerate:
        return np.empty((0, 2))
    output = [np.asarray(p, dtype=np.float64) for p in subject]
    v = clip_hull.vertices
    for k in range(len(v)):
        a, b = v[k], v[(k + 1) % len(v)]
        edge = b - a
        if not output:
            break
        inputs = output
        output = []
        for i in range(len(inputs)):
            cur = inputs[i]
            prv = inputs[i - 1]
            cur_in = edge[0] * (cur[1] - a[1]) - edge[1] * (cur[0] - a[0]) >= -_EPS
            prv_in = edge[0] * (prv[1] - a[1]) - edge[1] * (prv[0] - a[0]) >= -_EPS
            if cur_in:
                if not prv_in:
                    output.append(_line_intersect(prv, cur, a, b))
                output.append(cur)
            elif prv_in:
                output.append(_line_intersect(prv, cur, a, b))
    return np.array(output) if output else np.empty((0, 2))


def _line_intersect(p1, p2, a, b) -> np.ndarray:
    d1 = p2 - p1
    d2 = b - a
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    if abs(denom) < _EPS:
        return p2.copy()
    t = ((a[0] - p1[0]) * d2[1] - (a[1] - p1[1]) * d2[0]) / denom
    return p1 + t * d1


def hull_overlap_fraction(inner: Hull2D, outer: Hull2D) -> float:
    """Fraction of ``inner``'s area covered by ``outer``."""
    area = inner.area()
    if area < _EPS:
        center = inner.centroid()
        return 1.0 if point_in_hull(center, outer) else 0.0
    clipped = clip_convex(inner.vertices, outer)
    return float(np.clip(polygon_area(clipped) / area, 0.0, 1.0))
