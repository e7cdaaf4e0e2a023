"""Triangle-triangle intersection predicate.

Closed-set convention: touching (shared vertex, edge contact, coplanar
overlap) counts as intersecting.  Non-coplanar pairs use the
plane-side / interval-overlap test; near-coplanar pairs fall back to a
2-D overlap test in the dominant plane.
"""

from __future__ import annotations

import numpy as np

from ..errors import DegenerateTriangle

EPS = 1e-9


def _plane(tri: np.ndarray) -> tuple[np.ndarray, float]:
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    norm = np.linalg.norm(n)
    if norm < 2e-12:
        raise DegenerateTriangle("triangle area below tolerance")
    n = n / norm
    return n, -float(np.dot(n, tri[0]))


def _interval_points(tri: np.ndarray, dists: np.ndarray) -> list[np.ndarray]:
    """Points where the triangle meets the other triangle's plane."""
    pts = []
    for i in range(3):
        j = (i + 1) % 3
        di, dj = dists[i], dists[j]
        if abs(di) <= EPS:
            pts.append(tri[i])
        if di * dj < 0 and abs(di) > EPS and abs(dj) > EPS:
            s = di / (di - dj)
            pts.append(tri[i] + s * (tri[j] - tri[i]))
    return pts


def _segs_cross_2d(p1, p2, q1, q2) -> bool:
    """Closed 2-D segment intersection."""
    d1 = p2 - p1
    d2 = q2 - q1
    denom = d1[0] * d2[1] - d1[1] * d2[0]
    diff = q1 - p1
    if abs(denom) < EPS:
        # Parallel: check collinearity then 1-D overlap.
        if abs(diff[0] * d1[1] - diff[1] * d1[0]) > EPS:
            return False
        axis = 0 if abs(d1[0]) >= abs(d1[1]) else 1
        a0, a1 = sorted((p1[axis], p2[axis]))
        b0, b1 = sorted((q1[axis], q2[axis]))
        return a1 >= b0 - EPS and b1 >= a0 - EPS
    t = (diff[0] * d2[1] - diff[1] * d2[0]) / denom
    u = (diff[0] * d1[1] - diff[1] * d1[0]) / denom
    return -EPS <= t <= 1 + EPS and -EPS <= u <= 1 + EPS


def _point_in_tri_2d(p, tri) -> bool:
    sign = 0
    for i in range(3):
        a, b = tri[i], tri[(i + 1) % 3]
        c = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
        if c > EPS:
            if sign < 0:
                return False
            sign = 1
        elif c < -EPS:
            if sign > 0:
                return False
            sign = -1
    return True


def _coplanar_overlap(t1: np.ndarray, t2: np.ndarray, normal: np.ndarray) -> bool:
    drop = int(np.argmax(np.abs(normal)))
    keep = [a for a in range(3) if a != drop]
    a = t1[:, keep]
    b = t2[:, keep]
    for i in range(3):
        for j in range(3):
            if _segs_cross_2d(a[i], a[(i + 1) % 3], b[j], b[(j + 1) % 3]):
                return True
    return _point_in_tri_2d(a[0], b) or _point_in_tri_2d(b[0], a)


def tri_tri_intersect(t1: np.ndarray, t2: np.ndarray) -> bool:
    """True iff the closed triangles share at least one point."""
    t1 = np.asarray(t1, dtype=np.float64).reshape(3, 3)
    t2 = np.asarray(t2, dtype=np.float64).reshape(3, 3)
    n1, off1 = _plane(t1)
    n2, off2 = _plane(t2)

    d1 = t1 @ n2 + off2  # t1 vertices vs plane of t2
    if np.all(d1 > EPS) or np.all(d1 < -EPS):
        return False
    d2 = t2 @ n1 + off1
    if np.all(d2 > EPS) or np.all(d2 < -EPS):
        return False

    if np.all(np.abs(d1) <= EPS):
        return _coplanar_overlap(t1, t2, n1)

    pts1 = _interval_points(t1, d1)
    pts2 = _interval_points(t2, d2)
    if not pts1 or not pts2:
        return False

    direction = np.cross(n1, n2)
    if np.linalg.norm(direction) < EPS:
        # Planes parallel but offsets within tolerance: treat as coplanar.
        return _coplanar_overlap(t1, t2, n1)
    axis = int(np.argmax(np.abs(direction)))
    s1 = [p[axis] for p in pts1]
    s2 = [p[axis] for p in pts2]
    lo1, hi1 = min(s1), max(s1)
    lo2, hi2 = min(s2), max(s2)
    if direction[axis] < 0:
        pass  # ordering on the axis is still a monotone parameterization
    return hi1 >= lo2 - EPS and hi2 >= lo1 - EPS


def tri_pairs_intersect(tris1: np.ndarray, tris2: np.ndarray) -> np.ndarray:
    """Elementwise predicate over paired (K, 3, 3) triangle arrays.

    Vectorized plane-side rejection first; the careful scalar predicate
    runs only on survivors.
    """
    tris1 = np.asarray(tris1, dtype=np.float64)
    tris2 = np.asarray(tris2, dtype=np.float64)
    k = len(tris1)
    out = np.zeros(k, dtype=bool)
    if k == 0:
        return out

    n2 = np.cross(tris2[:, 1] - tris2[:, 0], tris2[:, 2] - tris2[:, 0])
    n2 /= np.linalg.norm(n2, axis=1, keepdims=True)
    d1 = np.einsum("kij,kj->ki", tris1 - tris2[:, None, 0], n2)
    reject = np.all(d1 > EPS, axis=1) | np.all(d1 < -EPS, axis=1)

    n1 = np.cross(tris1[:, 1] - tris1[:, 0], tris1[:, 2] - tris1[:, 0])
    n1 /= np.linalg.norm(n1, axis=1, keepdims=True)
    d2 = np.einsum("kij,kj->ki", tris2 - tris1[:, None, 0], n1)
    reject |= np.all(d2 > EPS, axis=1) | np.all(d2 < -EPS, axis=1)

    for idx in np.nonzero(~reject)[0]:
        out[idx] = tri_tri_intersect(tris1[idx], tris2[idx])
    return out
