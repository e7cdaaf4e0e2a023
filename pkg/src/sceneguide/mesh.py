"""Triangle mesh type and rigid transforms.

Meshes are immutable value objects in a canonical local frame; posing
produces a new mesh.  Face normals follow CCW winding (outward for the
primitives built by :mod:`sceneguide.synthdata`).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyMesh, ShapeMismatch

_MIN_FACE_AREA = 1e-12


@dataclass(frozen=True)
class TriMesh:
    """Immutable triangle mesh.

    vertices: (V, 3) float64 positions.
    faces: (F, 3) int vertex indices, CCW winding.
    """

    vertices: np.ndarray
    faces: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.vertices, dtype=np.float64))
        f = np.ascontiguousarray(np.asarray(self.faces, dtype=np.int64))
        if v.ndim != 2 or v.shape[1] != 3:
            raise ShapeMismatch(f"vertices must be (V, 3), got {v.shape}")
        if f.ndim != 2 or f.shape[1] != 3:
            raise ShapeMismatch(f"faces must be (F, 3), got {f.shape}")
        if len(v) == 0 or len(f) == 0:
            raise EmptyMesh("mesh needs at least one vertex and one face")
        if f.min() < 0 or f.max() >= len(v):
            raise ShapeMismatch("face index out of range")
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "faces", f)
        if np.any(self.face_areas() < _MIN_FACE_AREA):
            raise ShapeMismatch("mesh contains a degenerate face")

    # Derived quantities are cached; the mesh itself never mutates.
    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def triangles(self) -> np.ndarray:
        """(F, 3, 3) array of face vertex positions."""
        return self._cached("tris", lambda: self.vertices[self.faces])

    def face_cross(self) -> np.ndarray:
        t = self.vertices[self.faces]
        return np.cross(t[:, 1] - t[:, 0], t[:, 2] - t[:, 0])

    def face_areas(self) -> np.ndarray:
        return self._cached(
            "areas", lambda: 0.5 * np.linalg.norm(self.face_cross(), axis=1)
        )

    def face_normals(self) -> np.ndarray:
        """(F, 3) unit outward normals by CCW winding."""

        def build():
            c = self.face_cross()
            return c / np.linalg.norm(c, axis=1, keepdims=True)

        return self._cached("normals", build)

    def area(self) -> float:
        return float(self.face_areas().sum())

    def centroid(self) -> np.ndarray:
        """Vertex-average centroid."""
        return self.vertices.mean(axis=0)

    def volume(self) -> float:
        """Signed-tetrahedron volume (assumes a closed mesh)."""
        t = self.triangles()
        return float(abs(np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])).sum()) / 6.0)

    def volume_centroid(self) -> np.ndarray:
        """Center of mass of the enclosed solid (uniform density)."""
        t = self.triangles()
        sv = np.einsum("ij,ij->i", t[:, 0], np.cross(t[:, 1], t[:, 2])) / 6.0
        total = sv.sum()
        if abs(total) < 1e-12:
            return self.centroid()
        centers = t.sum(axis=1) / 4.0
        return (sv[:, None] * centers).sum(axis=0) / total

    def aabb(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def transformed(self, R: np.ndarray, p: np.ndarray) -> "TriMesh":
        """Rigidly transformed copy: v' = R v + p."""
        R = np.asarray(R, dtype=np.float64)
        p = np.asarray(p, dtype=np.float64).reshape(3)
        return TriMesh(self.vertices @ R.T + p, self.faces)
