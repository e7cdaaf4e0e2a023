"""Area-weighted surface sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyMesh, ShapeMismatch
from ..mesh import TriMesh


@dataclass(frozen=True)
class SurfaceSample:
    """Points sampled on a world-frame mesh surface.

    points: (M, 3); normals: (M, 3) unit face normals; source_face: (M,).
    """

    points: np.ndarray
    normals: np.ndarray
    source_face: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    @staticmethod
    def merge(samples: list["SurfaceSample"]) -> "SurfaceSample":
        if not samples:
            raise EmptyMesh("nothing to merge")
        return SurfaceSample(
            np.concatenate([s.points for s in samples]),
            np.concatenate([s.normals for s in samples]),
            np.concatenate([s.source_face for s in samples]),
        )


def sample_surface(mesh: TriMesh, m: int, seed: int) -> SurfaceSample:
    """Sample ``m`` points: area-weighted face choice, uniform barycentric."""
    if m < 1:
        raise ShapeMismatch("sample count must be >= 1")
    rng = np.random.default_rng(seed)
    areas = mesh.face_areas()
    face_idx = rng.choice(len(areas), size=m, p=areas / areas.sum())
    u = rng.random(m)
    v = rng.random(m)
    flip = u + v > 1.0
    u[flip], v[flip] = 1.0 - u[flip], 1.0 - v[flip]
    t = mesh.triangles()[face_idx]
    pts = t[:, 0] + u[:, None] * (t[:, 1] - t[:, 0]) + v[:, None] * (t[:, 2] - t[:, 0])
    return SurfaceSample(pts, mesh.face_normals()[face_idx], face_idx)
