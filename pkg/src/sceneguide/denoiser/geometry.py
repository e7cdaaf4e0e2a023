"""Per-step geometry features for the denoiser.

For each object, sample points on its posed surface and compute the
signed Chamfer distance to the merged point cloud of all other objects.
Channels: [x, y, z, d_scd].  Single-object scenes get the no-neighbor
sentinel in channel 4.
"""

from __future__ import annotations

import numpy as np

from ..mesh import TriMesh
from ..meshgeom import SurfaceSample, sample_surface, signed_chamfer


def geometry_features(meshes: list[TriMesh], m: int, seed: int) -> np.ndarray:
    """(N, M, 4) feature tensor from world-frame meshes."""
    samples = [sample_surface(mesh, m, seed + 7919 * i) for i, mesh in enumerate(meshes)]
    n = len(meshes)
    out = np.empty((n, m, 4))
    for i in range(n):
        others = [s for j, s in enumerate(samples) if j != i]
        merged = SurfaceSample.merge(others) if others else None
        d = signed_chamfer(samples[i], merged)
        out[i, :, :3] = samples[i].points
        out[i, :, 3] = d
    return out
