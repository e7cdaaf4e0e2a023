"""Differentiable physical guidance energies and their pose gradients.

Three energies steer the sampler: a collision penalty over intersecting
triangle pairs, a gravity penalty on the vertical clearance between an
object and its supporter (or the floor), and a relation penalty on
supported objects whose XZ projection sticks out of the supporter's
convex hull.

Gradients use frozen-set differentiation: the discrete sets (collision
pairs, support pairing, hull membership, column hit faces) are fixed at
the current state, and the continuous penalty is differentiated through
the pose -> vertex -> distance chain with autograd.  Sets are recomputed
at every evaluation, so finite differences of the full pipeline agree
with the analytic gradient away from set-membership boundaries.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import torch

from .errors import NonFiniteGradient
from .mesh import TriMesh
from .meshgeom import (
    find_collision_pairs,
    point_to_hull_distance,
    top_faces_below,
    xz_hull,
)
from .scene import SUPPORT, Scene, flatten_scene

logger = logging.getLogger(__name__)

_OUTSIDE_TOL = 1e-9


@dataclass(frozen=True)
class GuidanceConfig:
    """Weights and thresholds of the composite guidance."""

    lambda_collision: float = 7.5e-3
    lambda_gravity: float = 1.0e-3
    lambda_relation: float = 1.0e-3
    eps_gap: float = 0.005  # minimal support clearance
    theta_h: float = 0.05  # float tolerance above the clearance
    guidance_start_t: int = 200  # guidance active for t below this
    grad_mode: str = "analytic"  # "analytic" | "finite_difference"
    fd_step: float = 1e-4
    floor_snap_distance: float = 0.5  # treat floor as supporter below this

    def __post_init__(self):
        if min(self.lambda_collision, self.lambda_gravity, self.lambda_relation) < 0:
            raise ValueError("guidance weights must be non-negative")
        if self.eps_gap < 0 or self.guidance_start_t < 0:
            raise ValueError("eps_gap and guidance_start_t must be non-negative")
        if self.grad_mode not in ("analytic", "finite_difference"):
            raise ValueError(f"unknown grad_mode {self.grad_mode!r}")


@dataclass
class GuidanceReport:
    """Unweighted energy terms plus the gradient of the weighted sum."""

    g_c: float
    g_h: float
    g_r: float
    gradient: np.ndarray  # (N, 9) d(lambda-weighted sum)/d pose
    active_pairs: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Frozen discrete structure.

FLOOR = -1


def resolve_supporters(scene: Scene, cfg: GuidanceConfig) -> dict[int, int]:
    """Map each object to its supporter id, FLOOR, or nothing (exempt).

    The physical graph wins; objects without a support edge whose lowest
    vertex is near the floor rest on the floor; everything else is
    exempt from the gravity term.
    """
    meshes = scene.posed_meshes()
    out: dict[int, int] = {}
    for i in range(scene.n):
        edges = np.nonzero(scene.graphs.physical[i] == SUPPORT)[0]
        if len(edges):
            out[i] = int(edges[0])
        elif meshes[i].vertices[:, 1].min() - scene.floor_height <= cfg.floor_snap_distance:
            out[i] = FLOOR
    return out


def _freeze_sets(scene: Scene, cfg: GuidanceConfig):
    meshes = scene.posed_meshes()
    pairs = find_collision_pairs(meshes)
    groups: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for a, fa, b, fb in sorted(pairs):
        groups.setdefault((a, b), []).append((fa, fb))

    supporters = resolve_supporters(scene, cfg)
    gravity = []
    for i, j in sorted(supporters.items()):
        if j == FLOOR:
            gravity.append((i, FLOOR, None, None))
        else:
            xz = meshes[i].vertices[:, [0, 2]]
            _, faces = top_faces_below(meshes[j], xz)
            valid = np.nonzero(faces >= 0)[0]
            if len(valid):
                gravity.append((i, j, valid, faces[valid]))

    relation = []
    support_edges = scene.graphs.support_pairs()
    for i, j in support_edges:
        hull = xz_hull(meshes[j])
        outside = [
            v
            for v, q in enumerate(meshes[i].vertices[:, [0, 2]])
            if point_to_hull_distance(q, hull) > _OUTSIDE_TOL
        ]
        relation.append((i, j, np.array(outside, dtype=np.int64), hull.vertex_ids))
    return groups, gravity, relation, len(support_edges)


# ---------------------------------------------------------------------------
# Differentiable recomputation of the continuous penalty.

def _rot6d_torch(r: torch.Tensor) -> torch.Tensor:
    a, b = r[:3], r[3:]
    c1 = a / torch.linalg.norm(a)
    b_orth = b - torch.dot(c1, b) * c1
    c2 = b_orth / torch.linalg.norm(b_orth)
    c3 = torch.linalg.cross(c1, c2)
    return torch.stack([c1, c2, c3], dim=1)


def _world_vertices(x: torch.Tensor, local: list[np.ndarray]) -> list[torch.Tensor]:
    out = []
    for i, verts in enumerate(local):
        R = _rot6d_torch(x[i, 3:])
        v = torch.as_tensor(verts, dtype=torch.float64)
        out.append(v @ R.T + x[i, :3])
    return out


def _collision_term(world, faces, groups) -> tuple[torch.Tensor, int]:
    total = None
    count = 0
    for (a, b), fpairs in groups.items():
        fp = np.asarray(fpairs, dtype=np.int64)
        tri_a = world[a][torch.as_tensor(faces[a][fp[:, 0]])]
        tri_b = world[b][torch.as_tensor(faces[b][fp[:, 1]])]

        def centroid_side(src, dst):
            n = torch.linalg.cross(dst[:, 1] - dst[:, 0], dst[:, 2] - dst[:, 0])
            n = n / torch.linalg.norm(n, dim=1, keepdim=True)
            return ((src.mean(dim=1) - dst[:, 0]) * n).sum(dim=1)

        # Conical-distance surrogate: penalize a centroid sunk below the
        # other triangle's plane, averaged over both directions.
        pen = 0.5 * (
            torch.relu(-centroid_side(tri_a, tri_b))
            + torch.relu(-centroid_side(tri_b, tri_a))
        )
        s = pen.sum()
        total = s if total is None else total + s
        count += len(fp)
    if count == 0:
        return torch.zeros((), dtype=torch.float64), 0
    return total / count, count


def _gravity_term(world, faces, gravity, floor: float, cfg: GuidanceConfig):
    total = torch.zeros((), dtype=torch.float64)
    active = 0
    for i, j, valid, hit_faces in gravity:
        if j == FLOOR:
            d = world[i][:, 1].min() - floor
        else:
            verts = world[i][torch.as_tensor(valid)]
            tri = world[j][torch.as_tensor(faces[j][hit_faces])]
            n = torch.linalg.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
            y_hit = tri[:, 0, 1] - (
                n[:, 0] * (verts[:, 0] - tri[:, 0, 0])
                + n[:, 2] * (verts[:, 2] - tri[:, 0, 2])
            ) / n[:, 1]
            d = (verts[:, 1] - y_hit).min()
        r = d - cfg.eps_gap
        r_val = float(r.detach())
        if r_val > cfg.theta_h or r_val < 0:
            total = total + torch.abs(r)
            active += 1
    return total, active


def _relation_term(world, relation, n_edges: int):
    total = torch.zeros((), dtype=torch.float64)
    active = 0
    for i, j, outside, hull_ids in relation:
        if len(outside) == 0 or n_edges == 0:
            continue
        alpha = world[i][torch.as_tensor(outside)][:, [0, 2]]
        hull = world[j][torch.as_tensor(np.asarray(hull_ids))][:, [0, 2]]
        k = len(hull)
        if k == 1:
            dist = torch.linalg.norm(alpha - hull[0], dim=1)
        else:
            segs_a = hull
            segs_b = torch.roll(hull, -1, dims=0) if k > 2 else hull[1:2]
            if k == 2:
                segs_a = hull[0:1]
            ab = segs_b - segs_a
            diff = alpha[:, None, :] - segs_a[None, :, :]
            denom = (ab * ab).sum(dim=1).clamp_min(1e-18)
            t = ((diff * ab[None, :, :]).sum(dim=2) / denom).clamp(0.0, 1.0)
            proj = segs_a[None, :, :] + t[:, :, None] * ab[None, :, :]
            dist = torch.linalg.norm(alpha[:, None, :] - proj, dim=2).min(dim=1).values
        total = total + dist.sum() / (len(outside) * n_edges)
        active += len(outside)
    return total, active


def _energies(
    scene: Scene, cfg: GuidanceConfig, x: torch.Tensor | None = None
):
    """Energy terms as torch scalars; differentiable when ``x`` is given."""
    if x is None:
        x = torch.as_tensor(flatten_scene(scene), dtype=torch.float64)
    local = [o.mesh.vertices for o in scene.objects]
    faces = [o.mesh.faces for o in scene.objects]
    groups, gravity, relation, n_edges = _freeze_sets(scene, cfg)
    world = _world_vertices(x, local)
    g_c, n_pairs = _collision_term(world, faces, groups)
    g_h, n_grav = _gravity_term(world, faces, gravity, scene.floor_height, cfg)
    g_r, n_out = _relation_term(world, relation, n_edges)
    counts = {
        "collision_pairs": n_pairs,
        "gravity_violations": n_grav,
        "relation_outside_vertices": n_out,
    }
    return g_c, g_h, g_r, counts


def collision_energy(scene: Scene, cfg: GuidanceConfig = GuidanceConfig()) -> float:
    g_c, _, _, _ = _energies(scene, cfg)
    return float(g_c)


def gravity_energy(scene: Scene, cfg: GuidanceConfig = GuidanceConfig()) -> float:
    _, g_h, _, _ = _energies(scene, cfg)
    return float(g_h)


def relation_energy(scene: Scene, cfg: GuidanceConfig = GuidanceConfig()) -> float:
    _, _, g_r, _ = _energies(scene, cfg)
    return float(g_r)


def composite_energy(scene: Scene, cfg: GuidanceConfig = GuidanceConfig()) -> float:
    g_c, g_h, g_r, _ = _energies(scene, cfg)
    return float(
        cfg.lambda_collision * g_c + cfg.lambda_gravity * g_h + cfg.lambda_relation * g_r
    )


def composite_gradient(scene: Scene, cfg: GuidanceConfig = GuidanceConfig()) -> GuidanceReport:
    """Gradient of the lambda-weighted energy w.r.t. the (N, 9) state.

    Raises NonFiniteGradient when any entry is NaN/Inf; callers normally
    zero the offending rows (the sampler does).
    """
    if cfg.grad_mode == "finite_difference":
        return _fd_gradient(scene, cfg)
    x = torch.as_tensor(flatten_scene(scene), dtype=torch.float64)
    x.requires_grad_(True)
    g_c, g_h, g_r, counts = _energies(scene, cfg, x)
    total = (
        cfg.lambda_collision * g_c + cfg.lambda_gravity * g_h + cfg.lambda_relation * g_r
    )
    if total.requires_grad:
        (grad,) = torch.autograd.grad(total, x, allow_unused=False)
        gradient = grad.numpy()
    else:
        gradient = np.zeros((scene.n, 9))
    report = GuidanceReport(
        float(g_c.detach()), float(g_h.detach()), float(g_r.detach()), gradient, counts
    )
    if not np.all(np.isfinite(gradient)):
        raise NonFiniteGradient(f"non-finite guidance gradient; report={counts}")
    return report


def _fd_gradient(scene: Scene, cfg: GuidanceConfig) -> GuidanceReport:
    from .scene import unflatten

    x0 = flatten_scene(scene)
    g_c, g_h, g_r, counts = _energies(scene, cfg)
    grad = np.zeros_like(x0)
    h = cfg.fd_step
    for i in range(x0.shape[0]):
        for k in range(9):
            xp = x0.copy()
            xp[i, k] += h
            xm = x0.copy()
            xm[i, k] -= h
            ep = composite_energy(unflatten(xp, scene), cfg)
            em = composite_energy(unflatten(xm, scene), cfg)
            grad[i, k] = (ep - em) / (2 * h)
    report = GuidanceReport(float(g_c), float(g_h), float(g_r), grad, counts)
    if not np.all(np.isfinite(grad)):
        raise NonFiniteGradient("non-finite finite-difference gradient")
    return report
