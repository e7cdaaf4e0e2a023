"""Procedural generator of physically valid toy scenes.

Primitive objects (boxes, cylinders, a tabletop-with-legs composite)
are placed on the floor by rejection sampling and optionally stacked on
top of each other with full footprint containment and a support gap of
``eps_gap``.  The physical graph is annotated from the construction and
the spatial graph is derived from the final poses, so the corpus serves
as its own ground truth: every emitted scene sits exactly on the zero
set of all three guidance energies.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .descriptors import shape_descriptor
from .errors import PlacementFailure
from .mesh import TriMesh
from .relations import derive_relations
from .rotation import matrix_to_rot6d, yaw_matrix
from .scene import (
    SUPPORT,
    RelationGraphs,
    Scene,
    SceneObject,
    scene_to_json,
)

_MAX_REJECTIONS = 1000
_CLEARANCE = 0.05  # minimal footprint separation between floor objects
_STACK_MARGIN = 0.02  # containment margin inside the supporter footprint
_MIN_STACK_HEIGHT = 0.05


@dataclass(frozen=True)
class GenSpec:
    """Generation parameters for one scene family."""

    n_objects: tuple[int, int] = (2, 6)
    room_half_extent: float = 3.0
    floor_size: tuple[float, float] = (0.4, 1.0)  # footprint of floor objects
    floor_height_range: tuple[float, float] = (0.3, 0.8)
    stack_size: tuple[float, float] = (0.08, 0.25)
    stack_height_range: tuple[float, float] = (_MIN_STACK_HEIGHT, 0.2)
    stack_prob: float = 0.5
    max_depth: int = 3
    eps_gap: float = 0.005
    seed: int = 0

    def __post_init__(self):
        for lo, hi in (
            self.n_objects,
            self.floor_size,
            self.floor_height_range,
            self.stack_size,
            self.stack_height_range,
        ):
            if lo > hi:
                raise ValueError(f"empty range ({lo}, {hi})")
        if self.n_objects[0] < 1:
            raise ValueError("need at least one object")
        if self.room_half_extent <= 0:
            raise ValueError("room extent must be positive")
        if not 1 <= self.max_depth <= 3:
            raise ValueError("support-tree depth must be in [1, 3]")
        if self.stack_height_range[0] < _MIN_STACK_HEIGHT:
            raise ValueError("stacked objects thinner than the support gap band")


# ---------------------------------------------------------------------------
# Primitive meshes, centered on their vertex centroid.


def _centered(vertices: np.ndarray, faces: np.ndarray) -> TriMesh:
    v = np.asarray(vertices, dtype=np.float64)
    return TriMesh(v - v.mean(axis=0), np.asarray(faces, dtype=np.int64))


def make_box(sx: float, sy: float, sz: float) -> TriMesh:
    hx, hy, hz = sx / 2, sy / 2, sz / 2
    v = np.array(
        [
            [-hx, -hy, -hz], [hx, -hy, -hz], [hx, hy, -hz], [-hx, hy, -hz],
            [-hx, -hy, hz], [hx, -hy, hz], [hx, hy, hz], [-hx, hy, hz],
        ]
    )
    f = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # -z
            [4, 5, 6], [4, 6, 7],  # +z
            [0, 1, 5], [0, 5, 4],  # -y
            [3, 7, 6], [3, 6, 2],  # +y
            [0, 4, 7], [0, 7, 3],  # -x
            [1, 2, 6], [1, 6, 5],  # +x
        ]
    )
    return _centered(v, f)


def make_cylinder(radius: float, height: float, segments: int = 16) -> TriMesh:
    ang = 2 * np.pi * np.arange(segments) / segments
    ring = np.stack([radius * np.cos(ang), np.zeros(segments), radius * np.sin(ang)], axis=1)
    bot = ring + [0.0, -height / 2, 0.0]
    top = ring + [0.0, height / 2, 0.0]
    cb = np.array([[0.0, -height / 2, 0.0]])
    ct = np.array([[0.0, height / 2, 0.0]])
    v = np.concatenate([bot, top, cb, ct])
    ib, it_, icb, ict = 0, segments, 2 * segments, 2 * segments + 1
    faces = []
    for k in range(segments):
        k1 = (k + 1) % segments
        faces.append([ib + k, it_ + k, it_ + k1])
        faces.append([ib + k, it_ + k1, ib + k1])
        faces.append([icb, ib + k, ib + k1])  # bottom cap, normal -y
        faces.append([ict, it_ + k1, it_ + k])  # top cap, normal +y
    return _centered(v, np.array(faces))


def make_table(sx: float, sz: float, height: float, top_thickness: float = 0.06) -> TriMesh:
    """Tabletop slab on four inset square legs, merged into one mesh."""
    leg_w = min(0.08, sx / 5, sz / 5)
    leg_h = height - top_thickness
    slab = make_box(sx, top_thickness, sz)
    sv = slab.vertices + [0.0, leg_h + top_thickness / 2, 0.0]
    parts_v = [sv]
    parts_f = [slab.faces]
    offset = len(sv)
    inset_x = sx / 2 - leg_w
    inset_z = sz / 2 - leg_w
    for px, pz in ((-inset_x, -inset_z), (inset_x, -inset_z), (-inset_x, inset_z), (inset_x, inset_z)):
        leg = make_box(leg_w, leg_h, leg_w)
        parts_v.append(leg.vertices + [px, leg_h / 2, pz])
        parts_f.append(leg.faces + offset)
        offset += len(leg.vertices)
    return _centered(np.concatenate(parts_v), np.concatenate(parts_f))


# ---------------------------------------------------------------------------
# Placement.


def _footprint_radius(mesh: TriMesh) -> float:
    return float(np.linalg.norm(mesh.vertices[:, [0, 2]], axis=1).max())


def _top_inradius(mesh: TriMesh) -> float:
    """Radius of the largest centered disc inside the XZ footprint."""
    xz = mesh.vertices[:, [0, 2]]
    from .meshgeom import xz_hull

    hull = xz_hull(mesh)
    if hull.degenerate:
        return 0.0
    center = xz.mean(axis=0)
    verts = hull.vertices
    dists = []
    for k in range(len(verts)):
        a = verts[k]
        b = verts[(k + 1) % len(verts)]
        ab = b - a
        denom = float(ab @ ab)
        t = float(np.clip(((center - a) @ ab) / denom, 0.0, 1.0)) if denom > 0 else 0.0
        dists.append(float(np.linalg.norm(center - (a + t * ab))))
    return min(dists)


_LABEL_BUFFER = 0.05  # ratio slack against the 0.6 dominance threshold


def _label_robust(delta: np.ndarray, buffer: float = _LABEL_BUFFER) -> bool:
    """True when the spatial label of this centroid delta survives small
    perturbations (jitter, settling): the pair is comfortably away from
    the dominance knife edge and the argmax axis is unambiguous."""
    norm = float(np.linalg.norm(delta))
    if norm < 0.05 + buffer:
        return False
    ratios = np.sort(np.abs(delta))[::-1] / norm
    if ratios[0] < 0.6 - buffer:
        return True  # robustly `none`
    return ratios[0] > 0.6 + buffer and ratios[0] - ratios[1] > buffer


def _resting_y(obj_mesh: TriMesh, R: np.ndarray, surface_y: float, eps: float) -> float:
    """Center height putting the rotated mesh's lowest vertex at surface + eps.

    Nudged up by ulps until the posed minimum is not below the target, so
    the gravity energy's residual is never negative.
    """
    w = (obj_mesh.vertices @ R.T)[:, 1]
    y = surface_y + eps - float(w.min())
    # The residual check mirrors the guidance energy's arithmetic
    # (per-vertex sums, then the two subtractions) so the zero set holds
    # bitwise, not just within an ulp.
    for _ in range(64):
        if (float((w + y).min()) - surface_y) - eps >= 0.0:
            break
        y = float(np.nextafter(y, np.inf))
    return y


@dataclass
class _Placed:
    mesh: TriMesh
    category: str
    p: np.ndarray
    R: np.ndarray
    depth: int
    supporter: int  # index into the placed list, -1 for floor
    children: int = 0


def _random_floor_object(spec: GenSpec, rng: np.random.Generator) -> tuple[TriMesh, str]:
    kind = rng.choice(["box", "cylinder", "table"])
    lo, hi = spec.floor_size
    h = rng.uniform(*spec.floor_height_range)
    if kind == "box":
        return make_box(rng.uniform(lo, hi), h, rng.uniform(lo, hi)), "box"
    if kind == "cylinder":
        return make_cylinder(rng.uniform(lo, hi) / 2, h), "cylinder"
    return make_table(rng.uniform(lo, hi), rng.uniform(lo, hi), max(h, 0.3)), "table"


def _random_stack_object(spec: GenSpec, rng: np.random.Generator) -> tuple[TriMesh, str]:
    kind = rng.choice(["box", "cylinder"])
    lo, hi = spec.stack_size
    h = rng.uniform(*spec.stack_height_range)
    if kind == "box":
        return make_box(rng.uniform(lo, hi), h, rng.uniform(lo, hi)), "box"
    return make_cylinder(rng.uniform(lo, hi) / 2, h), "cylinder"


def gen_scene(spec: GenSpec, seed: int | None = None) -> Scene:
    """Generate one physically valid scene; deterministic in the seed."""
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    n = int(rng.integers(spec.n_objects[0], spec.n_objects[1] + 1))
    placed: list[_Placed] = []

    for _ in range(n):
        stack_parent = _pick_supporter(placed, spec, rng)
        if stack_parent is not None:
            _place_stacked(placed, stack_parent, spec, rng)
        else:
            _place_on_floor(placed, spec, rng)

    objects = []
    for i, pl in enumerate(placed):
        objects.append(
            SceneObject(
                id=i,
                category=pl.category,
                mesh=pl.mesh,
                p=pl.p,
                r=matrix_to_rot6d(pl.R),
                shape_desc=shape_descriptor(pl.mesh),
            )
        )
    physical = np.zeros((len(placed), len(placed)), dtype=np.int64)
    for i, pl in enumerate(placed):
        if pl.supporter >= 0:
            physical[i, pl.supporter] = SUPPORT
    scene = Scene(tuple(objects), RelationGraphs.empty(len(objects)), floor_height=0.0)
    spatial = derive_relations(scene).spatial
    return Scene(tuple(objects), RelationGraphs(spatial, physical), floor_height=0.0)


def _pick_supporter(
    placed: list[_Placed], spec: GenSpec, rng: np.random.Generator
) -> int | None:
    candidates = [
        k
        for k, pl in enumerate(placed)
        if pl.depth < spec.max_depth
        and pl.children == 0
        and _top_inradius(pl.mesh) > spec.stack_size[0] + _STACK_MARGIN
    ]
    if not candidates or rng.uniform() > spec.stack_prob:
        return None
    return int(candidates[int(rng.integers(len(candidates)))])


def _place_on_floor(placed: list[_Placed], spec: GenSpec, rng: np.random.Generator) -> None:
    for _ in range(_MAX_REJECTIONS):
        mesh, category = _random_floor_object(spec, rng)
        R = yaw_matrix(rng.uniform(0.0, 2 * np.pi))
        radius = _footprint_radius(mesh)
        limit = spec.room_half_extent - radius
        if limit <= 0:
            continue
        cx, cz = rng.uniform(-limit, limit, size=2)
        y = _resting_y(mesh, R, 0.0, spec.eps_gap)
        p = np.array([cx, y, cz])
        ok = True
        for other in placed:
            if other.supporter == -1:
                d = np.hypot(cx - other.p[0], cz - other.p[2])
                if d < radius + _footprint_radius(other.mesh) + _CLEARANCE:
                    ok = False
                    break
            if not _label_robust(p - other.p):
                ok = False
                break
        if ok:
            placed.append(_Placed(mesh, category, p, R, 1, -1))
            return
    raise PlacementFailure(f"no free floor space after {_MAX_REJECTIONS} rejections")


def _place_stacked(
    placed: list[_Placed], parent_idx: int, spec: GenSpec, rng: np.random.Generator
) -> None:
    parent = placed[parent_idx]
    parent_world = parent.mesh.transformed(parent.R, parent.p)
    top_y = float(parent_world.vertices[:, 1].max())
    inradius = _top_inradius(parent_world)
    for _ in range(_MAX_REJECTIONS):
        mesh, category = _random_stack_object(spec, rng)
        radius = _footprint_radius(mesh)
        slack = inradius - radius - _STACK_MARGIN
        if slack <= 0:
            continue
        R = yaw_matrix(rng.uniform(0.0, 2 * np.pi))
        xz_center = parent_world.vertices[:, [0, 2]].mean(axis=0)
        off_r = rng.uniform(0.0, slack)
        off_a = rng.uniform(0.0, 2 * np.pi)
        cx = xz_center[0] + off_r * np.cos(off_a)
        cz = xz_center[1] + off_r * np.sin(off_a)
        y = _resting_y(mesh, R, top_y, spec.eps_gap)
        p = np.array([cx, y, cz])
        if not all(_label_robust(p - other.p) for other in placed):
            continue
        placed.append(_Placed(mesh, category, p, R, parent.depth + 1, parent_idx))
        placed[parent_idx].children += 1
        return
    raise PlacementFailure(f"cannot fit a stacked object after {_MAX_REJECTIONS} rejections")


# ---------------------------------------------------------------------------
# Dataset files.


def gen_dataset(
    spec: GenSpec,
    count: int,
    split_ratio: float,
    out_dir: str | Path,
) -> Path:
    """Write ``count`` scene JSON files plus a train/test manifest.

    Returns the manifest path.  Scene seeds come from a deterministic
    stream off ``spec.seed``, so reruns are byte-identical.
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    if not 0.0 < split_ratio < 1.0:
        raise ValueError("split ratio must be in (0, 1)")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    n_train = max(1, min(count - 1, round(count * split_ratio)))
    seeds = [spec.seed + 1 + k for k in range(count)]
    train_paths: list[str] = []
    test_paths: list[str] = []
    for k, s in enumerate(seeds):
        scene = gen_scene(spec, seed=s)
        name = f"scene_{k:05d}.json"
        (out / name).write_text(scene_to_json(scene))
        (train_paths if k < n_train else test_paths).append(name)
    manifest = {
        "train": train_paths,
        "test": test_paths,
        "spec": asdict(spec),
        "seeds": seeds,
    }
    manifest_path = out / "manifest.json"
    manifest_path.write_text(json.dumps(manifest, sort_keys=True, indent=2))
    return manifest_path


def load_dataset(manifest_path: str | Path) -> tuple[list[Scene], list[Scene]]:
    """Read a manifest and its scene files back into Scene objects."""
    from .scene import scene_from_json

    path = Path(manifest_path)
    manifest = json.loads(path.read_text())
    base = path.parent
    train = [scene_from_json((base / p).read_text()) for p in manifest["train"]]
    test = [scene_from_json((base / p).read_text()) for p in manifest["test"]]
    return train, test
