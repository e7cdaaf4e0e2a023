"""Scene domain types: objects, relation graphs, state vectors, JSON codec.

Axis convention: Y is up (gravity is -Y), the XZ plane is the ground.
Front is -Z and left is -X in world frame.

The diffusion state is an (N, 9) matrix whose row j is the concatenation
of object j's centroid position and 6-D rotation, rows ordered by id.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import GraphSizeMismatch, ShapeMismatch, UnknownLabel
from .mesh import TriMesh
from .rotation import rot6d_to_matrix

SPATIAL_LABELS = ("none", "left_of", "right_of", "in_front_of", "behind", "above", "below")
PHYSICAL_LABELS = ("none", "support", "contact", "attach")

SPATIAL_OPPOSITE = {
    "left_of": "right_of",
    "right_of": "left_of",
    "in_front_of": "behind",
    "behind": "in_front_of",
    "above": "below",
    "below": "above",
}

NONE = 0
SUPPORT = PHYSICAL_LABELS.index("support")
CONTACT = PHYSICAL_LABELS.index("contact")
ATTACH = PHYSICAL_LABELS.index("attach")


def spatial_index(label: str) -> int:
    try:
        return SPATIAL_LABELS.index(label)
    except ValueError:
        raise UnknownLabel(f"unknown spatial label {label!r}") from None


def physical_index(label: str) -> int:
    try:
        return PHYSICAL_LABELS.index(label)
    except ValueError:
        raise UnknownLabel(f"unknown physical label {label!r}") from None


@dataclass(frozen=True)
class RelationGraphs:
    """Labeled adjacency matrices for spatial and physical relations.

    Entry [i, j] encodes the relation of object i with respect to j,
    e.g. spatial[i, j] = left_of means "i is left of j" and
    physical[i, j] = support means "i is supported by j".
    """

    spatial: np.ndarray
    physical: np.ndarray

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.spatial, dtype=np.int64))
        p = np.ascontiguousarray(np.asarray(self.physical, dtype=np.int64))
        if s.shape != p.shape or s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise GraphSizeMismatch(f"bad graph shapes {s.shape} / {p.shape}")
        if s.min() < 0 or s.max() >= len(SPATIAL_LABELS):
            raise UnknownLabel("spatial label index out of range")
        if p.min() < 0 or p.max() >= len(PHYSICAL_LABELS):
            raise UnknownLabel("physical label index out of range")
        object.__setattr__(self, "spatial", s)
        object.__setattr__(self, "physical", p)

    @property
    def n(self) -> int:
        return self.spatial.shape[0]

    def validate(self):
        """Check structural invariants; raises on violation."""
        n = self.n
        if np.any(np.diag(self.spatial) != NONE) or np.any(np.diag(self.physical) != NONE):
            raise GraphSizeMismatch("diagonal entries must be `none`")
        for i in range(n):
            for j in range(n):
                li = SPATIAL_LABELS[self.spatial[i, j]]
                lj = SPATIAL_LABELS[self.spatial[j, i]]
                if li != "none" and lj != SPATIAL_OPPOSITE[li]:
                    raise GraphSizeMismatch(
                        f"spatial antisymmetry violated at ({i}, {j}): {li} vs {lj}"
                    )
        if self._support_has_cycle():
            raise GraphSizeMismatch("support edges contain a cycle")

    def support_pairs(self) -> list[tuple[int, int]]:
        """Directed (supported, supporter) pairs from the physical graph."""
        ii, jj = np.nonzero(self.physical == SUPPORT)
        return list(zip(ii.tolist(), jj.tolist()))

    def _support_has_cycle(self) -> bool:
        n = self.n
        adj = {i: [] for i in range(n)}
        for i, j in self.support_pairs():
            adj[i].append(j)
        state = [0] * n  # 0 unvisited, 1 in stack, 2 done

        def visit(u):
            state[u] = 1
            for v in adj[u]:
                if state[v] == 1 or (state[v] == 0 and visit(v)):
                    return True
            state[u] = 2
            return False

        return any(state[i] == 0 and visit(i) for i in range(n))

    @staticmethod
    def empty(n: int) -> "RelationGraphs":
        return RelationGraphs(np.zeros((n, n), dtype=np.int64), np.zeros((n, n), dtype=np.int64))


@dataclass(frozen=True)
class SceneObject:
    """One rigid object: mesh in its canonical frame plus a world pose."""

    id: int
    category: str
    mesh: TriMesh
    p: np.ndarray  # (3,) centroid position
    r: np.ndarray  # (6,) continuous rotation
    shape_desc: np.ndarray  # (8,) geometric descriptor

    def __post_init__(self):
        object.__setattr__(self, "p", np.asarray(self.p, dtype=np.float64).reshape(3))
        object.__setattr__(self, "r", np.asarray(self.r, dtype=np.float64).reshape(6))
        object.__setattr__(
            self, "shape_desc", np.asarray(self.shape_desc, dtype=np.float64).reshape(-1)
        )

    def rotation_matrix(self, strict: bool = False) -> np.ndarray:
        return rot6d_to_matrix(self.r, strict=strict)


@dataclass(frozen=True)
class Scene:
    """A set of objects, their relation graphs, and a floor plane."""

    objects: tuple[SceneObject, ...]
    graphs: RelationGraphs
    floor_height: float = 0.0

    def __post_init__(self):
        objs = tuple(self.objects)
        if len(objs) < 1:
            raise ShapeMismatch("scene needs at least one object")
        ids = sorted(o.id for o in objs)
        if ids != list(range(len(objs))):
            raise ShapeMismatch("object ids must be unique and dense in [0, N)")
        objs = tuple(sorted(objs, key=lambda o: o.id))
        if self.graphs.n != len(objs):
            raise GraphSizeMismatch("graph size does not match object count")
        object.__setattr__(self, "objects", objs)

    @property
    def n(self) -> int:
        return len(self.objects)

    def posed_meshes(self) -> list[TriMesh]:
        return [posed_mesh(o) for o in self.objects]


def posed_mesh(obj: SceneObject, strict: bool = False) -> TriMesh:
    """Object mesh in world frame: v' = R v + p."""
    return obj.mesh.transformed(obj.rotation_matrix(strict=strict), obj.p)


def flatten_scene(scene: Scene) -> np.ndarray:
    """Stack per-object [p || r] rows into the (N, 9) diffusion state."""
    return np.stack([np.concatenate([o.p, o.r]) for o in scene.objects])


def unflatten(x: np.ndarray, template: Scene) -> Scene:
    """Write the poses in ``x`` back into a copy of ``template``.

    Meshes, graphs, categories, and descriptors are untouched.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (template.n, 9):
        raise ShapeMismatch(f"state shape {x.shape} vs {template.n} objects")
    objs = tuple(
        replace(o, p=x[i, :3].copy(), r=x[i, 3:].copy())
        for i, o in enumerate(template.objects)
    )
    return replace(template, objects=objs)


# ---------------------------------------------------------------------------
# Scene JSON codec (version 1).

def scene_to_dict(scene: Scene) -> dict:
    return {
        "version": 1,
        "floor_height": float(scene.floor_height),
        "objects": [
            {
                "id": int(o.id),
                "category": o.category,
                "mesh": {
                    "vertices": o.mesh.vertices.tolist(),
                    "faces": o.mesh.faces.tolist(),
                },
                "position": o.p.tolist(),
                "rotation6d": o.r.tolist(),
            }
            for o in scene.objects
        ],
        "spatial": [
            [SPATIAL_LABELS[v] for v in row] for row in scene.graphs.spatial
        ],
        "physical": [
            [PHYSICAL_LABELS[v] for v in row] for row in scene.graphs.physical
        ],
    }


def scene_from_dict(data: dict) -> Scene:
    from .descriptors import shape_descriptor

    if data.get("version") != 1:
        raise ShapeMismatch(f"unsupported scene version {data.get('version')!r}")
    objects = []
    for od in data["objects"]:
        mesh = TriMesh(np.array(od["mesh"]["vertices"]), np.array(od["mesh"]["faces"]))
        objects.append(
            SceneObject(
                id=int(od["id"]),
                category=od["category"],
                mesh=mesh,
                p=np.array(od["position"]),
                r=np.array(od["rotation6d"]),
                shape_desc=shape_descriptor(mesh),
            )
        )
    spatial = np.array([[spatial_index(v) for v in row] for row in data["spatial"]])
    physical = np.array([[physical_index(v) for v in row] for row in data["physical"]])
    return Scene(
        objects=tuple(objects),
        graphs=RelationGraphs(spatial, physical),
        floor_height=float(data.get("floor_height", 0.0)),
    )


def scene_to_json(scene: Scene) -> str:
    return json.dumps(scene_to_dict(scene), sort_keys=True)


def scene_from_json(text: str) -> Scene:
    return scene_from_dict(json.loads(text))
