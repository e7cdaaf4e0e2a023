"""Axis-aligned bounding-box hierarchy over mesh faces.

Built by median split on face centroids along the longest box axis.
Candidate queries return exactly the face pairs whose individual AABBs
overlap (closed, with a small epsilon), i.e. the same set a brute-force
box-overlap scan would produce.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyMesh
from ..mesh import TriMesh
from .trisect import tri_pairs_intersect

_BOX_EPS = 1e-9
LEAF_SIZE = 4


@dataclass
class _Node:
    lo: np.ndarray
    hi: np.ndarray
    left: int  # child index, -1 for leaf
    right: int
    start: int  # leaf face range into Bvh.order
    count: int


@dataclass
class Bvh:
    """Immutable face-box hierarchy for one world-frame mesh."""

    mesh: TriMesh
    nodes: list[_Node]
    order: np.ndarray  # permutation of face indices
    face_lo: np.ndarray  # (F, 3) per-face AABB minima
    face_hi: np.ndarray

    @property
    def root(self) -> int:
        return 0


def build_bvh(mesh: TriMesh, leaf_size: int = LEAF_SIZE) -> Bvh:
    if len(mesh.faces) == 0:
        raise EmptyMesh("cannot build a BVH over an empty mesh")
    tris = mesh.triangles()
    face_lo = tris.min(axis=1)
    face_hi = tris.max(axis=1)
    centers = tris.mean(axis=1)

    nodes: list[_Node] = []
    order = np.arange(len(mesh.faces))

    def rec(start: int, count: int) -> int:
        idx = order[start : start + count]
        lo = face_lo[idx].min(axis=0)
        hi = face_hi[idx].max(axis=0)
        node_id = len(nodes)
        nodes.append(_Node(lo, hi, -1, -1, start, count))
        if count > leaf_size:
            axis = int(np.argmax(hi - lo))
            local = np.argsort(centers[idx, axis], kind="stable")
            order[start : start + count] = idx[local]
            half = count // 2
            left = rec(start, half)
            right = rec(start + half, count - half)
            nodes[node_id].left = left
            nodes[node_id].right = right
        return node_id

    rec(0, len(order))
    return Bvh(mesh, nodes, order, face_lo, face_hi)


def _boxes_overlap(lo_a, hi_a, lo_b, hi_b) -> bool:
    return bool(np.all(lo_a <= hi_b + _BOX_EPS) and np.all(lo_b <= hi_a + _BOX_EPS))


def candidate_pairs(a: Bvh, b: Bvh) -> np.ndarray:
    """Face-index pairs (i from a, j from b) with overlapping face AABBs."""
    pairs: list[tuple[int, int]] = []
    stack = [(a.root, b.root)]
    while stack:
        na, nb = stack.pop()
        node_a, node_b = a.nodes[na], b.nodes[nb]
        if not _boxes_overlap(node_a.lo, node_a.hi, node_b.lo, node_b.hi):
            continue
        leaf_a = node_a.left < 0
        leaf_b = node_b.left < 0
        if leaf_a and leaf_b:
            fa = a.order[node_a.start : node_a.start + node_a.count]
            fb = b.order[node_b.start : node_b.start + node_b.count]
            lo_a, hi_a = a.face_lo[fa], a.face_hi[fa]
            lo_b, hi_b = b.face_lo[fb], b.face_hi[fb]
            ok = np.all(lo_a[:, None] <= hi_b[None, :] + _BOX_EPS, axis=2) & np.all(
                lo_b[None, :] <= hi_a[:, None] + _BOX_EPS, axis=2
            )
            ii, jj = np.nonzero(ok)
            pairs.extend(zip(fa[ii].tolist(), fb[jj].tolist()))
        elif leaf_b or (not leaf_a and _node_extent(node_a) >= _node_extent(node_b)):
            stack.append((a.nodes[na].left, nb))
            stack.append((a.nodes[na].right, nb))
        else:
            stack.append((na, b.nodes[nb].left))
            stack.append((na, b.nodes[nb].right))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    return np.array(sorted(set(pairs)), dtype=np.int64)


def _node_extent(node: _Node) -> float:
    return float(np.max(node.hi - node.lo))


def find_collision_pairs(meshes: list[TriMesh]) -> set[tuple[int, int, int, int]]:
    """Cross-object intersecting triangle pairs.

    Returns tuples (obj_a, face_i, obj_b, face_j) with obj_a < obj_b,
    containing exactly the pairs for which the closed triangle predicate
    holds.
    """
    bvhs = [build_bvh(m) for m in meshes]
    out: set[tuple[int, int, int, int]] = set()
    for a in range(len(meshes)):
        for b in range(a + 1, len(meshes)):
            lo_a, hi_a = meshes[a].aabb()
            lo_b, hi_b = meshes[b].aabb()
            if not _boxes_overlap(lo_a, hi_a, lo_b, hi_b):
                continue
            cand = candidate_pairs(bvhs[a], bvhs[b])
            if len(cand) == 0:
                continue
            tris_a = meshes[a].triangles()[cand[:, 0]]
            tris_b = meshes[b].triangles()[cand[:, 1]]
            hit = tri_pairs_intersect(tris_a, tris_b)
            for (fi, fj) in cand[hit]:
                out.add((a, int(fi), b, int(fj)))
    return out
