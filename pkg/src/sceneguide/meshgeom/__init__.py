"""Geometric kernel: BVH, triangle intersection, sampling, signed
Chamfer distance, XZ convex hulls, and vertical height queries."""

from .bvh import Bvh, build_bvh, candidate_pairs, find_collision_pairs
from .chamfer import (
    NO_NEIGHBOR_DISTANCE,
    min_sample_distance,
    signed_chamfer,
    signed_point_mesh_distance,
)
from .heights import (
    NO_OVERLAP,
    column_heights,
    overlap_grid,
    top_faces_below,
    vertical_gap,
)
from .hull import (
    Hull2D,
    clip_convex,
    hull_overlap_fraction,
    point_in_hull,
    point_to_hull_distance,
    polygon_area,
    project_xz,
    xz_hull,
)
from .sampling import SurfaceSample, sample_surface
from .trisect import tri_pairs_intersect, tri_tri_intersect

__all__ = [
    "Bvh",
    "build_bvh",
    "candidate_pairs",
    "find_collision_pairs",
    "NO_NEIGHBOR_DISTANCE",
    "signed_chamfer",
    "signed_point_mesh_distance",
    "min_sample_distance",
    "NO_OVERLAP",
    "column_heights",
    "top_faces_below",
    "overlap_grid",
    "vertical_gap",
    "Hull2D",
    "xz_hull",
    "project_xz",
    "point_in_hull",
    "point_to_hull_distance",
    "polygon_area",
    "clip_convex",
    "hull_overlap_fraction",
    "SurfaceSample",
    "sample_surface",
    "tri_tri_intersect",
    "tri_pairs_intersect",
]
