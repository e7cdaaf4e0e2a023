"""Physics-guided diffusion for 3D indoor scene layouts.

The package generates object arrangements with a small denoising
diffusion model whose reverse process is steered by differentiable
physical energies (collision, gravity, relation containment), and ships
the mesh geometry, metric, and synthetic-data machinery around it.
"""

from .config import RunConfig, load_config
from .diffusion import (
    NoiseSchedule,
    SamplerConfig,
    forward_sample,
    make_schedule,
    reverse_step,
    sample_scene,
)
from .errors import SceneGuideError
from .guidance import (
    GuidanceConfig,
    GuidanceReport,
    collision_energy,
    composite_energy,
    composite_gradient,
    gravity_energy,
    relation_energy,
)
from .mesh import TriMesh
from .metrics import MetricReport, asd, col_mesh_rate, evaluate, grecall, stability
from .relations import RelationParams, derive_relations
from .rotation import matrix_to_rot6d, rot6d_to_matrix
from .scene import (
    RelationGraphs,
    Scene,
    SceneObject,
    flatten_scene,
    scene_from_json,
    scene_to_json,
    unflatten,
)
from .settle import SettleResult, settle
from .synthdata import GenSpec, gen_dataset, gen_scene

__version__ = "0.1.0"

__all__ = [
    "RunConfig",
    "load_config",
    "NoiseSchedule",
    "SamplerConfig",
    "forward_sample",
    "make_schedule",
    "reverse_step",
    "sample_scene",
    "SceneGuideError",
    "GuidanceConfig",
    "GuidanceReport",
    "collision_energy",
    "composite_energy",
    "composite_gradient",
    "gravity_energy",
    "relation_energy",
    "TriMesh",
    "MetricReport",
    "asd",
    "col_mesh_rate",
    "evaluate",
    "grecall",
    "stability",
    "RelationParams",
    "derive_relations",
    "matrix_to_rot6d",
    "rot6d_to_matrix",
    "RelationGraphs",
    "Scene",
    "SceneObject",
    "flatten_scene",
    "scene_from_json",
    "scene_to_json",
    "unflatten",
    "SettleResult",
    "settle",
    "GenSpec",
    "gen_dataset",
    "gen_scene",
    "__version__",
]
