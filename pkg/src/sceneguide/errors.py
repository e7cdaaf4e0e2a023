"""Exception types shared across the package."""


class SceneGuideError(Exception):
    """Base class for all library errors."""


class DegenerateRotation(SceneGuideError):
    """6-D rotation input whose embedded vectors are near-zero or parallel."""


class NotARotation(SceneGuideError):
    """Matrix is not orthonormal with determinant +1 within tolerance."""


class ShapeMismatch(SceneGuideError):
    """Array shapes inconsistent with the scene or parameter layout."""


class EmptyMesh(SceneGuideError):
    """Mesh has no faces or no vertices."""


class DegenerateTriangle(SceneGuideError):
    """Triangle with near-zero area."""


class UnknownLabel(SceneGuideError):
    """Relation label outside the supported enumerations."""


class GraphSizeMismatch(SceneGuideError):
    """Relation graph dimensions do not match the object count."""


class NonFiniteGradient(SceneGuideError):
    """Guidance gradient contains NaN or Inf entries."""


class NonFiniteState(SceneGuideError):
    """Diffusion state became NaN or Inf during sampling."""


class DivergedTraining(SceneGuideError):
    """Training loss became non-finite."""


class PlacementFailure(SceneGuideError):
    """Rejection sampling could not place an object within the retry budget."""


class CheckpointError(SceneGuideError):
    """Checkpoint file is malformed or inconsistent with expected shapes."""


class ConfigError(SceneGuideError):
    """Run configuration is malformed, has unknown keys, or invalid values."""
