"""Exception hierarchy shared across the package."""


class PointManipError(Exception):
    """Base class for all package errors."""


class BehindCamera(PointManipError):
    """Point lies at or behind the camera plane (camera-frame z <= 1e-6 m)."""


class NonPositiveDepth(PointManipError):
    """Unprojection requested with depth <= 0."""


class DegenerateRays(PointManipError):
    """Triangulation rays are parallel within tolerance."""


class InsufficientBaseline(PointManipError):
    """Camera centers are closer than the minimum triangulation baseline."""


class TooFewPoints(PointManipError):
    """A sampling operation requested more points than are available."""


class PlacementFailure(PointManipError):
    """Rejection sampling could not place objects without overlap."""


class ScriptFailure(PointManipError):
    """Scripted demonstration did not end in task success."""


class ObjectFullyOccluded(PointManipError):
    """Too few visible points to build an object's observation."""


class EmptyMask(PointManipError):
    """A segmentation mask contains no pixels."""


class ShapeMismatch(PointManipError):
    """Tensor shapes disagree with the policy's shape registry."""


class EmptyDataset(PointManipError):
    """Training requested on a dataset with no frames."""


class GenerationBudgetExceeded(PointManipError):
    """Dataset generation exhausted its retry budget before reaching the target."""


class PerceptionFailure(PointManipError):
    """Perception produced zero valid points for a task object."""


class NoCoveringChunk(PointManipError):
    """Temporal ensembling found no action chunk covering the requested step."""


class MissingCheckpoint(PointManipError):
    """An ablation arm references a checkpoint that does not exist."""


class ConfigError(PointManipError):
    """A task or run configuration file is malformed."""


class BackendFailure(PointManipError):
    """A remote perception backend timed out or returned a malformed reply."""
