from .embedding import embed_task, EMBEDDING_DIM
from .template import GripperKeypointTemplate, default_template, robot_keypoints
from .masks import sample_mask_pixels, erode_mask
from .observation import (
    ObservationFrame,
    RepresentationConfig,
    build_observation,
    uniform_object_points,
    visibility_mask,
    visible_object_points,
    whole_scene_points,
)

__all__ = [
    "embed_task",
    "EMBEDDING_DIM",
    "GripperKeypointTemplate",
    "default_template",
    "robot_keypoints",
    "sample_mask_pixels",
    "erode_mask",
    "ObservationFrame",
    "RepresentationConfig",
    "build_observation",
    "uniform_object_points",
    "visibility_mask",
    "visible_object_points",
    "whole_scene_points",
]
