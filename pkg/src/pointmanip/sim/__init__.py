from .objects import ObjectInstance, make_object, CATEGORIES
from .tasks import TaskSpec, load_task, builtin_task, builtin_task_names
from .world import WorldState, build_scene, step, check_success, HOME_POSE, gripper_hull_points
from .render import render, write_pgm, read_pgm
from .scripted import Trajectory, scripted_demo

__all__ = [
    "ObjectInstance",
    "make_object",
    "CATEGORIES",
    "TaskSpec",
    "load_task",
    "builtin_task",
    "builtin_task_names",
    "WorldState",
    "build_scene",
    "step",
    "check_success",
    "HOME_POSE",
    "gripper_hull_points",
    "render",
    "write_pgm",
    "read_pgm",
    "Trajectory",
    "scripted_demo",
]
