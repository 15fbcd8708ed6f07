"""Scripted pick-and-place expert producing segmented demonstrations.

The expert marches through a fixed waypoint program with small per-step pose
targets (2 cm / 10 deg), so every emitted action is reached exactly by the
world's clamped stepper and a replay of the action list reproduces the
trajectory bit for bit. Demonstrations carry exactly two object-centric
segments: approach+grasp referenced to the source object (through the
securing lift), and transport+place referenced to the target object.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import ScriptFailure
from ..geometry import Pose, pose_to_action, rot_z, rotation_angle, step_toward
from .tasks import TaskSpec
from .world import SOURCE_ID, TARGET_ID, WorldState, check_success, step

SCRIPT_STEP_TRANSLATION = 0.02
SCRIPT_STEP_ROTATION = math.radians(10.0)
GRIPPER_OPEN = 1.0
GRIPPER_CLOSED = 0.0
APPROACH_HEIGHT = 0.10
LIFT_HEIGHT = 0.12
PLACE_HOVER = 0.005
MAX_MARCH_STEPS = 10_000


@dataclass
class Trajectory:
    """Frames of (WorldState before the action, 10-vector action) plus
    contiguous (start, end, reference_object_id) segment labels."""

    frames: list = field(default_factory=list)
    segments: list = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.frames)

    def actions(self) -> np.ndarray:
        return np.stack([a for _, a in self.frames])

    def validate_segments(self):
        assert self.segments, "trajectory has no segments"
        assert self.segments[0][0] == 0
        assert self.segments[-1][1] == len(self.frames)
        for (s0, e0, _), (s1, _, _) in zip(self.segments, self.segments[1:]):
            assert e0 == s1, "segments must be contiguous"


def _reached(current: Pose, target: Pose) -> bool:
    return (
        float(np.linalg.norm(current.translation - target.translation)) < 1e-12
        and rotation_angle(current.rotation.T @ target.rotation) < 1e-12
    )


def _march(world: WorldState, target: Pose, grip: float, traj: Trajectory) -> WorldState:
    steps = 0
    while not _reached(world.ee_pose, target):
        nxt = step_toward(world.ee_pose, target, SCRIPT_STEP_TRANSLATION, SCRIPT_STEP_ROTATION)
        action = pose_to_action(nxt, grip)
        traj.frames.append((world, action))
        world = step(world, action)
        steps += 1
        if steps > MAX_MARCH_STEPS:
            raise ScriptFailure("waypoint march did not converge")
    return world


def _step_action(world: WorldState, target: Pose, grip: float, traj: Trajectory) -> WorldState:
    """Emit a single action (must be reachable within one step)."""
    action = pose_to_action(target, grip)
    traj.frames.append((world, action))
    return step(world, action)


def _pose_yaw(p: Pose) -> float:
    return math.atan2(p.rotation[1, 0], p.rotation[0, 0])


def scripted_demo(world: WorldState, task: TaskSpec) -> Trajectory:
    """Run the waypoint expert from the given scene; raises ScriptFailure if
    the final state does not satisfy the task predicate."""
    src = world.object_by_id(SOURCE_ID)
    tgt = world.object_by_id(TARGET_ID)
    grasp = src.grasp_point_base()
    r_grasp = rot_z(_pose_yaw(src.pose))
    r_place = rot_z(_pose_yaw(tgt.pose))

    traj = Trajectory()
    w = world

    # segment 1: approach + grasp (+ securing lift), referenced to the source.
    # Gripper toggles ride on moving steps (close on the final descend, open
    # on the final placing step): a toggle that holds the pose would freeze
    # the EE for a frame and make chunked-action regression ill-posed
    # (identical observations with time-shifted targets).
    above = Pose(r_grasp, grasp + [0.0, 0.0, APPROACH_HEIGHT])
    w = _march(w, above, GRIPPER_OPEN, traj)
    w = _march(w, Pose(r_grasp, grasp + [0.0, 0.0, SCRIPT_STEP_TRANSLATION]), GRIPPER_OPEN, traj)
    w = _step_action(w, Pose(r_grasp, grasp), GRIPPER_CLOSED, traj)
    if w.attached_object != SOURCE_ID:
        raise ScriptFailure("grasp missed the source object")
    w = _march(w, Pose(r_grasp, grasp + [0.0, 0.0, LIFT_HEIGHT]), GRIPPER_CLOSED, traj)
    seg1_end = len(traj.frames)

    # segment 2: transport + place + retreat, referenced to the target.
    # The EE pinches the source at its grasp point, so center the OBJECT on
    # the target by offsetting the EE by the grasp point posed at place yaw
    # (the grasp left the EE-to-object rotation at identity).
    offset = r_place @ src.grasp_point
    place = np.array(
        [
            tgt.pose.translation[0] + offset[0],
            tgt.pose.translation[1] + offset[1],
            tgt.pose.translation[2] + tgt.support_top_z + src.grasp_point[2] + PLACE_HOVER,
        ]
    )
    w = _march(w, Pose(r_place, place + [0.0, 0.0, LIFT_HEIGHT]), GRIPPER_CLOSED, traj)
    w = _march(w, Pose(r_place, place + [0.0, 0.0, SCRIPT_STEP_TRANSLATION]), GRIPPER_CLOSED, traj)
    w = _step_action(w, Pose(r_place, place), GRIPPER_OPEN, traj)
    w = _march(w, Pose(r_place, place + [0.0, 0.0, LIFT_HEIGHT]), GRIPPER_OPEN, traj)

    traj.segments = [(0, seg1_end, SOURCE_ID), (seg1_end, len(traj.frames), TARGET_ID)]
    traj.validate_segments()
    if not check_success(w, task):
        raise ScriptFailure("scripted demonstration did not satisfy the task predicate")
    return traj
