"""Demonstration retargeting by constant per-segment rigid transforms.

A demonstration segment referenced to an object with source pose S and new
pose S' is mapped through the constant transform S' * S^-1, which preserves
the end-effector-to-object relative pose at every timestep. Segments are
joined by interpolated connection ramps sized so replay never exceeds the
world's per-step motion caps.
"""

import math

import numpy as np

from ..geometry import (
    Pose,
    action_to_pose,
    compose,
    interpolate_pose,
    inverse,
    pose_to_action,
    rotation_angle,
)
from ..sim.scripted import Trajectory
from ..sim.world import WorldState, check_success, step

CONNECTION_STEP = 0.02  # meters of translation per connection step
CONNECTION_ROT_STEP = math.radians(10.0)
MIN_CONNECTION_STEPS = 5


def retarget_segment(segment: np.ndarray, src_obj_pose: Pose, tgt_obj_pose: Pose) -> np.ndarray:
    """Map a (T, 10) action segment through tgt_obj_pose * src_obj_pose^-1.

    Gripper commands are copied verbatim.
    """
    transform = compose(tgt_obj_pose, inverse(src_obj_pose))
    out = np.empty_like(segment)
    for i, action in enumerate(segment):
        pose, grip = action_to_pose(action)
        out[i] = pose_to_action(compose(transform, pose), grip)
    return out


def connection_actions(current: Pose, target: Pose, grip: float) -> np.ndarray:
    """Interpolated ramp from the current EE pose to the target pose, budgeted
    at ceil(distance / 2 cm) steps (and at most 10 deg of rotation per step),
    minimum 5 steps."""
    dist = float(np.linalg.norm(target.translation - current.translation))
    angle = rotation_angle(current.rotation.T @ target.rotation)
    n = max(
        int(math.ceil(dist / CONNECTION_STEP)),
        int(math.ceil(angle / CONNECTION_ROT_STEP)),
        1,
    )
    # the minimum ramp length only applies to connections with real motion;
    # padding a near-zero gap would emit frozen duplicate frames
    if dist >= 0.01 or angle >= math.radians(5.0):
        n = max(n, MIN_CONNECTION_STEPS)
    actions = np.empty((n, 10))
    for i in range(1, n + 1):
        actions[i - 1] = pose_to_action(interpolate_pose(current, target, i / n), grip)
    return actions


def generate_episode(src_demo: Trajectory, new_world: WorldState, task, seed: int):
    """Adapt a segmented source demo to a novel scene and replay it.

    Returns the replayed Trajectory on success, None on failure (failures are
    counted by the caller, not raised). Reference objects missing from the
    new world raise KeyError before any replay.
    """
    all_actions = src_demo.actions()
    # resolve reference poses up front; KeyError here is a precondition breach
    plans = []
    for s, e, ref in src_demo.segments:
        src_ref = src_demo.frames[s][0].object_by_id(ref).pose
        tgt_ref = new_world.object_by_id(ref).pose
        plans.append((retarget_segment(all_actions[s:e], src_ref, tgt_ref), ref))

    world = new_world
    traj = Trajectory()
    for seg_actions, ref in plans:
        seg_start = len(traj.frames)
        first_pose, first_grip = action_to_pose(seg_actions[0])
        ramp = connection_actions(world.ee_pose, first_pose, first_grip)
        for action in np.concatenate([ramp, seg_actions]):
            traj.frames.append((world, action))
            world = step(world, action)
        traj.segments.append((seg_start, len(traj.frames), ref))

    if not check_success(world, task):
        return None
    traj.validate_segments()
    return traj
