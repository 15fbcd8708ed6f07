"""Kinematic tabletop world with a free-flying parallel gripper.

There are no contact dynamics: the end effector teleports toward commanded
poses under per-step caps, grasping is magnetic within a small radius, and
released objects drop straight down onto whatever supports them. WorldState
is an immutable value; `step` returns a new state.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from ..errors import PlacementFailure
from ..geometry import Pose, action_to_pose, compose, inverse, rot_z, step_toward
from ..seeding import rng_from
from .objects import ObjectInstance, make_object, with_pose
from .tasks import TaskSpec

SOURCE_ID = 1
TARGET_ID = 2
FIRST_DISTRACTOR_ID = 3

MAX_STEP_TRANSLATION = 0.03
MAX_STEP_ROTATION = math.radians(15.0)
GRASP_RADIUS = 0.02
PLACEMENT_CLEARANCE = 0.02
PLACEMENT_ATTEMPTS = 1000

HOME_POSE = Pose(np.eye(3), np.array([0.30, 0.0, 0.40]))

DISTRACTOR_SHAPES = (
    {"sx": 0.04, "sy": 0.04, "sz": 0.06},
    {"sx": 0.06, "sy": 0.03, "sz": 0.04},
    {"sx": 0.03, "sy": 0.05, "sz": 0.08},
    {"sx": 0.05, "sy": 0.05, "sz": 0.03},
)


def gripper_hull_points() -> np.ndarray:
    """64 fixed points on a parallel-jaw wireframe, in the EE frame.

    The EE origin sits between the fingertips; the palm and wrist extend
    along +z (upward for the canonical top-down grasp orientation).
    """
    pts = []
    for y in (-0.04, 0.04):
        z = np.linspace(0.0, 0.08, 12)
        pts.append(np.stack([np.zeros(12), np.full(12, y), z], axis=1))
    for y in (-0.04, 0.04):  # fingertip pads
        pts.append(np.array([[0.008, y, 0.004], [-0.008, y, 0.004]]))
    ybar = np.linspace(-0.05, 0.05, 16)
    pts.append(np.stack([np.zeros(16), ybar, np.full(16, 0.08)], axis=1))
    zw = np.linspace(0.08, 0.14, 12)
    pts.append(np.stack([np.zeros(12), np.zeros(12), zw], axis=1))
    xb = np.linspace(-0.02, 0.02, 8)
    pts.append(np.stack([xb, np.zeros(8), np.full(8, 0.14)], axis=1))
    out = np.concatenate(pts)
    assert out.shape == (64, 3)
    return out


GRIPPER_HULL = gripper_hull_points()
GRIPPER_HULL.flags.writeable = False


@dataclass(frozen=True)
class WorldState:
    objects: tuple
    ee_pose: Pose
    gripper_open: bool
    attached_object: int  # object_id or None
    attach_rel: Pose  # pose of the attached object in the EE frame, or None
    table_height: float
    time_index: int

    def object_by_id(self, object_id: int) -> ObjectInstance:
        for obj in self.objects:
            if obj.object_id == object_id:
                return obj
        raise KeyError(f"no object with id {object_id}")

    def gripper_points_base(self) -> np.ndarray:
        return self.ee_pose.apply(GRIPPER_HULL)


def _yaw_pose(x: float, y: float, z: float, yaw: float) -> Pose:
    return Pose(rot_z(yaw), np.array([x, y, z]))


def build_scene(
    task: TaskSpec,
    instance_pair_index: int,
    seed: int,
    n_distractors: int = 0,
    holdout: bool = False,
) -> WorldState:
    """Place source and target instances (plus optional cuboid distractors)
    at non-overlapping uniformly sampled poses. Deterministic per seed."""
    pool = task.holdout_pool if holdout else task.instance_pool
    if not 0 <= instance_pair_index < len(pool):
        raise IndexError(f"instance pair {instance_pair_index} outside pool of {len(pool)}")
    pair = pool[instance_pair_index]
    x0, y0, x1, y1 = task.placement_region

    protos = [
        make_object(SOURCE_ID, task.source_object_category, pair["source"], Pose.identity()),
        make_object(TARGET_ID, task.target_object_category, pair["target"], Pose.identity()),
    ]

    def sample_free(rng, proto, placed, attempts):
        for _ in range(attempts):
            x = rng.uniform(x0, x1)
            y = rng.uniform(y0, y1)
            yaw = rng.uniform(0.0, 2.0 * math.pi)
            cand = with_pose(proto, _yaw_pose(x, y, 0.0, yaw))
            ok = True
            for other in placed:
                di = cand.pose.translation[:2] - other.pose.translation[:2]
                need = cand.footprint_radius + other.footprint_radius + PLACEMENT_CLEARANCE
                if np.linalg.norm(di) < need:
                    ok = False
                    break
            if ok:
                return cand
        return None

    # source/target placement draws from its own stream so adding distractors
    # leaves the base scene bit-identical (paired ablation arms rely on this)
    rng = rng_from(seed, "scene", task.task_id, instance_pair_index, int(holdout))
    placed = []
    for proto in protos:
        cand = sample_free(rng, proto, placed, PLACEMENT_ATTEMPTS)
        if cand is None:
            raise PlacementFailure(
                f"could not place {proto.category} in region {task.placement_region} "
                f"after {PLACEMENT_ATTEMPTS} attempts"
            )
        placed.append(cand)

    rng_d = rng_from(seed, "scene-distractors", task.task_id, instance_pair_index, int(holdout))
    for d in range(n_distractors):
        shape = DISTRACTOR_SHAPES[d % len(DISTRACTOR_SHAPES)]
        proto = make_object(FIRST_DISTRACTOR_ID + d, "cuboid", shape, Pose.identity())
        cand = sample_free(rng_d, proto, placed, PLACEMENT_ATTEMPTS)
        if cand is None:
            raise PlacementFailure(f"could not place distractor {d}")
        placed.append(cand)

    return WorldState(
        objects=tuple(placed),
        ee_pose=HOME_POSE,
        gripper_open=True,
        attached_object=None,
        attach_rel=None,
        table_height=0.0,
        time_index=0,
    )


def _rest_height(world: WorldState, obj: ObjectInstance) -> float:
    """Height at which obj's bottom rests when dropped at its current x, y."""
    center = obj.pose.translation[:2]
    z = world.table_height
    for other in world.objects:
        if other.object_id == obj.object_id:
            continue
        if np.linalg.norm(other.pose.translation[:2] - center) < other.footprint_radius:
            z = max(z, other.pose.translation[2] + other.support_top_z)
    return z


def step(world: WorldState, action: np.ndarray) -> WorldState:
    """Advance one tick: clamped EE motion, then the gripper command.

    Gripper scalar < 0.5 commands close (magnetic attach within 2 cm of a
    grasp point); >= 0.5 commands open (an attached object drops to rest on
    the table or whatever lies beneath it).
    """
    target, grip = action_to_pose(np.asarray(action, dtype=np.float64))
    ee = step_toward(world.ee_pose, target, MAX_STEP_TRANSLATION, MAX_STEP_ROTATION)

    objects = list(world.objects)
    attached = world.attached_object
    rel = world.attach_rel
    if attached is not None:
        idx = next(i for i, o in enumerate(objects) if o.object_id == attached)
        objects[idx] = with_pose(objects[idx], compose(ee, rel))

    gripper_open = world.gripper_open
    if grip < 0.5:
        gripper_open = False
        if attached is None:
            best, best_dist = None, GRASP_RADIUS
            for i, obj in enumerate(objects):
                d = float(np.linalg.norm(obj.grasp_point_base() - ee.translation))
                if d <= best_dist:
                    best, best_dist = i, d
            if best is not None:
                attached = objects[best].object_id
                rel = compose(inverse(ee), objects[best].pose)
    else:
        gripper_open = True
        if attached is not None:
            idx = next(i for i, o in enumerate(objects) if o.object_id == attached)
            dropped = objects[idx]
            snapshot = replace(world, objects=tuple(objects))
            t = dropped.pose.translation.copy()
            t[2] = _rest_height(snapshot, dropped)
            objects[idx] = with_pose(dropped, Pose(dropped.pose.rotation, t))
            attached = None
            rel = None

    return WorldState(
        objects=tuple(objects),
        ee_pose=ee,
        gripper_open=gripper_open,
        attached_object=attached,
        attach_rel=rel,
        table_height=world.table_height,
        time_index=world.time_index + 1,
    )


def check_success(world: WorldState, task: TaskSpec) -> bool:
    """Task predicate over the source (id 1) and target (id 2) objects."""
    src = world.object_by_id(SOURCE_ID)
    tgt = world.object_by_id(TARGET_ID)
    if world.attached_object == SOURCE_ID:
        return False
    horiz = float(np.linalg.norm(src.pose.translation[:2] - tgt.pose.translation[:2]))
    margin = 0.6 if task.success_predicate == "on_top_of" else 0.8
    if horiz >= margin * tgt.footprint_radius:
        return False
    gap = float(src.pose.translation[2] - (tgt.pose.translation[2] + tgt.support_top_z))
    return 0.0 <= gap <= 0.02
