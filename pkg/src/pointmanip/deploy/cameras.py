"""Camera rigs for data generation and pseudo-real deployment.

The matched rig is a front camera looking down at the workspace center; a
side camera provides the second view for triangulation-style sensing; the
ring rig gives 8 azimuth-distributed views for view-randomized training.
"""

import math

import numpy as np

from ..geometry import CameraModel, Pose, compose, inverse, rot_x, rot_y, rot_z
from ..seeding import rng_from

WORKSPACE_CENTER = np.array([0.5, 0.0, 0.0])
DEFAULT_FX = 130.0
DEFAULT_SIZE = 128

PERTURB_TRANSLATION = 0.02  # meters, per axis
PERTURB_ROTATION = math.radians(3.0)  # per axis


def look_at(eye, target, fx: float = DEFAULT_FX, size: int = DEFAULT_SIZE) -> CameraModel:
    """Camera at eye looking at target; image +y points world-down."""
    eye = np.asarray(eye, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    z = target - eye
    z = z / np.linalg.norm(z)
    down = np.array([0.0, 0.0, -1.0])
    y = down - np.dot(down, z) * z
    ny = np.linalg.norm(y)
    if ny < 1e-9:  # looking straight down: pick +x as image-down
        y = np.array([1.0, 0.0, 0.0]) - z * z[0]
        ny = np.linalg.norm(y)
    y = y / ny
    x = np.cross(y, z)
    r = np.stack([x, y, z])
    k = np.array([[fx, 0.0, size / 2], [0.0, fx, size / 2], [0.0, 0.0, 1.0]])
    return CameraModel(k, Pose(r, -r @ eye), (size, size))


def front_camera() -> CameraModel:
    # steep oblique view: keeps retargeted transport excursions in frame
    # while still hiding object undersides (camera-aligned sampling matters)
    return look_at([0.85, 0.0, 1.05], WORKSPACE_CENTER)


def side_camera() -> CameraModel:
    return look_at([0.5, 0.85, 1.0], WORKSPACE_CENTER)


def ring_cameras(n: int = 8, radius: float = 0.35, height: float = 1.05) -> list:
    """n cameras on an azimuth ring around the workspace center."""
    cams = []
    for i in range(n):
        a = 2.0 * math.pi * i / n
        eye = WORKSPACE_CENTER + [radius * math.cos(a), radius * math.sin(a), height]
        cams.append(look_at(eye, WORKSPACE_CENTER))
    return cams


def perturb_camera(
    cam: CameraModel,
    seed: int,
    translation: float = PERTURB_TRANSLATION,
    rotation: float = PERTURB_ROTATION,
) -> CameraModel:
    """Perturb extrinsics: per-axis uniform offsets within +-translation and
    per-axis uniform rotations within +-rotation, about the camera center."""
    rng = rng_from(seed, "campert")
    dt = rng.uniform(-translation, translation, size=3)
    angles = rng.uniform(-rotation, rotation, size=3)
    dr = rot_z(angles[2]) @ rot_y(angles[1]) @ rot_x(angles[0])
    cam_to_base = inverse(cam.extrinsics)
    new_c2b = Pose(dr @ cam_to_base.rotation, cam_to_base.translation + dt)
    return CameraModel(cam.intrinsics, inverse(new_c2b), cam.image_size)
