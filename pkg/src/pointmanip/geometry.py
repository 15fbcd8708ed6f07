"""SE(3) algebra, pinhole cameras, triangulation, point sampling, and noise.

Conventions:
  - Poses store a 3x3 rotation matrix and a translation in meters; applying a
    pose maps x -> R @ x + t.
  - Camera extrinsics map base frame -> camera frame; the camera looks along
    +z with +x right and +y down (image coordinates).
  - Pixel coordinate (u, v) falls in cell (floor(u), floor(v)); the center of
    cell (j, i) is (j + 0.5, i + 0.5). Image origin is top-left.
All functions are pure; randomness enters only through explicit seeds.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BehindCamera,
    DegenerateRays,
    InsufficientBaseline,
    NonPositiveDepth,
    TooFewPoints,
)
from .seeding import rng_from

ORTHONORMAL_TOL = 1e-9
MIN_CAMERA_Z = 1e-6
MIN_BASELINE = 1e-4
PARALLEL_RAY_TOL = 1e-8


def _as_f64(a, shape=None):
    out = np.asarray(a, dtype=np.float64)
    if shape is not None and out.shape != shape:
        raise ValueError(f"expected shape {shape}, got {out.shape}")
    return out


@dataclass(frozen=True)
class Pose:
    """Rigid transform: rotation (3x3, orthonormal, det +1) and translation (m)."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = _as_f64(self.rotation, (3, 3)).copy()
        t = _as_f64(self.translation, (3,)).copy()
        r.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.eye(3), np.zeros(3))

    def orthonormality_drift(self) -> float:
        return float(np.abs(self.rotation.T @ self.rotation - np.eye(3)).max())

    def is_valid(self, tol: float = ORTHONORMAL_TOL) -> bool:
        return (
            self.orthonormality_drift() <= tol
            and abs(np.linalg.det(self.rotation) - 1.0) <= tol
        )

    def apply(self, points: np.ndarray) -> np.ndarray:
        """Apply to an (N, 3) array or a single 3-vector."""
        pts = np.asarray(points, dtype=np.float64)
        return pts @ self.rotation.T + self.translation


@dataclass(frozen=True)
class PointSet:
    """Labeled base-frame points: (N, 3) coordinates and (N,) integer tags."""

    points: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        pts = _as_f64(self.points).copy()
        if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 1:
            raise ValueError(f"points must be (N>=1, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("points must be finite")
        labels = np.asarray(self.labels, dtype=np.int64).copy()
        if labels.shape != (pts.shape[0],):
            raise ValueError("labels must be (N,)")
        pts.flags.writeable = False
        labels.flags.writeable = False
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", labels)

    def __len__(self) -> int:
        return self.points.shape[0]


@dataclass(frozen=True)
class CameraModel:
    """Pinhole camera: intrinsics K, extrinsics base->camera, image size (W, H)."""

    intrinsics: np.ndarray
    extrinsics: Pose
    image_size: tuple

    def __post_init__(self):
        k = _as_f64(self.intrinsics, (3, 3)).copy()
        k.flags.writeable = False
        object.__setattr__(self, "intrinsics", k)
        w, h = self.image_size
        object.__setattr__(self, "image_size", (int(w), int(h)))
        fx, fy, cx, cy = k[0, 0], k[1, 1], k[0, 2], k[1, 2]
        if fx <= 0 or fy <= 0:
            raise ValueError("focal lengths must be positive")
        if not (0 < cx < w and 0 < cy < h):
            raise ValueError("principal point must lie inside the image")

    @property
    def center(self) -> np.ndarray:
        """Camera center in the base frame."""
        return inverse(self.extrinsics).translation


def compose(a: Pose, b: Pose) -> Pose:
    """Pose applying b then a. Re-orthonormalizes only on drift > 1e-9."""
    r = a.rotation @ b.rotation
    t = a.rotation @ b.translation + a.translation
    if np.abs(r.T @ r - np.eye(3)).max() > ORTHONORMAL_TOL:
        r = orthonormalize(r)
    return Pose(r, t)


def inverse(a: Pose) -> Pose:
    return Pose(a.rotation.T, -(a.rotation.T @ a.translation))


def transform_points(p: Pose, pts: PointSet) -> PointSet:
    return PointSet(p.apply(pts.points), pts.labels)


def orthonormalize(r: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix by polar decomposition (det forced to +1)."""
    u, _, vt = np.linalg.svd(r)
    out = u @ vt
    if np.linalg.det(out) < 0:
        u[:, -1] = -u[:, -1]
        out = u @ vt
    return out


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


# -- quaternion helpers (w, x, y, z), used for slerp and angle math --------


def mat_to_quat(r: np.ndarray) -> np.ndarray:
    t = np.trace(r)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array([0.25 * s, (r[2, 1] - r[1, 2]) / s, (r[0, 2] - r[2, 0]) / s, (r[1, 0] - r[0, 1]) / s])
    elif r[0, 0] > r[1, 1] and r[0, 0] > r[2, 2]:
        s = np.sqrt(1.0 + r[0, 0] - r[1, 1] - r[2, 2]) * 2.0
        q = np.array([(r[2, 1] - r[1, 2]) / s, 0.25 * s, (r[0, 1] + r[1, 0]) / s, (r[0, 2] + r[2, 0]) / s])
    elif r[1, 1] > r[2, 2]:
        s = np.sqrt(1.0 + r[1, 1] - r[0, 0] - r[2, 2]) * 2.0
        q = np.array([(r[0, 2] - r[2, 0]) / s, (r[0, 1] + r[1, 0]) / s, 0.25 * s, (r[1, 2] + r[2, 1]) / s])
    else:
        s = np.sqrt(1.0 + r[2, 2] - r[0, 0] - r[1, 1]) * 2.0
        q = np.array([(r[1, 0] - r[0, 1]) / s, (r[0, 2] + r[2, 0]) / s, (r[1, 2] + r[2, 1]) / s, 0.25 * s])
    return q / np.linalg.norm(q)


def quat_to_mat(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q / np.linalg.norm(q)
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def rotation_angle(r: np.ndarray) -> float:
    """Geodesic angle of a rotation matrix, in [0, pi]."""
    c = (np.trace(r) - 1.0) / 2.0
    return float(np.arccos(np.clip(c, -1.0, 1.0)))


def slerp(ra: np.ndarray, rb: np.ndarray, alpha: float) -> np.ndarray:
    """Shortest-arc spherical interpolation between rotation matrices."""
    qa = mat_to_quat(ra)
    qb = mat_to_quat(rb)
    dot = float(np.dot(qa, qb))
    if dot < 0.0:
        qb = -qb
        dot = -dot
    dot = min(dot, 1.0)
    theta = np.arccos(dot)
    if theta < 1e-12:
        q = qa + alpha * (qb - qa)
    else:
        q = (np.sin((1 - alpha) * theta) * qa + np.sin(alpha * theta) * qb) / np.sin(theta)
    return quat_to_mat(q)


def interpolate_pose(a: Pose, b: Pose, alpha: float) -> Pose:
    """Linear translation + shortest-arc rotation interpolation, alpha in [0, 1]."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    t = (1.0 - alpha) * a.translation + alpha * b.translation
    return Pose(slerp(a.rotation, b.rotation, alpha), t)


def step_toward(current: Pose, target: Pose, max_translation: float, max_rotation: float) -> Pose:
    """Move from current toward target, clamping translation and rotation."""
    delta = target.translation - current.translation
    dist = float(np.linalg.norm(delta))
    t = target.translation if dist <= max_translation else current.translation + delta * (max_translation / dist)
    angle = rotation_angle(current.rotation.T @ target.rotation)
    if angle <= max_rotation:
        r = target.rotation
    else:
        r = slerp(current.rotation, target.rotation, max_rotation / angle)
    return Pose(r, t)


# -- continuous rotation encoding ------------------------------------------


def rotation6d_encode(r: np.ndarray) -> np.ndarray:
    """First two columns of R, flattened row-major: (R00, R01, R10, R11, R20, R21)."""
    return np.asarray(r, dtype=np.float64)[:, :2].reshape(-1).copy()


def rotation6d_decode(v: np.ndarray) -> np.ndarray:
    """Gram-Schmidt the two encoded columns back into a rotation matrix."""
    a = np.asarray(v, dtype=np.float64).reshape(3, 2)
    b1 = a[:, 0] / np.linalg.norm(a[:, 0])
    c2 = a[:, 1] - np.dot(b1, a[:, 1]) * b1
    b2 = c2 / np.linalg.norm(c2)
    b3 = np.cross(b1, b2)
    return np.stack([b1, b2, b3], axis=1)


def pose_to_action(pose: Pose, gripper: float) -> np.ndarray:
    """10-vector action: position(3) + rotation6d(6) + gripper scalar."""
    return np.concatenate([pose.translation, rotation6d_encode(pose.rotation), [gripper]])


def action_to_pose(action: np.ndarray) -> tuple:
    """Inverse of pose_to_action; returns (Pose, gripper scalar)."""
    a = np.asarray(action, dtype=np.float64)
    return Pose(rotation6d_decode(a[3:9]), a[:3]), float(a[9])


# -- pinhole projection ------------------------------------------------------


def project(cam: CameraModel, x_base: np.ndarray):
    """Project a base-frame point; returns (pixel (u, v), camera-frame depth).

    Raises BehindCamera when camera-frame z <= 1e-6 m. The returned pixel may
    fall outside the image; bounds are the caller's concern.
    """
    xc = cam.extrinsics.apply(np.asarray(x_base, dtype=np.float64))
    z = float(xc[2])
    if z <= MIN_CAMERA_Z:
        raise BehindCamera(f"camera-frame z = {z:.3g} m")
    k = cam.intrinsics
    u = k[0, 0] * xc[0] / z + k[0, 2]
    v = k[1, 1] * xc[1] / z + k[1, 2]
    return np.array([u, v]), z


def project_many(cam: CameraModel, pts: np.ndarray):
    """Vectorized projection of (N, 3) base-frame points.

    Returns (pixels (N, 2), depths (N,), in_front (N,) bool). Pixels of
    behind-camera points are NaN.
    """
    xc = cam.extrinsics.apply(np.asarray(pts, dtype=np.float64))
    z = xc[:, 2]
    in_front = z > MIN_CAMERA_Z
    k = cam.intrinsics
    with np.errstate(divide="ignore", invalid="ignore"):
        u = k[0, 0] * xc[:, 0] / z + k[0, 2]
        v = k[1, 1] * xc[:, 1] / z + k[1, 2]
    pix = np.stack([u, v], axis=1)
    pix[~in_front] = np.nan
    return pix, z, in_front


def unproject(cam: CameraModel, pixel: np.ndarray, depth: float) -> np.ndarray:
    """Lift a pixel at the given camera-frame depth back to the base frame."""
    if depth <= 0.0:
        raise NonPositiveDepth(f"depth = {depth:.3g} m")
    return unproject_many(cam, np.asarray(pixel, dtype=np.float64)[None, :], np.array([depth]))[0]


def unproject_many(cam: CameraModel, pixels: np.ndarray, depths: np.ndarray) -> np.ndarray:
    """Vectorized unprojection of (N, 2) pixels with (N,) positive depths."""
    depths = np.asarray(depths, dtype=np.float64)
    if np.any(depths <= 0.0):
        raise NonPositiveDepth("all depths must be positive")
    k = cam.intrinsics
    px = np.asarray(pixels, dtype=np.float64)
    x = (px[:, 0] - k[0, 2]) / k[0, 0] * depths
    y = (px[:, 1] - k[1, 2]) / k[1, 1] * depths
    cam_pts = np.stack([x, y, depths], axis=1)
    return inverse(cam.extrinsics).apply(cam_pts)


def pixel_ray(cam: CameraModel, pixel: np.ndarray):
    """Base-frame (origin, unit direction) of the ray through a pixel."""
    k = cam.intrinsics
    d_cam = np.array([(pixel[0] - k[0, 2]) / k[0, 0], (pixel[1] - k[1, 2]) / k[1, 1], 1.0])
    cam_to_base = inverse(cam.extrinsics)
    d = cam_to_base.rotation @ d_cam
    return cam_to_base.translation, d / np.linalg.norm(d)


def triangulate(cam1: CameraModel, px1: np.ndarray, cam2: CameraModel, px2: np.ndarray):
    """Midpoint triangulation of two pixel rays.

    Returns (point, residual): the point minimizing the summed squared
    distance to both rays and half the closest-approach distance between
    them. Raises InsufficientBaseline for near-coincident camera centers and
    DegenerateRays for near-parallel rays.
    """
    o1, d1 = pixel_ray(cam1, np.asarray(px1, dtype=np.float64))
    o2, d2 = pixel_ray(cam2, np.asarray(px2, dtype=np.float64))
    if np.linalg.norm(o2 - o1) <= MIN_BASELINE:
        raise InsufficientBaseline("camera centers closer than 1e-4 m")
    cross = np.cross(d1, d2)
    if np.linalg.norm(cross) < PARALLEL_RAY_TOL:
        raise DegenerateRays("rays parallel within 1e-8 rad")
    # Closest points: o1 + s d1 and o2 + t d2 with [s, t] from the 2x2 normal
    # equations of min |o1 + s d1 - o2 - t d2|^2.
    w = o1 - o2
    a = np.dot(d1, d1)
    b = np.dot(d1, d2)
    c = np.dot(d2, d2)
    d = np.dot(d1, w)
    e = np.dot(d2, w)
    denom = a * c - b * b
    s = (b * e - c * d) / denom
    t = (a * e - b * d) / denom
    p1 = o1 + s * d1
    p2 = o2 + t * d2
    midpoint = 0.5 * (p1 + p2)
    residual = 0.5 * float(np.linalg.norm(p1 - p2))
    return midpoint, residual


# -- sampling ----------------------------------------------------------------


def farthest_point_sample(points, m: int, seed: int, first_index: int = None) -> list:
    """Greedy farthest point sampling over (N, 3) coordinates.

    The first index is drawn uniformly from the seeded stream (or forced via
    first_index); every later pick maximizes the minimum Euclidean distance
    to the already-selected set, ties broken by lowest index.
    """
    pts = points.points if isinstance(points, PointSet) else np.asarray(points, dtype=np.float64)
    n = pts.shape[0]
    if m > n:
        raise TooFewPoints(f"requested {m} of {n} points")
    if m == 0:
        return []
    if first_index is None:
        first_index = int(rng_from(seed, "fps").integers(n))
    selected = [first_index]
    min_sq = np.sum((pts - pts[first_index]) ** 2, axis=1)
    for _ in range(m - 1):
        idx = int(np.argmax(min_sq))  # argmax returns the lowest tied index
        selected.append(idx)
        np.minimum(min_sq, np.sum((pts - pts[idx]) ** 2, axis=1), out=min_sq)
    return selected


def add_gaussian_noise(pts: PointSet, sigma: float, seed: int) -> PointSet:
    """Per-coordinate i.i.d. N(0, sigma^2) perturbation from a seeded stream."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    if sigma == 0:
        return pts
    noise = rng_from(seed, "gauss").standard_normal(pts.points.shape) * sigma
    return PointSet(pts.points + noise, pts.labels)
