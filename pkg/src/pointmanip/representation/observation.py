"""Unified point-based observations.

An ObservationFrame bundles robot gripper keypoints, per-object point groups
in the base frame, and the task embedding. Object points come from one of
three routes:

  - camera-aligned (simulation path): surface points are projected into the
    camera, depth-tested against the rendered depth map, and the surviving
    pixels are lifted back to 3D, so only surfaces a real camera would see
    are represented;
  - uniform: seeded subsample over the full object surface, no visibility;
  - whole-scene: every valid depth pixel is a candidate (the unfiltered
    baseline representation).

All sampling is seeded per (frame seed, object), so observations are bitwise
reproducible and independent of unrelated scene content.
"""

from dataclasses import dataclass, field, asdict

import numpy as np

from ..errors import ObjectFullyOccluded, TooFewPoints
from ..geometry import (
    CameraModel,
    PointSet,
    add_gaussian_noise,
    farthest_point_sample,
    project_many,
    unproject_many,
)
from ..seeding import derive_seed, rng_from
from ..sim.render import render
from ..sim.world import SOURCE_ID, TARGET_ID, WorldState
from .embedding import embed_task
from .masks import sample_mask_pixels
from .template import GripperKeypointTemplate, default_template, robot_keypoints

VISIBILITY_TOLERANCE = 0.005  # rendered-depth slack for the visibility test


@dataclass(frozen=True)
class RepresentationConfig:
    """Observation construction knobs; serialized into dataset manifests."""

    points_per_object: int = 128
    raw_samples: int = 1024
    shrink_fraction: float = 0.2
    noise_sigma: float = 0.0
    alignment: str = "camera_aligned"  # or "uniform"
    depth_noise_sigma: float = 0.0
    unfiltered_scene: bool = False
    scene_points: int = 512
    instruction: str = ""

    def __post_init__(self):
        if self.alignment not in ("camera_aligned", "uniform"):
            raise ValueError(f"unknown alignment mode {self.alignment!r}")

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "RepresentationConfig":
        return RepresentationConfig(**d)

    def group_sizes(self, n_robot: int) -> tuple:
        """Point count of each policy input group (robot first)."""
        if self.unfiltered_scene:
            return (n_robot, self.scene_points)
        return (n_robot, self.points_per_object, self.points_per_object)


@dataclass(frozen=True)
class ObservationFrame:
    robot_points: np.ndarray  # (N_r, 3)
    object_points: tuple  # of (M, 3) arrays, order (source, target) or (scene,)
    object_labels: tuple  # object ids, -1 for the whole-scene group
    task_embedding: np.ndarray  # (64,)
    frame_index: int
    degraded: bool = False

    def groups(self) -> list:
        return [self.robot_points, *self.object_points]


def visibility_mask(world: WorldState, cam: CameraModel, object_id: int, depth_map: np.ndarray):
    """Boolean (H, W) mask of pixels holding a visible surface point of the
    object, plus the number of surface points that passed the test."""
    w, h = cam.image_size
    pts = world.object_by_id(object_id).posed_points()
    pix, z, in_front = project_many(cam, pts)
    ok = in_front.copy()
    ok &= np.where(in_front, (pix[:, 0] >= 0) & (pix[:, 0] < w) & (pix[:, 1] >= 0) & (pix[:, 1] < h), False)
    mask = np.zeros((h, w), dtype=bool)
    if not np.any(ok):
        return mask, 0
    col = np.floor(pix[ok, 0]).astype(np.int64)
    row = np.floor(pix[ok, 1]).astype(np.int64)
    rendered = depth_map[row, col]
    vis = np.isfinite(rendered) & (z[ok] <= rendered + VISIBILITY_TOLERANCE)
    mask[row[vis], col[vis]] = True
    return mask, int(vis.sum())


def lift_pixels(pixels: np.ndarray, depth_map: np.ndarray, cam: CameraModel) -> np.ndarray:
    """Unproject integer (col, row) cells at their centers using the depth map.
    Rows with non-finite depth come back as NaN."""
    depths = depth_map[pixels[:, 1], pixels[:, 0]]
    out = np.full((len(pixels), 3), np.nan)
    good = np.isfinite(depths)
    if np.any(good):
        centers = pixels[good].astype(np.float64) + 0.5
        out[good] = unproject_many(cam, centers, depths[good])
    return out


def visible_object_points(
    world: WorldState,
    cam: CameraModel,
    object_id: int,
    n_raw: int,
    m: int,
    seed: int,
    render_maps=None,
    lift_depth: np.ndarray = None,
) -> np.ndarray:
    """Camera-aligned object points: visibility-tested pixels lifted via the
    rendered depth map, subsampled to n_raw and FPS-downsampled to m.

    lift_depth optionally substitutes a (noisier) depth map for the 3D lift
    while visibility is still decided on the clean render.
    """
    if m > n_raw:
        raise TooFewPoints("m must be <= n_raw")
    depth, _ = render_maps if render_maps is not None else render(world, cam)
    mask, visible_count = visibility_mask(world, cam, object_id, depth)
    if visible_count < m:
        raise ObjectFullyOccluded(
            f"object {object_id}: {visible_count} visible points < m={m}"
        )
    pixels, _ = sample_mask_pixels(mask, 0.0, n_raw, derive_seed(seed, "pixels", object_id))
    pts = lift_pixels(pixels, depth if lift_depth is None else lift_depth, cam)
    idx = farthest_point_sample(pts, m, derive_seed(seed, "fps", object_id))
    return pts[idx]


def uniform_object_points(obj, m: int, seed: int) -> np.ndarray:
    """Seeded uniform subsample of the full posed surface (no visibility)."""
    k = obj.surface_points.shape[0]
    if m > k:
        raise TooFewPoints(f"m={m} exceeds surface size {k}")
    rng = rng_from(seed, "uniform", obj.object_id)
    idx = rng.choice(k, size=m, replace=False)
    return obj.pose.apply(obj.surface_points[idx])


def whole_scene_points(
    world: WorldState,
    cam: CameraModel,
    n_raw: int,
    m: int,
    seed: int,
    render_maps=None,
    lift_depth: np.ndarray = None,
) -> np.ndarray:
    """Unfiltered scene representation: FPS over all valid depth pixels."""
    depth, _ = render_maps if render_maps is not None else render(world, cam)
    mask = np.isfinite(depth)
    pixels, _ = sample_mask_pixels(mask, 0.0, n_raw, derive_seed(seed, "pixels", -1))
    pts = lift_pixels(pixels, depth if lift_depth is None else lift_depth, cam)
    idx = farthest_point_sample(pts, m, derive_seed(seed, "fps", -1))
    return pts[idx]


def _noised(points: np.ndarray, sigma: float, seed: int, object_id) -> np.ndarray:
    if sigma <= 0:
        return points
    ps = PointSet(points, np.zeros(len(points), dtype=np.int64))
    return add_gaussian_noise(ps, sigma, derive_seed(seed, "noise", object_id)).points


def build_observation(
    world: WorldState,
    cam: CameraModel,
    config: RepresentationConfig,
    seed: int,
    render_maps=None,
    template: GripperKeypointTemplate = None,
) -> ObservationFrame:
    """Assemble the full point-based observation for one frame."""
    template = template or default_template()
    robot = robot_keypoints(world.ee_pose, template)

    needs_render = config.unfiltered_scene or config.alignment == "camera_aligned"
    if needs_render and render_maps is None:
        render_maps = render(world, cam)
    lift_depth = None
    if needs_render and config.depth_noise_sigma > 0:
        depth = render_maps[0]
        noise = rng_from(derive_seed(seed, "depthnoise"), "d").standard_normal(depth.shape)
        lift_depth = np.where(np.isfinite(depth), depth + noise * config.depth_noise_sigma, depth)

    groups, labels = [], []
    if config.unfiltered_scene:
        pts = whole_scene_points(
            world, cam, max(config.raw_samples, 2 * config.scene_points),
            config.scene_points, seed, render_maps, lift_depth,
        )
        groups.append(_noised(pts, config.noise_sigma, seed, -1))
        labels.append(-1)
    else:
        for oid in (SOURCE_ID, TARGET_ID):
            if config.alignment == "camera_aligned":
                pts = visible_object_points(
                    world, cam, oid, config.raw_samples, config.points_per_object,
                    seed, render_maps, lift_depth,
                )
            else:
                pts = uniform_object_points(
                    world.object_by_id(oid), config.points_per_object, derive_seed(seed, "u", oid)
                )
            groups.append(_noised(pts, config.noise_sigma, seed, oid))
            labels.append(oid)

    return ObservationFrame(
        robot_points=robot,
        object_points=tuple(groups),
        object_labels=tuple(labels),
        task_embedding=embed_task(config.instruction),
        frame_index=world.time_index,
    )
