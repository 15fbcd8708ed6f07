import numpy as np
import pytest

from pointmanip.errors import EmptyMask, ObjectFullyOccluded, TooFewPoints
from pointmanip.geometry import Pose, project_many, rot_z, transform_points, PointSet
from pointmanip.representation import (
    RepresentationConfig,
    build_observation,
    default_template,
    embed_task,
    erode_mask,
    robot_keypoints,
    sample_mask_pixels,
    uniform_object_points,
    visible_object_points,
    whole_scene_points,
)
from pointmanip.sim import build_scene, builtin_task, make_object, render
from pointmanip.sim.objects import with_pose
from pointmanip.sim.world import SOURCE_ID, TARGET_ID
from pointmanip.deploy.cameras import look_at


# ---- task embedding ---------------------------------------------------------


def test_embed_deterministic_and_normalized():
    a = embed_task("put the bowl on the plate")
    b = embed_task("put the bowl on the plate")
    np.testing.assert_array_equal(a, b)
    assert abs(np.linalg.norm(a) - 1.0) < 1e-9


def test_embed_distinct_tasks():
    tasks = [builtin_task(n).instruction for n in ("bowl_on_plate", "mug_on_plate", "stack_bowls")]
    vecs = [embed_task(t) for t in tasks]
    for i in range(3):
        for j in range(i + 1, 3):
            assert np.dot(vecs[i], vecs[j]) < 0.999


def test_embed_rejects_empty():
    with pytest.raises(ValueError):
        embed_task("")


# ---- gripper keypoints --------------------------------------------------------


def test_template_has_nine_keypoints():
    tpl = default_template()
    assert len(tpl) == 9


def test_keypoints_identity_equals_offsets():
    tpl = default_template()
    np.testing.assert_allclose(robot_keypoints(Pose.identity(), tpl), tpl.base_positions(), atol=1e-15)


def test_keypoints_translate_with_ee():
    tpl = default_template()
    t = np.array([0.3, -0.2, 0.5])
    got = robot_keypoints(Pose(np.eye(3), t), tpl)
    np.testing.assert_allclose(got, tpl.base_positions() + t, atol=1e-12)


def test_keypoints_rotation_matches_homogeneous_oracle():
    tpl = default_template()
    pose = Pose(rot_z(np.pi / 2), [0.1, 0.2, 0.3])
    got = robot_keypoints(pose, tpl)
    m = np.eye(4)
    m[:3, :3] = pose.rotation
    m[:3, 3] = pose.translation
    for i, off in enumerate(tpl.offsets):
        o = np.eye(4)
        o[:3, :3] = off.rotation
        o[:3, 3] = off.translation
        np.testing.assert_allclose(got[i], (m @ o)[:3, 3], atol=1e-12)


def test_keypoint_rigidity_invariant():
    tpl = default_template()
    pose = Pose(rot_z(1.1), [0.4, 0.0, 0.2])
    base = robot_keypoints(Pose.identity(), tpl)
    moved = transform_points(pose, PointSet(base, np.zeros(len(base), dtype=int)))
    np.testing.assert_allclose(robot_keypoints(pose, tpl), moved.points, atol=1e-12)


# ---- mask sampling -------------------------------------------------------------


def disk_mask(size=128, radius=50.0):
    yy, xx = np.mgrid[:size, :size]
    c = size / 2
    return (xx - c) ** 2 + (yy - c) ** 2 <= radius**2


def test_sample_no_shrink_stays_in_mask():
    mask = disk_mask()
    pix, degraded = sample_mask_pixels(mask, 0.0, 500, seed=0)
    assert not degraded
    assert mask[pix[:, 1], pix[:, 0]].all()


def test_shrink_twenty_percent_of_disk_radius():
    mask = disk_mask(radius=50.0)
    pix, degraded = sample_mask_pixels(mask, 0.2, 2000, seed=1)
    assert not degraded
    c = mask.shape[0] / 2
    dist = np.hypot(pix[:, 0] - c, pix[:, 1] - c)
    assert dist.max() <= 40.5  # eroded by 20% of the equivalent-disk radius


def test_single_pixel_mask_falls_back_degraded():
    mask = np.zeros((32, 32), dtype=bool)
    mask[5, 7] = True
    pix, degraded = sample_mask_pixels(mask, 0.2, 10, seed=2)
    assert degraded
    assert (pix == [7, 5]).all()


def test_empty_mask_raises():
    with pytest.raises(EmptyMask):
        sample_mask_pixels(np.zeros((8, 8), dtype=bool), 0.2, 4, seed=0)


def test_erode_zero_fraction_is_identity():
    mask = disk_mask()
    np.testing.assert_array_equal(erode_mask(mask, 0.0), mask)


# ---- object point extraction ----------------------------------------------------


def overhead_scene():
    bowl = make_object(SOURCE_ID, "bowl", {"rim_radius": 0.06, "depth": 0.04}, Pose(np.eye(3), [0.5, 0.0, 0.0]))
    plate = make_object(TARGET_ID, "plate", {"radius": 0.1}, Pose(np.eye(3), [0.5, 0.25, 0.0]))
    task = builtin_task("bowl_on_plate")
    w = build_scene(task, 0, 0)
    from dataclasses import replace

    w = replace(w, objects=(bowl, plate), ee_pose=Pose(np.eye(3), [0.0, -0.5, 0.8]))
    cam = look_at([0.5, 0.0001, 0.9], [0.5, 0.0, 0.0], fx=200.0)
    return w, cam, bowl


def raycast_partition(surf, cam_center):
    """Ray-cast visibility over a dense surface sample: a point is hidden if
    another sample sits within 1.5 mm of its camera ray at least 2 mm nearer."""
    rel = surf - cam_center
    dist = np.linalg.norm(rel, axis=1)
    dirs = rel / dist[:, None]
    visible = np.ones(len(surf), dtype=bool)
    for i in range(len(surf)):
        t = rel @ dirs[i]
        lateral = np.linalg.norm(rel - t[:, None] * dirs[i], axis=1)
        blockers = (lateral < 0.0015) & (t < dist[i] - 0.002) & (t > 0)
        blockers[i] = False
        if blockers.any():
            visible[i] = False
    return visible


def test_visible_points_match_raycast_partition():
    # Overhead view: every returned point must be at least as close to the
    # ray-cast-visible part of the surface as to the hidden part (underside,
    # outer bottom), i.e. no point lands on occluded geometry.
    w, cam, bowl = overhead_scene()
    pts = visible_object_points(w, cam, SOURCE_ID, n_raw=1024, m=128, seed=3)
    assert pts.shape == (128, 3)
    surf = bowl.posed_points()
    d2 = ((pts[:, None, :] - surf[None, :, :]) ** 2).sum(-1).min(1)
    assert np.sqrt(d2).max() < 0.01  # within 1 cm of the true surface

    visible = raycast_partition(surf, cam.center)
    assert 0.2 < visible.mean() < 0.9  # both partitions are populated
    nn_vis = np.sqrt(((pts[:, None, :] - surf[None, visible, :]) ** 2).sum(-1).min(1))
    nn_hid = np.sqrt(((pts[:, None, :] - surf[None, ~visible, :]) ** 2).sum(-1).min(1))
    assert np.median(nn_vis) < 0.003
    assert not (nn_vis > nn_hid + 0.003).any()


def test_visible_points_reproject_onto_depth_map():
    w, cam, _ = overhead_scene()
    depth, mask = render(w, cam)
    pts = visible_object_points(w, cam, SOURCE_ID, 1024, 64, seed=4, render_maps=(depth, mask))
    pix, z, ok = project_many(cam, pts)
    assert ok.all()
    wdt, h = cam.image_size
    assert ((pix[:, 0] >= 0) & (pix[:, 0] < wdt) & (pix[:, 1] >= 0) & (pix[:, 1] < h)).all()
    col = np.floor(pix[:, 0]).astype(int)
    row = np.floor(pix[:, 1]).astype(int)
    assert np.abs(depth[row, col] - z).max() < 0.005


def test_visible_points_deterministic():
    w, cam, _ = overhead_scene()
    a = visible_object_points(w, cam, SOURCE_ID, 512, 32, seed=9)
    b = visible_object_points(w, cam, SOURCE_ID, 512, 32, seed=9)
    np.testing.assert_array_equal(a, b)


def test_fully_occluded_object_raises():
    w, cam, bowl = overhead_scene()
    # bury the bowl under a big cuboid
    lid = make_object(5, "cuboid", {"sx": 0.3, "sy": 0.3, "sz": 0.02, "samples": 16384}, Pose(np.eye(3), [0.5, 0.0, 0.05]))
    from dataclasses import replace

    w2 = replace(w, objects=w.objects + (lid,))
    with pytest.raises(ObjectFullyOccluded):
        visible_object_points(w2, cam, SOURCE_ID, 1024, 128, seed=0)


def test_uniform_points_full_surface_and_underside():
    w, cam, bowl = overhead_scene()
    k = bowl.surface_points.shape[0]
    full = uniform_object_points(bowl, k, seed=0)
    assert full.shape == (k, 3)
    np.testing.assert_allclose(np.sort(full, axis=0), np.sort(bowl.posed_points(), axis=0), atol=1e-12)
    sub = uniform_object_points(bowl, 256, seed=1)
    # underside points present: canonical z ~ 0 means world z ~ table height
    assert (sub[:, 2] < 0.002).any()
    np.testing.assert_array_equal(sub, uniform_object_points(bowl, 256, seed=1))
    with pytest.raises(TooFewPoints):
        uniform_object_points(bowl, k + 1, seed=0)


# ---- assembled observations ------------------------------------------------------


def test_build_observation_deterministic(front_camera):
    task = builtin_task("bowl_on_plate")
    w = build_scene(task, 0, 21)
    cfg = RepresentationConfig(instruction=task.instruction, noise_sigma=0.01)
    a = build_observation(w, front_camera, cfg, seed=5)
    b = build_observation(w, front_camera, cfg, seed=5)
    for ga, gb in zip(a.groups(), b.groups()):
        np.testing.assert_array_equal(ga, gb)
    np.testing.assert_array_equal(a.task_embedding, b.task_embedding)


def test_build_observation_distractor_invariance(front_camera):
    # ground-truth filtering: adding non-occluding clutter must not move a
    # single bit of the observation
    task = builtin_task("bowl_on_plate")
    clean = build_scene(task, 0, 21)
    cluttered = build_scene(task, 0, 21, n_distractors=3)
    cfg = RepresentationConfig(instruction=task.instruction, noise_sigma=0.01)
    a = build_observation(clean, front_camera, cfg, seed=5)
    b = build_observation(cluttered, front_camera, cfg, seed=5)
    for ga, gb in zip(a.groups(), b.groups()):
        np.testing.assert_array_equal(ga, gb)


def test_build_observation_noise_magnitude(front_camera):
    task = builtin_task("bowl_on_plate")
    w = build_scene(task, 1, 3)
    cfg0 = RepresentationConfig(instruction=task.instruction, noise_sigma=0.0)
    cfg1 = RepresentationConfig(instruction=task.instruction, noise_sigma=0.01)
    a = build_observation(w, front_camera, cfg0, seed=5)
    b = build_observation(w, front_camera, cfg1, seed=5)
    np.testing.assert_array_equal(a.robot_points, b.robot_points)  # robot stays clean
    diff = np.concatenate([(x - y).ravel() for x, y in zip(a.object_points, b.object_points)])
    assert 0.008 < diff.std() < 0.012


def test_build_observation_uniform_mode_ignores_camera(front_camera):
    task = builtin_task("bowl_on_plate")
    w = build_scene(task, 1, 3)
    cfg = RepresentationConfig(instruction=task.instruction, alignment="uniform")
    other = look_at([0.2, 0.6, 0.5], [0.5, 0.0, 0.0])
    a = build_observation(w, front_camera, cfg, seed=6)
    b = build_observation(w, other, cfg, seed=6)
    for ga, gb in zip(a.object_points, b.object_points):
        np.testing.assert_array_equal(ga, gb)


def test_build_observation_unfiltered_scene(front_camera):
    task = builtin_task("bowl_on_plate")
    w = build_scene(task, 0, 2)
    cfg = RepresentationConfig(instruction=task.instruction, unfiltered_scene=True, scene_points=512)
    obs = build_observation(w, front_camera, cfg, seed=7)
    assert obs.object_labels == (-1,)
    assert obs.object_points[0].shape == (512, 3)
    # unfiltered representation must shift when clutter appears
    cluttered = build_scene(task, 0, 2, n_distractors=3)
    obs2 = build_observation(cluttered, front_camera, cfg, seed=7)
    assert not np.array_equal(obs.object_points[0], obs2.object_points[0])


def test_whole_scene_points_cover_table(front_camera):
    task = builtin_task("bowl_on_plate")
    w = build_scene(task, 0, 2)
    pts = whole_scene_points(w, front_camera, 2048, 256, seed=8)
    assert (np.abs(pts[:, 2]) < 0.002).sum() > 100  # mostly table plane
