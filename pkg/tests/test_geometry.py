import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pointmanip import geometry as geo
from pointmanip.errors import (
    BehindCamera,
    DegenerateRays,
    InsufficientBaseline,
    NonPositiveDepth,
    TooFewPoints,
)
from pointmanip.seeding import rng_from


# ---- oracles ---------------------------------------------------------------


def homogeneous(pose):
    m = np.eye(4)
    m[:3, :3] = pose.rotation
    m[:3, 3] = pose.translation
    return m


def pose_from_homogeneous(m):
    return geo.Pose(m[:3, :3], m[:3, 3])


def random_pose(rng):
    # QR-based uniform-ish random rotation, det forced positive
    q, r = np.linalg.qr(rng.standard_normal((3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return geo.Pose(q, rng.standard_normal(3))


def axis_angle_matrix(axis, angle):
    axis = np.asarray(axis, float) / np.linalg.norm(axis)
    kx, ky, kz = axis
    k = np.array([[0, -kz, ky], [kz, 0, -kx], [-ky, kx, 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def brute_force_fps(pts, m, first):
    """Greedy FPS by exhaustive candidate scan each step."""
    selected = [first]
    while len(selected) < m:
        best_idx, best_dist = None, -1.0
        for i in range(len(pts)):
            dmin = min(np.linalg.norm(pts[i] - pts[j]) for j in selected)
            if dmin > best_dist + 1e-15:
                best_idx, best_dist = i, dmin
        selected.append(best_idx)
    return selected


# ---- poses -----------------------------------------------------------------


def test_compose_identity():
    rng = rng_from(0, "t")
    p = random_pose(rng)
    q = geo.compose(geo.Pose.identity(), p)
    np.testing.assert_allclose(q.rotation, p.rotation, atol=1e-15)
    np.testing.assert_allclose(q.translation, p.translation, atol=1e-15)


def test_compose_inverse_gives_identity():
    rng = rng_from(1, "t")
    for _ in range(20):
        p = random_pose(rng)
        q = geo.compose(p, geo.inverse(p))
        np.testing.assert_allclose(q.rotation, np.eye(3), atol=1e-9)
        np.testing.assert_allclose(q.translation, np.zeros(3), atol=1e-9)


def test_compose_hand_value():
    # Rz(90deg) at t=(1,0,0) composed with Rz(90deg) at origin: rotation
    # Rz(180deg), translation (1,0,0). Cross-checked against the 4x4 oracle.
    a = geo.Pose(geo.rot_z(np.pi / 2), [1.0, 0.0, 0.0])
    b = geo.Pose(geo.rot_z(np.pi / 2), [0.0, 0.0, 0.0])
    c = geo.compose(a, b)
    np.testing.assert_allclose(c.rotation, geo.rot_z(np.pi), atol=1e-12)
    np.testing.assert_allclose(c.translation, [1.0, 0.0, 0.0], atol=1e-12)
    oracle = homogeneous(a) @ homogeneous(b)
    np.testing.assert_allclose(homogeneous(c), oracle, atol=1e-12)


def test_compose_matches_homogeneous_oracle():
    rng = rng_from(2, "t")
    for _ in range(50):
        a, b = random_pose(rng), random_pose(rng)
        got = homogeneous(geo.compose(a, b))
        want = homogeneous(a) @ homogeneous(b)
        np.testing.assert_allclose(got, want, atol=1e-12)


def test_inverse_trivial_cases():
    ident = geo.inverse(geo.Pose.identity())
    np.testing.assert_allclose(homogeneous(ident), np.eye(4), atol=1e-15)
    p = geo.Pose(np.eye(3), [1.0, 2.0, 3.0])
    np.testing.assert_allclose(geo.inverse(p).translation, [-1.0, -2.0, -3.0], atol=1e-15)


def test_double_inverse_roundtrip():
    rng = rng_from(3, "t")
    for _ in range(100):
        p = random_pose(rng)
        q = geo.inverse(geo.inverse(p))
        np.testing.assert_allclose(q.rotation, p.rotation, atol=1e-9)
        np.testing.assert_allclose(q.translation, p.translation, atol=1e-9)
        oracle = np.linalg.inv(homogeneous(p))
        np.testing.assert_allclose(homogeneous(geo.inverse(p)), oracle, atol=1e-9)


def test_transform_points_trivial_and_roundtrip():
    pts = geo.PointSet(np.array([[0.0, 0.0, 0.0], [1.0, 2.0, 3.0]]), np.array([0, 1]))
    same = geo.transform_points(geo.Pose.identity(), pts)
    np.testing.assert_array_equal(same.points, pts.points)
    np.testing.assert_array_equal(same.labels, pts.labels)

    lift = geo.Pose(np.eye(3), [0.0, 0.0, 1.0])
    np.testing.assert_allclose(
        geo.transform_points(lift, pts).points[0], [0.0, 0.0, 1.0], atol=1e-15
    )

    rng = rng_from(4, "t")
    cloud = geo.PointSet(rng.standard_normal((64, 3)), np.zeros(64, dtype=int))
    for _ in range(10):
        p = random_pose(rng)
        back = geo.transform_points(geo.inverse(p), geo.transform_points(p, cloud))
        np.testing.assert_allclose(back.points, cloud.points, atol=1e-9)


def test_pose_validity_flags():
    assert geo.Pose.identity().is_valid()
    skew = geo.Pose(np.eye(3) + 1e-6, np.zeros(3))
    assert not skew.is_valid()


def test_compose_reorthonormalizes_drift():
    drifted = geo.Pose(geo.rot_z(0.3) + 1e-6 * np.ones((3, 3)), np.zeros(3))
    out = geo.compose(drifted, geo.Pose(geo.rot_z(0.1), np.zeros(3)))
    assert out.is_valid(1e-12)


# ---- rotation encoding -----------------------------------------------------


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=10_000))
def test_rotation6d_roundtrip(seed):
    r = random_pose(rng_from(seed, "r6d")).rotation
    dec = geo.rotation6d_decode(geo.rotation6d_encode(r))
    np.testing.assert_allclose(dec, r, atol=1e-9)


def test_rotation6d_decode_orthonormalizes():
    v = geo.rotation6d_encode(geo.rot_z(0.7)) + 0.05
    r = geo.rotation6d_decode(v)
    np.testing.assert_allclose(r.T @ r, np.eye(3), atol=1e-12)
    assert np.linalg.det(r) > 0


def test_action_pose_roundtrip():
    rng = rng_from(5, "t")
    p = random_pose(rng)
    back, g = geo.action_to_pose(geo.pose_to_action(p, 0.25))
    np.testing.assert_allclose(back.rotation, p.rotation, atol=1e-9)
    np.testing.assert_allclose(back.translation, p.translation, atol=1e-12)
    assert g == 0.25


# ---- interpolation ---------------------------------------------------------


def test_interpolate_endpoints_and_midpoint():
    rng = rng_from(6, "t")
    a, b = random_pose(rng), random_pose(rng)
    p0 = geo.interpolate_pose(a, b, 0.0)
    p1 = geo.interpolate_pose(a, b, 1.0)
    np.testing.assert_allclose(p0.rotation, a.rotation, atol=1e-9)
    np.testing.assert_allclose(p1.rotation, b.rotation, atol=1e-9)

    ta = geo.Pose(np.eye(3), [0.0, 0.0, 0.0])
    tb = geo.Pose(np.eye(3), [1.0, 0.0, 0.0])
    mid = geo.interpolate_pose(ta, tb, 0.5)
    np.testing.assert_allclose(mid.translation, [0.5, 0.0, 0.0], atol=1e-15)


def test_interpolate_rotation_against_axis_angle_oracle():
    a = geo.Pose(geo.rot_z(0.0), np.zeros(3))
    b = geo.Pose(geo.rot_z(np.pi / 2), np.zeros(3))
    mid = geo.interpolate_pose(a, b, 0.5)
    np.testing.assert_allclose(mid.rotation, geo.rot_z(np.pi / 4), atol=1e-9)
    # general axis: slerp(alpha) must equal the axis-angle rotation at alpha*theta
    axis = np.array([0.3, -0.5, 0.81])
    theta = 1.3
    a = geo.Pose(np.eye(3), np.zeros(3))
    b = geo.Pose(axis_angle_matrix(axis, theta), np.zeros(3))
    for alpha in (0.25, 0.5, 0.75):
        got = geo.interpolate_pose(a, b, alpha).rotation
        np.testing.assert_allclose(got, axis_angle_matrix(axis, alpha * theta), atol=1e-9)


def test_interpolate_rejects_out_of_range_alpha():
    with pytest.raises(ValueError):
        geo.interpolate_pose(geo.Pose.identity(), geo.Pose.identity(), 1.5)


def test_step_toward_caps():
    cur = geo.Pose(np.eye(3), np.zeros(3))
    tgt = geo.Pose(geo.rot_z(1.0), [1.0, 0.0, 0.0])
    stepped = geo.step_toward(cur, tgt, 0.03, np.deg2rad(15))
    assert np.linalg.norm(stepped.translation) <= 0.03 + 1e-12
    assert geo.rotation_angle(stepped.rotation) <= np.deg2rad(15) + 1e-12
    # within caps: reaches exactly
    near = geo.Pose(geo.rot_z(0.01), [0.0, 0.01, 0.0])
    stepped = geo.step_toward(cur, near, 0.03, np.deg2rad(15))
    np.testing.assert_allclose(stepped.translation, near.translation, atol=1e-15)
    np.testing.assert_allclose(stepped.rotation, near.rotation, atol=1e-12)


# ---- camera ----------------------------------------------------------------


def overhead_cam(fx=100.0, size=128, cx=64.0, cy=64.0):
    """Camera at the base origin looking along base +z."""
    k = np.array([[fx, 0.0, cx], [0.0, fx, cy], [0.0, 0.0, 1.0]])
    return geo.CameraModel(k, geo.Pose.identity(), (size, size))


def test_project_principal_axis():
    cam = overhead_cam()
    px, depth = geo.project(cam, [0.0, 0.0, 1.0])
    np.testing.assert_allclose(px, [64.0, 64.0], atol=1e-12)
    assert depth == pytest.approx(1.0)


def test_project_offset_point():
    cam = overhead_cam()
    px, depth = geo.project(cam, [0.1, 0.0, 1.0])
    np.testing.assert_allclose(px, [74.0, 64.0], atol=1e-12)
    assert depth == pytest.approx(1.0)


def test_project_behind_camera():
    cam = overhead_cam()
    with pytest.raises(BehindCamera):
        geo.project(cam, [0.0, 0.0, 0.0])
    with pytest.raises(BehindCamera):
        geo.project(cam, [0.0, 0.0, -1.0])


def test_unproject_axis_point():
    cam = overhead_cam()
    pt = geo.unproject(cam, [64.0, 64.0], 1.0)
    np.testing.assert_allclose(pt, [0.0, 0.0, 1.0], atol=1e-15)


def test_unproject_rejects_nonpositive_depth():
    cam = overhead_cam()
    with pytest.raises(NonPositiveDepth):
        geo.unproject(cam, [64.0, 64.0], 0.0)


def test_project_unproject_roundtrip_random():
    rng = rng_from(7, "t")
    cam = geo.CameraModel(
        np.array([[150.0, 0.0, 60.0], [0.0, 140.0, 70.0], [0.0, 0.0, 1.0]]),
        random_pose(rng),
        (128, 128),
    )
    center = cam.center
    fwd = geo.inverse(cam.extrinsics).rotation[:, 2]
    for _ in range(1000):
        x = center + fwd * rng.uniform(0.3, 3.0) + rng.standard_normal(3) * 0.05
        px, d = geo.project(cam, x)
        np.testing.assert_allclose(geo.unproject(cam, px, d), x, atol=1e-12)
        px2, d2 = geo.project(cam, geo.unproject(cam, px, d))
        np.testing.assert_allclose(px2, px, atol=1e-9)
        assert abs(d2 - d) < 1e-12


def test_frame_change_consistency():
    # Unprojecting the same world point's exact projection must give the same
    # base-frame point no matter which extrinsics the camera has.
    rng = rng_from(8, "t")
    x = np.array([0.4, -0.1, 0.2])
    for _ in range(25):
        pose = random_pose(rng)
        # keep the point in front of the camera
        cam_frame = pose.apply(x)
        if cam_frame[2] < 0.1:
            continue
        cam = geo.CameraModel(
            np.array([[120.0, 0.0, 64.0], [0.0, 120.0, 64.0], [0.0, 0.0, 1.0]]),
            pose,
            (128, 128),
        )
        px, d = geo.project(cam, x)
        np.testing.assert_allclose(geo.unproject(cam, px, d), x, atol=1e-9)


def test_camera_model_validation():
    k = np.array([[100.0, 0.0, 64.0], [0.0, 100.0, 64.0], [0.0, 0.0, 1.0]])
    bad_f = k.copy()
    bad_f[0, 0] = -100.0
    with pytest.raises(ValueError):
        geo.CameraModel(bad_f, geo.Pose.identity(), (128, 128))
    bad_c = k.copy()
    bad_c[0, 2] = 200.0
    with pytest.raises(ValueError):
        geo.CameraModel(bad_c, geo.Pose.identity(), (128, 128))


# ---- triangulation ---------------------------------------------------------


def stereo_rig(baseline=0.2, fx=600.0):
    k = np.array([[fx, 0.0, 320.0], [0.0, fx, 240.0], [0.0, 0.0, 1.0]])
    left = geo.CameraModel(k, geo.Pose.identity(), (640, 480))
    right = geo.CameraModel(k, geo.Pose(np.eye(3), [-baseline, 0.0, 0.0]), (640, 480))
    return left, right


def test_triangulate_exact():
    left, right = stereo_rig()
    rng = rng_from(9, "t")
    for _ in range(50):
        p = np.array([rng.uniform(-0.3, 0.3), rng.uniform(-0.2, 0.2), rng.uniform(0.5, 2.0)])
        px1, _ = geo.project(left, p)
        px2, _ = geo.project(right, p)
        rec, residual = geo.triangulate(left, px1, right, px2)
        np.testing.assert_allclose(rec, p, atol=1e-9)
        assert residual < 1e-9


def test_triangulate_noise_error_bound():
    # Monte-Carlo oracle with the declared noise model: +-0.5 px Gaussian at
    # 1 m range, fx = 600, 0.2 m baseline -> median error below 5 mm.
    left, right = stereo_rig()
    rng = rng_from(10, "t")
    errors = []
    p = np.array([0.05, -0.03, 1.0])
    px1, _ = geo.project(left, p)
    px2, _ = geo.project(right, p)
    for _ in range(1000):
        n1 = px1 + rng.standard_normal(2) * 0.5
        n2 = px2 + rng.standard_normal(2) * 0.5
        rec, _ = geo.triangulate(left, n1, right, n2)
        errors.append(np.linalg.norm(rec - p))
    assert np.median(errors) < 0.005


def test_triangulate_identical_cameras():
    left, _ = stereo_rig()
    with pytest.raises(InsufficientBaseline):
        geo.triangulate(left, [320.0, 240.0], left, [321.0, 240.0])


def test_triangulate_parallel_rays():
    left, right = stereo_rig()
    with pytest.raises(DegenerateRays):
        geo.triangulate(left, [320.0, 240.0], right, [320.0, 240.0])


# ---- farthest point sampling -----------------------------------------------


def test_fps_collinear():
    pts = np.array([[float(i), 0.0, 0.0] for i in range(11)])
    idx = geo.farthest_point_sample(pts, 2, seed=0, first_index=0)
    assert idx == [0, 10]


def test_fps_m_equals_n():
    pts = rng_from(11, "t").standard_normal((8, 3))
    idx = geo.farthest_point_sample(pts, 8, seed=3)
    assert sorted(idx) == list(range(8))


def test_fps_cube_corners_against_brute_force():
    corners = np.array(
        [[x, y, z] for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)]
    )
    got = geo.farthest_point_sample(corners, 3, seed=0, first_index=0)
    want = brute_force_fps(corners, 3, 0)
    assert got == want


def test_fps_matches_brute_force_random_sets():
    rng = rng_from(12, "t")
    for trial in range(25):
        pts = rng.standard_normal((40, 3))
        m = int(rng.integers(2, 12))
        first = int(rng.integers(40))
        got = geo.farthest_point_sample(pts, m, seed=trial, first_index=first)
        assert got == brute_force_fps(pts, m, first)


def test_fps_too_few_points():
    with pytest.raises(TooFewPoints):
        geo.farthest_point_sample(np.zeros((3, 3)), 4, seed=0)


def test_fps_min_distance_monotone_in_m():
    pts = rng_from(13, "t").standard_normal((64, 3))

    def min_pairwise(sel):
        d = np.inf
        for i in range(len(sel)):
            for j in range(i + 1, len(sel)):
                d = min(d, np.linalg.norm(pts[sel[i]] - pts[sel[j]]))
        return d

    prev = np.inf
    for m in range(2, 20):
        sel = geo.farthest_point_sample(pts, m, seed=5, first_index=0)
        cur = min_pairwise(sel)
        assert cur <= prev + 1e-12
        prev = cur


# ---- noise -----------------------------------------------------------------


def test_noise_zero_sigma_identity():
    pts = geo.PointSet(rng_from(14, "t").standard_normal((16, 3)), np.zeros(16, dtype=int))
    out = geo.add_gaussian_noise(pts, 0.0, seed=1)
    np.testing.assert_array_equal(out.points, pts.points)


def test_noise_statistics_one_centimeter():
    pts = geo.PointSet(np.zeros((100_000, 3)), np.zeros(100_000, dtype=int))
    out = geo.add_gaussian_noise(pts, 0.01, seed=2)
    stds = out.points.std(axis=0)
    assert np.all(stds > 0.0095) and np.all(stds < 0.0105)


def test_noise_deterministic():
    pts = geo.PointSet(rng_from(15, "t").standard_normal((32, 3)), np.zeros(32, dtype=int))
    a = geo.add_gaussian_noise(pts, 0.01, seed=7)
    b = geo.add_gaussian_noise(pts, 0.01, seed=7)
    np.testing.assert_array_equal(a.points, b.points)
    c = geo.add_gaussian_noise(pts, 0.01, seed=8)
    assert not np.array_equal(a.points, c.points)


def test_noise_negative_sigma_rejected():
    pts = geo.PointSet(np.zeros((4, 3)), np.zeros(4, dtype=int))
    with pytest.raises(ValueError):
        geo.add_gaussian_noise(pts, -0.01, seed=0)
