"""Procedural rigid objects represented as dense surface point sets.

Each category is a parametric surface sampled deterministically (golden-angle
spirals, no RNG), in a canonical frame with the bottom center at the origin
and +z up. Shape parameters are plain dicts so task configs stay declarative.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import Pose

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))

BOWL_WALL = 0.004
PLATE_THICKNESS = 0.010
MUG_WALL = 0.004
HANDLE_EXTENT = 0.025

CATEGORIES = ("bowl", "plate", "mug", "cuboid")


def _spiral(n, radial, angular_offset=0.0):
    """n golden-angle samples; radial maps u in (0,1] -> (r, z)."""
    i = np.arange(n, dtype=np.float64)
    u = (i + 0.5) / n
    theta = i * GOLDEN_ANGLE + angular_offset
    r, z = radial(u)
    return np.stack([r * np.cos(theta), r * np.sin(theta), z], axis=1)


def _disk(n, radius, z, r_inner=0.0):
    return _spiral(n, lambda u: (np.sqrt(r_inner**2 + u * (radius**2 - r_inner**2)), np.full_like(u, z)))


def _bowl_profile(u, rim_radius, depth, bottom_radius):
    # smooth flare from the flat bottom up to the rim
    r = bottom_radius + (rim_radius - bottom_radius) * np.sin(u * np.pi / 2.0)
    z = depth * u
    return r, z


def _bowl_points(params, n):
    rim = float(params["rim_radius"])
    depth = float(params["depth"])
    bottom = 0.45 * rim
    counts = _split(n, [0.34, 0.26, 0.06, 0.20, 0.14])
    inner = _spiral(counts[0], lambda u: _bowl_profile(u, rim - BOWL_WALL, depth - BOWL_WALL, bottom - BOWL_WALL))
    inner[:, 2] += BOWL_WALL
    outer = _spiral(counts[1], lambda u: _bowl_profile(u, rim, depth, bottom), angular_offset=1.0)
    rim_ring = _spiral(counts[2], lambda u: (np.full_like(u, rim - BOWL_WALL / 2), np.full_like(u, depth)), angular_offset=2.0)
    inner_bottom = _disk(counts[3], bottom - BOWL_WALL, BOWL_WALL)
    outer_bottom = _disk(counts[4], bottom, 0.0)
    return np.concatenate([inner, outer, rim_ring, inner_bottom, outer_bottom])


def _plate_points(params, n):
    radius = float(params["radius"])
    counts = _split(n, [0.55, 0.35, 0.10])
    top = _disk(counts[0], radius, PLATE_THICKNESS)
    bottom = _disk(counts[1], radius, 0.0)
    edge = _spiral(counts[2], lambda u: (np.full_like(u, radius), PLATE_THICKNESS * u), angular_offset=1.0)
    return np.concatenate([top, bottom, edge])


def _mug_points(params, n):
    body = float(params["body_radius"])
    height = float(params["height"])
    handle = bool(params.get("handle", True))
    fracs = [0.30, 0.26, 0.06, 0.14, 0.10, 0.14] if handle else [0.34, 0.30, 0.08, 0.16, 0.12]
    counts = _split(n, fracs)
    outer = _spiral(counts[0], lambda u: (np.full_like(u, body), height * u))
    inner = _spiral(counts[1], lambda u: (np.full_like(u, body - MUG_WALL), MUG_WALL + (height - MUG_WALL) * u), angular_offset=1.0)
    rim = _spiral(counts[2], lambda u: (np.full_like(u, body - MUG_WALL / 2), np.full_like(u, height)), angular_offset=2.0)
    inner_bottom = _disk(counts[3], body - MUG_WALL, MUG_WALL)
    outer_bottom = _disk(counts[4], body, 0.0)
    parts = [outer, inner, rim, inner_bottom, outer_bottom]
    if handle:
        # torus arc on the -x side, in the xz plane
        t = np.linspace(-0.45 * np.pi, 0.45 * np.pi, counts[5])
        cx = -(body + HANDLE_EXTENT / 2)
        arc = np.stack(
            [cx - (HANDLE_EXTENT / 2) * np.cos(t), np.zeros_like(t), height / 2 + (0.3 * height) * np.sin(t)],
            axis=1,
        )
        parts.append(arc)
    return np.concatenate(parts)


def _cuboid_points(params, n):
    sx, sy, sz = (float(params[k]) for k in ("sx", "sy", "sz"))
    areas = np.array([sx * sy, sx * sy, sx * sz, sx * sz, sy * sz, sy * sz])
    counts = _split(n, list(areas / areas.sum()))
    faces = []
    for count, (axes, fixed) in zip(
        counts,
        [((sx, sy), ("z", sz)), ((sx, sy), ("z", 0.0)), ((sx, sz), ("y", sy / 2)),
         ((sx, sz), ("y", -sy / 2)), ((sy, sz), ("x", sx / 2)), ((sy, sz), ("x", -sx / 2))],
    ):
        side = max(1, int(math.ceil(math.sqrt(count))))
        a = (np.arange(side) + 0.5) / side
        g0, g1 = np.meshgrid(a * axes[0] - axes[0] / 2, a * axes[1], indexing="ij")
        g0, g1 = g0.ravel(), g1.ravel()
        axis, val = fixed
        if axis == "z":
            pts = np.stack([g0, g1 - axes[1] / 2, np.full_like(g0, val)], axis=1)
        elif axis == "y":
            pts = np.stack([g0, np.full_like(g0, val), g1], axis=1)
        else:
            pts = np.stack([np.full_like(g0, val), g0, g1], axis=1)
        faces.append(pts)
    return np.concatenate(faces)


def _split(n, fracs):
    counts = [int(round(n * f)) for f in fracs]
    counts[0] += n - sum(counts)
    return counts


_BUILDERS = {
    "bowl": _bowl_points,
    "plate": _plate_points,
    "mug": _mug_points,
    "cuboid": _cuboid_points,
}


@dataclass(frozen=True)
class ObjectInstance:
    """A rigid object: canonical surface samples plus a base-frame pose."""

    object_id: int
    category: str
    shape_params: dict
    surface_points: np.ndarray  # (K, 3) canonical frame, K >= 2048
    pose: Pose
    bounding_radius: float

    def posed_points(self) -> np.ndarray:
        return self.pose.apply(self.surface_points)

    @property
    def footprint_radius(self) -> float:
        """Horizontal extent used for placement spacing and success checks."""
        p = self.shape_params
        if self.category == "bowl":
            return float(p["rim_radius"])
        if self.category == "plate":
            return float(p["radius"])
        if self.category == "mug":
            r = float(p["body_radius"])
            return r + (HANDLE_EXTENT if p.get("handle", True) else 0.0)
        return math.hypot(float(p["sx"]), float(p["sy"])) / 2.0

    @property
    def height(self) -> float:
        p = self.shape_params
        if self.category == "bowl":
            return float(p["depth"])
        if self.category == "plate":
            return PLATE_THICKNESS
        if self.category == "mug":
            return float(p["height"])
        return float(p["sz"])

    @property
    def support_top_z(self) -> float:
        """Canonical rest height for an object dropped onto this one.

        Plates and cuboids support on their top face, mugs on the rim plane,
        bowls part-way down the interior.
        """
        if self.category == "bowl":
            return 0.25 * self.height
        return self.height

    @property
    def grasp_point(self) -> np.ndarray:
        """Canonical-frame point the gripper pinches (rim at +x, or top center)."""
        p = self.shape_params
        if self.category == "bowl":
            return np.array([p["rim_radius"] - BOWL_WALL / 2, 0.0, p["depth"]])
        if self.category == "plate":
            return np.array([p["radius"], 0.0, PLATE_THICKNESS])
        if self.category == "mug":
            return np.array([p["body_radius"] - MUG_WALL / 2, 0.0, p["height"]])
        return np.array([0.0, 0.0, p["sz"]])

    def grasp_point_base(self) -> np.ndarray:
        return self.pose.apply(self.grasp_point)


def make_object(object_id: int, category: str, shape_params: dict, pose: Pose, samples: int = 2048) -> ObjectInstance:
    if category not in _BUILDERS:
        raise ValueError(f"unknown category {category!r}")
    n = int(shape_params.get("samples", samples))
    if n < 2048:
        raise ValueError("surface sampling must use at least 2048 points")
    pts = _BUILDERS[category]({k: v for k, v in shape_params.items() if k != "samples"}, n)
    radius = float(np.linalg.norm(pts, axis=1).max()) + 1e-9
    pts = np.ascontiguousarray(pts)
    pts.flags.writeable = False
    return ObjectInstance(
        object_id=object_id,
        category=category,
        shape_params=dict(shape_params),
        surface_points=pts,
        pose=pose,
        bounding_radius=radius,
    )


def with_pose(obj: ObjectInstance, pose: Pose) -> ObjectInstance:
    return ObjectInstance(obj.object_id, obj.category, obj.shape_params, obj.surface_points, pose, obj.bounding_radius)
