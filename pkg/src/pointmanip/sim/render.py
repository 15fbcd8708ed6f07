"""Point-splat z-buffer rendering to depth and object-id maps.

Every object surface point, plus the 64 gripper hull points, splats into the
pixel cell its projection lands in; each cell keeps the minimum depth and the
id of its winner (the gripper renders as id 0, like the background). The
table is an analytic plane. A single 3x3 pass fills no-return pixels with the
minimum valid neighbor. Depth maps hold meters with NaN for no return; valid
readings lie inside (0.05, 10.0) m.
"""

from pathlib import Path

import numpy as np

from ..geometry import CameraModel, inverse, project_many
from .world import WorldState

DEPTH_MIN = 0.05
DEPTH_MAX = 10.0


def _pixel_rays(cam: CameraModel):
    """Base-frame ray directions (H, W, 3) through all cell centers, scaled so
    that the camera-frame z component is 1 (ray parameter == camera depth)."""
    w, h = cam.image_size
    k = cam.intrinsics
    u = (np.arange(w) + 0.5 - k[0, 2]) / k[0, 0]
    v = (np.arange(h) + 0.5 - k[1, 2]) / k[1, 1]
    uu, vv = np.meshgrid(u, v)
    d_cam = np.stack([uu, vv, np.ones_like(uu)], axis=-1)
    cam_to_base = inverse(cam.extrinsics)
    return d_cam @ cam_to_base.rotation.T, cam_to_base.translation


def render(world: WorldState, cam: CameraModel):
    """Render (DepthMap, MaskMap) for the given camera."""
    w, h = cam.image_size
    rays, origin = _pixel_rays(cam)

    # analytic table plane z = table_height
    dz = rays[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (world.table_height - origin[2]) / dz
    depth = np.where((t > DEPTH_MIN) & (t < DEPTH_MAX), t, np.nan)
    mask = np.zeros((h, w), dtype=np.int32)

    clouds = [(0, world.gripper_points_base())]
    for obj in world.objects:
        clouds.append((obj.object_id, obj.posed_points()))
    all_pts = np.concatenate([pts for _, pts in clouds])
    all_ids = np.concatenate([np.full(len(pts), oid, dtype=np.int32) for oid, pts in clouds])

    pix, z, in_front = project_many(cam, all_pts)
    keep = in_front & (z > DEPTH_MIN) & (z < DEPTH_MAX)
    keep &= (pix[:, 0] >= 0) & (pix[:, 0] < w) & (pix[:, 1] >= 0) & (pix[:, 1] < h)
    if np.any(keep):
        col = np.floor(pix[keep, 0]).astype(np.int64)
        row = np.floor(pix[keep, 1]).astype(np.int64)
        zk = z[keep]
        idk = all_ids[keep]
        flat = row * w + col
        order = np.lexsort((np.arange(len(flat)), zk, flat))
        flat, zk, idk = flat[order], zk[order], idk[order]
        first = np.ones(len(flat), dtype=bool)
        first[1:] = flat[1:] != flat[:-1]
        flat, zk, idk = flat[first], zk[first], idk[first]
        cur = depth.reshape(-1)[flat]
        wins = np.isnan(cur) | (zk < cur)
        depth.reshape(-1)[flat[wins]] = zk[wins]
        mask.reshape(-1)[flat[wins]] = idk[wins]

    holes = np.isnan(depth)
    if np.any(holes):
        depth, mask = _fill_holes(depth, mask, holes)
    return depth, mask


def _fill_holes(depth, mask, holes):
    h, w = depth.shape
    padded_d = np.full((h + 2, w + 2), np.nan)
    padded_d[1:-1, 1:-1] = depth
    padded_m = np.zeros((h + 2, w + 2), dtype=mask.dtype)
    padded_m[1:-1, 1:-1] = mask
    stacks_d, stacks_m = [], []
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dy == 0 and dx == 0:
                continue
            stacks_d.append(padded_d[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w])
            stacks_m.append(padded_m[1 + dy : 1 + dy + h, 1 + dx : 1 + dx + w])
    nd = np.stack(stacks_d)
    nm = np.stack(stacks_m)
    nd_inf = np.where(np.isnan(nd), np.inf, nd)
    best = np.argmin(nd_inf, axis=0)
    best_d = np.take_along_axis(nd_inf, best[None], axis=0)[0]
    best_m = np.take_along_axis(nm, best[None], axis=0)[0]
    fill = holes & np.isfinite(best_d)
    out_d = depth.copy()
    out_m = mask.copy()
    out_d[fill] = best_d[fill]
    out_m[fill] = best_m[fill]
    return out_d, out_m


# -- debug dumps (portable grey maps) ---------------------------------------


def write_pgm(path, array: np.ndarray, scale: float = 1000.0):
    """Write a 16-bit binary PGM. Float arrays are scaled (default mm) and
    NaN maps to 0; integer arrays are written as-is."""
    path = Path(path)
    arr = np.asarray(array)
    if np.issubdtype(arr.dtype, np.floating):
        vals = np.where(np.isnan(arr), 0.0, arr * scale)
    else:
        vals = arr.astype(np.float64)
    vals = np.clip(np.round(vals), 0, 65535).astype(">u2")
    with open(path, "wb") as fh:
        fh.write(f"P5\n{arr.shape[1]} {arr.shape[0]}\n65535\n".encode())
        fh.write(vals.tobytes())


def read_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        data = fh.read()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValueError("only binary PGM (P5) supported")
    w, h = (int(x) for x in parts[1].split())
    maxval = int(parts[2])
    dtype = ">u2" if maxval > 255 else np.uint8
    return np.frombuffer(parts[3], dtype=dtype).reshape(h, w).astype(np.int64)
