"""Dataset layout and serialization.

A dataset is a directory:

    manifest.json        structured-text manifest (format, task, seeds,
                         camera set, representation config, split, counts)
    episodes/NNNNNN.ep   one file per episode: line-delimited JSON records;
                         the first line is the episode header, every further
                         line is one frame {t, world, action, obs}

Floats are rounded before writing (9 decimals for states/actions, 6 for
observation points); rounding is deterministic so regeneration with the same
master seed reproduces every byte. docs/formats.md describes each field.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigError
from ..geometry import CameraModel, Pose
from ..representation import RepresentationConfig, embed_task
from ..sim.objects import make_object, with_pose
from ..sim.world import WorldState

FORMAT_VERSION = 1

STATE_DECIMALS = 9
OBS_DECIMALS = 6


def _round(x, nd):
    if isinstance(x, (list, tuple)):
        return [_round(v, nd) for v in x]
    return round(float(x), nd)


def pose_to_json(p: Pose, nd=STATE_DECIMALS) -> dict:
    return {"rot": _round(p.rotation.ravel().tolist(), nd), "pos": _round(p.translation.tolist(), nd)}


def pose_from_json(d: dict) -> Pose:
    return Pose(np.array(d["rot"]).reshape(3, 3), np.array(d["pos"]))


def camera_to_json(cam: CameraModel) -> dict:
    return {
        "intrinsics": cam.intrinsics.ravel().tolist(),
        "extrinsics": pose_to_json(cam.extrinsics, 12),
        "image_size": list(cam.image_size),
    }


def camera_from_json(d: dict) -> CameraModel:
    return CameraModel(
        np.array(d["intrinsics"]).reshape(3, 3),
        pose_from_json(d["extrinsics"]),
        tuple(d["image_size"]),
    )


def world_to_json(w: WorldState) -> dict:
    return {
        "objects": [
            {
                "id": o.object_id,
                "category": o.category,
                "shape": o.shape_params,
                "pose": pose_to_json(o.pose),
            }
            for o in w.objects
        ],
        "ee": pose_to_json(w.ee_pose),
        "gripper_open": w.gripper_open,
        "attached": w.attached_object,
        "attach_rel": None if w.attach_rel is None else pose_to_json(w.attach_rel),
        "table": w.table_height,
        "t": w.time_index,
    }


def world_from_json(d: dict) -> WorldState:
    objects = tuple(
        make_object(o["id"], o["category"], o["shape"], pose_from_json(o["pose"]))
        for o in d["objects"]
    )
    return WorldState(
        objects=objects,
        ee_pose=pose_from_json(d["ee"]),
        gripper_open=d["gripper_open"],
        attached_object=d["attached"],
        attach_rel=None if d["attach_rel"] is None else pose_from_json(d["attach_rel"]),
        table_height=d["table"],
        time_index=d["t"],
    )


def obs_to_json(obs) -> dict:
    return {
        "robot": _round(obs.robot_points.tolist(), OBS_DECIMALS),
        "objects": [_round(g.tolist(), OBS_DECIMALS) for g in obs.object_points],
        "labels": list(obs.object_labels),
        "degraded": obs.degraded,
    }


@dataclass
class EpisodeRecord:
    """One generated episode: header metadata plus per-frame arrays."""

    header: dict
    worlds: list  # per-frame world snapshot dicts (JSON form)
    actions: np.ndarray  # (T, 10)
    robot_points: np.ndarray  # (T, N_r, 3)
    object_points: list  # per group g: (T, M_g, 3)
    degraded: np.ndarray  # (T,) bool

    def __len__(self):
        return len(self.actions)

    def frame_groups(self, t: int) -> list:
        return [self.robot_points[t]] + [g[t] for g in self.object_points]


@dataclass
class Dataset:
    """In-memory dataset: manifest plus episode records."""

    manifest: dict
    episodes: list = field(default_factory=list)

    @property
    def representation(self) -> RepresentationConfig:
        return RepresentationConfig.from_dict(self.manifest["representation"])

    @property
    def task_embedding(self) -> np.ndarray:
        return embed_task(self.manifest["instruction"])

    def total_frames(self) -> int:
        return sum(len(e) for e in self.episodes)

    def group_sizes(self) -> tuple:
        e = self.episodes[0]
        return tuple([e.robot_points.shape[1]] + [g.shape[1] for g in e.object_points])


def episode_to_lines(ep: EpisodeRecord) -> list:
    lines = [json.dumps(ep.header, separators=(",", ":"), sort_keys=True)]
    for t in range(len(ep)):
        rec = {
            "t": t,
            "world": ep.worlds[t],
            "action": _round(ep.actions[t].tolist(), STATE_DECIMALS),
            "obs": {
                "robot": _round(ep.robot_points[t].tolist(), OBS_DECIMALS),
                "objects": [_round(g[t].tolist(), OBS_DECIMALS) for g in ep.object_points],
                "degraded": bool(ep.degraded[t]),
            },
        }
        lines.append(json.dumps(rec, separators=(",", ":"), sort_keys=True))
    return lines


def episode_from_lines(lines: list) -> EpisodeRecord:
    header = json.loads(lines[0])
    worlds, actions, robots, degraded = [], [], [], []
    groups = None
    for line in lines[1:]:
        rec = json.loads(line)
        worlds.append(rec["world"])
        actions.append(rec["action"])
        robots.append(rec["obs"]["robot"])
        objs = rec["obs"]["objects"]
        if groups is None:
            groups = [[] for _ in objs]
        for g, pts in zip(groups, objs):
            g.append(pts)
        degraded.append(rec["obs"]["degraded"])
    return EpisodeRecord(
        header=header,
        worlds=worlds,
        actions=np.array(actions),
        robot_points=np.array(robots),
        object_points=[np.array(g) for g in groups],
        degraded=np.array(degraded, dtype=bool),
    )


def write_dataset(ds: Dataset, out_dir) -> Path:
    out = Path(out_dir)
    (out / "episodes").mkdir(parents=True, exist_ok=True)
    manifest = dict(ds.manifest)
    manifest["format_version"] = FORMAT_VERSION
    manifest["episode_count"] = len(ds.episodes)
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for i, ep in enumerate(ds.episodes):
        with open(out / "episodes" / f"{i:06d}.ep", "w") as fh:
            fh.write("\n".join(episode_to_lines(ep)))
            fh.write("\n")
    return out


def load_dataset(path) -> Dataset:
    path = Path(path)
    mf = path / "manifest.json"
    if not mf.exists():
        raise ConfigError(f"{path}: not a dataset directory (missing manifest.json)")
    with open(mf) as fh:
        manifest = json.load(fh)
    episodes = []
    for f in sorted((path / "episodes").glob("*.ep")):
        with open(f) as fh:
            lines = fh.read().splitlines()
        episodes.append(episode_from_lines(lines))
    if manifest.get("episode_count") != len(episodes):
        raise ConfigError(
            f"{path}: manifest says {manifest.get('episode_count')} episodes, found {len(episodes)}"
        )
    return Dataset(manifest=manifest, episodes=episodes)
