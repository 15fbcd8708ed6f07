"""Behavior-cloning training: seeded Adam over chunked-action regression.

Batches are sampled uniformly over all frames (optionally as an 80-20
sim/pseudo-real mixture); the target for a frame is the next chunk_len
actions with last-action padding at episode end. Everything is driven by
derived seeds, so a fixed seed reproduces checkpoints bit for bit, and a
resumed run continues the exact stream of the uninterrupted one.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import EmptyDataset
from ..geometry import action_to_pose
from ..representation import default_template, robot_keypoints
from ..seeding import rng_from
from .checkpoint import load_checkpoint, save_checkpoint
from .network import PolicyConfig, center_target_rows, init_params, loss_and_grad


@dataclass
class TrainConfig:
    steps: int = 20_000
    batch_size: int = 16
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    cotrain_mix: float = None  # probability of drawing from the sim split
    log_every: int = 100


@dataclass
class SplitArrays:
    """Flattened frames of one dataset split."""

    groups: list  # per group g: (T, M_g, 3)
    embed: np.ndarray  # (64,)
    target_rows: np.ndarray  # (T, out_dim): per-frame regression row
    episode_end: np.ndarray  # (T,) exclusive end index of the owning episode

    def __len__(self):
        return self.target_rows.shape[0]


def _action_keypoint_row(action: np.ndarray, template) -> np.ndarray:
    pose, grip = action_to_pose(action)
    return np.concatenate([robot_keypoints(pose, template).ravel(), [grip]])


def flatten_dataset(ds, policy_config: PolicyConfig) -> SplitArrays:
    """Stack every episode's observations and per-frame regression targets
    (already shifted into the policy's centered coordinates)."""
    if not ds.episodes or ds.total_frames() == 0:
        raise EmptyDataset(ds.manifest.get("task_id", "<unknown>"))
    n_groups = 1 + len(ds.episodes[0].object_points)
    groups = [[] for _ in range(n_groups)]
    rows, ends = [], []
    template = default_template()
    offset = 0
    for ep in ds.episodes:
        t = len(ep)
        groups[0].append(ep.robot_points)
        for g, arr in enumerate(ep.object_points, start=1):
            groups[g].append(arr)
        if policy_config.head == "pose":
            rows.append(ep.actions)
        else:
            rows.append(np.stack([_action_keypoint_row(a, template) for a in ep.actions]))
        ends.append(np.full(t, offset + t, dtype=np.int64))
        offset += t
    return SplitArrays(
        groups=[np.concatenate(g) for g in groups],
        embed=ds.task_embedding,
        target_rows=center_target_rows(np.concatenate(rows), policy_config),
        episode_end=np.concatenate(ends),
    )


def _chunk_targets(split: SplitArrays, idx: np.ndarray, chunk_len: int) -> np.ndarray:
    steps = idx[:, None] + np.arange(chunk_len)[None, :]
    steps = np.minimum(steps, split.episode_end[idx][:, None] - 1)
    return split.target_rows[steps]


def sample_split_choices(rng, batch_size: int, mix: float) -> np.ndarray:
    """True where the sample comes from the sim split (probability mix)."""
    return rng.random(batch_size) < mix


def assemble_batch(splits: dict, config: PolicyConfig, rng, batch_size: int, mix):
    if mix is None or "pseudo_real" not in splits:
        take_sim = np.ones(batch_size, dtype=bool)
    else:
        take_sim = sample_split_choices(rng, batch_size, mix)
    counts = {"sim": int(take_sim.sum()), "pseudo_real": int((~take_sim).sum())}
    names = np.where(take_sim, "sim", "pseudo_real")
    idx = np.array([rng.integers(len(splits[n])) for n in names])
    groups = [np.empty((batch_size, m, 3)) for m in config.group_sizes]
    embeds = np.empty((batch_size, config.embed_dim))
    targets = np.empty((batch_size, config.chunk_len, splits["sim"].target_rows.shape[1]))
    for name in ("sim", "pseudo_real"):
        if name not in splits:
            continue
        sel = names == name
        if not sel.any():
            continue
        split = splits[name]
        rows = idx[sel]
        for g in range(config.n_groups):
            groups[g][sel] = split.groups[g][rows]
        embeds[sel] = split.embed
        targets[sel] = _chunk_targets(split, rows, config.chunk_len)
    return (groups, embeds, targets), counts


class Adam:
    def __init__(self, params: dict, cfg: TrainConfig):
        self.cfg = cfg
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict):
        self.t += 1
        c = self.cfg
        bc1 = 1.0 - c.beta1**self.t
        bc2 = 1.0 - c.beta2**self.t
        for k in params:
            g = grads[k]
            self.m[k] = c.beta1 * self.m[k] + (1 - c.beta1) * g
            self.v[k] = c.beta2 * self.v[k] + (1 - c.beta2) * g * g
            params[k] -= c.lr * (self.m[k] / bc1) / (np.sqrt(self.v[k] / bc2) + c.eps)

    def state(self) -> dict:
        out = {f"adam_m.{k}": v for k, v in self.m.items()}
        out.update({f"adam_v.{k}": v for k, v in self.v.items()})
        return out

    def load_state(self, blob: dict, t: int):
        self.t = t
        for k in self.m:
            self.m[k] = blob[f"adam_m.{k}"].copy()
            self.v[k] = blob[f"adam_v.{k}"].copy()


def train(
    datasets: dict,
    policy_config: PolicyConfig,
    train_config: TrainConfig,
    checkpoint_path=None,
    log_path=None,
    resume_from=None,
):
    """Train a policy on {"sim": Dataset, optional "pseudo_real": Dataset}.

    Returns (params, history list of dicts). With checkpoint_path set, the
    final params (plus optimizer state for resuming) are saved there.
    """
    splits = {name: flatten_dataset(ds, policy_config) for name, ds in datasets.items()}
    if "sim" not in splits:
        raise EmptyDataset("training requires a 'sim' split")

    start_step = 0
    if resume_from is not None:
        _, blob, extra = load_checkpoint(resume_from)
        params = {k: v for k, v in blob.items() if not k.startswith("adam_")}
        opt = Adam(params, train_config)
        opt.load_state(blob, extra["adam_t"])
        start_step = extra["step"]
    else:
        params = init_params(policy_config, train_config.seed)
        opt = Adam(params, train_config)

    history = []
    for step in range(start_step, train_config.steps):
        rng = rng_from(train_config.seed, "batch", step)
        batch, counts = assemble_batch(
            splits, policy_config, rng, train_config.batch_size, train_config.cotrain_mix
        )
        loss, grads = loss_and_grad(params, policy_config, batch)
        opt.step(params, grads)
        if step % train_config.log_every == 0 or step == train_config.steps - 1:
            history.append(
                {"step": step, "loss": loss, "lr": train_config.lr, "mix": counts}
            )

    if checkpoint_path is not None:
        blob = dict(params)
        blob.update(opt.state())
        save_checkpoint(
            checkpoint_path,
            policy_config,
            blob,
            extra={"step": train_config.steps, "adam_t": opt.t, "seed": train_config.seed},
        )
    if log_path is not None:
        Path(log_path).parent.mkdir(parents=True, exist_ok=True)
        with open(log_path, "w") as fh:
            for rec in history:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    return params, history


def params_from_checkpoint(path):
    """Load (config, inference params) from a checkpoint, dropping optimizer state."""
    config, blob, _ = load_checkpoint(path)
    params = {k: v for k, v in blob.items() if not k.startswith("adam_")}
    return config, params
