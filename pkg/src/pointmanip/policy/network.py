"""Point-cloud behavior-cloning network.

Architecture: a shared per-point MLP (3 -> 64 -> 128 -> 256) encodes every
point group (robot keypoints, one group per object) with coordinatewise max
pooling, giving one 256-vector per group. Group embeddings concatenated with
the 64-dim task embedding feed either an MLP trunk or an optional
single-block self-attention trunk over group tokens, then a linear head that
emits the full action chunk. Two heads are supported: direct pose chunks
(chunk_len x 10) and future-gripper-keypoint chunks decoded back to poses by
a rigid Procrustes fit.
"""

import hashlib
import json
from dataclasses import dataclass, asdict, field

import numpy as np

from ..errors import ShapeMismatch
from ..geometry import Pose, rotation6d_encode
from ..representation import default_template
from ..seeding import rng_from
from . import autodiff as ad

POINT_MLP_WIDTHS = (3, 64, 128, 256)


@dataclass(frozen=True)
class PolicyConfig:
    group_sizes: tuple  # points per group, robot group first
    chunk_len: int = 40
    hidden: int = 256
    embed_dim: int = 64
    head: str = "pose"  # or "points"
    trunk: str = "mlp"  # or "attention"
    n_keypoints: int = 9
    # workspace centering: subtracted from input coordinates and target
    # positions, added back on decode (a pure reparameterization that keeps
    # the regression zero-centered)
    center: tuple = (0.5, 0.0, 0.15)
    # fixed input coordinate scale (meters per unit) and parameter-free RMS
    # feature normalization; both keep activations near unit magnitude so the
    # fixed-learning-rate optimizer converges quickly
    input_scale: float = 0.15
    feature_norm: bool = True
    # the gripper keypoints are an ordered, template-indexed set; feeding
    # them to the trunk as a flat vector too (alongside their PointNet
    # encoding) gives the trunk direct phase information that symmetric max
    # pooling blurs
    ordered_robot: bool = True

    def __post_init__(self):
        if self.head not in ("pose", "points"):
            raise ValueError(f"unknown head {self.head!r}")
        if self.trunk not in ("mlp", "attention"):
            raise ValueError(f"unknown trunk {self.trunk!r}")
        object.__setattr__(self, "group_sizes", tuple(int(g) for g in self.group_sizes))
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def center_array(self) -> np.ndarray:
        return np.array(self.center)

    @property
    def n_groups(self) -> int:
        return len(self.group_sizes)

    @property
    def out_dim(self) -> int:
        return 10 if self.head == "pose" else self.n_keypoints * 3 + 1

    @property
    def trunk_in_dim(self) -> int:
        extra = 3 * self.group_sizes[0] if self.ordered_robot else 0
        return self.hidden * self.n_groups + self.embed_dim + extra

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(d: dict) -> "PolicyConfig":
        d = dict(d)
        d["group_sizes"] = tuple(d["group_sizes"])
        return PolicyConfig(**d)

    def content_hash(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()[:16]


def init_params(config: PolicyConfig, seed: int) -> dict:
    """He-initialized named parameter tensors (float64)."""
    rng = rng_from(seed, "init")
    params = {}

    def lin(name, fan_in, fan_out, scale=None):
        s = scale if scale is not None else np.sqrt(2.0 / fan_in)
        params[f"{name}_w"] = rng.standard_normal((fan_in, fan_out)) * s
        params[f"{name}_b"] = np.zeros(fan_out)

    for i in range(len(POINT_MLP_WIDTHS) - 1):
        lin(f"enc{i + 1}", POINT_MLP_WIDTHS[i], POINT_MLP_WIDTHS[i + 1])
    h = config.hidden
    if config.trunk == "mlp":
        lin("trunk1", h * config.n_groups + config.embed_dim, h)
    else:
        lin("tok", h, h)
        lin("emb", config.embed_dim, h)
        for n in ("attn_q", "attn_k", "attn_v"):
            lin(n, h, h, scale=np.sqrt(1.0 / h))
        lin("attn_out", h, h)
        lin("trunk1", h, h)
    lin("trunk2", h, h)
    lin("head", h, config.chunk_len * config.out_dim, scale=0.01)
    return params


def check_shapes(config: PolicyConfig, groups: list, embeds: np.ndarray):
    if len(groups) != config.n_groups:
        raise ShapeMismatch(f"expected {config.n_groups} point groups, got {len(groups)}")
    for g, (arr, m) in enumerate(zip(groups, config.group_sizes)):
        if arr.ndim != 3 or arr.shape[1] != m or arr.shape[2] != 3:
            raise ShapeMismatch(f"group {g}: expected (B, {m}, 3), got {arr.shape}")
    if embeds.ndim != 2 or embeds.shape[1] != config.embed_dim:
        raise ShapeMismatch(f"embedding: expected (B, {config.embed_dim}), got {embeds.shape}")


def _affine(x, p, name):
    return ad.add_bias(ad.matmul(x, p[f"{name}_w"]), p[f"{name}_b"])


def _point_encoder(leaves: dict, groups: list, config: PolicyConfig) -> "ad.Tensor":
    """Shared per-point MLP + per-group max pooling -> (B, G*256)."""
    b = groups[0].shape[0]
    stacked = np.concatenate(groups, axis=1)  # (B, sum M, 3)
    x = ad.leaf(stacked.reshape(-1, 3))
    for i in range(1, len(POINT_MLP_WIDTHS)):
        x = ad.relu(_norm(_affine(x, leaves, f"enc{i}"), config))
    feat = ad.reshape(x, (b, stacked.shape[1], POINT_MLP_WIDTHS[-1]))
    return ad.grouped_max_concat(feat, config.group_sizes)


def _norm(x, config: PolicyConfig):
    return ad.rmsnorm_last(x) if config.feature_norm else x


def _trunk(leaves: dict, pooled: "ad.Tensor", embeds: np.ndarray, config: PolicyConfig):
    b = embeds.shape[0]
    if config.trunk == "mlp":
        x = _norm(ad.concat([pooled, ad.leaf(embeds)], axis=1), config)
        h = ad.relu(_norm(_affine(x, leaves, "trunk1"), config))
    else:
        group_tokens = ad.reshape(pooled, (b, config.n_groups, config.hidden))
        tok = ad.add_bias(ad.bmm3(group_tokens, leaves["tok_w"]), leaves["tok_b"])
        emb = _affine(ad.leaf(embeds), leaves, "emb")
        x = ad.concat([tok, ad.reshape(emb, (b, 1, config.hidden))], axis=1)
        q = ad.add_bias(ad.bmm3(x, leaves["attn_q_w"]), leaves["attn_q_b"])
        k = ad.add_bias(ad.bmm3(x, leaves["attn_k_w"]), leaves["attn_k_b"])
        v = ad.add_bias(ad.bmm3(x, leaves["attn_v_w"]), leaves["attn_v_b"])
        scores = ad.scale(ad.bmm(q, ad.transpose_last(k)), 1.0 / np.sqrt(config.hidden))
        attn = ad.bmm(ad.softmax_last(scores), v)
        ctx = _norm(ad.mean_over_axis(attn, axis=1), config)
        h = ad.relu(_norm(_affine(ad.relu(_affine(ctx, leaves, "attn_out")), leaves, "trunk1"), config))
    return ad.relu(_norm(_affine(h, leaves, "trunk2"), config))


def forward_batch(params: dict, config: PolicyConfig, groups: list, embeds: np.ndarray):
    """Batched forward pass over centered inputs.

    Returns (output Tensor (B, chunk, out), leaves). Outputs are in centered
    target coordinates; decode_chunk restores absolute positions.
    """
    check_shapes(config, groups, embeds)
    c = config.center_array
    groups = [(g - c) / config.input_scale for g in groups]
    leaves = {k: ad.leaf(v) for k, v in params.items()}
    pooled = _point_encoder(leaves, groups, config)
    h = _trunk(leaves, pooled, embeds, config)
    out = _affine(h, leaves, "head")
    b = embeds.shape[0]
    return ad.reshape(out, (b, config.chunk_len, config.out_dim)), leaves


def center_target_rows(rows: np.ndarray, config: PolicyConfig) -> np.ndarray:
    """Shift per-frame regression rows into centered coordinates."""
    out = rows.copy()
    c = config.center_array
    if config.head == "pose":
        out[:, :3] -= c
    else:
        out[:, : config.n_keypoints * 3] -= np.tile(c, config.n_keypoints)
    return out


def encode_points(points: np.ndarray, params: dict) -> np.ndarray:
    """Symmetric set encoding of a single (M, 3) group: shared MLP then
    coordinatewise max over points."""
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != 3 or x.shape[0] < 1:
        raise ShapeMismatch(f"expected (M, 3) points, got {x.shape}")
    for i in range(1, len(POINT_MLP_WIDTHS)):
        x = np.maximum(x @ params[f"enc{i}_w"] + params[f"enc{i}_b"], 0.0)
    return x.max(axis=0)


def loss_value(params: dict, config: PolicyConfig, batch) -> float:
    groups, embeds, targets = batch
    out, _ = forward_batch(params, config, groups, embeds)
    if targets.shape != out.value.shape:
        raise ShapeMismatch(f"targets {targets.shape} vs predictions {out.value.shape}")
    return float(((out.value - targets) ** 2).mean())


def loss_and_grad(params: dict, config: PolicyConfig, batch):
    """MSE over the batch plus gradients for every named parameter."""
    groups, embeds, targets = batch
    out, leaves = forward_batch(params, config, groups, embeds)
    if targets.shape != out.value.shape:
        raise ShapeMismatch(f"targets {targets.shape} vs predictions {out.value.shape}")
    loss = ad.mse(out, targets)
    ad.backward(loss)
    grads = {k: (t.grad if t.grad is not None else np.zeros_like(t.value)) for k, t in leaves.items()}
    return float(loss.value), grads


# -- points-head decoding -----------------------------------------------------


def fit_pose_to_keypoints(template_points: np.ndarray, points: np.ndarray) -> Pose:
    """Rigid Procrustes (Kabsch) fit: pose P minimizing |P(template) - points|."""
    c0 = template_points.mean(axis=0)
    c1 = points.mean(axis=0)
    h = (template_points - c0).T @ (points - c1)
    u, _, vt = np.linalg.svd(h)
    d = np.sign(np.linalg.det(vt.T @ u.T))
    r = vt.T @ np.diag([1.0, 1.0, d]) @ u.T
    return Pose(r, c1 - r @ c0)


def decode_chunk(raw: np.ndarray, config: PolicyConfig, template=None) -> np.ndarray:
    """Convert raw head output (chunk, out_dim) into a (chunk, 10) action
    chunk in absolute coordinates. Pose heads shift positions back; points
    heads fit a rigid transform of the keypoint template to each step's
    predicted keypoints."""
    c = config.center_array
    if config.head == "pose":
        out = raw.copy()
        out[:, :3] += c
        return out
    template = template or default_template()
    base = template.base_positions()
    out = np.empty((config.chunk_len, 10))
    for i in range(config.chunk_len):
        kp = raw[i, : config.n_keypoints * 3].reshape(config.n_keypoints, 3) + c
        pose = fit_pose_to_keypoints(base, kp)
        out[i, :3] = pose.translation
        out[i, 3:9] = rotation6d_encode(pose.rotation)
        out[i, 9] = raw[i, -1]
    return out
