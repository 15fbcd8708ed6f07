from .network import (
    PolicyConfig,
    decode_chunk,
    encode_points,
    fit_pose_to_keypoints,
    forward_batch,
    init_params,
    loss_and_grad,
    loss_value,
)
from .training import Adam, TrainConfig, flatten_dataset, params_from_checkpoint, train
from .checkpoint import load_checkpoint, save_checkpoint
from .ensemble import ActionChunk, temporal_ensemble

__all__ = [
    "PolicyConfig",
    "decode_chunk",
    "encode_points",
    "fit_pose_to_keypoints",
    "forward_batch",
    "init_params",
    "loss_and_grad",
    "loss_value",
    "Adam",
    "TrainConfig",
    "flatten_dataset",
    "params_from_checkpoint",
    "train",
    "load_checkpoint",
    "save_checkpoint",
    "ActionChunk",
    "temporal_ensemble",
]
