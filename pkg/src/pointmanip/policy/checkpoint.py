"""Checkpoint container: a small versioned binary file.

Layout (little endian):
    bytes 0..4    magic  b"PMCK"
    bytes 4..8    u32 container version (1)
    bytes 8..12   u32 header length H
    bytes 12..12+H  UTF-8 JSON header: {"config": {...}, "config_hash": str,
                    "tensors": [{"name", "shape", "dtype"}...], "extra": {...}}
    then each tensor's raw little-endian bytes, in header order.

Written bytes depend only on (config, tensors), so identical training runs
produce identical checkpoints. See docs/formats.md.
"""

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import MissingCheckpoint, ShapeMismatch
from .network import PolicyConfig

MAGIC = b"PMCK"
VERSION = 1


def save_checkpoint(path, config: PolicyConfig, params: dict, extra: dict = None):
    names = sorted(params)
    header = {
        "config": config.to_dict(),
        "config_hash": config.content_hash(),
        "tensors": [
            {"name": n, "shape": list(params[n].shape), "dtype": str(params[n].dtype)}
            for n in names
        ],
        "extra": extra or {},
    }
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(blob)))
        fh.write(blob)
        for n in names:
            fh.write(np.ascontiguousarray(params[n], dtype="<f8").tobytes())


def load_checkpoint(path):
    """Returns (PolicyConfig, params dict, extra dict)."""
    path = Path(path)
    if not path.exists():
        raise MissingCheckpoint(str(path))
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise ShapeMismatch(f"{path}: not a checkpoint file")
        version, hlen = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ShapeMismatch(f"{path}: unsupported checkpoint version {version}")
        header = json.loads(fh.read(hlen).decode())
        params = {}
        for spec in header["tensors"]:
            shape = tuple(spec["shape"])
            n = int(np.prod(shape)) if shape else 1
            buf = fh.read(8 * n)
            params[spec["name"]] = np.frombuffer(buf, dtype="<f8").reshape(shape).copy()
    config = PolicyConfig.from_dict(header["config"])
    if header.get("config_hash") != config.content_hash():
        raise ShapeMismatch(f"{path}: config hash mismatch")
    return config, params, header.get("extra", {})
