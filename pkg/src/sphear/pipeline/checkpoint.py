"""Single-file model checkpoint container.

Layout:

    magic        4 bytes  b"SHCK"
    version      u32 (little-endian), currently 1
    manifest_len u64
    manifest     UTF-8 JSON: {"config": {...}, "metadata": {...},
                 "tensors": [{"name", "dtype", "shape"}, ...]}
    payloads     raw little-endian row-major tensor data, concatenated in
                 manifest order

The manifest echoes the network configuration and carries training state
(epoch, learning rate, loss history, ...) as plain JSON; tensors cover the
model parameters, normalization buffers, and optimizer moments.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np
import torch

from ..enhancer.model import Enhancer, EnhancerConfig
from .ioutil import atomic_write_bytes

MAGIC = b"SHCK"
VERSION = 1


def save_checkpoint(
    path: Path | str,
    config: EnhancerConfig,
    tensors: dict[str, np.ndarray],
    metadata: dict,
):
    entries = []
    payloads = []
    for name, array in tensors.items():
        array = np.ascontiguousarray(array)
        dtype = array.dtype.newbyteorder("<")
        entries.append({"name": name, "dtype": dtype.str, "shape": list(array.shape)})
        payloads.append(array.astype(dtype, copy=False).tobytes())
    manifest = json.dumps(
        {"config": config.to_dict(), "metadata": metadata, "tensors": entries},
        sort_keys=True,
    ).encode("utf-8")
    blob = MAGIC + struct.pack("<IQ", VERSION, len(manifest)) + manifest + b"".join(payloads)
    atomic_write_bytes(path, blob)


def load_checkpoint(path: Path | str) -> tuple[EnhancerConfig, dict[str, np.ndarray], dict]:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:4] != MAGIC:
        raise ValueError(f"{path}: not a checkpoint file (bad magic {raw[:4]!r})")
    version, manifest_len = struct.unpack_from("<IQ", raw, 4)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {version}")
    offset = 16
    manifest = json.loads(raw[offset : offset + manifest_len].decode("utf-8"))
    offset += manifest_len
    tensors: dict[str, np.ndarray] = {}
    for entry in manifest["tensors"]:
        dtype = np.dtype(entry["dtype"])
        count = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
        nbytes = count * dtype.itemsize
        arr = np.frombuffer(raw, dtype=dtype, count=count, offset=offset)
        tensors[entry["name"]] = arr.reshape(entry["shape"]).copy()
        offset += nbytes
    if offset != len(raw):
        raise ValueError(f"{path}: {len(raw) - offset} trailing bytes after payloads")
    config = EnhancerConfig.from_dict(manifest["config"])
    return config, tensors, manifest["metadata"]


def state_to_tensors(model: Enhancer, optimizer: torch.optim.Optimizer | None = None):
    """Flatten model (and optionally optimizer) state into named arrays."""
    tensors = {
        f"model.{name}": value.detach().cpu().numpy()
        for name, value in model.state_dict().items()
    }
    if optimizer is not None:
        state = optimizer.state_dict()["state"]
        for pid, slots in state.items():
            for slot, value in slots.items():
                if isinstance(value, torch.Tensor):
                    tensors[f"optim.{pid}.{slot}"] = value.detach().cpu().numpy()
                else:
                    tensors[f"optim.{pid}.{slot}"] = np.asarray(value)
    return tensors


def restore_model(config: EnhancerConfig, tensors: dict[str, np.ndarray]) -> Enhancer:
    model = Enhancer(config)
    state = {}
    for name, value in tensors.items():
        if name.startswith("model."):
            state[name[len("model."):]] = torch.from_numpy(np.ascontiguousarray(value))
    model.load_state_dict(state)
    return model


def restore_optimizer(
    model: Enhancer, tensors: dict[str, np.ndarray], lr: float
) -> torch.optim.Adam:
    from ..enhancer.train import make_optimizer

    optimizer = make_optimizer(model, lr=lr)
    state: dict[int, dict] = {}
    for name, value in tensors.items():
        if not name.startswith("optim."):
            continue
        _, pid, slot = name.split(".", 2)
        state.setdefault(int(pid), {})[slot] = torch.from_numpy(np.ascontiguousarray(value))
    if state:
        sd = optimizer.state_dict()
        sd["state"] = state
        optimizer.load_state_dict(sd)
    return optimizer
