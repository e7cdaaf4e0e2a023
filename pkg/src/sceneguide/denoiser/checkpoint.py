"""Deterministic JSON checkpoint container.

Tensors are stored as base64-encoded little-endian float64 bytes with
explicit shapes, alongside the TrainConfig that built the model, so a
load can validate every shape.  JSON with sorted keys keeps the file
byte-reproducible.
"""

from __future__ import annotations

import base64
import dataclasses
import json
from pathlib import Path

import numpy as np
import torch

from ..errors import CheckpointError
from .model import EpsDenoiser, TrainConfig

FORMAT_VERSION = 1


def checkpoint_payload(model: EpsDenoiser, cfg: TrainConfig) -> str:
    tensors = {}
    for name, tensor in model.state_dict().items():
        arr = tensor.detach().numpy().astype("<f8")
        tensors[name] = {
            "shape": list(arr.shape),
            "dtype": "float64",
            "data": base64.b64encode(arr.tobytes()).decode("ascii"),
        }
    payload = {
        "version": FORMAT_VERSION,
        "config": dataclasses.asdict(cfg),
        "tensors": tensors,
    }
    return json.dumps(payload, sort_keys=True)


def save_checkpoint(model: EpsDenoiser, cfg: TrainConfig, path: str | Path) -> None:
    Path(path).write_text(checkpoint_payload(model, cfg))


def load_checkpoint(path: str | Path) -> tuple[EpsDenoiser, TrainConfig]:
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint: {exc}") from exc
    if payload.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {payload.get('version')!r}")
    try:
        cfg = TrainConfig(**payload["config"])
    except (TypeError, KeyError, ValueError) as exc:
        raise CheckpointError(f"bad checkpoint config: {exc}") from exc
    model = EpsDenoiser(cfg)
    state = model.state_dict()
    loaded = {}
    for name, expected in state.items():
        entry = payload["tensors"].get(name)
        if entry is None:
            raise CheckpointError(f"missing tensor {name!r}")
        shape = tuple(entry["shape"])
        if shape != tuple(expected.shape):
            raise CheckpointError(
                f"shape mismatch for {name!r}: file {shape}, model {tuple(expected.shape)}"
            )
        raw = base64.b64decode(entry["data"])
        arr = np.frombuffer(raw, dtype="<f8").reshape(shape)
        loaded[name] = torch.as_tensor(arr.copy())
    extra = set(payload["tensors"]) - set(state)
    if extra:
        raise CheckpointError(f"unexpected tensors {sorted(extra)}")
    model.load_state_dict(loaded)
    return model, cfg
