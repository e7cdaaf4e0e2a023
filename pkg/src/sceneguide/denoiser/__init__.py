"""Noise-prediction network, geometry features, training, checkpoints."""

from __future__ import annotations

import numpy as np
import torch

from ..diffusion import DenoiserFn, NoiseSchedule
from ..scene import Scene
from .analytic import analytic_score_denoiser
from .checkpoint import load_checkpoint, save_checkpoint
from .geometry import geometry_features
from .model import EpsDenoiser, TrainConfig, predict_eps, sinusoidal_encoding
from .train import noisy_geometry, train

__all__ = [
    "EpsDenoiser",
    "TrainConfig",
    "predict_eps",
    "sinusoidal_encoding",
    "geometry_features",
    "noisy_geometry",
    "train",
    "analytic_score_denoiser",
    "save_checkpoint",
    "load_checkpoint",
    "make_scene_denoiser",
]


def make_scene_denoiser(
    model: EpsDenoiser,
    template: Scene,
    schedule: NoiseSchedule,
    geo_seed: int = 0,
) -> DenoiserFn:
    """Wrap a trained model as a sampler denoiser handle.

    Geometry features are recomputed from the current noisy poses every
    ``cfg.geo_refresh_every`` reverse steps (set it to 1 for the
    every-step cadence) and cached in between.
    """
    cfg = model.cfg
    if schedule.T != cfg.T:
        raise ValueError(f"schedule T={schedule.T} differs from trained T={cfg.T}")
    desc = torch.as_tensor(np.stack([o.shape_desc for o in template.objects]))
    ids = torch.as_tensor(np.arange(template.n))
    cache: dict[str, np.ndarray] = {}

    def denoiser(x_t: np.ndarray, t: int) -> np.ndarray:
        steps_done = schedule.T - t
        if "geo" not in cache or steps_done % cfg.geo_refresh_every == 0:
            cache["geo"] = noisy_geometry(
                template, x_t, cfg.room_half_extent, cfg.m_train, seed=geo_seed + t
            )
        with torch.no_grad():
            out = model(
                torch.as_tensor(np.asarray(x_t, dtype=np.float64)),
                t,
                ids,
                desc,
                template.graphs,
                torch.as_tensor(cache["geo"]),
            )
        return out.numpy()

    return denoiser
