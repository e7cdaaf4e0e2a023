"""MSE training loop for the noise predictor."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
import torch

from ..diffusion import NoiseSchedule, forward_sample, make_schedule
from ..errors import DivergedTraining
from ..scene import Scene, flatten_scene, unflatten
from .geometry import geometry_features
from .model import EpsDenoiser, TrainConfig

logger = logging.getLogger(__name__)


@dataclass
class _PreparedScene:
    scene: Scene
    x0: np.ndarray  # normalized state
    desc: torch.Tensor
    ids: torch.Tensor


def _prepare(scene: Scene, half_extent: float) -> _PreparedScene:
    x0 = flatten_scene(scene)
    x0[:, :3] /= half_extent
    desc = torch.as_tensor(np.stack([o.shape_desc for o in scene.objects]))
    ids = torch.as_tensor(np.arange(scene.n))
    return _PreparedScene(scene, x0, desc, ids)


def noisy_geometry(
    scene: Scene, x_norm: np.ndarray, half_extent: float, m: int, seed: int
) -> np.ndarray:
    """Geometry features at a (possibly noisy) normalized state."""
    x = x_norm.copy()
    x[:, :3] *= half_extent
    noisy = unflatten(x, scene)
    return geometry_features(noisy.posed_meshes(), m, seed)


def train(
    scenes: list[Scene],
    cfg: TrainConfig,
    schedule: NoiseSchedule | None = None,
    log_every: int = 200,
    model: EpsDenoiser | None = None,
) -> tuple[EpsDenoiser, list[float]]:
    """Train the denoiser; deterministic given cfg.seed.

    Each step samples a batch of scenes, a uniform timestep and Gaussian
    noise per scene, corrupts the normalized state, recomputes geometry
    features at the noisy poses, and minimizes ||eps_hat - eps||^2 with
    AdamW.
    """
    if not scenes:
        raise ValueError("empty training set")
    if schedule is None:
        schedule = make_schedule(cfg.T)
    if schedule.T != cfg.T:
        raise ValueError(f"schedule T={schedule.T} but config T={cfg.T}")
    torch.manual_seed(cfg.seed)
    if model is None:
        model = EpsDenoiser(cfg)
    elif model.cfg != cfg:
        raise ValueError("initial model was built with a different config")
    opt = torch.optim.AdamW(
        model.parameters(), lr=cfg.learning_rate, weight_decay=cfg.weight_decay
    )
    rng = np.random.default_rng(cfg.seed)
    prepared = [_prepare(s, cfg.room_half_extent) for s in scenes]

    losses: list[float] = []
    for step in range(cfg.steps):
        idxs = rng.integers(0, len(prepared), size=cfg.batch_size)
        opt.zero_grad()
        batch_loss = torch.zeros((), dtype=torch.float64)
        for k, idx in enumerate(idxs):
            ps = prepared[idx]
            t = int(rng.integers(1, schedule.T + 1))
            eps = rng.standard_normal(ps.x0.shape)
            x_t = forward_sample(ps.x0, t, eps, schedule)
            geo = noisy_geometry(
                ps.scene, x_t, cfg.room_half_extent, cfg.m_train,
                seed=int(cfg.seed + 1_000_003 * step + k),
            )
            pred = model(
                torch.as_tensor(x_t),
                t,
                ps.ids,
                ps.desc,
                ps.scene.graphs,
                torch.as_tensor(geo),
            )
            batch_loss = batch_loss + torch.mean((pred - torch.as_tensor(eps)) ** 2)
        batch_loss = batch_loss / len(idxs)
        if not torch.isfinite(batch_loss):
            raise DivergedTraining(f"non-finite loss at step {step}")
        batch_loss.backward()
        opt.step()
        losses.append(float(batch_loss.detach()))
        if log_every and step % log_every == 0:
            logger.info("step %d loss %.4f", step, losses[-1])
    return model, losses
