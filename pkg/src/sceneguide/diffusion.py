"""DDPM noise schedule, forward corruption, and the guided reverse sampler.

Timesteps are 1-based: t in [1, T], with schedule arrays indexed t-1.
States are normalized before noising: positions are divided by the room
half-extent so position and rotation entries share O(1) scale; guidance
gradients are mapped back through the same scaling.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NonFiniteState, ShapeMismatch
from .guidance import GuidanceConfig, GuidanceReport, composite_gradient
from .scene import Scene, flatten_scene, unflatten

logger = logging.getLogger(__name__)

DenoiserFn = Callable[[np.ndarray, int], np.ndarray]  # (x_t, t) -> eps_hat


@dataclass(frozen=True)
class NoiseSchedule:
    """Beta/alpha tables for a T-step diffusion."""

    T: int
    betas: np.ndarray
    kind: str = "squared_cosine"
    alphas: np.ndarray = field(init=False)
    alphabar: np.ndarray = field(init=False)

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=np.float64)
        if betas.shape != (self.T,):
            raise ShapeMismatch("betas must have shape (T,)")
        object.__setattr__(self, "betas", betas)
        object.__setattr__(self, "alphas", 1.0 - betas)
        object.__setattr__(self, "alphabar", np.cumprod(1.0 - betas))

    def abar(self, t: int) -> float:
        return float(self.alphabar[t - 1])

    def abar_prev(self, t: int) -> float:
        return 1.0 if t <= 1 else float(self.alphabar[t - 2])

    def posterior_variance(self, t: int) -> float:
        return float(self.betas[t - 1] * (1.0 - self.abar_prev(t)) / (1.0 - self.abar(t)))


def make_schedule(T: int, kind: str = "squared_cosine", s: float = 0.008) -> NoiseSchedule:
    """Squared-cosine (capped) schedule: abar_t = f(t)/f(0) with
    f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2), betas clipped to <= 0.999."""
    if T < 2:
        raise ShapeMismatch("schedule needs T >= 2")
    if kind != "squared_cosine":
        raise ShapeMismatch(f"unknown schedule kind {kind!r}")
    steps = np.arange(T + 1, dtype=np.float64)
    f = np.cos(((steps / T + s) / (1.0 + s)) * np.pi / 2.0) ** 2
    abar = f / f[0]
    betas = np.clip(1.0 - abar[1:] / abar[:-1], 0.0, 0.999)
    return NoiseSchedule(T=T, betas=betas, kind=kind)


def forward_sample(
    x0: np.ndarray, t: int, noise: np.ndarray, schedule: NoiseSchedule
) -> np.ndarray:
    """Closed-form forward corruption x_t = sqrt(abar) x0 + sqrt(1-abar) eps."""
    if not 1 <= t <= schedule.T:
        raise ShapeMismatch(f"t={t} outside [1, {schedule.T}]")
    abar = schedule.abar(t)
    return np.sqrt(abar) * x0 + np.sqrt(1.0 - abar) * noise


def reverse_step(
    x_t: np.ndarray,
    t: int,
    denoiser: DenoiserFn,
    schedule: NoiseSchedule,
    rng: np.random.Generator,
    guidance_grad: np.ndarray | None = None,
    clip_x0: float | None = None,
) -> np.ndarray:
    """One ancestral DDPM step with an optional guidance mean shift.

    The posterior mean from eps_hat is shifted by -sigma_t^2 * grad,
    the score-form injection of the guidance energy; Gaussian noise is
    added for t > 1 only.

    With ``clip_x0`` set, the implied x0 prediction is clamped to
    [-clip_x0, clip_x0] before the posterior mean is formed.  Learned
    denoisers need this: near the clipped-beta tail of the schedule the
    eps-form update amplifies prediction error by 1/sqrt(1 - beta) per
    step, and an unclamped chain can diverge.
    """
    eps_hat = denoiser(x_t, t)
    if eps_hat.shape != x_t.shape:
        raise ShapeMismatch(f"denoiser output {eps_hat.shape} vs state {x_t.shape}")
    beta = schedule.betas[t - 1]
    alpha = 1.0 - beta
    abar = schedule.abar(t)
    if clip_x0 is not None:
        x0_hat = (x_t - np.sqrt(1.0 - abar) * eps_hat) / np.sqrt(abar)
        np.clip(x0_hat, -clip_x0, clip_x0, out=x0_hat)
        abar_prev = schedule.abar_prev(t)
        mean = (
            np.sqrt(abar_prev) * beta / (1.0 - abar) * x0_hat
            + np.sqrt(alpha) * (1.0 - abar_prev) / (1.0 - abar) * x_t
        )
    else:
        mean = (x_t - beta / np.sqrt(1.0 - abar) * eps_hat) / np.sqrt(alpha)
    var = schedule.posterior_variance(t)
    if guidance_grad is not None:
        mean = mean - var * guidance_grad
    if t > 1:
        x_prev = mean + np.sqrt(var) * rng.standard_normal(x_t.shape)
    else:
        x_prev = mean
    if not np.all(np.isfinite(x_prev)):
        raise NonFiniteState(f"non-finite state at t={t}")
    return x_prev


@dataclass
class SamplerConfig:
    schedule: NoiseSchedule
    guidance: GuidanceConfig = field(default_factory=GuidanceConfig)
    seed: int = 0
    room_half_extent: float = 4.0
    use_guidance: bool = True
    clip_x0: float | None = None  # clamp for the implied x0 prediction
    guidance_eval: str = "x0_hat"  # "x0_hat" | "x_t": where energies are evaluated


@dataclass
class StepRecord:
    t: int
    state_digest: str
    g_c: float | None = None
    g_h: float | None = None
    g_r: float | None = None


def _digest(x: np.ndarray) -> str:
    return hashlib.sha256(x.tobytes()).hexdigest()[:16]


def _normalize(x: np.ndarray, half_extent: float) -> np.ndarray:
    out = x.copy()
    out[:, :3] /= half_extent
    return out


def _denormalize(x: np.ndarray, half_extent: float) -> np.ndarray:
    out = x.copy()
    out[:, :3] *= half_extent
    return out


def guidance_gradient_model_frame(
    x_model: np.ndarray, template: Scene, cfg: SamplerConfig
) -> tuple[np.ndarray, GuidanceReport]:
    """Composite guidance gradient mapped into normalized state coords."""
    scene = unflatten(_denormalize(x_model, cfg.room_half_extent), template)
    report = composite_gradient(scene, cfg.guidance)
    grad = report.gradient.copy()
    bad = ~np.all(np.isfinite(grad), axis=1)
    if np.any(bad):
        logger.warning("zeroing non-finite guidance gradient rows %s", np.nonzero(bad)[0])
        grad[bad] = 0.0
    grad[:, :3] *= cfg.room_half_extent  # chain rule through p = half_extent * p_model
    return grad, report


def sample_scene(
    template: Scene,
    denoiser: DenoiserFn,
    cfg: SamplerConfig,
) -> tuple[Scene, list[StepRecord]]:
    """Run the full guided reverse chain and pose the template scene.

    The template provides meshes, graphs, and descriptors; its poses are
    ignored.  Deterministic given cfg.seed.

    Guidance energies are evaluated at the denoiser's implied clean-state
    prediction x0_hat by default: the collision/support structure of the
    noisy x_t is uninformative for most of the chain, while x0_hat gives
    a meaningful geometry at every step.  Set guidance_eval="x_t" to
    differentiate at the noisy state instead.
    """
    schedule = cfg.schedule
    if cfg.guidance_eval not in ("x0_hat", "x_t"):
        raise ShapeMismatch(f"unknown guidance_eval {cfg.guidance_eval!r}")
    rng = np.random.default_rng(cfg.seed)
    x = rng.standard_normal((template.n, 9))
    trace: list[StepRecord] = []
    from .errors import NonFiniteGradient

    for t in range(schedule.T, 0, -1):
        eps_hat = denoiser(x, t)
        grad = None
        record = StepRecord(t=t, state_digest=_digest(x))
        if cfg.use_guidance and t < cfg.guidance.guidance_start_t:
            if cfg.guidance_eval == "x0_hat":
                abar = schedule.abar(t)
                x_eval = (x - np.sqrt(1.0 - abar) * eps_hat) / np.sqrt(abar)
                if cfg.clip_x0 is not None:
                    np.clip(x_eval, -cfg.clip_x0, cfg.clip_x0, out=x_eval)
            else:
                x_eval = x
            try:
                grad, report = guidance_gradient_model_frame(x_eval, template, cfg)
                record.g_c, record.g_h, record.g_r = report.g_c, report.g_h, report.g_r
            except NonFiniteGradient:
                logger.warning("guidance failed at t=%d; skipping shift", t)
                grad = None
        x = reverse_step(x, t, lambda *_: eps_hat, schedule, rng,
                         guidance_grad=grad, clip_x0=cfg.clip_x0)
        trace.append(record)
    final = unflatten(_denormalize(x, cfg.room_half_extent), template)
    return final, trace
