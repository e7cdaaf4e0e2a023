"""Closed-form noise predictor for an isotropic Gaussian target.

For data x0 ~ N(mu, var * I), the marginal at step t is
N(sqrt(abar_t) mu, (abar_t var + 1 - abar_t) I), whose score gives the
exact noise prediction

    eps_hat(x_t, t) = sqrt(1 - abar_t) * (x_t - sqrt(abar_t) mu)
                      / (abar_t var + 1 - abar_t).

Used as a training-free oracle for sampler tests.
"""

from __future__ import annotations

import numpy as np

from ..diffusion import DenoiserFn, NoiseSchedule


def analytic_score_denoiser(
    mu: np.ndarray | float, var: float, schedule: NoiseSchedule
) -> DenoiserFn:
    mu = np.asarray(mu, dtype=np.float64)

    def denoiser(x_t: np.ndarray, t: int) -> np.ndarray:
        abar = schedule.abar(t)
        return np.sqrt(1.0 - abar) * (x_t - np.sqrt(abar) * mu) / (abar * var + 1.0 - abar)

    return denoiser
