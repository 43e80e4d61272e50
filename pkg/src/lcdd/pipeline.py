"""One-step / multi-step denoising and their linear combination."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import RngStream, as_signal, check_same_shape
from .oracle import EpsilonPredictor
from .sampler import Variant, run_inference
from .schedule import NoiseSchedule, equidistant_tau, insertion_point, subsample


@dataclass(frozen=True)
class LcddConfig:
    lam: float = 0.5
    multi_steps: int = 1000
    variant: Variant = Variant.DDIM
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam}")
        if self.multi_steps < 1:
            raise ValueError("multi_steps must be >= 1")
        object.__setattr__(self, "variant", Variant(self.variant))


@dataclass(frozen=True, eq=False)
class DenoiseResult:
    i_d: np.ndarray
    i_p: np.ndarray
    lc: np.ndarray
    k_hat: int
    n_steps: int
    config: LcddConfig

    def combine(self, lam: float) -> np.ndarray:
        """Re-weight the two stored outputs without rerunning inference."""
        return linear_combine(self.i_d, self.i_p, lam)


def linear_combine(i_d, i_p, lam: float) -> np.ndarray:
    """``lam * i_d + (1 - lam) * i_p``; the endpoints return the inputs unchanged."""
    if not 0.0 <= lam <= 1.0:
        raise ValueError(f"lambda must lie in [0, 1], got {lam}")
    i_d = np.asarray(i_d, dtype=np.float64)
    i_p = np.asarray(i_p, dtype=np.float64)
    check_same_shape(i_d, i_p)
    if lam == 1.0:
        return i_d.copy()
    if lam == 0.0:
        return i_p.copy()
    return lam * i_d + (1.0 - lam) * i_p


def _streams(seed: int, role: int, y: np.ndarray, first_index: int, batched: bool):
    # I_D and I_P draw from interleaved stream indices so they never share noise
    if not batched:
        return RngStream(seed, 2 * first_index + role)
    return [RngStream(seed, 2 * (first_index + i) + role) for i in range(y.shape[0])]


def lcdd_denoise(y, rho: float, schedule: NoiseSchedule, predictor: EpsilonPredictor,
                 cfg: LcddConfig, *, batched: bool = False, first_index: int = 0) -> DenoiseResult:
    """Denoise ``y`` with a one-step and a multi-step run and blend them.

    With ``batched=True`` the leading axis of ``y`` indexes samples and
    sample ``i`` uses its own noise streams derived from
    ``first_index + i``, so results do not depend on batch composition.
    """
    if not rho > 0:
        raise ValueError(f"rho must be > 0, got {rho}")
    y = as_signal(y)
    k_hat = insertion_point(schedule, rho).k_hat
    n_steps = min(cfg.multi_steps, k_hat)
    one = subsample(schedule, (k_hat,))
    multi = subsample(schedule, equidistant_tau(k_hat, n_steps))
    i_d = run_inference(y, rho, one, schedule, cfg.variant, predictor,
                        _streams(cfg.seed, 0, y, first_index, batched))
    i_p = run_inference(y, rho, multi, schedule, cfg.variant, predictor,
                        _streams(cfg.seed, 1, y, first_index, batched))
    return DenoiseResult(i_d, i_p, linear_combine(i_d, i_p, cfg.lam), k_hat, n_steps, cfg)
