"""Reverse-process updates and the insert-and-denoise loop."""
from __future__ import annotations

import enum
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from .numerics import InvalidStateError, RngStream, as_signal, check_same_shape
from .oracle import EpsilonPredictor
from .schedule import InferencePlan, NoiseSchedule, insertion_point, posterior_sigma


class Variant(str, enum.Enum):
    DDPM = "ddpm"
    DDIM = "ddim"


@dataclass(frozen=True)
class StepCoefficients:
    """Coefficients of one reverse step from ``alpha_bar_cur`` to ``alpha_bar_prev``."""

    alpha_step: float
    alpha_bar_cur: float
    alpha_bar_prev: float
    sigma: float = 0.0

    def __post_init__(self):
        if not (0.0 < self.alpha_bar_cur < self.alpha_bar_prev <= 1.0):
            raise InvalidStateError(
                f"need 0 < alpha_bar_cur < alpha_bar_prev <= 1, got "
                f"{self.alpha_bar_cur}, {self.alpha_bar_prev}")
        if abs(self.alpha_step - self.alpha_bar_cur / self.alpha_bar_prev) > 1e-12:
            raise InvalidStateError("alpha_step != alpha_bar_cur / alpha_bar_prev")
        if self.sigma < 0:
            raise InvalidStateError("sigma must be >= 0")

    @classmethod
    def between(cls, alpha_bar_cur: float, alpha_bar_prev: float,
                sigma: float | None = None) -> "StepCoefficients":
        """Coefficients for a step between two levels; ``sigma`` defaults to the posterior std."""
        alpha_step = alpha_bar_cur / alpha_bar_prev
        if sigma is None and 0 < alpha_bar_cur < alpha_bar_prev <= 1:
            sigma = posterior_sigma(alpha_bar_cur, alpha_bar_prev)
        return cls(alpha_step, alpha_bar_cur, alpha_bar_prev, sigma or 0.0)


def ddpm_step(x, c: StepCoefficients, eps_hat, z=None) -> np.ndarray:
    """Ancestral step: posterior mean plus ``sigma * z`` (``z=None`` on the last step)."""
    x = np.asarray(x, dtype=np.float64)
    check_same_shape(x, eps_hat)
    one_minus = 1.0 - c.alpha_bar_cur
    if one_minus <= 0:
        raise InvalidStateError("1 - alpha_bar_cur must be positive")
    mu = (x - ((1.0 - c.alpha_step) / np.sqrt(one_minus)) * eps_hat) / np.sqrt(c.alpha_step)
    if z is None:
        return mu
    check_same_shape(x, z)
    return mu + c.sigma * z


def ddim_step(x, c: StepCoefficients, eps_hat) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    check_same_shape(x, eps_hat)
    mu_x = np.sqrt(c.alpha_bar_prev / c.alpha_bar_cur)
    mu_eps = np.sqrt(1.0 - c.alpha_bar_prev) - mu_x * np.sqrt(1.0 - c.alpha_bar_cur)
    return mu_x * x + mu_eps * eps_hat


def predict_x0(x, alpha_bar: float, eps_hat) -> np.ndarray:
    """Clean-signal estimate implied by a noise prediction."""
    if not 0.0 < alpha_bar < 1.0:
        raise ValueError(f"alpha_bar must lie in (0, 1), got {alpha_bar}")
    x = np.asarray(x, dtype=np.float64)
    check_same_shape(x, eps_hat)
    return (x - np.sqrt(1.0 - alpha_bar) * eps_hat) / np.sqrt(alpha_bar)


def _generators(rng, n_rows: int):
    if rng is None:
        return None
    if isinstance(rng, RngStream):
        return rng.generator()
    gens = [r.generator() for r in rng]
    if len(gens) != n_rows:
        raise ValueError(f"got {len(gens)} rng streams for {n_rows} rows")
    return gens


def _draw(gens, shape):
    if isinstance(gens, np.random.Generator):
        return gens.standard_normal(shape)
    return np.stack([g.standard_normal(shape[1:]) for g in gens])


def reverse_chain(x, plan: InferencePlan, variant: Variant | str,
                  predictor: EpsilonPredictor,
                  rng: RngStream | Sequence[RngStream] | None = None,
                  on_step: Callable[[float, np.ndarray], None] | None = None) -> np.ndarray:
    """Run the reverse chain of ``plan`` from level ``tau[-1]`` down to level 0.

    ``rng`` is either a single stream for the whole array or one stream per
    leading row. It is only consulted by DDPM plans with more than one step.
    ``on_step(alpha_bar, x)`` is called after every update.
    """
    variant = Variant(variant)
    x = as_signal(x)
    levels = plan.alpha_bar_new
    gens = None
    if variant is Variant.DDPM and len(plan) > 1:
        if rng is None:
            raise ValueError("DDPM inference with more than one step needs an rng")
        gens = _generators(rng, x.shape[0] if x.ndim else 1)
    for i in range(len(plan) - 1, -1, -1):
        cur = float(levels[i])
        prev = float(levels[i - 1]) if i > 0 else 1.0
        c = StepCoefficients.between(cur, prev)
        eps = predictor.predict(x, cur)
        if variant is Variant.DDPM:
            z = _draw(gens, x.shape) if i > 0 else None
            x = ddpm_step(x, c, eps, z)
        else:
            x = ddim_step(x, c, eps)
        if on_step is not None:
            on_step(prev, x)
    return x


def run_inference(y, rho: float, plan: InferencePlan, schedule: NoiseSchedule,
                  variant: Variant | str, predictor: EpsilonPredictor,
                  rng: RngStream | Sequence[RngStream] | None = None,
                  on_step=None) -> np.ndarray:
    """Denoise ``y = x0 + rho*n`` by inserting ``sqrt(alpha_hat)*y`` at step ``k_hat``.

    The plan must end at the insertion step for ``rho`` on ``schedule``.
    """
    ip = insertion_point(schedule, rho)
    if plan.k_hat != ip.k_hat:
        raise ValueError(f"plan ends at step {plan.k_hat}, but rho={rho} inserts at {ip.k_hat}")
    y = as_signal(y)
    return reverse_chain(ip.scale * y, plan, variant, predictor, rng, on_step)


def diffuse(x0, alpha_bar: float, noise) -> np.ndarray:
    """Direct forward-marginal draw ``sqrt(abar) x0 + sqrt(1 - abar) noise``."""
    return np.sqrt(alpha_bar) * np.asarray(x0, dtype=np.float64) + np.sqrt(1.0 - alpha_bar) * noise


def diffuse_stepwise(x0, schedule: NoiseSchedule, k: int, rng: RngStream) -> np.ndarray:
    """Reach step ``k`` by ``k`` single-step forward transitions."""
    x = np.asarray(x0, dtype=np.float64)
    g = rng.generator()
    for a in schedule.alpha[:k]:
        x = np.sqrt(a) * x + np.sqrt(1.0 - a) * g.standard_normal(x.shape)
    return x
