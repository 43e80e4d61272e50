"""Noise schedules, insertion points and subsampled inference plans."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

SIGMA_RULES = ("posterior", "beta")


@dataclass(frozen=True, eq=False)
class NoiseSchedule:
    """Discrete forward-process coefficients for steps ``k = 1..N``.

    ``beta``, ``alpha`` and ``sigma`` are indexed by ``k - 1``.
    ``alpha_bar`` has ``N + 1`` entries and is indexed by ``k`` directly,
    with ``alpha_bar[0] == 1``.
    """

    beta: np.ndarray
    alpha: np.ndarray
    alpha_bar: np.ndarray
    sigma: np.ndarray
    beta1: float = 1e-4
    betaN: float = 0.02
    sigma_rule: str = "posterior"

    @property
    def N(self) -> int:
        return len(self.beta)

    def to_dict(self) -> dict:
        return {"N": self.N, "beta1": self.beta1, "betaN": self.betaN,
                "sigma_rule": self.sigma_rule}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "NoiseSchedule":
        return linear_beta_schedule(int(d.get("N", 1000)), float(d.get("beta1", 1e-4)),
                                    float(d.get("betaN", 0.02)),
                                    sigma_rule=d.get("sigma_rule", "posterior"))

    @classmethod
    def from_json(cls, text: str) -> "NoiseSchedule":
        return cls.from_dict(json.loads(text))

    def violations(self) -> list[str]:
        """Invariant violations, empty for a healthy schedule."""
        out = []
        if not (np.all(self.beta > 0) and np.all(self.beta < 1)):
            out.append("beta outside (0, 1)")
        if not np.allclose(self.alpha, 1.0 - self.beta, rtol=0, atol=1e-15):
            out.append("alpha != 1 - beta")
        if self.alpha_bar.shape != (self.N + 1,) or self.alpha_bar[0] != 1.0:
            out.append("alpha_bar[0] != 1")
        else:
            ref = np.cumprod(np.concatenate(([1.0], self.alpha)))
            if np.max(np.abs(self.alpha_bar - ref) / ref) > 1e-14:
                out.append("alpha_bar is not the cumulative product of alpha")
            if np.any(np.diff(self.alpha_bar) >= 0):
                out.append("alpha_bar not strictly decreasing")
        if np.any(self.sigma < 0):
            out.append("negative sigma")
        return out


def posterior_sigma(alpha_bar_cur: float, alpha_bar_prev: float) -> float:
    """Std of q(x_prev | x_cur, x_0) for a (possibly coarse) step."""
    beta_step = 1.0 - alpha_bar_cur / alpha_bar_prev
    return float(np.sqrt((1.0 - alpha_bar_prev) / (1.0 - alpha_bar_cur) * beta_step))


def linear_beta_schedule(N: int = 1000, beta1: float = 1e-4, betaN: float = 0.02,
                         sigma_rule: str = "posterior") -> NoiseSchedule:
    """Linearly spaced betas from ``beta1`` to ``betaN`` over ``N`` steps.

    With ``sigma_rule="posterior"`` the DDPM sampling std is the posterior
    std ``sqrt((1 - abar_{k-1}) / (1 - abar_k) * beta_k)``, which is zero at
    ``k = 1``; ``"beta"`` uses ``sqrt(beta_k)``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    if not (0 < beta1 <= betaN < 1):
        raise ValueError(f"need 0 < beta1 <= betaN < 1, got {beta1}, {betaN}")
    if sigma_rule not in SIGMA_RULES:
        raise ValueError(f"unknown sigma_rule {sigma_rule!r}")
    if N == 1:
        beta = np.array([beta1], dtype=np.float64)
    else:
        k = np.arange(N, dtype=np.float64)
        beta = beta1 + k / (N - 1) * (betaN - beta1)
    alpha = 1.0 - beta
    alpha_bar = np.cumprod(np.concatenate(([1.0], alpha)))
    if sigma_rule == "posterior":
        sigma = np.sqrt((1.0 - alpha_bar[:-1]) / (1.0 - alpha_bar[1:]) * beta)
    else:
        sigma = np.sqrt(beta)
    for a in (beta, alpha, alpha_bar, sigma):
        a.setflags(write=False)
    return NoiseSchedule(beta, alpha, alpha_bar, sigma, float(beta1), float(betaN), sigma_rule)


@dataclass(frozen=True)
class InsertionPoint:
    alpha_hat: float
    k_hat: int
    mismatch: float
    scale: float
    # 1 - alpha_hat, formed as rho^2 / (1 + rho^2) to avoid cancellation at small rho
    complement: float = 0.0
    # set when alpha_hat lies below every grid level and k_hat was clamped to N
    clamped: bool = False

    @property
    def noise_scale(self) -> float:
        """``sqrt(1 - alpha_hat)``, equal to ``scale * rho``."""
        return float(np.sqrt(self.complement))


def insertion_point(schedule: NoiseSchedule, rho: float) -> InsertionPoint:
    """Find the step whose noise level best matches a noisy signal.

    A signal ``y = x0 + rho*n`` scaled by ``sqrt(alpha_hat)`` with
    ``alpha_hat = 1/(1 + rho**2)`` has the forward-marginal form at level
    ``alpha_hat``; ``k_hat`` is the grid step with the closest
    ``alpha_bar``. Ties go to the smaller step.
    """
    if not rho >= 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    alpha_hat = 1.0 / (1.0 + rho * rho)
    diffs = np.abs(schedule.alpha_bar[1:] - alpha_hat)
    k_hat = int(np.argmin(diffs)) + 1
    clamped = bool(alpha_hat < schedule.alpha_bar[-1])
    return InsertionPoint(alpha_hat, k_hat, float(diffs[k_hat - 1]),
                          float(np.sqrt(alpha_hat)), rho * rho / (1.0 + rho * rho), clamped)


@dataclass(frozen=True, eq=False)
class InferencePlan:
    """A shortened reverse chain visiting the steps in ``tau``.

    ``alpha_new[i]`` is the per-step retention factor of the coarse chain and
    ``alpha_bar_new`` its running product, which reproduces the parent
    schedule's ``alpha_bar`` at every visited step.
    """

    tau: tuple[int, ...]
    alpha_new: np.ndarray = field(repr=False)
    alpha_bar_new: np.ndarray = field(repr=False)

    @property
    def k_hat(self) -> int:
        return self.tau[-1]

    def __len__(self) -> int:
        return len(self.tau)


def subsample(schedule: NoiseSchedule, tau) -> InferencePlan:
    tau = tuple(int(t) for t in tau)
    if len(tau) == 0:
        raise ValueError("tau must be nonempty")
    if tau[0] < 1 or tau[-1] > schedule.N:
        raise ValueError(f"tau must lie within [1, {schedule.N}]")
    if any(b <= a for a, b in zip(tau, tau[1:])):
        raise ValueError("tau must be strictly increasing")
    ab = schedule.alpha_bar[list(tau)]
    alpha_new = np.empty_like(ab)
    alpha_new[0] = ab[0]
    alpha_new[1:] = ab[1:] / ab[:-1]
    alpha_bar_new = np.cumprod(alpha_new)
    alpha_new.setflags(write=False)
    alpha_bar_new.setflags(write=False)
    return InferencePlan(tau, alpha_new, alpha_bar_new)


def equidistant_tau(k_hat: int, n_steps: int) -> tuple[int, ...]:
    """``n_steps`` evenly spread steps ending at ``k_hat``.

    ``tau_i = round(i * k_hat / n_steps)`` with halves rounded up, in exact
    integer arithmetic. Since the spacing is at least one the result is
    strictly increasing.
    """
    if k_hat < 1 or n_steps < 1:
        raise ValueError("k_hat and n_steps must be >= 1")
    if n_steps > k_hat:
        raise ValueError(f"n_steps={n_steps} exceeds k_hat={k_hat}")
    return tuple((2 * i * k_hat + n_steps) // (2 * n_steps) for i in range(1, n_steps + 1))
