"""Analytic noise predictors used in place of a trained network.

A predictor maps a latent ``x`` at noise level ``alpha_bar`` to an estimate
of the noise it contains. The Gaussian-mixture predictor is the exact MMSE
predictor for data drawn from that mixture, i.e. a perfectly trained model.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from .numerics import ShapeError, check_same_shape


class EpsilonPredictor(Protocol):
    def predict(self, x: np.ndarray, alpha_bar: float) -> np.ndarray: ...


def _check_level(alpha_bar: float) -> None:
    if not 0.0 < alpha_bar < 1.0:
        raise ValueError(f"alpha_bar must lie in (0, 1), got {alpha_bar}")


@dataclass(frozen=True, eq=False)
class GaussianMixturePrior:
    """Mixture of isotropic Gaussians over ``d``-dimensional events.

    Arrays passed to the posterior routines are read as a stack of events
    along their flattened trailing length: a ``(n, d)`` batch, a single
    length-``d`` vector, or an image with ``d == 1`` (pixels independent)
    all work.
    """

    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        mu = np.asarray(self.means, dtype=np.float64)
        if mu.ndim == 1:
            mu = mu[:, None]
        v = np.asarray(self.variances, dtype=np.float64).reshape(-1)
        if not (len(w) == len(mu) == len(v)) or len(w) == 0:
            raise ValueError("weights, means and variances must have equal nonzero length")
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        if np.any(v <= 0):
            raise ValueError("variances must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", mu.reshape(len(w), -1))
        object.__setattr__(self, "variances", v)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def covariance(self) -> np.ndarray:
        """Exact covariance of the mixture."""
        m = self.mean()
        d = self.dim
        cov = np.zeros((d, d))
        for w, mu, v in zip(self.weights, self.means, self.variances):
            dm = mu - m
            cov += w * (v * np.eye(d) + np.outer(dm, dm))
        return cov

    def to_dict(self) -> dict:
        return {"weights": self.weights.tolist(), "means": self.means.tolist(),
                "variances": self.variances.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianMixturePrior":
        return cls(np.asarray(d["weights"], dtype=np.float64),
                   np.asarray(d["means"], dtype=np.float64),
                   np.asarray(d["variances"], dtype=np.float64))

    @classmethod
    def from_json(cls, text: str) -> "GaussianMixturePrior":
        return cls.from_dict(json.loads(text))

    def _events(self, x: np.ndarray) -> np.ndarray:
        if x.size % self.dim:
            raise ShapeError(f"signal of size {x.size} is not a stack of {self.dim}-vectors")
        return x.reshape(-1, self.dim)

    def responsibilities(self, x, alpha_bar: float) -> np.ndarray:
        """Posterior component probabilities, shape ``(n_events, K)``."""
        _check_level(alpha_bar)
        ev = self._events(np.asarray(x, dtype=np.float64))
        return self._resp(ev, alpha_bar)[0]

    def _resp(self, ev, alpha_bar):
        sa = np.sqrt(alpha_bar)
        s = alpha_bar * self.variances + (1.0 - alpha_bar)  # (K,)
        diff = ev[:, None, :] - sa * self.means[None, :, :]  # (n, K, d)
        sq = np.einsum("nkd,nkd->nk", diff, diff)
        with np.errstate(divide="ignore"):
            logw = np.log(self.weights)
        logp = logw - 0.5 * sq / s - 0.5 * self.dim * np.log(2 * np.pi * s)
        logp -= logp.max(axis=1, keepdims=True)
        r = np.exp(logp)
        r /= r.sum(axis=1, keepdims=True)
        return r, diff, s

    def posterior_mean(self, x, alpha_bar: float) -> np.ndarray:
        return gmm_posterior_mean(self, x, alpha_bar)


def gmm_posterior_mean(prior: GaussianMixturePrior, x, alpha_bar: float) -> np.ndarray:
    """E[x0 | x_k = x] when ``x_k = sqrt(abar) x0 + sqrt(1 - abar) eta``.

    Each component contributes its Wiener estimate
    ``mu_j + sqrt(abar) v_j / s_j * (x - sqrt(abar) mu_j)`` with
    ``s_j = abar v_j + 1 - abar``, weighted by responsibilities computed in
    the log domain.
    """
    _check_level(alpha_bar)
    x = np.asarray(x, dtype=np.float64)
    ev = prior._events(x)
    r, diff, s = prior._resp(ev, alpha_bar)
    gain = np.sqrt(alpha_bar) * prior.variances / s  # (K,)
    comp = prior.means[None] + gain[None, :, None] * diff  # (n, K, d)
    out = np.einsum("nk,nkd->nd", r, comp)
    return out.reshape(x.shape)


class GMMEpsilonPredictor:
    """MMSE noise predictor for a Gaussian-mixture data distribution."""

    def __init__(self, prior: GaussianMixturePrior):
        self.prior = prior

    def predict(self, x, alpha_bar: float) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        x0 = gmm_posterior_mean(self.prior, x, alpha_bar)
        return (x - np.sqrt(alpha_bar) * x0) / np.sqrt(1.0 - alpha_bar)


class ConstantX0Predictor:
    """Predictor that always explains ``x`` with the same clean signal."""

    def __init__(self, x0):
        self.x0 = np.asarray(x0, dtype=np.float64)

    def predict(self, x, alpha_bar: float) -> np.ndarray:
        _check_level(alpha_bar)
        x = np.asarray(x, dtype=np.float64)
        check_same_shape(x, self.x0)
        return (x - np.sqrt(alpha_bar) * self.x0) / np.sqrt(1.0 - alpha_bar)


class ZeroPredictor:
    def predict(self, x, alpha_bar: float) -> np.ndarray:
        return np.zeros(np.shape(x))


def gmm_epsilon_predictor(prior: GaussianMixturePrior) -> GMMEpsilonPredictor:
    return GMMEpsilonPredictor(prior)


def constant_x0_predictor(x0) -> ConstantX0Predictor:
    return ConstantX0Predictor(x0)


def zero_predictor() -> ZeroPredictor:
    return ZeroPredictor()
