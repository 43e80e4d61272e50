"""Synthetic ground truth, the additive-noise corruption, and pixel mapping."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import RngStream, as_signal, standard_normal
from .oracle import GaussianMixturePrior


@dataclass(frozen=True, eq=False)
class Dataset:
    samples: np.ndarray  # (n, d)
    prior: GaussianMixturePrior | None = None
    seed: int | None = None

    def __len__(self) -> int:
        return self.samples.shape[0]


def add_noise(x, rho: float, rng: RngStream) -> np.ndarray:
    """``x + rho * n`` with ``n`` standard normal from ``rng``."""
    if not rho >= 0:
        raise ValueError(f"rho must be >= 0, got {rho}")
    x = as_signal(x)
    if rho == 0:
        return x.copy()
    return x + rho * standard_normal(rng, x.shape if x.shape else (1,)).reshape(x.shape)


def sample_prior(prior: GaussianMixturePrior, n: int, rng: RngStream) -> Dataset:
    if n < 1:
        raise ValueError("n must be >= 1")
    g = rng.generator()
    comp = g.choice(len(prior.weights), size=n, p=prior.weights)
    z = g.standard_normal((n, prior.dim))
    x = prior.means[comp] + np.sqrt(prior.variances[comp])[:, None] * z
    return Dataset(x, prior, rng.master_seed)


def image_to_model(p) -> np.ndarray:
    """8-bit pixels to model range: ``p / 127.5 - 1``."""
    return np.asarray(p, dtype=np.float64) / 127.5 - 1.0


def model_to_image(s) -> np.ndarray:
    """Model range back to ``uint8``, clipping and rounding halves away from zero."""
    v = np.clip(np.asarray(s, dtype=np.float64), -1.0, 1.0)
    return np.floor((v + 1.0) * 127.5 + 0.5).astype(np.uint8)


def rho_from_8bit(rho8: float) -> float:
    return rho8 / 127.5


def smooth_texture(shape: tuple[int, int], rng: RngStream, n_waves: int = 12,
                   min_wavelength: float = 32.0, amplitude: float = 0.8) -> np.ndarray:
    """Band-limited random image in model range built from a few sinusoids."""
    g = rng.generator()
    h, w = shape
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = np.zeros(shape)
    fmax = 1.0 / min_wavelength
    for _ in range(n_waves):
        f = g.uniform(0.1 * fmax, fmax)
        theta = g.uniform(0, np.pi)
        phase = g.uniform(0, 2 * np.pi)
        img += g.normal() * np.cos(2 * np.pi * f * (np.cos(theta) * xx + np.sin(theta) * yy) + phase)
    img *= amplitude / max(np.abs(img).max(), 1e-12)
    return img
