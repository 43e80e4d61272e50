"""Distortion and perception measures."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import check_same_shape

PSNR_CAP_DB = 100.0


def mse(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_shape(a, b)
    return float(np.mean((a - b) ** 2))


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB, capped at 100 dB for near-identical inputs."""
    err = mse(a, b)
    if err < peak * peak * 1e-10:
        return PSNR_CAP_DB
    return float(10.0 * np.log10(peak * peak / err))


def batch_psnr(a, b, peak: float = 1.0) -> np.ndarray:
    """Per-sample PSNR along the leading axis, same cap rule as :func:`psnr`."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    check_same_shape(a, b)
    err = np.mean((a - b).reshape(a.shape[0], -1) ** 2, axis=1)
    out = np.full(err.shape, PSNR_CAP_DB)
    ok = err >= peak * peak * 1e-10
    out[ok] = 10.0 * np.log10(peak * peak / err[ok])
    return out


def to_display(x) -> np.ndarray:
    """Map model range [-1, 1] to display range [0, 1], clipping."""
    return np.clip((np.asarray(x, dtype=np.float64) + 1.0) / 2.0, 0.0, 1.0)


@dataclass(frozen=True, eq=False)
class GaussianFit:
    mean: np.ndarray
    cov: np.ndarray
    n: int = 0

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=np.float64))
        d = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (d, d):
            raise ValueError(f"mean {mean.shape} and covariance {cov.shape} disagree")
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-12:
            raise ValueError("covariance is not symmetric")
        if d and np.linalg.eigvalsh(cov).min() < -1e-10:
            raise ValueError("covariance is not positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def fit_gaussian(samples) -> GaussianFit:
    """Sample mean and unbiased covariance of flattened samples."""
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim == 0 or x.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    x = x.reshape(x.shape[0], -1)
    cov = np.atleast_2d(np.cov(x, rowvar=False, ddof=1))
    cov = 0.5 * (cov + cov.T)
    return GaussianFit(x.mean(axis=0), cov, x.shape[0])


def _psd_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(m)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def gaussian_frechet(fit_a: GaussianFit, fit_b: GaussianFit) -> float:
    """Squared 2-Wasserstein distance between two Gaussians.

    ``|mu_a - mu_b|^2 + tr(S_a + S_b - 2 (S_a^1/2 S_b S_a^1/2)^1/2)``, with
    both square roots taken through symmetric eigendecompositions so the
    trace term stays real.
    """
    if fit_a.dim != fit_b.dim:
        raise ValueError(f"dimension mismatch: {fit_a.dim} vs {fit_b.dim}")
    dm = fit_a.mean - fit_b.mean
    ra = _psd_sqrt(fit_a.cov)
    inner = ra @ fit_b.cov @ ra
    inner = 0.5 * (inner + inner.T)
    cross = np.sqrt(np.clip(np.linalg.eigvalsh(inner), 0.0, None)).sum()
    d = float(dm @ dm + np.trace(fit_a.cov) + np.trace(fit_b.cov) - 2.0 * cross)
    return max(d, 0.0)


def empirical_w1_1d(a, b) -> float:
    """1-Wasserstein distance between two equal-size 1-D empirical measures."""
    a = np.sort(np.asarray(a, dtype=np.float64).reshape(-1))
    b = np.sort(np.asarray(b, dtype=np.float64).reshape(-1))
    if len(a) != len(b) or len(a) == 0:
        raise ValueError("sequences must have equal nonzero length")
    return float(np.mean(np.abs(a - b)))
