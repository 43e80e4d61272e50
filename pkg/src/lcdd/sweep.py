"""Distortion/perception sweeps over lambda, schedule length, noise level and variant."""
from __future__ import annotations

import csv
import io
from dataclasses import astuple, dataclass

import numpy as np

from .data import add_noise, sample_prior
from .metrics import GaussianFit, batch_psnr, empirical_w1_1d, fit_gaussian, gaussian_frechet, to_display
from .numerics import RngStream
from .oracle import GaussianMixturePrior, gmm_epsilon_predictor
from .pipeline import LcddConfig, lcdd_denoise
from .sampler import Variant
from .schedule import NoiseSchedule

CSV_HEADER = "variant,rho,k_hat,schedule_len,lambda,mse,psnr_db,frechet,w1_1d,seed"
DEFAULT_LAMBDAS = tuple(k / 20 for k in range(21))
# data streams live far above the per-sample sampler streams (indices < 2n)
_DATA_STREAM = 1 << 40

DEFAULT_PRIOR = {
    "weights": [0.5, 0.5],
    "means": [[-0.5, -0.3], [0.5, 0.4]],
    "variances": [0.04, 0.04],
}

DEFAULT_CONFIG = {
    "prior": DEFAULT_PRIOR,
    "n_samples": 2000,
    "rho_list": [75],
    "rho_units": "8bit",
    "lambda_grid": list(DEFAULT_LAMBDAS),
    "schedule_lens": [1, 6, 168],
    "variants": ["ddim", "ddpm"],
    "seed": 0,
    "schedule": {"N": 1000, "beta1": 1e-4, "betaN": 0.02, "sigma_rule": "posterior"},
}


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"config key {key!r}: {message}")
        self.key = key


@dataclass(frozen=True)
class SweepRecord:
    variant: str
    rho: float
    k_hat: int
    schedule_len: int
    lam: float
    mse: float
    psnr_db: float
    frechet: float
    w1_1d: float
    seed: int


@dataclass(frozen=True)
class SweepConfig:
    prior: GaussianMixturePrior
    n_samples: int
    rho_list: tuple[float, ...]
    rho_units: str
    lambda_grid: tuple[float, ...]
    schedule_lens: tuple[int, ...]
    variants: tuple[Variant, ...]
    seed: int
    schedule: NoiseSchedule

    def rho_model(self, rho: float) -> float:
        return rho / 127.5 if self.rho_units == "8bit" else rho


def _num_list(d, key, kind=float, lo=None, hi=None):
    val = d[key]
    if not isinstance(val, list) or not val:
        raise ConfigError(key, "expected a nonempty list")
    out = []
    for v in val:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(key, f"non-numeric entry {v!r}")
        if kind is int and int(v) != v:
            raise ConfigError(key, f"non-integer entry {v!r}")
        v = kind(v)
        if (lo is not None and v < lo) or (hi is not None and v > hi):
            raise ConfigError(key, f"entry {v!r} out of range")
        out.append(v)
    return tuple(out)


def parse_config(raw: dict) -> SweepConfig:
    """Validate a sweep config, filling defaults; errors name the offending key."""
    if not isinstance(raw, dict):
        raise ConfigError("<root>", "expected a JSON object")
    unknown = set(raw) - set(DEFAULT_CONFIG)
    if unknown:
        raise ConfigError(sorted(unknown)[0], "unknown key")
    d = {**DEFAULT_CONFIG, **raw}
    try:
        prior = GaussianMixturePrior.from_dict(d["prior"])
    except (KeyError, TypeError, ValueError) as e:
        raise ConfigError("prior", str(e)) from None
    n = d["n_samples"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ConfigError("n_samples", "expected an integer >= 2")
    if d["rho_units"] not in ("8bit", "model"):
        raise ConfigError("rho_units", "expected '8bit' or 'model'")
    rhos = _num_list(d, "rho_list")
    if any(r <= 0 for r in rhos):
        raise ConfigError("rho_list", "noise levels must be positive")
    lams = _num_list(d, "lambda_grid", lo=0.0, hi=1.0)
    lens = _num_list(d, "schedule_lens", kind=int, lo=1)
    try:
        variants = tuple(Variant(str(v).lower()) for v in d["variants"])
    except (ValueError, TypeError):
        raise ConfigError("variants", "expected a list of 'ddim'/'ddpm'") from None
    if not variants:
        raise ConfigError("variants", "expected a nonempty list")
    seed = d["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError("seed", "expected an integer")
    try:
        schedule = NoiseSchedule.from_dict(d["schedule"])
    except (TypeError, ValueError, AttributeError) as e:
        raise ConfigError("schedule", str(e)) from None
    return SweepConfig(prior, n, rhos, d["rho_units"], lams, lens, variants, seed, schedule)


def run_sweep(cfg: SweepConfig) -> list[SweepRecord]:
    """Evaluate every (variant, rho, schedule length, lambda) cell.

    Clean samples and noise are shared across variants and schedule
    lengths, so rows differ only through the inference itself.
    """
    data = sample_prior(cfg.prior, cfg.n_samples, RngStream(cfg.seed, _DATA_STREAM))
    x0 = data.samples
    ref = GaussianFit(cfg.prior.mean(), cfg.prior.covariance())
    pred = gmm_epsilon_predictor(cfg.prior)
    records = []
    for j, rho in enumerate(cfg.rho_list):
        rho_m = cfg.rho_model(rho)
        y = add_noise(x0, rho_m, RngStream(cfg.seed, _DATA_STREAM + 1 + j))
        for variant in cfg.variants:
            for n_steps in cfg.schedule_lens:
                res = lcdd_denoise(y, rho_m, cfg.schedule, pred,
                                   LcddConfig(1.0, n_steps, variant, cfg.seed), batched=True)
                for lam in cfg.lambda_grid:
                    out = res.combine(lam)
                    records.append(SweepRecord(
                        variant.value, rho, res.k_hat, res.n_steps, lam,
                        float(np.mean((out - x0) ** 2)),
                        float(np.mean(batch_psnr(to_display(out), to_display(x0)))),
                        gaussian_frechet(fit_gaussian(out), ref),
                        empirical_w1_1d(out[:, 0], x0[:, 0]),
                        cfg.seed))
    records.sort(key=lambda r: (r.variant, r.rho, r.schedule_len, r.lam))
    return records


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    w = csv.writer(buf, lineterminator="\n")
    for r in records:
        w.writerow([_fmt(v) for v in astuple(r)])
    return buf.getvalue()

