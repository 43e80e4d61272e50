import math

import numpy as np
import pytest

from lcdd.numerics import ShapeError
from lcdd.oracle import GaussianMixturePrior, constant_x0_predictor, gmm_epsilon_predictor
from lcdd.pipeline import LcddConfig, lcdd_denoise, linear_combine
from lcdd.sampler import Variant

PRIOR = GaussianMixturePrior(np.array([0.4, 0.6]), np.array([[-0.6, 0.2], [0.5, -0.1]]),
                             np.array([0.03, 0.05]))


def noisy_batch(n=300, rho=50 / 127.5, seed=0):
    g = np.random.default_rng(seed)
    comp = g.choice(2, n, p=PRIOR.weights)
    x0 = PRIOR.means[comp] + np.sqrt(PRIOR.variances[comp])[:, None] * g.normal(size=(n, 2))
    return x0, x0 + rho * g.normal(size=(n, 2)), rho


def test_linear_combine_examples():
    a, b = np.array([0.0, 2.0]), np.array([1.0, 0.0])
    assert np.array_equal(linear_combine(a, b, 1.0), a)
    assert np.array_equal(linear_combine(a, b, 0.0), b)
    assert np.array_equal(linear_combine(a, b, 0.5), [0.5, 1.0])
    assert linear_combine(np.array(10.0), np.array(0.0), 0.2) == pytest.approx(2.0, abs=1e-15)


def test_linear_combine_errors():
    with pytest.raises(ValueError):
        linear_combine(np.zeros(2), np.zeros(2), 1.1)
    with pytest.raises(ShapeError):
        linear_combine(np.zeros(2), np.zeros(3), 0.5)


def test_config_validation():
    with pytest.raises(ValueError):
        LcddConfig(lam=-0.1)
    with pytest.raises(ValueError):
        LcddConfig(multi_steps=0)
    assert LcddConfig(variant="ddpm").variant is Variant.DDPM


@pytest.mark.parametrize("variant", ["ddim", "ddpm"])
def test_endpoints_bitwise(schedule, variant):
    x0, y, rho = noisy_batch(50)
    pred = gmm_epsilon_predictor(PRIOR)
    r1 = lcdd_denoise(y, rho, schedule, pred, LcddConfig(1.0, 20, variant, 3), batched=True)
    r0 = lcdd_denoise(y, rho, schedule, pred, LcddConfig(0.0, 20, variant, 3), batched=True)
    assert np.array_equal(r1.lc, r1.i_d)
    assert np.array_equal(r0.lc, r0.i_p)
    assert np.array_equal(r0.i_d, r1.i_d) and np.array_equal(r0.i_p, r1.i_p)


def test_combination_invariant(schedule):
    x0, y, rho = noisy_batch(50)
    r = lcdd_denoise(y, rho, schedule, gmm_epsilon_predictor(PRIOR), LcddConfig(0.3, 10, "ddpm", 1),
                     batched=True)
    assert np.max(np.abs(r.lc - (0.3 * r.i_d + 0.7 * r.i_p))) <= 1e-15


def test_constant_predictor_collapses_all_outputs(schedule):
    g = np.random.default_rng(0)
    x0 = g.uniform(-1, 1, 16)
    rho = 0.6
    y = x0 + rho * g.normal(size=16)
    r = lcdd_denoise(y, rho, schedule, constant_x0_predictor(x0), LcddConfig(0.37, 40, "ddim"))
    for out in (r.i_d, r.i_p, r.lc):
        assert np.max(np.abs(out - x0)) <= 1e-10


def test_single_multistep_collapses(schedule):
    x0, y, rho = noisy_batch(40)
    r = lcdd_denoise(y, rho, schedule, gmm_epsilon_predictor(PRIOR), LcddConfig(0.5, 1, "ddim"),
                     batched=True)
    assert np.array_equal(r.i_d, r.i_p) and np.array_equal(r.lc, r.i_d)


def test_steps_clamp_to_k_hat(schedule):
    _, y, rho = noisy_batch(10, rho=15 / 127.5)
    r = lcdd_denoise(y, rho, schedule, gmm_epsilon_predictor(PRIOR), LcddConfig(0.5, 1000), batched=True)
    assert r.k_hat == 33 and r.n_steps == 33


def test_rho_must_be_positive(schedule):
    with pytest.raises(ValueError):
        lcdd_denoise(np.zeros(2), 0.0, schedule, gmm_epsilon_predictor(PRIOR), LcddConfig())


def test_ddpm_runs_use_distinct_streams(schedule):
    # with the one-step output forced equal to a noiseless run, differing I_P seeds must change I_P only
    x0, y, rho = noisy_batch(30)
    pred = gmm_epsilon_predictor(PRIOR)
    a = lcdd_denoise(y, rho, schedule, pred, LcddConfig(0.5, 12, "ddpm", 0), batched=True)
    b = lcdd_denoise(y, rho, schedule, pred, LcddConfig(0.5, 12, "ddpm", 1), batched=True)
    assert np.array_equal(a.i_d, b.i_d) and not np.array_equal(a.i_p, b.i_p)


@pytest.mark.parametrize("variant", ["ddim", "ddpm"])
def test_distortion_convexity_and_quadratic_mse(schedule, variant):
    x0, y, rho = noisy_batch(500)
    r = lcdd_denoise(y, rho, schedule, gmm_epsilon_predictor(PRIOR), LcddConfig(0.5, 115, variant),
                     batched=True)
    da = np.sum((r.i_d - x0) ** 2, axis=1)
    db = np.sum((r.i_p - x0) ** 2, axis=1)
    lams = np.linspace(0, 1, 21)
    batch = []
    for lam in lams:
        lc = r.combine(lam)
        d = np.sum((lc - x0) ** 2, axis=1)
        assert np.all(d <= lam * da + (1 - lam) * db + 1e-15)
        if 0 < lam < 1:
            differ = np.any(r.i_d != r.i_p, axis=1)
            assert np.all(d[differ] < (lam * da + (1 - lam) * db)[differ])
        batch.append(np.mean((lc - x0) ** 2))
    coef = np.polyfit([0, 0.5, 1], [batch[0], batch[10], batch[20]], 2)
    assert np.max(np.abs(np.polyval(coef, lams) - batch) / np.abs(batch)) <= 1e-10


def test_one_step_is_best_distortion_in_expectation(schedule):
    # the one-step output is the posterior mean, so blending toward it lowers MSE
    x0, y, rho = noisy_batch(3000, seed=5)
    r = lcdd_denoise(y, rho, schedule, gmm_epsilon_predictor(PRIOR), LcddConfig(0.5, 115, "ddim"),
                     batched=True)
    assert np.mean((r.i_d - x0) ** 2) < np.mean((r.i_p - x0) ** 2)
    assert np.mean((r.lc - x0) ** 2) < np.mean((r.i_p - x0) ** 2)
