import numpy as np
import pytest

from lcdd.data import add_noise, smooth_texture
from lcdd.noise_est import estimate_rho, second_difference_residuals
from lcdd.numerics import RngStream


def test_linear_ramp_is_exactly_zero():
    i, j = np.mgrid[0:64, 0:48]
    y = (0.01 * i - 0.02 * j + 0.3) / 4.0
    assert estimate_rho(y).rho_hat == 0.0


def test_constant_image_over_seeds():
    errs = []
    for s in range(100):
        y = add_noise(np.full((128, 128), 0.1), 0.2, RngStream(s))
        errs.append(abs(estimate_rho(y).rho_hat / 0.2 - 1))
    assert max(errs) <= 0.05


def test_smooth_texture():
    rho = 50 / 127.5
    for s in range(10):
        x = smooth_texture((256, 256), RngStream(s, 0))
        y = add_noise(x, rho, RngStream(s, 1))
        assert abs(estimate_rho(y).rho_hat / rho - 1) <= 0.05


def test_residual_normalization():
    r = second_difference_residuals(np.random.default_rng(0).standard_normal((300, 300)))
    assert r.size == 2 * 300 * 298
    assert r.std() == pytest.approx(1.0, rel=0.01)


def test_scale_equivariance():
    y = np.random.default_rng(1).standard_normal((64, 64))
    assert estimate_rho(3.0 * y).rho_hat == pytest.approx(3.0 * estimate_rho(y).rho_hat, rel=1e-12)


def test_more_noise_gives_larger_estimate():
    x = smooth_texture((128, 128), RngStream(2))
    est = [estimate_rho(add_noise(x, r, RngStream(3))).rho_hat for r in (0.05, 0.1, 0.2, 0.4)]
    assert all(a < b for a, b in zip(est, est[1:]))


def test_color_channels_pooled():
    y = np.random.default_rng(4).standard_normal((40, 40, 3)) * 0.3
    assert estimate_rho(y).n_residuals == 3 * 2 * 40 * 38


@pytest.mark.parametrize("shape", [(2, 10), (10,), (10, 2)])
def test_too_small(shape):
    with pytest.raises(ValueError):
        estimate_rho(np.zeros(shape))
