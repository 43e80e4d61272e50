"""Blind denoising of a synthetic texture.

The noise level is estimated from robust second differences, which sets
the insertion step; a per-pixel Gaussian prior fitted to the noisy image
stands in for a trained model.
"""
import numpy as np

from lcdd import (GaussianMixturePrior, LcddConfig, RngStream, add_noise, estimate_rho,
                  gmm_epsilon_predictor, lcdd_denoise, linear_beta_schedule, psnr)
from lcdd.data import smooth_texture
from lcdd.metrics import to_display

s = linear_beta_schedule()
x0 = smooth_texture((128, 128), RngStream(0))
rho = 50 / 127.5
y = add_noise(x0, rho, RngStream(1))

est = estimate_rho(y)
print(f"true rho {rho:.4f}, estimated {est.rho_hat:.4f} from {est.n_residuals} residuals")

var = max(np.var(y) - est.rho_hat**2, 1e-4)
prior = GaussianMixturePrior(np.ones(1), np.array([[np.mean(y)]]), np.array([var]))
res = lcdd_denoise(y, est.rho_hat, s, gmm_epsilon_predictor(prior), LcddConfig(0.5, 20, "ddim"))

print("k_hat =", res.k_hat, " steps =", res.n_steps)
for name, img in (("noisy", y), ("one-step", res.i_d), ("multi-step", res.i_p), ("lambda=0.5", res.lc)):
    print(f"{name:>11}: {psnr(to_display(img), to_display(x0)):.2f} dB")
