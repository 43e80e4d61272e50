"""Diffusion-based Gaussian denoising with a one-step / multi-step linear combination.

A noisy signal ``y = x0 + rho*n`` is rescaled to match an intermediate
latent of a diffusion model, denoised by the reverse process from that step,
and the one-step and multi-step results are blended with a factor lambda.
"""
from .data import add_noise, image_to_model, model_to_image, sample_prior
from .metrics import GaussianFit, empirical_w1_1d, fit_gaussian, gaussian_frechet, mse, psnr
from .noise_est import estimate_rho
from .numerics import InvalidStateError, RngStream, ShapeError, axpy, standard_normal
from .oracle import (GaussianMixturePrior, constant_x0_predictor, gmm_epsilon_predictor,
                     gmm_posterior_mean, zero_predictor)
from .pipeline import DenoiseResult, LcddConfig, lcdd_denoise, linear_combine
from .sampler import StepCoefficients, Variant, ddim_step, ddpm_step, predict_x0, run_inference
from .schedule import (InferencePlan, InsertionPoint, NoiseSchedule, equidistant_tau,
                       insertion_point, linear_beta_schedule, subsample)

__version__ = "0.1.0"
