"""Command-line entry point: ``lcdd {denoise,sweep,estimate-noise,selftest}``.

Exit codes: 0 success, 1 failure, 2 usage error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .formats import ParseError, read_any, write_like
from .metrics import mse, psnr, to_display
from .noise_est import estimate_rho
from .oracle import GaussianMixturePrior, gmm_epsilon_predictor
from .pipeline import LcddConfig, lcdd_denoise
from .schedule import NoiseSchedule, insertion_point, linear_beta_schedule
from .sweep import ConfigError, parse_config, records_to_csv, run_sweep
from .validation import run_selftest

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _lambda(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"lambda must lie in [0, 1], got {v}")
    return v


def _schedule(args) -> NoiseSchedule:
    if args.schedule:
        with open(args.schedule) as f:
            return NoiseSchedule.from_json(f.read())
    return linear_beta_schedule()


def _pixel_prior(y: np.ndarray, rho: float) -> GaussianMixturePrior:
    # empirical-Bayes fallback: one Gaussian per pixel, variance from the noisy image
    var = max(float(np.var(y)) - rho * rho, 1e-4)
    return GaussianMixturePrior(np.ones(1), np.array([[float(np.mean(y))]]), np.array([var]))


def _suffixed(path: str, tag: str) -> str:
    stem, ext = os.path.splitext(path)
    return f"{stem}_{tag}{ext}"


def cmd_denoise(args) -> int:
    y, is_image = read_any(args.input)
    schedule = _schedule(args)
    if args.blind:
        est = estimate_rho(y)
        rho = est.rho_hat
        print(f"estimated rho = {rho:.6f} ({rho * 127.5:.3f} in 8-bit units)")
    elif args.rho8 is not None:
        rho = args.rho8 / 127.5
    else:
        rho = args.rho
    if not rho > 0:
        raise UsageError(f"noise level must be positive, got {rho}")
    if args.prior:
        with open(args.prior) as f:
            prior = GaussianMixturePrior.from_json(f.read())
    else:
        prior = _pixel_prior(y, rho)
    cfg = LcddConfig(args.lam, args.steps, args.variant, args.seed)
    res = lcdd_denoise(y, rho, schedule, gmm_epsilon_predictor(prior), cfg)
    print(f"k_hat = {res.k_hat}")
    print(f"multi-step schedule length = {res.n_steps}")
    write_like(args.output, res.lc, is_image)
    write_like(_suffixed(args.output, "id"), res.i_d, is_image)
    write_like(_suffixed(args.output, "ip"), res.i_p, is_image)
    if args.truth:
        x0, _ = read_any(args.truth)
        for name, out in (("one-step", res.i_d), ("multi-step", res.i_p), ("combined", res.lc)):
            print(f"{name}: mse={mse(out, x0):.6g} psnr={psnr(to_display(out), to_display(x0)):.3f} dB")
    return EXIT_OK


def cmd_estimate_noise(args) -> int:
    y, _ = read_any(args.input)
    est = estimate_rho(y)
    schedule = _schedule(args)
    print(f"rho_hat = {est.rho_hat:.6f}")
    print(f"rho_hat_8bit = {est.rho_hat * 127.5:.4f}")
    print(f"n_residuals = {est.n_residuals}")
    if est.rho_hat > 0:
        print(f"k_hat = {insertion_point(schedule, est.rho_hat).k_hat}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        with open(args.config) as f:
            raw = json.load(f)
    except json.JSONDecodeError as e:
        raise UsageError(f"config is not valid JSON: {e}") from None
    if args.seed is not None and isinstance(raw, dict):
        raw["seed"] = args.seed
    try:
        cfg = parse_config(raw)
    except ConfigError as e:
        raise UsageError(str(e)) from None
    text = records_to_csv(run_sweep(cfg))
    if args.output:
        with open(args.output, "w", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_selftest(args) -> int:
    ok = run_selftest(seed=args.seed or 0, full=args.full)
    return EXIT_OK if ok else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lcdd", description=__doc__.splitlines()[0])
    p.add_argument("--seed", type=int, default=None, help="master random seed")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("denoise", help="denoise a PGM/PPM/LCDDT1 file")
    d.add_argument("input")
    level = d.add_mutually_exclusive_group(required=True)
    level.add_argument("--rho", type=float, help="noise std in model units ([-1, 1] range)")
    level.add_argument("--rho8", type=float, help="noise std in 8-bit units (e.g. 75)")
    level.add_argument("--blind", action="store_true", help="estimate the noise level")
    d.add_argument("--lambda", dest="lam", type=_lambda, default=0.5)
    d.add_argument("--steps", type=int, default=1000, help="multi-step schedule length")
    d.add_argument("--variant", choices=["ddim", "ddpm"], default="ddim")
    d.add_argument("--prior", help="Gaussian-mixture prior JSON")
    d.add_argument("--schedule", help="schedule JSON {N, beta1, betaN, sigma_rule}")
    d.add_argument("--truth", help="clean reference for metrics")
    d.add_argument("-o", "--output", required=True)
    d.set_defaults(func=cmd_denoise)

    s = sub.add_parser("sweep", help="lambda/schedule sweep to CSV")
    s.add_argument("config")
    s.add_argument("-o", "--output")
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("estimate-noise", help="blind noise-level estimate")
    e.add_argument("input")
    e.add_argument("--schedule")
    e.set_defaults(func=cmd_estimate_noise)

    t = sub.add_parser("selftest", help="run the invariant checks")
    t.add_argument("--full", action="store_true", help="include the slower generation checks")
    t.set_defaults(func=cmd_selftest)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "denoise":
        if args.steps < 1:
            parser.error("--steps must be >= 1")
        if args.seed is None:
            args.seed = 0
    try:
        return args.func(args)
    except UsageError as e:
        print(f"lcdd: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ParseError, ValueError) as e:
        print(f"lcdd: error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
