"""Numbered end-to-end checks with fixed tolerances.

Each ``check_*`` function returns a :class:`CheckResult`; ``run_selftest``
runs the fast subset and prints a pass/fail table. Expected values come from
independent routes (plain-Python schedule evaluation, closed forms) rather
than from the code path under test.
"""
from __future__ import annotations

import math
import time
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

from .data import add_noise, sample_prior, smooth_texture
from .metrics import GaussianFit, fit_gaussian, gaussian_frechet
from .noise_est import estimate_rho
from .numerics import RngStream
from .oracle import GaussianMixturePrior, constant_x0_predictor, gmm_epsilon_predictor
from .pipeline import LcddConfig, lcdd_denoise
from .sampler import Variant, diffuse, diffuse_stepwise, reverse_chain, run_inference
from .schedule import (NoiseSchedule, equidistant_tau, insertion_point,
                       linear_beta_schedule, subsample)
from .sweep import DEFAULT_LAMBDAS, SweepRecord, parse_config, run_sweep

BENCH_PRIOR = GaussianMixturePrior(
    np.array([0.5, 0.5]), np.array([[-0.5, -0.3], [0.5, 0.4]]), np.array([0.04, 0.04]))
RHO_8BIT = (15, 25, 50, 75)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.seconds:.2f}s)"


def _timed(name: str, fn: Callable[[], tuple[bool, str]], budget: float | None = None) -> CheckResult:
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as e:  # a crashing check is a failing check
        ok, detail = False, f"raised {type(e).__name__}: {e}"
    dt = time.perf_counter() - t0
    if budget is not None and dt > budget:
        ok, detail = False, f"{detail}; over time budget {budget}s"
    return CheckResult(name, ok, detail, dt)


def _reference_alpha_bar(N=1000, beta1=1e-4, betaN=0.02) -> list[float]:
    out, acc = [1.0], 1.0
    for k in range(1, N + 1):
        beta = beta1 + (k - 1) / (N - 1) * (betaN - beta1)
        acc *= 1.0 - beta
        out.append(acc)
    return out


def _reference_k_hat(alpha_bar: list[float], rho: float) -> int:
    target = 1.0 / (1.0 + rho * rho)
    best, best_k = math.inf, 0
    for k in range(1, len(alpha_bar)):
        d = abs(alpha_bar[k] - target)
        if d < best:
            best, best_k = d, k
    return best_k


def check_schedule_invariants(schedule: NoiseSchedule) -> CheckResult:
    def run():
        bad = schedule.violations()
        return not bad, "ok" if not bad else "; ".join(bad)
    return _timed("0 schedule invariants", run)


def check_insertion_step(schedule: NoiseSchedule) -> CheckResult:
    def run():
        ref = _reference_alpha_bar()
        got = {r: insertion_point(schedule, r / 127.5).k_hat for r in RHO_8BIT}
        want = {r: _reference_k_hat(ref, r / 127.5) for r in RHO_8BIT}
        ok = got[75] == 168 and got == want
        return ok, f"k_hat={got}, oracle={want}"
    return _timed("1 insertion step (rho=75 -> 168)", run, budget=1.0)


def check_subsample_marginals(schedule: NoiseSchedule, seed: int = 0) -> CheckResult:
    def run():
        g = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(1000):
            k_hat = int(g.integers(1, schedule.N + 1))
            m = int(g.integers(1, k_hat + 1))
            tau = np.sort(g.choice(np.arange(1, k_hat), size=m - 1, replace=False)) if m > 1 else []
            tau = [*map(int, tau), k_hat]
            plan = subsample(schedule, tau)
            ref = schedule.alpha_bar[tau]
            worst = max(worst, float(np.max(np.abs(plan.alpha_bar_new - ref) / ref)))
        return worst <= 1e-12, f"max rel err {worst:.2e} (tol 1e-12)"
    return _timed("2 subsampled schedule preserves marginals", run, budget=5.0)


def check_scaling_identity(seed: int = 0) -> CheckResult:
    def run():
        g = np.random.default_rng(seed)
        schedule = linear_beta_schedule()
        worst = 0.0
        for rho in 10.0 - g.uniform(0, 10, 10_000):  # (0, 10]
            ip = insertion_point(schedule, float(rho))
            if ip.alpha_hat != 1.0 / (1.0 + rho * rho):
                return False, f"alpha_hat mismatch at rho={rho}"
            worst = max(worst, abs(ip.noise_scale - ip.scale * rho))
        return worst <= 1e-15, f"max |sqrt(1-a) - sqrt(a)*rho| {worst:.2e} (tol 1e-15)"
    return _timed("3 scaling identity", run)


def check_x0_preservation(schedule: NoiseSchedule, seed: int = 0) -> CheckResult:
    def run():
        g = np.random.default_rng(seed)
        x0 = g.uniform(-1, 1, 64)
        rho = 75 / 127.5
        y = x0 + rho * g.standard_normal(64)
        ip = insertion_point(schedule, rho)
        plan = subsample(schedule, equidistant_tau(ip.k_hat, ip.k_hat))
        x_start = ip.scale * y
        ab = schedule.alpha_bar[ip.k_hat]
        e = (x_start - np.sqrt(ab) * x0) / np.sqrt(1 - ab)
        worst = [0.0]

        def on_step(level, x):
            ref = np.sqrt(level) * x0 + np.sqrt(1 - level) * e
            worst[0] = max(worst[0], float(np.max(np.abs(x - ref))))

        out = reverse_chain(x_start, plan, Variant.DDIM, constant_x0_predictor(x0), on_step=on_step)
        final = float(np.max(np.abs(out - x0)))
        ok = worst[0] <= 1e-10 and final <= 1e-10 and len(plan) == 168
        return ok, f"{len(plan)} steps, max per-step dev {worst[0]:.2e}, final dev {final:.2e} (tol 1e-10)"
    return _timed("4 DDIM x0 preservation", run)


def check_mmse_equivalence(schedule: NoiseSchedule, seed: int = 0) -> CheckResult:
    def run():
        k = 168
        ab = float(schedule.alpha_bar[k])
        rho = math.sqrt((1 - ab) / ab)
        n, d = 10_000, 64
        prior = GaussianMixturePrior(np.ones(1), np.zeros((1, d)), np.ones(1))
        x0 = sample_prior(prior, n, RngStream(seed, 0)).samples
        y = add_noise(x0, rho, RngStream(seed, 1))
        plan = subsample(schedule, (insertion_point(schedule, rho).k_hat,))
        out = run_inference(y, rho, plan, schedule, Variant.DDIM, gmm_epsilon_predictor(prior))
        dev = float(np.max(np.abs(out - y / (1 + rho * rho))))
        emp = float(np.mean((out - x0) ** 2))
        theory = rho * rho / (1 + rho * rho)
        rel = abs(emp / theory - 1)
        ok = plan.k_hat == k and dev <= 1e-8 and rel <= 0.02
        return ok, (f"max dev from y/(1+rho^2) {dev:.2e} (tol 1e-8); "
                    f"MSE {emp:.5f} vs {theory:.5f}, rel {rel:.3%} (tol 2%)")
    return _timed("5 MMSE equivalence", run)


def check_one_step_agreement(schedule: NoiseSchedule, seed: int = 0) -> CheckResult:
    def run():
        g = np.random.default_rng(seed)
        worst = 0.0
        for i in range(100):
            rho = float(g.uniform(0.01, 2.0))
            prior = GaussianMixturePrior(g.dirichlet(np.ones(3)), g.uniform(-1, 1, (3, 4)),
                                         g.uniform(0.01, 0.5, 3))
            y = g.uniform(-1.5, 1.5, (8, 4))
            plan = subsample(schedule, (insertion_point(schedule, rho).k_hat,))
            pred = gmm_epsilon_predictor(prior)
            a = run_inference(y, rho, plan, schedule, Variant.DDPM, pred, RngStream(seed, i))
            b = run_inference(y, rho, plan, schedule, Variant.DDIM, pred)
            worst = max(worst, float(np.max(np.abs(a - b))))
        return worst <= 1e-12, f"max |DDPM - DDIM| {worst:.2e} over 100 cases (tol 1e-12)"
    return _timed("6 one-step variant agreement", run)


def _benchmark(schedule, variant, n=2000, seed=0):
    rho = 75 / 127.5
    x0 = sample_prior(BENCH_PRIOR, n, RngStream(seed, 1 << 40)).samples
    y = add_noise(x0, rho, RngStream(seed, (1 << 40) + 1))
    res = lcdd_denoise(y, rho, schedule, gmm_epsilon_predictor(BENCH_PRIOR),
                       LcddConfig(1.0, 1000, variant, seed), batched=True)
    return x0, res


def check_tradeoff_convexity(schedule: NoiseSchedule, seed: int = 0) -> CheckResult:
    def run():
        notes, ok = [], True
        for variant in Variant:
            x0, res = _benchmark(schedule, variant, seed=seed)
            a = np.sum((res.i_d - x0) ** 2, axis=1)
            b = np.sum((res.i_p - x0) ** 2, axis=1)
            gap = np.sum((res.i_d - res.i_p) ** 2, axis=1)
            batch = []
            for lam in DEFAULT_LAMBDAS:
                lc = res.combine(lam)
                dist = np.sum((lc - x0) ** 2, axis=1)
                chord = lam * a + (1 - lam) * b
                slack = 1e-12 * np.maximum(chord, 1e-300)
                ok &= bool(np.all(dist <= chord + slack))
                if 0 < lam < 1:
                    # strictness is only observable where the curvature term beats rounding
                    strict = lam * (1 - lam) * gap > 1e-9 * chord
                    ok &= bool(np.all(dist[strict] < chord[strict]))
                batch.append(float(np.mean((lc - x0) ** 2)))
            lams = np.array(DEFAULT_LAMBDAS)
            coef = np.polyfit([0.0, 0.5, 1.0], [batch[0], batch[10], batch[20]], 2)
            rel = float(np.max(np.abs(np.polyval(coef, lams) - batch) / np.abs(batch)))
            ok &= rel <= 1e-10 and res.k_hat == 168 and res.n_steps == 168
            notes.append(f"{variant.value}: quad-fit rel err {rel:.1e}")
        return ok, "per-sample chord holds; " + "; ".join(notes) + " (tol 1e-10)"
    return _timed("7 trade-off convexity and quadratic MSE", run, budget=120.0)


def check_tradeoff_advantage(schedule: NoiseSchedule | None = None, seed: int = 0,
                             records: list[SweepRecord] | None = None) -> CheckResult:
    def run():
        recs = records
        if recs is None:
            cfg = parse_config({"schedule_lens": [168], "seed": seed,
                                **({"schedule": schedule.to_dict()} if schedule else {})})
            recs = run_sweep(cfg)
        ok, notes = True, []
        for variant in sorted({r.variant for r in recs}):
            rows = [r for r in recs if r.variant == variant and r.schedule_len == 168]
            rows.sort(key=lambda r: r.lam)
            lo, hi = rows[0], rows[-1]  # lambda = 0 (multi-step) and 1 (one-step)
            m = np.array([r.mse for r in rows])
            chord_ok = all(r.mse <= r.lam * hi.mse + (1 - r.lam) * lo.mse + 1e-15 for r in rows)
            monotone = bool(np.all(np.diff(m) <= 0) or np.all(np.diff(m) >= 0))
            interior = rows[1:-1]
            dom = [r for r in interior for e in (lo, hi)
                   if e.mse - r.mse > 1e-6 or e.frechet - r.frechet > 1e-6]
            best_fd = min(interior, key=lambda r: r.frechet)
            ok &= chord_ok and monotone and bool(dom)
            notes.append(f"{variant}: MSE {lo.mse:.4f}->{hi.mse:.4f} monotone={monotone}, "
                         f"frechet {lo.frechet:.4f}->{hi.frechet:.4f} "
                         f"(best interior {best_fd.frechet:.4f} at lambda={best_fd.lam}), "
                         f"{len(dom)} dominating interior points")
        return ok, "; ".join(notes)
    return _timed("8 trade-off advantage", run)


def check_full_chain_generation(schedule: NoiseSchedule, seed: int = 0) -> CheckResult:
    def run():
        prior = GaussianMixturePrior(np.array([0.3, 0.7]), np.array([[-0.6], [0.4]]),
                                     np.array([0.02, 0.05]))
        x_n = RngStream(seed, 0).generator().standard_normal((5000, 1))
        plan = subsample(schedule, range(1, schedule.N + 1))
        out = reverse_chain(x_n, plan, Variant.DDIM, gmm_epsilon_predictor(prior))
        fd = gaussian_frechet(fit_gaussian(out), GaussianFit(prior.mean(), prior.covariance()))
        return fd <= 0.02, f"Frechet to prior {fd:.5f} (tol 0.02)"
    return _timed("9 full-chain generation", run, budget=120.0)


def check_blind_mode(schedule: NoiseSchedule, seed: int = 0, n_seeds: int = 100,
                     size: int = 512) -> CheckResult:
    def run():
        ok, notes = True, []
        ref = _reference_alpha_bar()
        for r8 in RHO_8BIT:
            rho = r8 / 127.5
            k_true = _reference_k_hat(ref, rho)
            errs, dks = [], []
            for s in range(n_seeds):
                x = smooth_texture((size, size), RngStream(seed + s, 0))
                y = add_noise(x, rho, RngStream(seed + s, 1))
                est = estimate_rho(y).rho_hat
                errs.append(abs(est / rho - 1))
                dks.append(abs(insertion_point(schedule, est).k_hat - k_true))
            ok &= max(errs) <= 0.05 and max(dks) <= 2
            notes.append(f"rho={r8}: max rel err {max(errs):.2%}, max |dk| {max(dks)}")
        return ok, "; ".join(notes) + " (tol 5%, 2 steps)"
    return _timed("10 blind noise estimation", run)


def check_forward_marginal(schedule: NoiseSchedule, seed: int = 0, k: int = 168) -> CheckResult:
    def run():
        M = 100_000
        x0 = np.full(M, 0.7)
        ab = float(schedule.alpha_bar[k])
        mean, sd = math.sqrt(ab) * 0.7, math.sqrt(1 - ab)
        it = diffuse_stepwise(x0, schedule, k, RngStream(seed, 0))
        direct = diffuse(x0, ab, RngStream(seed, 1).generator().standard_normal(M))
        tol_m = 3 * sd / math.sqrt(M)
        dm = [abs(float(s.mean()) - mean) for s in (it, direct)]
        vr = [float(s.var(ddof=1)) / sd**2 - 1 for s in (it, direct)]
        cross = float(it.var(ddof=1) / direct.var(ddof=1)) - 1
        ok = max(dm) <= tol_m and max(map(abs, vr)) <= 0.02 and abs(cross) <= 0.02
        return ok, (f"mean devs {dm[0]:.2e}, {dm[1]:.2e} (tol {tol_m:.2e}); "
                    f"var rel devs {vr[0]:+.3%}, {vr[1]:+.3%}, iterated/direct {cross:+.3%} (tol 2%)")
    return _timed("11 forward marginal equivalence", run)


def selftest_checks(schedule: NoiseSchedule | None = None, seed: int = 0) -> list[CheckResult]:
    s = schedule if schedule is not None else linear_beta_schedule()
    return [
        check_schedule_invariants(s),
        check_insertion_step(s),
        check_subsample_marginals(s, seed),
        check_scaling_identity(seed),
        check_x0_preservation(s, seed),
        check_mmse_equivalence(s, seed),
        check_one_step_agreement(s, seed),
        check_tradeoff_convexity(s, seed),
        check_blind_mode(s, seed),
        check_forward_marginal(s, seed),
    ]


def run_selftest(schedule: NoiseSchedule | None = None, seed: int = 0, full: bool = False,
                 out=print) -> bool:
    """Run the checks, print one line each, and return overall success."""
    t0 = time.perf_counter()
    results = selftest_checks(schedule, seed)
    if full:
        s = schedule if schedule is not None else linear_beta_schedule()
        results += [check_tradeoff_advantage(s, seed), check_full_chain_generation(s, seed)]
    for r in results:
        out(r.line())
    passed = sum(r.passed for r in results)
    out(f"{passed}/{len(results)} checks passed in {time.perf_counter() - t0:.1f}s")
    return bool(passed == len(results))
