"""The lambda trade-off on a 2-D Gaussian-mixture toy problem.

The one-step output I_D is the posterior mean (lowest MSE). The multi-step
output I_P lands closer to the data distribution. LC = lambda*I_D + (1-lambda)*I_P
traces a curve between them; MSE along it is an exact quadratic in lambda.
"""
from lcdd.sweep import parse_config, run_sweep

cfg = parse_config({"n_samples": 2000, "rho_list": [75], "schedule_lens": [168],
                    "variants": ["ddpm", "ddim"], "seed": 0})
rows = run_sweep(cfg)

for variant in ("ddim", "ddpm"):
    print(f"\n{variant}  (k_hat = {rows[0].k_hat})")
    print(" lambda     mse   psnr_db  frechet    w1_1d")
    for r in rows:
        if r.variant == variant and round(r.lam * 20) % 4 == 0:
            print(f"  {r.lam:4.2f}  {r.mse:.4f}  {r.psnr_db:7.3f}  {r.frechet:.5f}  {r.w1_1d:.5f}")
