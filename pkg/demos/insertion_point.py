"""Where does a noisy image enter the reverse chain?

Scaling y = x0 + rho*n by sqrt(alpha_hat), alpha_hat = 1/(1+rho^2), gives
sqrt(alpha_hat)*x0 + sqrt(1-alpha_hat)*n: the forward marginal at level
alpha_hat. We look that level up on the default linear schedule.
"""
import numpy as np

from lcdd import insertion_point, linear_beta_schedule

s = linear_beta_schedule()
print("N =", s.N, " alpha_bar[N] =", s.alpha_bar[-1])

for rho8 in (5, 15, 25, 50, 75, 100, 150):
    ip = insertion_point(s, rho8 / 127.5)
    print(f"rho = {rho8:4d}/127.5  alpha_hat = {ip.alpha_hat:.5f}  k_hat = {ip.k_hat:4d}"
          f"  |alpha_bar - alpha_hat| = {ip.mismatch:.1e}")

# an on-grid noise level maps back to its own step
ab = s.alpha_bar[300]
print("on-grid k=300 ->", insertion_point(s, np.sqrt((1 - ab) / ab)).k_hat)
