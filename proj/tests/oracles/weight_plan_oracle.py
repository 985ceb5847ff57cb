"""Independent high-precision evaluation of the worked weight plan.

Geometry: D=(0,1), Gamma={1}, d(x')=x', D0=(0.5,1), delta=ell=lambda=1,
delta0 requested = 0.7, alpha margin 1.1. Values printed here are frozen
into tests/unit/test_weight.cpp and tests/acceptance/acceptance.cpp.
"""
from mpmath import mp, mpf, sqrt, exp

mp.dps = 40
d0, d1 = mpf("0.5"), mpf(1)
delta, ell, lam = mpf(1), mpf(1), mpf(1)
delta0 = mpf("0.7")
margin = mpf("1.1")

delta0_sup = sqrt(d0 / d1) * delta
beta_lo = (d1 - d0) / (delta**2 - delta0**2)
beta_hi = d0 / delta0**2
beta = (beta_lo + beta_hi) / 2
alpha_inf = (d1 - d0 + beta * delta0**2) / ell**2
alpha = margin * alpha_inf

# sigma_1: max of phi on terminal slice, on the d=0 end, and on x_n=+-ell
psi_terminal = d1 - beta * delta**2
psi_zero_end = mpf(0)
psi_far_face = d1 - alpha * ell**2
sigma1 = exp(lam * max(psi_terminal, psi_zero_end, psi_far_face))
sigma0 = exp(lam * (d0 - beta * delta0**2))

for name, v in [("delta0_sup", delta0_sup), ("beta_lo", beta_lo),
                ("beta_hi", beta_hi), ("beta", beta),
                ("alpha_inf", alpha_inf), ("alpha", alpha),
                ("sigma0", sigma0), ("sigma1", sigma1),
                ("gap_ratio", sigma0 / sigma1),
                ("gap_ratio_lambda4", exp(4 * (d0 - beta * delta0**2))),
                ("theta_C1_1", (sigma0 - sigma1) / (1 + sigma0 - sigma1))]:
    print(f"{name} = {mp.nstr(v, 20)}")

# margins of the three derived inequalities, all must be positive
print("gap_terminal =", mp.nstr((d0 - beta * delta0**2) - (d1 - beta * delta**2), 20))
print("gap_positive =", mp.nstr(d0 - beta * delta0**2, 20))
print("gap_far_face =", mp.nstr((d0 - beta * delta0**2) - (d1 - alpha * ell**2), 20))
