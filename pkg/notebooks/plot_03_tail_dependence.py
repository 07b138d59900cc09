"""
Tail dependence of the equi-skewed bivariate skew normal
========================================================

``lambda_L(u) = C(u, u)/u`` computed exactly next to its closed-form rate.
Positive skew gives a fast-vanishing lower tail, negative skew behaves
like the symmetric normal.
"""

import math

import numpy as np

from sntail import (
    BivSkewNormalLaw,
    joint_diag_log_cdf,
    lambda_l_exact,
    lambda_u_exact,
    tail_table,
)

LOG10 = math.log(10.0)
grid = [k * LOG10 for k in (-4, -6, -8, -10, -12)]

# %%
# Parameters of the mixture representation X = alpha V + Z.
law = BivSkewNormalLaw(1.0, 0.0)
print("lam", law.lam, "alpha", law.alpha, "beta", law.beta)
print("Psi", np.array(law.psi))

# %%
# The two routes to the diagonal joint cdf.
for x in (-4.0, -1.0, 1.0):
    a = joint_diag_log_cdf(law, x, method="mixture")
    b = joint_diag_log_cdf(law, x, method="quadrature")
    print(f"x={x:5.1f}  mixture={a:.15f}  quadrature={b:.15f}")

# %%
# Exact against closed forms along a log-spaced grid.
for theta, rho in ((1.0, 0.0), (2.0, -0.3), (-1.0, 0.5)):
    print(f"theta={theta}, rho={rho}")
    for p in tail_table(BivSkewNormalLaw(theta, rho), grid):
        print(f"  u={p.u:.0e}  x_u={p.x_u:8.4f}  exact={p.lambda_exact:.4e}"
              f"  closed form={p.lambda_asym:.4e}  ratio={p.ratio:.4f}")

# %%
# The upper tail of X is the lower tail of -X.
law = BivSkewNormalLaw(1.0, 0.3)
print(lambda_u_exact(law, -20.0) == lambda_l_exact(law.reflected(), -20.0))

# %%
# With no skew the exact value settles at (1 + rho)/2 times the usual
# normal rate rather than at the rate itself.
for lu in (-100.0, -1000.0, -10000.0):
    print(lu, lambda_l_exact(BivSkewNormalLaw(0.0, 0.5), lu).ratio)
