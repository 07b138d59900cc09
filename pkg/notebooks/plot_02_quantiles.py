"""
Extreme quantiles: exact inversion against closed forms
=======================================================

Quantiles are taken in ``log u`` so that levels such as 1e-300 or beyond
pose no problem.
"""

import math

from sntail import (
    SkewNormalLaw,
    sn_quantile,
    sn_quantile_asymptotic,
    sn_quantile_lambert,
    std_normal_quantile,
)

LOG10 = math.log(10.0)

# %%
# For lam = 1 the cdf is Phi^2, which gives an exact check.
law = SkewNormalLaw(1.0)
lu = -50 * LOG10
print(sn_quantile(law, lu), std_normal_quantile(log_u=lu / 2))

# %%
# Exact quantile, the closed-form asymptote and the Lambert W inversion of
# the first-order tail.
for lam in (1.0, -1.0):
    law = SkewNormalLaw(lam)
    print(f"lam={lam}")
    for k in (-4, -6, -8, -10, -12, -50):
        lu = k * LOG10
        q = sn_quantile(law, lu)
        y = sn_quantile_asymptotic(law, lu)
        w = sn_quantile_lambert(law, lu)
        print(f"  u=1e{k:<4d} exact={q:9.5f}  asymptotic={y:9.5f}  lambert={w:9.5f}"
              f"  q^2 - y^2={q * q - y * y:8.5f}")
