"""
Deep lower tails of the skew normal law
=======================================

The cdf of SN(lam) underflows long before the tails of interest, so every
tail quantity is kept on the log scale.
"""

import math

import numpy as np

from sntail import SkewNormalLaw, capitanio_bounds, sn_cdf, sn_log_tail_cdf, sn_tail_asymptotic

# %%
# At moderate z the exact Owen-T cdf and the log-domain integral agree.
law = SkewNormalLaw(2.0)
print("F(-2)          ", sn_cdf(law, -2.0))
print("exp(log F(-2)) ", math.exp(sn_log_tail_cdf(law, -2.0)))

# %%
# Further out the linear cdf is zero in double precision but the log is fine.
for z in (-10.0, -20.0, -40.0):
    print(f"z={z:6.1f}  F={sn_cdf(law, z):.3g}  log F={sn_log_tail_cdf(law, z):.6f}")

# %%
# The two-sided bracket pinches the exact value and the first-order tail
# approaches it as z decreases.
for lam in (2.0, -2.0):
    law = SkewNormalLaw(lam)
    print(f"lam={lam}")
    for z in np.arange(-4.0, -13.0, -2.0):
        lo, hi = capitanio_bounds(law, z)
        v = sn_log_tail_cdf(law, z)
        a = sn_tail_asymptotic(law, z)
        print(f"  z={z:5.1f}  lower={lo:10.4f}  exact={v:10.4f}  upper={hi:10.4f}"
              f"  first-order gap={abs(v - a):.4f}")
