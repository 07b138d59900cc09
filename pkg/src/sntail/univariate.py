"""The univariate skew normal law SN(lambda) with density 2 phi(x) Phi(lambda x).

Exact cdf through Owen's T, a log-domain tail cdf by quadrature, the
Capitanio bracket and first-order tail, and exact plus asymptotic
quantiles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import specfun as sf
from .errors import (
    BelowValidityRangeError,
    ConvergenceError,
    DomainError,
    OutOfAsymptoticRangeError,
    UnsupportedShapeError,
)
from .quadrature import DEFAULT_QUAD, QuadSpec, log_integrate_semi_infinite
from .specfun import LOG_SQRT_2PI, LogProb, TailFormCoefficients

LOG_2 = math.log(2.0)
LOG_PI = math.log(math.pi)
SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)

# quantiles below this level are seeded from the asymptotic formula
_SEED_BELOW_U = 1e-3


@dataclass(frozen=True)
class SkewNormalLaw:
    """SN(lam): density ``2 phi(x) Phi(lam x)``; ``lam = 0`` is the standard normal."""

    lam: float
    quad: QuadSpec = field(default=DEFAULT_QUAD, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise DomainError(f"shape must be finite, got {self.lam!r}")
        object.__setattr__(self, "lam", float(self.lam))

    def reflected(self):
        """Law of ``-X``."""
        return SkewNormalLaw(-self.lam, self.quad)


def marginal_lambda(theta, rho):
    """Shape of each margin of the equi-skewed SN2(theta, R)."""
    if not abs(rho) < 1.0:
        raise DomainError(f"|rho| must be < 1, got {rho!r}")
    return theta * (1.0 + rho) / math.sqrt(1.0 + theta * theta * (1.0 - rho * rho))


def sn_log_pdf(law: SkewNormalLaw, x):
    x_ = sf._finite(x, "x")
    val = LOG_2 + sf.log_std_normal_pdf(x_) + sf.log_std_normal_cdf(law.lam * x_)
    return sf._out(val, x)


def sn_pdf(law: SkewNormalLaw, x):
    """``2 phi(x) Phi(lam x)``."""
    x_ = sf._finite(x, "x")
    val = 2.0 * sf.std_normal_pdf(x_) * sf.std_normal_cdf(law.lam * x_)
    return sf._out(val, x)


def sn_cdf(law: SkewNormalLaw, z):
    """Exact cdf ``Phi(z) - 2 T(z, lam)``.

    Loses relative accuracy deep in the lower tail when ``lam > 0``;
    use :func:`sn_log_tail_cdf` there.
    """
    z_ = sf._finite(z, "z")
    val = sf.std_normal_cdf(z_) - 2.0 * sf.owen_t(z_, np.full_like(z_, law.lam))
    return sf._out(np.clip(val, 0.0, 1.0), z)


def log_tail_cdf_batch(lam, z, spec: QuadSpec = DEFAULT_QUAD):
    """``log F(z; lam)`` for an array of ``z <= 0`` sharing one node set.

    Integrates ``2 phi(t) Phi(lam t)`` over ``t = z - s``, ``s >= 0``.
    """
    z = np.asarray(z, dtype=float)
    zc = z.reshape(-1, 1)

    def logf(s):
        t = zc - s
        return LOG_2 - 0.5 * t * t - LOG_SQRT_2PI + sf.log_std_normal_cdf(lam * t)

    est, _ = log_integrate_semi_infinite(logf, spec)
    return np.minimum(est, 0.0).reshape(z.shape)


def sn_log_tail_cdf(law: SkewNormalLaw, z) -> LogProb:
    """``log F(z; lam)`` for ``z <= 0`` by log-domain quadrature."""
    z = float(sf._finite(z, "z"))
    if z > 0.0:
        raise DomainError("sn_log_tail_cdf needs z <= 0; use sn_log_cdf or sn_cdf")
    return float(log_tail_cdf_batch(law.lam, np.array([z]), law.quad)[0])


def log_cdf_batch(lam, z, spec: QuadSpec = DEFAULT_QUAD):
    """``log F(z; lam)`` for any real ``z``; positive ``z`` via the reflected law."""
    z = np.asarray(z, dtype=float)
    out = np.empty_like(z)
    neg = z <= 0.0
    if np.any(neg):
        out[neg] = log_tail_cdf_batch(lam, z[neg], spec)
    if np.any(~neg):
        upper = log_tail_cdf_batch(-lam, -z[~neg], spec)
        out[~neg] = np.log1p(-np.exp(upper))
    return out


def sn_log_cdf(law: SkewNormalLaw, z) -> LogProb:
    """``log F(z; lam)`` for any finite ``z``."""
    z = float(sf._finite(z, "z"))
    return float(log_cdf_batch(law.lam, np.array([z]), law.quad)[0])


def capitanio_bounds(law: SkewNormalLaw, z):
    """Log-scale lower and upper bracket of ``F(z; lam)`` for ``z < 0``.

    Returns
    -------
    (float, float)
        ``(log_lower, log_upper)``.
    """
    lam = law.lam
    z = float(sf._finite(z, "z"))
    if not z < 0.0:
        raise DomainError("capitanio_bounds needs z < 0")
    if lam == 0.0:
        raise UnsupportedShapeError("the bracket has no lam = 0 form")
    z2 = z * z
    lam2 = lam * lam
    m = abs(lam)
    if lam > 0:
        a = 1.0 / (m * (1.0 + lam2))
        b = 2.0 / (m * (1.0 + lam2)) + 1.0 / (m**3 * (1.0 + lam2))
        head = -LOG_PI - 0.5 * (1.0 + lam2) * z2
        low_bracket = a / z2 - b / (z2 * z2)
        if low_bracket <= 0.0:
            raise BelowValidityRangeError(f"lower bound is nonpositive at z={z}")
        return head + math.log(low_bracket), head + math.log(a / z2)
    # lam < 0: every correction carries exp(-z^2 lam^2 / 2) relative to the head
    az = -z
    e = math.exp(-0.5 * z2 * lam2)
    head = LOG_2 - LOG_SQRT_2PI - 0.5 * z2
    corr = SQRT_2_OVER_PI / (m * (1.0 + lam2)) / z2 * e
    extra = (SQRT_2_OVER_PI / az**4 * e
             * (2.0 / (m * (1.0 + lam2) ** 2) + 1.0 / (m**3 * (1.0 + lam2))))
    low_bracket = 1.0 / az - corr - az**-3
    if low_bracket <= 0.0:
        raise BelowValidityRangeError(f"lower bound is nonpositive at z={z}")
    return head + math.log(low_bracket), head + math.log(1.0 / az - corr + extra)


def sn_tail_asymptotic(law: SkewNormalLaw, z) -> LogProb:
    """Log of the first-order lower tail of ``F(z; lam)`` as ``z -> -inf``."""
    lam = law.lam
    z = float(sf._finite(z, "z"))
    if not z < 0.0:
        raise DomainError("sn_tail_asymptotic needs z < 0")
    if lam == 0.0:
        raise UnsupportedShapeError("neither tail branch reduces to the normal at lam = 0")
    if lam > 0:
        return (-math.log(math.pi * lam * (1.0 + lam * lam)) - 2.0 * math.log(-z)
                - 0.5 * (1.0 + lam * lam) * z * z)
    return 0.5 * math.log(2.0 / math.pi) - math.log(-z) - 0.5 * z * z


def tail_form_coefficients(law: SkewNormalLaw) -> TailFormCoefficients:
    """``(a, b, c, d)`` writing the first-order tail as ``a |z|^b exp(-c |z|^d)``."""
    lam = law.lam
    if lam == 0.0:
        raise UnsupportedShapeError("no tail form for lam = 0")
    if lam > 0:
        return TailFormCoefficients(1.0 / (math.pi * lam * (1.0 + lam * lam)), -2.0,
                                    0.5 * (1.0 + lam * lam), 2.0)
    return TailFormCoefficients(SQRT_2_OVER_PI, -1.0, 0.5, 2.0)


def sn_quantile_asymptotic(law: SkewNormalLaw, log_u) -> float:
    """Closed-form asymptotic quantile ``y(u)`` of SN(lam) as ``u -> 0``."""
    lam = law.lam
    lu = sf.resolve_log_u(log_u=log_u)
    if lam == 0.0:
        raise UnsupportedShapeError("asymptotic quantile has no lam = 0 branch")
    if lam > 0:
        l1 = math.log(2.0 * math.pi * lam) + lu
        if l1 >= 0.0:
            raise OutOfAsymptoticRangeError("log(2 pi lam u) must be negative")
        inner = l1 + math.log(-l1)
        if inner >= 0.0:
            raise OutOfAsymptoticRangeError("outer logarithm must be negative")
        return -math.sqrt(-2.0 * inner / (1.0 + lam * lam))
    q = lu - LOG_2 + LOG_SQRT_2PI
    if q >= 0.0:
        raise OutOfAsymptoticRangeError("log((u/2) sqrt(2 pi)) must be negative")
    inner = lu - LOG_2 + 0.5 * math.log(-4.0 * math.pi * q)
    if inner >= 0.0:
        raise OutOfAsymptoticRangeError("outer logarithm must be negative")
    return -math.sqrt(-2.0 * inner)


def sn_quantile_lambert(law: SkewNormalLaw, log_u, expanded=False) -> float:
    """Asymptotic quantile by inverting the first-order tail with Lambert W."""
    coeffs = tail_form_coefficients(law)
    solve = sf.solve_tail_form_expanded if expanded else sf.solve_tail_form
    return solve(coeffs, log_u=log_u)


def _quantile_seed_bracket(law, lu):
    m = law.quad.bracket_margin
    if lu <= math.log(_SEED_BELOW_U):
        try:
            if law.lam == 0.0:
                z0 = sf.std_normal_quantile(log_u=lu)
            else:
                z0 = sn_quantile_asymptotic(law, lu)
        except OutOfAsymptoticRangeError:
            z0 = None
        if z0 is not None and z0 < 0.0:
            return m * z0, z0 / m
    return -8.0, 8.0


def sn_quantile(law: SkewNormalLaw, log_u) -> float:
    """Exact quantile: the ``z`` with ``log F(z; lam) = log_u``.

    Brent's method on a bracket around the asymptotic seed, widened
    geometrically until it straddles the root.
    """
    lu = sf.resolve_log_u(log_u=log_u)
    spec = law.quad

    def f(z):
        return float(log_cdf_batch(law.lam, np.array([z]), spec)[0]) - lu

    lo, hi = _quantile_seed_bracket(law, lu)
    flo, fhi = f(lo), f(hi)
    m = spec.bracket_margin
    for _ in range(spec.max_nodes):
        if flo <= 0.0 <= fhi:
            break
        if flo > 0.0:
            lo = lo * m if lo < 0 else lo - 1.0
            flo = f(lo)
        if fhi < 0.0:
            hi = hi / m if hi < 0 else hi * m + 1.0
            fhi = f(hi)
    else:
        raise ConvergenceError("could not bracket the quantile", {"lo": lo, "hi": hi})
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    z = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=200)
    resid = f(z)
    if abs(resid) > spec.abs_log_tol:
        raise ConvergenceError("quantile residual above tolerance",
                               {"z": z, "residual": resid})
    return z


def sn_ppf(law: SkewNormalLaw, u) -> float:
    """Linear-scale convenience wrapper of :func:`sn_quantile` for ``u >= 1e-300``."""
    u = float(u)
    if not 1e-300 <= u < 1.0:
        raise DomainError("sn_ppf takes 1e-300 <= u < 1; use sn_quantile with log_u")
    return sn_quantile(law, math.log(u))
