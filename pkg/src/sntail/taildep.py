"""Lower/upper tail dependence of the equi-skewed SN2(theta, R).

Exact ``lambda_L(u) = C(u, u) / u`` along the copula diagonal, the closed-form
rates for ``theta > 0`` and ``theta < 0``, the upper tail by reflection, the
symmetric-normal baseline, the diagonal copula derivative with the de Haan
averaging check, Monte Carlo estimation and tail-order fitting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import specfun as sf
from .bivariate import BivSkewNormalLaw, joint_diag_log_cdf, sample
from .errors import DomainError, InsufficientSamplesError, UnsupportedBranchError
from .quadrature import log_integrate_semi_infinite
from .specfun import LOG_SQRT_2PI, LogProb
from .univariate import LOG_2, sn_quantile

LOG_HALF = math.log(0.5)
_MC_CHUNK = 1_000_000
_LOG_MAX = math.log(np.finfo(float).max)


@dataclass(frozen=True)
class TailPoint:
    """One row of a tail-dependence table, everything kept in log scale.

    ``log_lambda_exact`` is ``log_joint - log_u``; ``ratio`` is
    ``exp(log_lambda_exact - log_lambda_asym)``, which is ``inf`` when the
    closed form is far below the exact value (theta close to 0 from above).
    """

    log_u: float
    x_u: float
    log_joint: float
    log_lambda_exact: float
    log_lambda_asym: float
    ratio: float
    branch: str

    @property
    def u(self):
        return math.exp(self.log_u)

    @property
    def lambda_exact(self):
        return math.exp(self.log_lambda_exact)

    @property
    def lambda_asym(self):
        return math.exp(self.log_lambda_asym)


def branch_of(law: BivSkewNormalLaw) -> str:
    """``"a"`` for theta > 0, ``"b"`` for theta < 0, ``"baseline"`` for theta = 0."""
    if law.theta > 0:
        return "a"
    if law.theta < 0:
        return "b"
    return "baseline"


def _check_log_u(log_u):
    lu = float(log_u)
    if not (math.isfinite(lu) and lu < 0.0):
        raise DomainError(f"log_u must be finite and negative, got {log_u!r}")
    return lu


# ---------------------------------------------------------------------------
# closed forms


def log_rate_constant_a(law: BivSkewNormalLaw) -> float:
    """log of the constant multiplying ``u^beta^2 (-log u)^(beta^2 - 1/2)`` when theta > 0."""
    if not law.theta > 0:
        raise UnsupportedBranchError("the theta > 0 constant needs theta > 0")
    a, lam, b = law.alpha, law.lam, law.beta
    b2 = b * b
    return (3.0 * math.log(a) - math.log(math.pi) - 4.0 * math.log(lam) - math.log(b)
            - 2.0 * math.log1p(b2) + 0.5 * math.log(2.0 / math.pi)
            + (1.0 + b2) * math.log(2.0 * math.pi * lam)
            + 1.5 * math.log(0.5 * (1.0 + lam * lam)))


def _rate_a(law, lu):
    b2 = law.beta**2
    return b2 * lu + log_rate_constant_a(law) + (b2 - 0.5) * math.log(-lu)


def _rate_b(rho, lu):
    return ((1.0 - rho) / (1.0 + rho) * lu + math.log(0.5 * (1.0 + rho))
            + 0.5 * math.log((1.0 + rho) / (1.0 - rho))
            - rho / (1.0 + rho) * math.log(-math.pi * lu))


def lambda_l_asymptotic(law: BivSkewNormalLaw, log_u) -> LogProb:
    """log of the asymptotic ``lambda_L(u)``.

    theta > 0: ``u^b2 K (-log u)^(b2 - 1/2)`` with ``b2 = beta^2``;
    theta < 0: ``u^tau (1+rho)/2 sqrt((1+rho)/(1-rho)) (-pi log u)^(-rho/(1+rho))``
    with ``tau = (1-rho)/(1+rho)``.
    """
    lu = _check_log_u(log_u)
    if law.theta > 0:
        return _rate_a(law, lu)
    if law.theta < 0:
        return _rate_b(law.rho, lu)
    raise UnsupportedBranchError("theta = 0 has no skew rate; use normal_baseline")


def normal_baseline(rho, log_u) -> LogProb:
    """log of ``u^tau L(u)``, ``L(u) = 2 sqrt((1+rho)/(1-rho)) (-4 pi log u)^(-rho/(1+rho))``.

    This is the symmetric bivariate normal rate with its constant exactly as
    usually quoted; at ``rho = 0`` it gives ``2u`` rather than the
    independence value ``u``.
    """
    if not abs(rho) < 1.0:
        raise DomainError("|rho| must be < 1")
    lu = _check_log_u(log_u)
    return ((1.0 - rho) / (1.0 + rho) * lu + LOG_2 + 0.5 * math.log((1.0 + rho) / (1.0 - rho))
            - rho / (1.0 + rho) * math.log(-4.0 * math.pi * lu))


def _asym_for(law, lu):
    if law.theta == 0.0:
        return normal_baseline(law.rho, lu)
    return lambda_l_asymptotic(law, lu)


def lambda_u_asymptotic(law: BivSkewNormalLaw, log_one_minus_u) -> LogProb:
    """log of the asymptotic ``lambda_U(u)`` as ``u -> 1``, argument ``log(1 - u)``.

    theta < 0 takes the theta > 0 rate with ``|theta|`` in lam, alpha and
    beta; theta > 0 takes the theta < 0 rate.
    """
    lv = _check_log_u(log_one_minus_u)
    if law.theta < 0:
        return _rate_a(BivSkewNormalLaw(abs(law.theta), law.rho, law.quad), lv)
    if law.theta > 0:
        return _rate_b(law.rho, lv)
    raise UnsupportedBranchError("theta = 0 has no skew rate; use normal_baseline")


# ---------------------------------------------------------------------------
# exact diagonal


def lambda_l_exact(law: BivSkewNormalLaw, log_u) -> TailPoint:
    """Exact ``lambda_L(u)`` at the common margin quantile ``x_u``."""
    lu = _check_log_u(log_u)
    if not lu < LOG_HALF:
        raise DomainError("lambda_l_exact needs u < 1/2")
    x_u = sn_quantile(law.marginal(), lu)
    log_joint = joint_diag_log_cdf(law, x_u)
    log_exact = log_joint - lu
    log_asym = _asym_for(law, lu)
    # the closed form degenerates as theta -> 0+, so the linear ratio may overflow
    d = log_exact - log_asym
    ratio = math.exp(d) if d < _LOG_MAX else math.inf
    return TailPoint(lu, x_u, log_joint, log_exact, log_asym, ratio, branch_of(law))


def lambda_u_exact(law: BivSkewNormalLaw, log_one_minus_u) -> TailPoint:
    """``lambda_U(u)`` of X as ``lambda_L(1 - u)`` of ``-X ~ SN2(-theta, R)``."""
    return lambda_l_exact(law.reflected(), log_one_minus_u)


def tail_table(law: BivSkewNormalLaw, log_u_grid, tail="lower"):
    fn = {"lower": lambda_l_exact, "upper": lambda_u_exact}[tail]
    return [fn(law, lu) for lu in log_u_grid]


# ---------------------------------------------------------------------------
# diagonal copula derivative and the de Haan averaging step


def log_conditional_tail_derivative(law: BivSkewNormalLaw, x) -> LogProb:
    """log of ``d C(u,u)/du = 2 P(X2 <= x | X1 = x)`` at ``u = F1(x)``."""
    x = float(sf._finite(x, "x"))
    theta, rho, lam = law.theta, law.rho, law.lam
    upper = math.sqrt((1.0 - rho) / (1.0 + rho)) * x
    slope = theta * math.sqrt(1.0 - rho * rho)
    shift = theta * (1.0 + rho) * x

    def logf(s):
        z = upper - s
        return -0.5 * z * z - LOG_SQRT_2PI + sf.log_std_normal_cdf(slope * z + shift)

    est, _ = log_integrate_semi_infinite(logf, law.quad)
    return min(LOG_2 + float(est) - sf.log_std_normal_cdf(lam * x), LOG_2)


def conditional_tail_derivative(law: BivSkewNormalLaw, x) -> float:
    return math.exp(log_conditional_tail_derivative(law, x))


class DeHaanCheck(NamedTuple):
    lhs: float
    rhs: float

    @property
    def gap(self):
        return abs(self.lhs - self.rhs)


def de_haan_check(law: BivSkewNormalLaw, log_u) -> DeHaanCheck:
    """Compare ``log lambda_L(u)`` with ``log(C'(u) / (tau + 1))``, ``tau = (1-rho)/(1+rho)``."""
    if law.theta > 0:
        raise UnsupportedBranchError("the averaging route is used for theta <= 0")
    point = lambda_l_exact(law, log_u)
    tau = (1.0 - law.rho) / (1.0 + law.rho)
    rhs = log_conditional_tail_derivative(law, point.x_u) - math.log1p(tau)
    return DeHaanCheck(point.log_lambda_exact, rhs)


# ---------------------------------------------------------------------------
# Monte Carlo


class MCEstimate(NamedTuple):
    estimate: float
    standard_error: float


def estimate_lambda_l_mc(law: BivSkewNormalLaw, u, n, seed) -> MCEstimate:
    """Empirical ``P(X1 <= q, X2 <= q) / P(X2 <= q)`` at the exact margin quantile ``q``."""
    u = float(u)
    n = int(n)
    if not 1e-4 <= u < 0.5:
        raise DomainError("Monte Carlo estimation needs 1e-4 <= u < 1/2")
    if n < 10_000:
        raise DomainError("Monte Carlo estimation needs n >= 1e4")
    q = sn_quantile(law.marginal(), math.log(u))
    both = cond = 0
    for start in range(0, n, _MC_CHUNK):
        rows = sample(law, min(_MC_CHUNK, n - start), seed, start=start).rows
        second = rows[:, 1] <= q
        cond += int(second.sum())
        both += int((second & (rows[:, 0] <= q)).sum())
    if cond == 0:
        raise InsufficientSamplesError("no sample fell below the margin quantile")
    p = both / cond
    return MCEstimate(p, math.sqrt(p * (1.0 - p) / cond))


# ---------------------------------------------------------------------------
# tail order


@dataclass(frozen=True)
class TailOrderFit:
    """Least-squares fit of ``log C(u,u) = kappa log u + m log(-log u) + c``."""

    kappa_hat: float
    slope_se: float
    grid: tuple
    loglog_coef: float = 0.0
    intercept: float = 0.0


def kappa_target(law: BivSkewNormalLaw) -> float:
    """Tail order implied by the closed-form rates: ``1 + beta^2`` or ``2/(1+rho)``."""
    if law.theta > 0:
        return 1.0 + law.beta**2
    return 2.0 / (1.0 + law.rho)


def fit_tail_order(law: BivSkewNormalLaw, log_u_grid, loglog=True) -> TailOrderFit:
    """Estimate the lower tail order from exact ``C(u,u)`` on a grid of ``log u``.

    With ``loglog`` the regression carries a ``log(-log u)`` column that
    absorbs the slowly varying factor.
    """
    lus = np.sort(np.asarray([_check_log_u(v) for v in log_u_grid]))[::-1]
    if lus.size < 4:
        raise DomainError("tail-order fit needs at least 4 grid points")
    if np.unique(lus).size != lus.size:
        raise DomainError("grid points must be distinct")
    if (lus[0] - lus[-1]) / math.log(10.0) < 4.0 - 1e-9:
        raise DomainError("grid must span at least 4 decades of u")
    points = tuple(lambda_l_exact(law, lu) for lu in lus)
    y = np.array([p.log_joint for p in points])
    cols = [lus]
    if loglog:
        cols.append(np.log(-lus))
    cols.append(np.ones_like(lus))
    design = np.column_stack(cols)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    dof = lus.size - design.shape[1]
    resid = y - design @ coef
    if dof > 0:
        sigma2 = float(resid @ resid) / dof
        cov = sigma2 * np.linalg.inv(design.T @ design)
        se = math.sqrt(max(cov[0, 0], 0.0))
    else:
        se = 0.0
    return TailOrderFit(
        kappa_hat=float(coef[0]),
        slope_se=se,
        grid=points,
        loglog_coef=float(coef[1]) if loglog else 0.0,
        intercept=float(coef[-1]),
    )
