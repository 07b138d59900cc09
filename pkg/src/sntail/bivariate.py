"""The equi-skewed bivariate skew normal SN2(theta, R).

Density ``2 phi2(x; R) Phi(theta (x1 + x2))`` with ``R = [[1, rho], [rho, 1]]``.
The law is also the normal mean mixture ``X = alpha V + Z`` with ``V``
half-normal and ``Z ~ N(0, Psi)`` independent of it; this gives a 1-D route
to the diagonal joint cdf and a sampler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import specfun as sf
from .errors import ConvergenceError, DomainError, UnsupportedBranchError
from .quadrature import (
    DEFAULT_QUAD,
    QuadSpec,
    log_integrate_quadrant,
    log_integrate_semi_infinite,
)
from .specfun import LOG_2PI, LOG_SQRT_2PI, LogProb
from .univariate import LOG_2, SkewNormalLaw, log_cdf_batch, marginal_lambda

LOG_SQRT_2_OVER_PI = 0.5 * math.log(2.0 / math.pi)


@dataclass(frozen=True)
class BivSkewNormalLaw:
    """SN2(theta, R) with common skew ``theta`` and correlation ``rho``.

    Derived attributes: ``lam`` (shape of each margin), ``alpha`` (mixing
    coefficient of the half-normal), ``beta`` (shape of the maximum of the
    standardized Gaussian pair) and ``psi`` (covariance of the Gaussian part).
    """

    theta: float
    rho: float
    quad: QuadSpec = field(default=DEFAULT_QUAD, compare=False)
    lam: float = field(init=False)
    alpha: float = field(init=False)
    beta: float = field(init=False)
    psi: tuple = field(init=False)

    def __post_init__(self):
        theta, rho = float(self.theta), float(self.rho)
        if not math.isfinite(theta):
            raise DomainError("theta must be finite")
        if not (math.isfinite(rho) and abs(rho) < 1.0):
            raise DomainError(f"|rho| must be < 1, got {self.rho!r}")
        t2 = theta * theta
        alpha = theta * (1.0 + rho) / math.sqrt(1.0 + 2.0 * t2 * (1.0 + rho))
        beta = math.sqrt((1.0 - rho) * (1.0 + 2.0 * t2 * (1.0 + rho)) / (1.0 + rho))
        a2 = alpha * alpha
        # Psi = R - alpha^2 * ones
        psi = ((1.0 - a2, rho - a2), (rho - a2, 1.0 - a2))
        for name, value in (("theta", theta), ("rho", rho), ("lam", marginal_lambda(theta, rho)),
                            ("alpha", alpha), ("beta", beta), ("psi", psi)):
            object.__setattr__(self, name, value)

    @property
    def psi_matrix(self):
        return np.array(self.psi)

    @property
    def scale(self):
        """``alpha / lam``, the common standard deviation of ``Z``; 1 when ``theta = 0``."""
        if self.theta == 0.0:
            return 1.0
        return self.alpha / self.lam

    @property
    def z_star_corr(self):
        """Correlation of the standardized Gaussian pair ``Z / (alpha/lam)``."""
        return self.psi[0][1] / self.psi[0][0]

    def marginal(self) -> SkewNormalLaw:
        return SkewNormalLaw(self.lam, self.quad)

    def reflected(self) -> "BivSkewNormalLaw":
        """Law of ``-X``, i.e. SN2(-theta, R)."""
        return BivSkewNormalLaw(-self.theta, self.rho, self.quad)


def derive_params(theta, rho, quad: QuadSpec = DEFAULT_QUAD) -> BivSkewNormalLaw:
    return BivSkewNormalLaw(theta, rho, quad)


def _log_phi2(a, b, rho):
    r2 = 1.0 - rho * rho
    return -(a * a - 2.0 * rho * a * b + b * b) / (2.0 * r2) - LOG_2PI - 0.5 * math.log(r2)


def biv_log_pdf(law: BivSkewNormalLaw, x1, x2):
    x1_ = sf._finite(x1, "x1")
    x2_ = sf._finite(x2, "x2")
    val = LOG_2 + _log_phi2(x1_, x2_, law.rho) + sf.log_std_normal_cdf(law.theta * (x1_ + x2_))
    return sf._out(val, val)


def biv_pdf(law: BivSkewNormalLaw, x1, x2):
    """``2 phi2((x1, x2); R) Phi(theta (x1 + x2))``."""
    return sf._out(np.exp(biv_log_pdf(law, x1, x2)), np.broadcast_to(x1, np.shape(x2)))


# ---------------------------------------------------------------------------
# diagonal joint cdf  P(X1 <= x, X2 <= x)


def _joint_mixture(law, x):
    # E_V[ F_SN(beta)((x - alpha V) / (alpha/lam)) ], V half-normal
    spec = law.quad
    inv_scale = law.lam / law.alpha

    def logf(v):
        w = (x - law.alpha * v) * inv_scale
        return LOG_SQRT_2_OVER_PI - 0.5 * v * v + log_cdf_batch(law.beta, w, spec)

    est, info = log_integrate_semi_infinite(logf, spec)
    return float(est), info


def _joint_quadrant(law, x):
    theta, rho = law.theta, law.rho

    def logf2(s1, s2):
        a = x - s1
        b = x - s2
        return LOG_2 + _log_phi2(a, b, rho) + sf.log_std_normal_cdf(theta * (a + b))

    return log_integrate_quadrant(logf2, law.quad)


def _joint_orthant(law, x):
    # bivariate normal orthant: int_{-inf}^x phi(t) Phi((x - rho t)/sqrt(1 - rho^2)) dt
    rho = law.rho
    sr = math.sqrt(1.0 - rho * rho)

    def logf(s):
        t = x - s
        return -0.5 * t * t - LOG_SQRT_2PI + sf.log_std_normal_cdf((x - rho * t) / sr)

    est, info = log_integrate_semi_infinite(logf, law.quad)
    return float(est), info


METHODS = ("auto", "mixture", "quadrature", "orthant")


def joint_diag_log_cdf(law: BivSkewNormalLaw, x, method="auto") -> LogProb:
    """``log P(X1 <= x, X2 <= x)``.

    Parameters
    ----------
    method : {"auto", "mixture", "quadrature", "orthant"}
        ``"mixture"`` integrates the SN(beta) cdf against the half-normal
        (needs ``theta != 0``); ``"quadrature"`` integrates the density over
        the quadrant on a tensor rule; ``"orthant"`` is the ``theta = 0``
        bivariate normal reduction.  ``"auto"`` picks the mixture for
        ``theta != 0`` and the orthant otherwise, falling back to the
        quadrant rule if the mixture fails.
    """
    x = float(sf._finite(x, "x"))
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}")
    if method == "orthant" and law.theta != 0.0:
        raise DomainError("the orthant reduction needs theta = 0")
    if method == "mixture" and law.theta == 0.0:
        raise DomainError("the mixture route needs theta != 0")
    if method == "auto":
        if law.theta == 0.0:
            return _joint_orthant(law, x)[0]
        try:
            return _joint_mixture(law, x)[0]
        except ConvergenceError as err_a:
            try:
                return _joint_quadrant(law, x)[0]
            except ConvergenceError as err_b:
                raise ConvergenceError(
                    "both joint-cdf methods failed",
                    {"mixture": err_a.diagnostics, "quadrature": err_b.diagnostics},
                ) from err_b
    route = {"mixture": _joint_mixture, "quadrature": _joint_quadrant,
             "orthant": _joint_orthant}[method]
    return min(route(law, x)[0], 0.0)


def joint_diag_tail_asymptotic(law: BivSkewNormalLaw, x) -> LogProb:
    """Log of the leading term of ``P(X1 <= x, X2 <= x)`` as ``x -> -inf``, ``theta > 0``.

    ``alpha^3 / (pi lam^4 beta (1+beta^2)^2) sqrt(2/pi) |x|^-3
    exp(-(lam^2 / (2 alpha^2)) (1 + beta^2) x^2)``.
    """
    x = float(sf._finite(x, "x"))
    if not law.theta > 0.0:
        raise UnsupportedBranchError("the mixture tail asymptote covers theta > 0 only")
    if not x < 0.0:
        raise DomainError("x must be negative")
    a, lam, b = law.alpha, law.lam, law.beta
    b2 = b * b
    log_const = (3.0 * math.log(a) - math.log(math.pi) - 4.0 * math.log(lam) - math.log(b)
                 - 2.0 * math.log1p(b2) + LOG_SQRT_2_OVER_PI)
    rate = lam * lam / (2.0 * a * a) * (1.0 + b2)
    return log_const - 3.0 * math.log(-x) - rate * x * x


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SampleBatch:
    """Rows ``start .. start + n - 1`` of the stream keyed by ``seed``."""

    n: int
    seed: int
    rows: np.ndarray
    start: int = 0


_HALF_ULP = 2.0**-54


def _uniform_blocks(n, seed, start):
    # Philox is counter based: row i consumes exactly counter block i (4 doubles)
    bitgen = np.random.Philox(key=int(seed) % 2**64)
    if start:
        bitgen.advance(int(start))
    return np.random.Generator(bitgen).random((n, 4)) + _HALF_ULP


def _mixture_parts(law, n, seed, start):
    u = _uniform_blocks(n, seed, start)
    v = np.abs(special.ndtri(u[:, 0]))
    e1 = special.ndtri(u[:, 1])
    e2 = special.ndtri(u[:, 2])
    # elementwise Cholesky factor of Psi; a BLAS matmul could round differently
    # depending on the batch shape, breaking per-row reproducibility
    (p11, p12), (_, p22) = law.psi
    l11 = math.sqrt(p11)
    l21 = p12 / l11
    l22 = math.sqrt(max(p22 - l21 * l21, 0.0))
    z = np.column_stack([l11 * e1, l21 * e1 + l22 * e2])
    return v, z


def sample(law: BivSkewNormalLaw, n, seed, start=0) -> SampleBatch:
    """Draw ``X = alpha V + Z`` rows; reproducible for fixed ``(seed, start, n)``.

    Any row depends only on ``seed`` and its index, so a long stream can be
    generated in independent chunks via ``start``.
    """
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    v, z = _mixture_parts(law, n, seed, start)
    rows = law.alpha * v[:, None] + z
    return SampleBatch(n=n, seed=int(seed), rows=rows, start=int(start))


def sample_z_star(law: BivSkewNormalLaw, n, seed, start=0) -> np.ndarray:
    """The standardized Gaussian pairs ``Z / (alpha/lam)`` behind :func:`sample`."""
    _, z = _mixture_parts(law, int(n), seed, start)
    return z / law.scale
