"""Scalar special-function kernels.

Standard normal pdf/cdf/log-cdf, Owen's T, the principal branch of the
Lambert W function, the Lambert-W inversion of tail equations of the form
``u = a |g|**b * exp(-c |g|**d)``, and exact/asymptotic normal quantiles.

Every function accepts a float or an ndarray and returns the same kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NewType

import numpy as np
from scipy import special

from .errors import DomainError, OutOfAsymptoticRangeError

LogProb = NewType("LogProb", float)
"""Natural log of a probability, a float in ``[-inf, 0]``."""

LOG_2PI = math.log(2.0 * math.pi)
LOG_SQRT_2PI = 0.5 * LOG_2PI
SQRT_2 = math.sqrt(2.0)

# below this z the log-cdf goes through the scaled complementary error function
_LOG_CDF_TAIL_SWITCH = -8.0


def _finite(x, name="argument"):
    arr = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {x!r}")
    return arr


def _out(arr, like):
    """Return a Python float when the caller passed a scalar."""
    if np.ndim(like) == 0:
        return float(arr)
    return arr


def resolve_log_u(u=None, log_u=None):
    """Return ``log(u)`` given exactly one of ``u`` or ``log_u``."""
    if (u is None) == (log_u is None):
        raise TypeError("pass exactly one of u or log_u")
    if log_u is None:
        u = float(u)
        if not 0.0 < u < 1.0:
            raise DomainError(f"u must lie in (0, 1), got {u!r}")
        return math.log(u)
    log_u = float(log_u)
    if not (math.isfinite(log_u) and log_u < 0.0):
        raise DomainError(f"log_u must be finite and negative, got {log_u!r}")
    return log_u


def std_normal_pdf(z):
    z_ = _finite(z, "z")
    return _out(np.exp(-0.5 * z_ * z_ - LOG_SQRT_2PI), z)


def log_std_normal_pdf(z):
    z_ = _finite(z, "z")
    return _out(-0.5 * z_ * z_ - LOG_SQRT_2PI, z)


def std_normal_cdf(z):
    """Standard normal cdf ``Phi(z)``."""
    z_ = _finite(z, "z")
    return _out(special.ndtr(z_), z)


def log_std_normal_cdf(z):
    """``log Phi(z)`` without underflow.

    For ``z <= -8`` the value is assembled from the Mills ratio
    ``Phi(z) / phi(z) = sqrt(pi/2) * erfcx(-z / sqrt(2))`` so the result stays
    finite far below the point where ``Phi(z)`` itself underflows.  For
    positive ``z`` the complement is used through ``log1p``.
    """
    z_ = _finite(z, "z")
    out = np.empty_like(z_)
    tail = z_ <= _LOG_CDF_TAIL_SWITCH
    upper = z_ > 0.0
    mid = ~(tail | upper)
    zt = z_[tail]
    out[tail] = -0.5 * zt * zt + np.log(0.5 * special.erfcx(-zt / SQRT_2))
    out[mid] = np.log(special.ndtr(z_[mid]))
    out[upper] = np.log1p(-special.ndtr(-z_[upper]))
    return _out(out, z)


def owen_t(h, a):
    """Owen's T function ``T(h, a) = (1/2pi) int_0^a exp(-h^2 (1+x^2)/2) / (1+x^2) dx``.

    Backed by :func:`scipy.special.owens_t` (Patefield-Tandy region switching).
    """
    h_ = _finite(h, "h")
    a_ = _finite(a, "a")
    res = special.owens_t(h_, a_)
    return _out(res, res)


# ---------------------------------------------------------------------------
# Lambert W, principal branch on the nonnegative axis


def _halley_w(z, w):
    # Halley iteration on w e^w - z; cubic convergence from the seeds below.
    for _ in range(64):
        ew = np.exp(w)
        f = w * ew - z
        wp1 = w + 1.0
        step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1))
        w = w - step
        if np.all(np.abs(step) <= 1e-16 * (1.0 + np.abs(w))):
            return w
    return w


def lambert_w0(z):
    """Principal branch ``W(z)`` for ``z >= 0``.

    Seeded with ``log(1 + z)`` below ``e`` and with ``log z - log log z``
    above it, then refined by Halley's method.
    """
    z_ = _finite(z, "z")
    if np.any(z_ < 0.0):
        raise DomainError("lambert_w0 is only defined here for z >= 0")
    z_ = np.atleast_1d(z_)
    big = z_ > math.e
    seed = np.log1p(z_)
    lz = np.log(z_[big])
    seed[big] = lz - np.log(lz)
    w = _halley_w(z_, seed)
    w[z_ == 0.0] = 0.0
    return _out(w.reshape(np.shape(z)), z)


def lambert_w0_from_log(log_z):
    """``W(exp(log_z))`` for arguments whose linear value would overflow."""
    lz = float(log_z)
    if not math.isfinite(lz):
        raise DomainError(f"log_z must be finite, got {log_z!r}")
    if lz < 700.0:
        return lambert_w0(math.exp(lz))
    # w + log w = lz, Halley on g(w) = w + log w - lz
    w = lz - math.log(lz)
    for _ in range(64):
        g = w + math.log(w) - lz
        g1 = 1.0 + 1.0 / w
        g2 = -1.0 / (w * w)
        step = g / (g1 - 0.5 * g * g2 / g1)
        w -= step
        if abs(step) <= 1e-16 * (1.0 + w):
            break
    return w


# ---------------------------------------------------------------------------
# Tail-form inversion  u = a |g|^b exp(-c |g|^d)


@dataclass(frozen=True)
class TailFormCoefficients:
    """Coefficients of ``u = a |g|**b * exp(-c |g|**d)`` with a, c, d > 0 and b < 0."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("a", "b", "c", "d"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not (self.a > 0 and self.c > 0 and self.d > 0 and self.b < 0):
            raise DomainError("need a, c, d > 0 and b < 0")

    def log_u(self, g):
        """Forward map: ``log(a |g|^b exp(-c |g|^d))``."""
        ag = np.abs(np.asarray(g, dtype=float))
        val = math.log(self.a) + self.b * np.log(ag) - self.c * ag**self.d
        return _out(val, g)

    def log_lambert_argument(self, log_u):
        """``log( (cd/|b|) (a/u)^(d/|b|) )``."""
        k = self.c * self.d / abs(self.b)
        return math.log(k) + (self.d / abs(self.b)) * (math.log(self.a) - log_u)


def _tail_form_log_arg(coeffs, log_u):
    log_arg = coeffs.log_lambert_argument(log_u)
    if log_arg < 1.0:
        raise OutOfAsymptoticRangeError(
            f"Lambert W argument exp({log_arg:.4g}) is below e; u is too large"
        )
    return log_arg


def solve_tail_form(coeffs: TailFormCoefficients, u=None, *, log_u=None) -> float:
    """Solve ``u = a |g|^b exp(-c |g|^d)`` for ``g < 0`` through Lambert W.

    ``(cd/|b|) |g|^d = W((cd/|b|) (a/u)^(d/|b|))``; the full W value is used.
    """
    lu = resolve_log_u(u, log_u)
    k = coeffs.c * coeffs.d / abs(coeffs.b)
    w = lambert_w0_from_log(_tail_form_log_arg(coeffs, lu))
    return -((w / k) ** (1.0 / coeffs.d))


def solve_tail_form_expanded(coeffs: TailFormCoefficients, u=None, *, log_u=None) -> float:
    """Same inversion with W replaced by its two-term expansion ``log z - log log z``."""
    lu = resolve_log_u(u, log_u)
    k = coeffs.c * coeffs.d / abs(coeffs.b)
    log_arg = _tail_form_log_arg(coeffs, lu)
    return -(((log_arg - math.log(log_arg)) / k) ** (1.0 / coeffs.d))


# ---------------------------------------------------------------------------
# Standard normal quantiles


def std_normal_quantile(u=None, *, log_u=None) -> float:
    """Exact ``Phi^{-1}(u)``; pass ``log_u`` for arguments below ~1e-300."""
    if log_u is not None:
        lu = resolve_log_u(log_u=log_u)
        return float(special.ndtri_exp(lu))
    u = float(u)
    if not 0.0 < u < 1.0:
        raise DomainError(f"u must lie in (0, 1), got {u!r}")
    return float(special.ndtri(u))


def std_normal_quantile_asymptotic(u=None, *, log_u=None) -> float:
    """``-sqrt(-2 log(u sqrt(-4 pi log u)))``, valid for ``u <= 0.1``."""
    lu = resolve_log_u(u, log_u)
    if lu > math.log(0.1):
        raise DomainError("asymptotic normal quantile needs u <= 0.1")
    inner = lu + 0.5 * math.log(-4.0 * math.pi * lu)
    if inner >= 0.0:
        raise OutOfAsymptoticRangeError("inner logarithm is nonnegative")
    return -math.sqrt(-2.0 * inner)
