"""Invariant suites run by ``sntail verify``.

Each suite returns a :class:`SuiteResult` with the worst measured gap, so a
report shows how far from the threshold a property sits, not just a flag.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import specfun as sf
from .bivariate import BivSkewNormalLaw, joint_diag_log_cdf, sample_z_star
from .errors import SNTailError
from .taildep import (
    conditional_tail_derivative,
    lambda_l_exact,
    lambda_u_exact,
)
from .univariate import (
    SkewNormalLaw,
    capitanio_bounds,
    log_cdf_batch,
    sn_cdf,
    sn_log_cdf,
    sn_log_tail_cdf,
    sn_quantile,
    sn_quantile_asymptotic,
    tail_form_coefficients,
)

LOG10 = math.log(10.0)
DECADES = (-4, -6, -8, -10, -12)


@dataclass
class SuiteResult:
    name: str
    module: str
    status: str  # "pass", "fail" or "skipped"
    measured: float
    threshold: float
    detail: str = ""
    seconds: float = 0.0

    def row(self):
        return {"suite": self.name, "module": self.module, "status": self.status,
                "measured": self.measured, "threshold": self.threshold,
                "detail": self.detail, "seconds": self.seconds}


SUITES = {}


def suite(name, module):
    def register(fn):
        SUITES[name] = (module, fn)
        return fn
    return register


def _strictly_decreasing(vals):
    return all(b < a for a, b in zip(vals, vals[1:]))


# ---------------------------------------------------------------------------
# specfun


@suite("normal-symmetry", "specfun")
def _normal_symmetry():
    z = np.linspace(-8.0, 8.0, 321)
    gap = float(np.max(np.abs(sf.std_normal_cdf(z) + sf.std_normal_cdf(-z) - 1.0)))
    return gap, 1e-15, ""


@suite("owen-t-symmetry", "specfun")
def _owen_symmetry():
    rng = np.random.default_rng(0)
    h = rng.uniform(-6, 6, 100)
    a = rng.uniform(-5, 5, 100)
    t = sf.owen_t(h, a)
    gap = max(float(np.max(np.abs(sf.owen_t(-h, a) - t))),
              float(np.max(np.abs(sf.owen_t(h, -a) + t))))
    return gap, 1e-14, "T(-h,a)=T(h,a), T(h,-a)=-T(h,a) on 100 pairs"


@suite("lambert-w-roundtrip", "specfun")
def _lambert_roundtrip():
    z = np.logspace(-3, 12, 301)
    w = sf.lambert_w0(z)
    gap = float(np.max(np.abs(w * np.exp(w) - z) / np.maximum(1.0, z)))
    return gap, 1e-14, ""


@suite("tail-form-residual", "specfun")
def _tail_form_residual():
    # the W-based inverse is exact up to rounding; the expanded inverse drops a
    # log-log term, so its residual is the one that visibly decays
    worst = 0.0
    ok = True
    for lam in (-2, -1, 1, 2):
        coeffs = tail_form_coefficients(SkewNormalLaw(lam))
        expanded = []
        for k in DECADES:
            lu = k * LOG10
            g = sf.solve_tail_form(coeffs, log_u=lu)
            worst = max(worst, abs(math.expm1(coeffs.log_u(g) - lu)))
            ge = sf.solve_tail_form_expanded(coeffs, log_u=lu)
            expanded.append(abs(math.expm1(coeffs.log_u(ge) - lu)))
        ok &= _strictly_decreasing(expanded)
    detail = "expanded residual strictly decreasing" if ok else "expanded residual not monotone"
    return worst, 1e-13, detail, ok and worst <= 1e-13


# ---------------------------------------------------------------------------
# sn-univariate


@suite("capitanio-sandwich", "sn-univariate")
def _sandwich():
    worst = math.inf
    bad = []
    for lam in (-2, -0.5, 0.5, 2):
        law = SkewNormalLaw(lam)
        for z in range(-3, -13, -1):
            lo, hi = capitanio_bounds(law, z)
            v = sn_log_tail_cdf(law, z)
            margin = min(v - lo, hi - v)
            worst = min(worst, margin)
            if margin <= 0:
                bad.append((lam, z))
    return worst, 0.0, f"violations: {bad}" if bad else "", not bad


@suite("quantile-roundtrip", "sn-univariate")
def _roundtrip():
    us = np.logspace(-12, math.log10(0.4), 30)
    worst = 0.0
    for lam in (-2, -1, 1, 2):
        law = SkewNormalLaw(lam)
        for u in us:
            lu = math.log(u)
            worst = max(worst, abs(sn_log_cdf(law, sn_quantile(law, lu)) - lu))
    return worst, 1e-9, ""


@suite("quantile-squared-gap", "sn-univariate")
def _squared_gap():
    details = []
    ok = True
    worst = 0.0
    for lam in (-2, -1, 1, 2):
        law = SkewNormalLaw(lam)
        gaps = []
        for k in DECADES:
            lu = k * LOG10
            gaps.append(abs(sn_quantile(law, lu) ** 2 - sn_quantile_asymptotic(law, lu) ** 2))
        mono = _strictly_decreasing(gaps[1:])
        ok &= mono
        worst = max(worst, gaps[-1])
        if not mono:
            details.append(f"lam={lam}: {[round(g, 5) for g in gaps[1:]]}")
    return worst, math.inf, "non-monotone " + "; ".join(details) if details else "", ok


@suite("sn-reflection", "sn-univariate")
def _reflection():
    z = np.linspace(-6, 6, 49)
    worst = 0.0
    for lam in (-2, -0.5, 0.5, 2):
        s = sn_cdf(SkewNormalLaw(lam), z) + sn_cdf(SkewNormalLaw(-lam), -z)
        worst = max(worst, float(np.max(np.abs(s - 1.0))))
    return worst, 1e-13, ""


# ---------------------------------------------------------------------------
# sn-bivariate

MIXTURE_GRID_LAWS = ((1, 0), (1, 0.5), (-1, 0), (-1, 0.5), (2, -0.3))
MIXTURE_GRID_X = (-4, -2, -1, 0, 1)


@suite("mixture-vs-quadrature", "sn-bivariate")
def _mixture_consistency():
    worst = 0.0
    for theta, rho in MIXTURE_GRID_LAWS:
        law = BivSkewNormalLaw(theta, rho)
        for x in MIXTURE_GRID_X:
            a = joint_diag_log_cdf(law, x, method="mixture")
            b = joint_diag_log_cdf(law, x, method="quadrature")
            worst = max(worst, abs(a - b))
    return worst, 1e-8, "25-point grid"


@suite("joint-monotone-frechet", "sn-bivariate")
def _monotone_frechet():
    xs = np.linspace(-6, 2, 17)
    ok = True
    worst = -math.inf
    for theta, rho in MIXTURE_GRID_LAWS + ((0, 0.3),):
        law = BivSkewNormalLaw(theta, rho)
        vals = [joint_diag_log_cdf(law, x) for x in xs]
        marg = log_cdf_batch(law.lam, xs, law.quad)
        ok &= all(b > a for a, b in zip(vals, vals[1:]))
        excess = float(np.max(np.array(vals) - marg))
        worst = max(worst, excess)
        ok &= excess <= 0.0
    return worst, 0.0, "max(log joint - log margin)", ok


@suite("max-law-ks", "sn-bivariate")
def _max_law():
    worst = math.inf
    for theta, rho in ((1, 0), (-1, 0.5)):
        law = BivSkewNormalLaw(theta, rho)
        zs = sample_z_star(law, 100_000, seed=20240)
        m = zs.max(axis=1)
        beta_law = SkewNormalLaw(law.beta)
        p = stats.kstest(m, lambda t: sn_cdf(beta_law, t)).pvalue
        worst = min(worst, p)
    return worst, 0.01, "min KS p-value", worst > 0.01


# ---------------------------------------------------------------------------
# taildep


def _ratio_suite(laws, band):
    ok = True
    notes = []
    worst = 0.0
    for theta, rho in laws:
        law = BivSkewNormalLaw(theta, rho)
        ratios = [lambda_l_exact(law, k * LOG10).ratio for k in DECADES]
        errs = [abs(math.log(r)) for r in ratios]
        mono = _strictly_decreasing(errs)
        inside = band[0] <= ratios[-1] <= band[1]
        ok &= mono and inside
        worst = max(worst, errs[-1])
        if not (mono and inside):
            notes.append(f"({theta},{rho}): |log ratio|={[round(e, 4) for e in errs]}"
                         f" terminal={ratios[-1]:.4f}")
    return worst, math.log(band[1]), "; ".join(notes), ok


@suite("ratio-convergence-a", "taildep")
def _ratio_a():
    return _ratio_suite(((1, 0), (0.5, 0.5), (2, -0.3)), (0.7, 1.3))


@suite("ratio-convergence-b", "taildep")
def _ratio_b():
    return _ratio_suite(((-1, 0), (-1, 0.5), (-0.5, 0.25)), (0.8, 1.25))


@suite("exponent-factor-identity", "taildep")
def _factor_identity():
    worst = 0.0
    for theta in np.linspace(-3, 3, 13):
        for rho in np.linspace(-0.9, 0.9, 13):
            law = BivSkewNormalLaw(theta, rho)
            tau = (1 - rho) / (1 + rho)
            worst = max(worst, abs(law.beta**2 - tau * (1 + 2 * theta**2 * (1 + rho))))
    return worst, 1e-14 * 100, "relative to magnitudes up to ~100"


@suite("upper-tail-reflection", "taildep")
def _reflection_tail():
    law = BivSkewNormalLaw(1.0, 0.3)
    mismatches = 0
    for lv in np.linspace(math.log(1e-2), math.log(1e-11), 10):
        if lambda_u_exact(law, lv) != lambda_l_exact(law.reflected(), lv):
            mismatches += 1
    return float(mismatches), 0.0, "bitwise TailPoint equality", mismatches == 0


@suite("copula-derivative", "taildep")
def _copula_derivative():
    worst = 0.0
    for theta, rho in ((1, 0), (0.5, 0.5), (2, -0.3), (-1, 0), (-1, 0.5), (-0.5, 0.25)):
        law = BivSkewNormalLaw(theta, rho)
        marg = law.marginal()
        for x in (-4.0, -3.0, -2.0, -1.0):
            lu = sn_log_cdf(marg, x)
            d = 1e-4
            up, lo = lu + math.log1p(d), lu + math.log1p(-d)
            jp = math.exp(joint_diag_log_cdf(law, sn_quantile(marg, up)))
            jm = math.exp(joint_diag_log_cdf(law, sn_quantile(marg, lo)))
            fd = (jp - jm) / (math.exp(up) - math.exp(lo))
            worst = max(worst, abs(conditional_tail_derivative(law, x) / fd - 1.0))
    return worst, 0.01, "relative gap vs finite difference"


@suite("rho-ordering", "taildep")
def _rho_ordering():
    vals = [lambda_l_exact(BivSkewNormalLaw(-1.0, r), math.log(1e-3)).lambda_exact
            for r in np.linspace(-0.8, 0.8, 9)]
    ok = all(b > a for a, b in zip(vals, vals[1:]))
    return min(b - a for a, b in zip(vals, vals[1:])), 0.0, "min increment", ok


# ---------------------------------------------------------------------------


def run_suites(names=None):
    """Run the named suites (all when ``names`` is empty) in registry order."""
    selected = list(SUITES) if not names else list(names)
    results = []
    for name in selected:
        if name not in SUITES:
            results.append(SuiteResult(name, "?", "skipped", math.nan, math.nan,
                                       "unknown suite"))
            continue
        module, fn = SUITES[name]
        start = time.perf_counter()
        try:
            out = fn()
        except SNTailError as exc:
            results.append(SuiteResult(name, module, "fail", math.nan, math.nan,
                                       f"{type(exc).__name__}: {exc}",
                                       time.perf_counter() - start))
            continue
        measured, threshold, detail = out[:3]
        passed = out[3] if len(out) > 3 else measured <= threshold
        results.append(SuiteResult(name, module, "pass" if passed else "fail",
                                   float(measured), float(threshold), detail,
                                   time.perf_counter() - start))
    return results
