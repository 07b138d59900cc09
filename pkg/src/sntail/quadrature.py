"""Log-domain Gauss-Legendre quadrature for semi-infinite tail integrals.

Tail probabilities here are integrals of ``exp(logf(s))`` over ``s >= 0``
where the integrand may sit hundreds of nats below zero.  Nodes are laid
out on panels graded geometrically away from ``s = 0`` (so an integrand
decaying at any rate is resolved) and capped at unit width further out;
the sum is accumulated with log-sum-exp.  The panel order is doubled
until two successive estimates agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp

from .errors import ConvergenceError, DomainError

FIRST_PANEL = 2.0**-14
MAX_PANEL_WIDTH = 1.0
START_ORDER = 16


@dataclass(frozen=True)
class QuadSpec:
    """Quadrature and root-finding policy.

    Attributes
    ----------
    rel_tol : float
        Target relative error of a probability, i.e. absolute error of its log.
    abs_log_tol : float
        Tolerance on the log scale used by quantile inversion.
    max_nodes : int
        Node budget of one 1-D integral (per axis for 2-D integrals).
    bracket_margin : float
        Multiplicative margin around asymptotic quantile seeds.
    """

    rel_tol: float = 1e-12
    abs_log_tol: float = 1e-10
    max_nodes: int = 4096
    bracket_margin: float = 1.5

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_log_tol > 0 and self.bracket_margin > 0):
            raise DomainError("QuadSpec tolerances and margin must be positive")
        if self.bracket_margin <= 1.0:
            raise DomainError("bracket_margin must exceed 1")
        if int(self.max_nodes) != self.max_nodes or self.max_nodes < 64:
            raise DomainError("max_nodes must be an integer >= 64")


DEFAULT_QUAD = QuadSpec()


@lru_cache(maxsize=None)
def _legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def graded_breaks(length):
    """Panel edges on ``[0, length]``: geometric up to 1, unit steps afterwards."""
    if not length > 0:
        raise DomainError("integration length must be positive")
    geo_top = min(length, MAX_PANEL_WIDTH)
    n_geo = max(1, int(math.ceil(math.log2(geo_top / FIRST_PANEL))))
    geo = geo_top * 2.0 ** np.arange(-n_geo, 1)
    breaks = np.concatenate([[0.0], geo])
    if length > geo_top:
        n_uni = int(math.ceil((length - geo_top) / MAX_PANEL_WIDTH))
        breaks = np.concatenate([breaks, np.linspace(geo_top, length, n_uni + 1)[1:]])
    return breaks


def panel_rule(breaks, order):
    """Composite Gauss-Legendre nodes and log-weights on the given panels."""
    x, w = _legendre(order)
    lo = breaks[:-1, None]
    half = 0.5 * np.diff(breaks)[:, None]
    nodes = (lo + half * (x + 1.0)).ravel()
    log_w = (np.log(half) + np.log(w)).ravel()
    return nodes, log_w


def _scan_grid(limit):
    fine = np.linspace(0.0, 1.0, 65)
    coarse = 1.0 + 0.25 * np.arange(1, int(4 * (limit - 1)) + 1)
    return np.concatenate([fine, coarse])


def find_cutoff(logf, drop=60.0, limit=64.0, max_limit=4096.0):
    """Smallest scan point past the peak where ``logf`` is ``drop`` nats below it.

    ``logf`` maps a 1-D array of ``s`` to an array ``(..., len(s))``; the
    returned cutoff is the maximum over the batch.
    """
    while limit <= max_limit:
        grid = _scan_grid(limit)
        vals = np.asarray(logf(grid), dtype=float)
        vals = vals.reshape(-1, grid.size)
        peak_idx = np.argmax(vals, axis=1)
        peak = vals[np.arange(vals.shape[0]), peak_idx]
        if not np.all(np.isfinite(peak)):
            raise ConvergenceError("integrand has no finite values on the scan grid")
        below = (vals < (peak - drop)[:, None]) & (np.arange(grid.size) > peak_idx[:, None])
        if np.all(below.any(axis=1)):
            first = np.argmax(below, axis=1)
            return float(grid[first].max())
        limit *= 4.0
    raise ConvergenceError("integrand does not decay within the scan range",
                           {"limit": limit})


def log_integrate(logf, length, spec: QuadSpec = DEFAULT_QUAD, order=START_ORDER):
    """``log int_0^length exp(logf(s)) ds`` with order doubling.

    Returns ``(value, info)`` where ``value`` has the batch shape of ``logf``
    and ``info`` records the node count and the last change between orders.
    """
    breaks = graded_breaks(length)
    n_panels = breaks.size - 1
    prev = delta = None
    while True:
        nodes, log_w = panel_rule(breaks, order)
        est = logsumexp(np.asarray(logf(nodes)) + log_w, axis=-1)
        if prev is not None:
            # deep tails have |log| in the thousands; compare relative to the log value
            delta = float(np.max(np.abs(est - prev) / np.maximum(1.0, np.abs(est))))
            if delta <= spec.rel_tol:
                return est, {"nodes": nodes.size, "delta": delta}
        prev = est
        order *= 2
        if n_panels * order > spec.max_nodes:
            raise ConvergenceError(
                "quadrature did not converge within the node budget",
                {"nodes": nodes.size, "estimate": np.asarray(prev).tolist(), "delta": delta},
            )


def log_integrate_semi_infinite(logf, spec: QuadSpec = DEFAULT_QUAD, drop=60.0):
    """``log int_0^inf exp(logf(s)) ds``, truncated ``drop`` nats below the peak."""
    return log_integrate(logf, find_cutoff(logf, drop), spec)


def log_integrate_quadrant(logf2, spec: QuadSpec = DEFAULT_QUAD, drop=60.0,
                           order=START_ORDER):
    """``log int_0^inf int_0^inf exp(logf2(s1, s2)) ds1 ds2`` on a tensor rule.

    ``logf2`` receives broadcastable column/row arrays ``s1[:, None]`` and
    ``s2[None, :]``.
    """
    limit = 64.0
    while True:
        grid = _scan_grid(limit)
        vals = np.asarray(logf2(grid[:, None], grid[None, :]), dtype=float)
        peak = vals.max()
        if not np.isfinite(peak):
            raise ConvergenceError("2-D integrand has no finite values on the scan grid")
        keep = vals >= peak - drop
        idx = np.nonzero(keep)
        reach = max(idx[0].max(), idx[1].max())
        if reach < grid.size - 1:
            length = float(grid[reach + 1])
            break
        limit *= 4.0
        if limit > 4096.0:
            raise ConvergenceError("2-D integrand does not decay within the scan range")
    breaks = graded_breaks(length)
    n_panels = breaks.size - 1
    prev = None
    while True:
        nodes, log_w = panel_rule(breaks, order)
        vals = logf2(nodes[:, None], nodes[None, :]) + log_w[:, None] + log_w[None, :]
        est = float(logsumexp(vals))
        delta = None if prev is None else abs(est - prev) / max(1.0, abs(est))
        if delta is not None and delta <= spec.rel_tol:
            return est, {"nodes_per_axis": nodes.size, "delta": delta}
        prev = est
        order *= 2
        if n_panels * order > spec.max_nodes:
            raise ConvergenceError(
                "2-D quadrature did not converge within the node budget",
                {"nodes_per_axis": nodes.size, "estimate": prev, "delta": delta},
            )
