"""Empirical quantiles, joint order-statistic densities and variance scaling.

The quantile estimator is the linear-interpolation definition used by default
in R's ``quantile()``, ``numpy.quantile`` and Excel's PERCENTILE: with
``h = (N-1)p + 1``, ``i = floor(h)`` and ``g = h - i``,

    Q(X, p) = (1 - g) * X_(i) + g * X_(i+1).

The joint density of a set of order statistics X_(i_1) < ... < X_(i_M) from
an i.i.d. sample of size N is

    N! * prod_j f(x_j) * prod_{j=0..M} (F(x_{j+1}) - F(x_j))^(i_{j+1}-i_j-1)
                                       / (i_{j+1}-i_j-1)!

with x_0 = -inf, x_{M+1} = +inf, i_0 = 0 and i_{M+1} = N + 1.  All density
work happens in log space; ``-inf`` is a first-class value meaning zero mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Family
from .errors import DegenerateScaleError

# Interpolation weights without this distance from an integer are snapped to
# the deterministic case, so float dust in (N-1)p+1 cannot create spurious
# near-singular interpolations.
_G_SNAP = 1e-9


@dataclass(frozen=True)
class QuantileIndex:
    """Order-statistic bookkeeping for one probability level."""

    p: float
    h: float
    i: int
    g: float

    @property
    def deterministic(self) -> bool:
        return self.g == 0.0


def quantile_index(p: float, n: int) -> QuantileIndex:
    """Index decomposition h = (N-1)p + 1, i = floor(h), g = h - i."""
    if n < 1:
        raise ValueError(f"sample size must be >= 1, got {n}")
    if not 0.0 < p < 1.0:
        raise ValueError(f"probability must lie in (0,1), got {p}")
    h = (n - 1) * p + 1.0
    i = int(math.floor(h))
    g = h - i
    if g < _G_SNAP:
        g = 0.0
    elif g > 1.0 - _G_SNAP:
        i += 1
        g = 0.0
    if i >= n:
        i, g = n, 0.0
    return QuantileIndex(p=p, h=h, i=i, g=g)


def empirical_quantile(x, p: float) -> float:
    """Linear-interpolation empirical quantile of ``x`` at level ``p``.

    Matches numpy.quantile's default method; p=0 gives the minimum and p=1
    the maximum.
    """
    x = np.asarray(x, dtype=float)
    if x.size == 0:
        raise ValueError("cannot take a quantile of an empty sample")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0,1], got {p}")
    xs = np.sort(x)
    n = xs.size
    if p == 0.0:
        return float(xs[0])
    if p == 1.0:
        return float(xs[-1])
    qi = quantile_index(p, n)
    if qi.g == 0.0:
        return float(xs[qi.i - 1])
    return float((1.0 - qi.g) * xs[qi.i - 1] + qi.g * xs[qi.i])


def empirical_median(x) -> float:
    return empirical_quantile(x, 0.5)


def empirical_iqr(x) -> float:
    return empirical_quantile(x, 0.75) - empirical_quantile(x, 0.25)


def empirical_mad(x) -> float:
    """Median absolute deviation, median(|x - median(x)|)."""
    x = np.asarray(x, dtype=float)
    return empirical_median(np.abs(x - empirical_median(x)))


@dataclass(frozen=True)
class OrderStatSpec:
    """A strictly increasing set of 1-based order-statistic indices."""

    n: int
    indices: tuple[int, ...]

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"sample size must be >= 1, got {self.n}")
        idx = self.indices
        if len(idx) == 0:
            raise ValueError("need at least one order-statistic index")
        if any(not 1 <= k <= self.n for k in idx):
            raise ValueError(f"indices must lie in [1, {self.n}], got {idx}")
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError(f"indices must be strictly increasing, got {idx}")


def joint_orderstat_logdensity(family: Family, spec: OrderStatSpec, values) -> float:
    """Log joint density of the order statistics ``spec.indices`` at ``values``.

    Returns -inf when the values are not strictly increasing, fall outside
    the support, or a gap with a positive count has zero probability mass.
    """
    vals = np.asarray(values, dtype=float)
    if vals.shape != (len(spec.indices),):
        raise ValueError(
            f"expected {len(spec.indices)} values for indices {spec.indices}, "
            f"got shape {vals.shape}"
        )
    if np.any(vals[1:] <= vals[:-1]):
        return -math.inf

    logf = family.logpdf(vals)
    logf = np.atleast_1d(logf)
    if np.isneginf(logf).any():
        return -math.inf

    total = math.lgamma(spec.n + 1) + float(logf.sum())

    cdfs = np.atleast_1d(family.cdf(vals))
    sfs = np.atleast_1d(family.sf(vals))
    idx = (0,) + spec.indices + (spec.n + 1,)
    m = len(spec.indices)
    for t in range(m + 1):
        count = idx[t + 1] - idx[t] - 1
        if count == 0:
            continue
        if t == 0:
            mass = cdfs[0]
        elif t == m:
            mass = sfs[-1]
        elif cdfs[t - 1] >= 0.5:
            mass = sfs[t - 1] - sfs[t]
        else:
            mass = cdfs[t] - cdfs[t - 1]
        if mass <= 0.0:
            return -math.inf
        total += count * math.log(mass) - math.lgamma(count + 1)
    return total


def orderstat_variance_approx(family: Family, i: int, n: int) -> float:
    """Approximate Var(X_(i)) by p(1-p) / ((N+2) f(Q(p))^2) with p = i/(N-1).

    p is clamped to [1/(N+1), N/(N+1)] so the formula stays defined at the
    extremes (the raw ratio exceeds 1 at i = N).  Finite for heavy-tailed
    families since only the density at an interior quantile enters.
    """
    if not 1 <= i <= n:
        raise ValueError(f"order-statistic index must lie in [1, {n}], got {i}")
    if n == 1:
        p = 0.5
    else:
        p = i / (n - 1)
    p_lo = 1.0 / (n + 1)
    p_hi = n / (n + 1)
    p = min(max(p, p_lo), p_hi)
    f = family.pdf1(family.ppf1(p))
    if not f > 0.0:
        raise DegenerateScaleError(
            f"zero density at the {p:.4f} quantile; cannot scale proposals"
        )
    return p * (1.0 - p) / ((n + 2) * f * f)
