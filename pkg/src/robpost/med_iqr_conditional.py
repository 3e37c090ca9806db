"""Latent-vector engine for an observed (median, IQR) pair.

The quartile levels (0.25, 0.5, 0.75) interpolate differently depending on
N mod 4, so the determining order statistics and the reconstruction that
enforces IQR = Q3 - Q1 change by case:

* N = 4n+1: Q1 = X_(n+1), median = X_(2n+1), Q3 = X_(3n+1).  Only X_(n+1) is
  free; X_(3n+1) = X_(n+1) + i.
* N = 4k+3: i1 = k+1, i2 = 2k+2, i3 = 3k+2 with g1 = g3 = 1/2.  Free are
  X_(i1), X_(i3), X_(i3+1); X_(i1+1) is reconstructed and X_(i2) = m.
* N = 4k:   i1 = k, i2 = 2k, i3 = 3k with g1 = 3/4, g3 = 1/4.
* N = 4k+2: i1 = k+1, i2 = 2k+1, i3 = 3k+1 with g1 = 1/4, g3 = 3/4.

In the even cases X_(i2+1) = 2m - X_(i2) and

    X_(i1+1) = ((1-g3) X_(i3) + g3 X_(i3+1) - (1-g1) X_(i1) - i) / g1,

whose Jacobian is constant in the free values and cancels from Metropolis
ratios.  Free variables are updated one at a time in a fixed cyclic order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .distributions import Family
from .errors import ConfigError, InitializationError
from .latent import ZonedState, zone_counts
from .order_stats import (
    OrderStatSpec,
    empirical_iqr,
    empirical_median,
    empirical_quantile,
    joint_orderstat_logdensity,
    orderstat_variance_approx,
)

_MIN_N = {1: 5, 3: 7, 0: 8, 2: 10}


@dataclass(frozen=True)
class CaseLayout:
    """Determining indices and the free/reconstructed split for one N case."""

    label: str
    det_indices: tuple[int, ...]
    free_indices: tuple[int, ...]       # order-statistic indices updated by MH
    g1: float
    g3: float
    # positions (into det_indices) of named order statistics
    pos: dict


def mediqr_free_variables(n: int) -> CaseLayout:
    """Case dispatch on N mod 4; total for every feasible N."""
    r = n % 4
    if n < _MIN_N[r]:
        raise ConfigError(
            f"median/IQR constraints need N >= {_MIN_N[r]} for N = {r} mod 4, got {n}"
        )
    if r == 1:
        m = (n - 1) // 4
        i1, i2, i3 = m + 1, 2 * m + 1, 3 * m + 1
        det = (i1, i2, i3)
        return CaseLayout(
            label="4n+1",
            det_indices=det,
            free_indices=(i1,),
            g1=0.0,
            g3=0.0,
            pos={"q1": 0, "med": 1, "q3": 2},
        )
    if r == 3:
        k = (n - 3) // 4
        i1, i2, i3 = k + 1, 2 * k + 2, 3 * k + 2
        det = (i1, i1 + 1, i2, i3, i3 + 1)
        return CaseLayout(
            label="4n+3",
            det_indices=det,
            free_indices=(i1, i3, i3 + 1),
            g1=0.5,
            g3=0.5,
            pos={"i1": 0, "i1+1": 1, "med": 2, "i3": 3, "i3+1": 4},
        )
    if r == 0:
        k = n // 4
        i1, i2, i3 = k, 2 * k, 3 * k
        g1, g3 = 0.75, 0.25
    else:
        k = (n - 2) // 4
        i1, i2, i3 = k + 1, 2 * k + 1, 3 * k + 1
        g1, g3 = 0.25, 0.75
    det = (i1, i1 + 1, i2, i2 + 1, i3, i3 + 1)
    return CaseLayout(
        label="4k" if r == 0 else "4k+2",
        det_indices=det,
        free_indices=(i1, i2, i3, i3 + 1),
        g1=g1,
        g3=g3,
        pos={"i1": 0, "i1+1": 1, "i2": 2, "i2+1": 3, "i3": 4, "i3+1": 5},
    )


@dataclass(frozen=True)
class MedIqrConstraints:
    n: int
    median: float
    iqr: float

    def __post_init__(self):
        if not self.iqr > 0:
            raise ConfigError(f"IQR must be positive, got {self.iqr}")
        mediqr_free_variables(self.n)  # validates N

    @property
    def case(self) -> str:
        return mediqr_free_variables(self.n).label

    @property
    def layout(self) -> CaseLayout:
        return mediqr_free_variables(self.n)


def _det_values_from_free(cons: MedIqrConstraints, layout: CaseLayout, free) -> np.ndarray:
    """Reconstruct all determining values from the free ones; may be unordered."""
    m, i = cons.median, cons.iqr
    free = np.asarray(free, dtype=float)
    out = np.empty(len(layout.det_indices))
    if layout.label == "4n+1":
        (x1,) = free
        out[0] = x1
        out[1] = m
        out[2] = x1 + i
        return out
    if layout.label == "4n+3":
        x1, x3, x3b = free
        g1, g3 = layout.g1, layout.g3
        out[0] = x1
        out[1] = ((1 - g3) * x3 + g3 * x3b - (1 - g1) * x1 - i) / g1
        out[2] = m
        out[3] = x3
        out[4] = x3b
        return out
    x1, x2, x3, x3b = free
    g1, g3 = layout.g1, layout.g3
    out[0] = x1
    out[1] = ((1 - g3) * x3 + g3 * x3b - (1 - g1) * x1 - i) / g1
    out[2] = x2
    out[3] = 2.0 * m - x2
    out[4] = x3
    out[5] = x3b
    return out


class MedIqrState(ZonedState):
    """Latent vector with median and IQR held exactly at their observed values."""

    def __init__(self, constraints: MedIqrConstraints, det_values, zones, free_values):
        layout = constraints.layout
        super().__init__(constraints.n, layout.det_indices, det_values, zones)
        self.constraints = constraints
        self.layout = layout
        self.free_values = np.asarray(free_values, dtype=float).copy()

    def residuals(self) -> tuple[float, float]:
        x = self.x
        m_res = abs(empirical_median(x) - self.constraints.median)
        i_res = abs(empirical_iqr(x) - self.constraints.iqr)
        scale = max(1.0, abs(self.constraints.median), self.constraints.iqr)
        return m_res / scale, i_res / scale


def conditional_mediqr_logdensity(
    constraints: MedIqrConstraints, family: Family, free_values
) -> float:
    """Unnormalized conditional log density of the free order statistics."""
    layout = constraints.layout
    free_values = np.asarray(free_values, dtype=float)
    if free_values.shape != (len(layout.free_indices),):
        raise ValueError(
            f"case {layout.label} needs {len(layout.free_indices)} free values, "
            f"got shape {free_values.shape}"
        )
    det = _det_values_from_free(constraints, layout, free_values)
    spec = OrderStatSpec(n=constraints.n, indices=layout.det_indices)
    return joint_orderstat_logdensity(family, spec, det)


def _free_from_sorted(layout: CaseLayout, xs: np.ndarray) -> np.ndarray:
    det_pos = {k: t for t, k in enumerate(layout.det_indices)}
    return np.array([xs[det_pos[k]] for k in layout.free_indices])


def init_mediqr_state(
    constraints: MedIqrConstraints,
    family: Family,
    rng,
    mode: str = "linear",
) -> MedIqrState:
    """Initial latent vector with the observed median and IQR.

    linear mode rescales a standard normal sample so its median and IQR hit
    the targets; it requires the family's support to cover the whole result.
    deterministic mode builds the ladder around q1 = m - i/2, q3 = m + i/2
    with zone fills at interior midpoints, and only needs that ladder to sit
    inside the support.
    """
    layout = constraints.layout
    n = constraints.n
    m, i = constraints.median, constraints.iqr

    if mode == "linear":
        for _ in range(16):
            z = rng.standard_normal(n)
            spread = empirical_iqr(z)
            if spread > 0:
                break
        x = (z - empirical_median(z)) * (i / spread) + m
        if family.support_lo > -math.inf and x.min() <= family.support_lo:
            raise InitializationError(
                f"linear initialization put a coordinate at {x.min():.6g}, outside "
                f"the support lower bound {family.support_lo:.6g}; use deterministic mode"
            )
        xs = np.sort(x)
        free = _free_from_sorted(layout, xs[np.array(layout.det_indices) - 1])
        # snap the reconstruction identities so the constraints hold exactly
        det_vals = _det_values_from_free(constraints, layout, free)
        if np.any(det_vals[1:] <= det_vals[:-1]):
            raise InitializationError("degenerate sample in linear initialization; retry")
        used = np.zeros(n, dtype=bool)
        for k in layout.det_indices:
            used[k - 1] = True
        rest = xs[~used]
        counts = zone_counts(layout.det_indices, n)
        zones = []
        pos = 0
        for count in counts:
            zones.append(rest[pos : pos + count])
            pos += count
        state = MedIqrState(constraints, det_vals, zones, free)
        _clip_zones_into_bounds(state)
        return state

    if mode != "deterministic":
        raise ConfigError(f"unknown initialization mode {mode!r}")

    q1 = m - i / 2.0
    q3 = m + i / 2.0
    eps = i / 8.0
    if layout.label == "4n+1":
        free = np.array([q1])
    elif layout.label == "4n+3":
        free = np.array([q1 - 0.5 * eps, q3 - 0.5 * eps, q3 + 0.5 * eps])
    else:
        g1, g3 = layout.g1, layout.g3
        free = np.array([q1 - eps * g1, m - 0.5 * eps, q3 - eps * g3, q3 + eps * (1 - g3)])
    det_vals = _det_values_from_free(constraints, layout, free)
    if np.any(det_vals[1:] <= det_vals[:-1]):
        raise InitializationError("deterministic ladder failed to order; IQR too small")

    counts = zone_counts(layout.det_indices, n)
    bounds = np.concatenate(([-np.inf], det_vals, [np.inf]))
    zones = []
    for t, count in enumerate(counts):
        if count == 0:
            zones.append(np.empty(0))
            continue
        lo, hi = bounds[t], bounds[t + 1]
        if not math.isfinite(lo):
            fill = hi - i / 4.0
        elif not math.isfinite(hi):
            fill = lo + i / 4.0
        else:
            fill = 0.5 * (lo + hi)
        zones.append(np.full(count, fill))
    ladder = np.concatenate([det_vals] + [z for z in zones if len(z)])
    if family.support_lo > -math.inf and ladder.min() <= family.support_lo:
        raise InitializationError(
            f"deterministic ladder value {ladder.min():.6g} lies outside the support "
            f"lower bound {family.support_lo:.6g}"
        )
    if np.any(np.atleast_1d(family.pdf(det_vals)) <= 0.0):
        raise InitializationError("a ladder order statistic has zero density")
    return MedIqrState(constraints, det_vals, zones, free)


def _clip_zones_into_bounds(state: MedIqrState) -> None:
    """Nudge zone coordinates strictly inside their (possibly snapped) bounds."""
    for t, z in enumerate(state.zones):
        if len(z) == 0:
            continue
        lo, hi = state.zone_bounds(t)
        if np.all((lo < z) & (z < hi)):
            continue
        width = (hi - lo) if math.isfinite(hi - lo) else 1.0
        state.zones[t] = np.clip(z, lo + 1e-12 * width, hi - 1e-12 * width)


def mediqr_proposal_scales(constraints: MedIqrConstraints, family: Family) -> np.ndarray:
    """Proposal variances per free variable, from the order-statistic formula."""
    layout = constraints.layout
    weights = {"4n+1": (1.0,), "4n+3": (0.5, 0.5, 1.0)}.get(
        layout.label, (1.0 - layout.g1, 1.0, 1.0 - layout.g3, 1.0)
    )
    out = np.empty(len(layout.free_indices))
    for t, (k, w) in enumerate(zip(layout.free_indices, weights)):
        out[t] = orderstat_variance_approx(family, k, constraints.n) / w
    return out


def mh_update_mediqr(
    state: MedIqrState,
    family: Family,
    rng,
    scale: float = 1.0,
    scales: np.ndarray | None = None,
) -> np.ndarray:
    """Metropolis-within-Gibbs sweep over the case's free order statistics."""
    cons = state.constraints
    if scales is None:
        scales = mediqr_proposal_scales(cons, family)
    accepted = np.zeros(len(state.layout.free_indices), dtype=bool)
    free = state.free_values
    cur_logp = conditional_mediqr_logdensity(cons, family, free)
    for t in range(len(free)):
        sd = math.sqrt(scale * scales[t])
        prop = free.copy()
        prop[t] = free[t] + sd * rng.standard_normal()
        new_logp = conditional_mediqr_logdensity(cons, family, prop)
        if new_logp > -math.inf and (
            new_logp >= cur_logp or rng.random() < math.exp(new_logp - cur_logp)
        ):
            free = prop
            cur_logp = new_logp
            accepted[t] = True
    if accepted.any():
        state.free_values = free
        state.det_values = _det_values_from_free(cons, state.layout, free)
    return accepted


def refill_free_coordinates_mediqr(state: MedIqrState, family: Family, rng) -> None:
    """Redraw the non-determining coordinates truncated to their zones."""
    state.refill(family, rng)


def verify_mediqr(state: MedIqrState, tol: float = 1e-9) -> bool:
    m_res, i_res = state.residuals()
    return m_res < tol and i_res < tol
