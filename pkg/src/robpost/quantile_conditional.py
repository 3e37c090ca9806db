"""Latent-vector engine for a vector of observed empirical quantiles.

Observing Q(X, p_j) = q_j pins down a set of determining order statistics.
Deterministic levels (interpolation weight g_j = 0) fix X_(i_j) = q_j
exactly; interpolated levels leave X_(i_j) free and reconstruct the partner

    X_(i_j + 1) = (q_j - (1 - g_j) X_(i_j)) / g_j.

The free order statistics are resampled one at a time with a random-walk
Metropolis step targeting their conditional density given the constraints
(the joint order-statistic density evaluated after substitution; the change
of variables has constant Jacobian (1-g_j)/g_j per level, which cancels in
the acceptance ratio).  The remaining coordinates are refilled i.i.d. from
the family truncated to the inter-quantile zones.
"""

from __future__ import annotations

import math

import numpy as np

from .distributions import Family
from .errors import InitializationError
from .latent import ZonedState, zone_counts
from .order_stats import (
    OrderStatSpec,
    orderstat_variance_approx,
    quantile_index,
)

# role tags for determining order statistics
_FIXED = 0   # value pinned to an observed quantile
_FREE = 1    # resampled by the MH kernel
_PARTNER = 2  # reconstructed from its free companion


class QuantileConstraints:
    """Validated set of (probability, value) pairs plus index bookkeeping."""

    def __init__(self, n: int, probs, values):
        probs = tuple(float(p) for p in probs)
        values = tuple(float(q) for q in values)
        if len(probs) != len(values) or len(probs) == 0:
            raise ValueError("need matching, nonempty probability and value lists")
        if any(not 0.0 < p < 1.0 for p in probs):
            raise ValueError(f"probabilities must lie in (0,1), got {probs}")
        if any(b <= a for a, b in zip(probs, probs[1:])):
            raise ValueError(f"probabilities must be strictly increasing, got {probs}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError(f"quantile values must be strictly increasing, got {values}")
        gap = 2.0 / (n + 1)
        for a, b in zip(probs, probs[1:]):
            if b - a < gap - 1e-12:
                raise ValueError(
                    f"probabilities {a} and {b} are closer than 2/(N+1) = {gap:.4g}; "
                    "each order statistic may appear in at most one constraint"
                )
        self.n = int(n)
        self.probs = probs
        self.values = values
        self.qindex = tuple(quantile_index(p, n) for p in probs)

        # determining order statistics, in index order
        slots = []  # (index, role, j)
        for j, qi in enumerate(self.qindex):
            if qi.deterministic:
                slots.append((qi.i, _FIXED, j))
            else:
                slots.append((qi.i, _FREE, j))
                slots.append((qi.i + 1, _PARTNER, j))
        slots.sort()
        idx = tuple(s[0] for s in slots)
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("constraints share an order statistic; reduce the levels")
        self.slots = tuple(slots)
        self.det_indices = idx
        self.spec = OrderStatSpec(n=n, indices=idx)
        self.free_js = tuple(j for j, qi in enumerate(self.qindex) if not qi.deterministic)
        self._slot_of_free = {j: t for t, (_, role, j) in enumerate(self.slots) if role == _FREE}
        self._slot_of_partner = {
            j: t for t, (_, role, j) in enumerate(self.slots) if role == _PARTNER
        }

    @property
    def n_free(self) -> int:
        return len(self.free_js)

    def partner_value(self, j: int, free_value: float) -> float:
        g = self.qindex[j].g
        return (self.values[j] - (1.0 - g) * free_value) / g

    def det_values_from_free(self, free_values) -> np.ndarray:
        """Assemble the determining order-statistic values for given free ones."""
        free_values = np.asarray(free_values, dtype=float)
        if free_values.shape != (self.n_free,):
            raise ValueError(f"expected {self.n_free} free values, got {free_values.shape}")
        out = np.empty(len(self.slots))
        by_j = dict(zip(self.free_js, free_values))
        for t, (_, role, j) in enumerate(self.slots):
            if role == _FIXED:
                out[t] = self.values[j]
            elif role == _FREE:
                out[t] = by_j[j]
            else:
                out[t] = self.partner_value(j, by_j[j])
        return out

    def free_slot(self, j: int) -> int:
        return self._slot_of_free[j]

    def partner_slot(self, j: int) -> int:
        return self._slot_of_partner[j]


class QuantileState(ZonedState):
    """Latent vector satisfying every observed quantile exactly."""

    def __init__(self, constraints: QuantileConstraints, det_values, zones, free_values):
        super().__init__(constraints.n, constraints.det_indices, det_values, zones)
        self.constraints = constraints
        self.free_values = np.asarray(free_values, dtype=float).copy()

    def residuals(self) -> np.ndarray:
        """Relative constraint violations, recomputed from the full vector."""
        from .order_stats import empirical_quantile

        x = self.x
        out = np.empty(len(self.constraints.probs))
        for j, (p, q) in enumerate(zip(self.constraints.probs, self.constraints.values)):
            out[j] = abs(empirical_quantile(x, p) - q) / max(1.0, abs(q))
        return out


def conditional_orderstat_logdensity(
    constraints: QuantileConstraints, family: Family, free_values
) -> float:
    """Unnormalized log density of the free order statistics given the quantiles.

    -inf whenever the reconstructed determining values violate their ordering.
    With no interpolated constraint the density is a constant (returned as 0).
    """
    if constraints.n_free == 0:
        return 0.0
    from .order_stats import joint_orderstat_logdensity

    det = constraints.det_values_from_free(free_values)
    return joint_orderstat_logdensity(family, constraints.spec, det)


def _initial_epsilons(constraints: QuantileConstraints, family: Family) -> dict[int, float]:
    """Spacing used to split interpolated constraints at initialization.

    The paper-recommended normalization is the spread of X_(i_j) under the
    initial parameters; we use the standard deviation (the variance has the
    wrong units) and cap it so neighbouring constraints cannot collide.
    """
    eps = {}
    values = constraints.values
    for j in constraints.free_js:
        qi = constraints.qindex[j]
        try:
            e = math.sqrt(orderstat_variance_approx(family, qi.i, constraints.n))
        except Exception:
            e = 1.0
        left_gap = values[j] - values[j - 1] if j > 0 else math.inf
        right_gap = values[j + 1] - values[j] if j + 1 < len(values) else math.inf
        cap = 0.4 * min(left_gap, right_gap)
        if math.isfinite(cap):
            e = min(e, cap)
        if family.support_lo > -math.inf and qi.g > 0:
            room = values[j] - family.support_lo
            if room <= 0:
                raise InitializationError(
                    f"quantile value q_{j+1} = {values[j]} lies outside the support "
                    f"of the initial distribution (lower bound {family.support_lo})"
                )
            e = min(e, 0.5 * room / qi.g)
        eps[j] = e if e > 0 else 1e-8
    return eps


def init_quantile_state(
    constraints: QuantileConstraints, family: Family, rng
) -> QuantileState:
    """Build a latent vector matching every observed quantile.

    Deterministic levels place a coordinate exactly at q_j; interpolated ones
    straddle it with X_(i_j) = q_j - eps_j g_j and X_(i_j+1) = q_j +
    eps_j (1 - g_j).  Remaining coordinates are drawn truncated to their
    zones in the counts implied by the determining indices.
    """
    eps = _initial_epsilons(constraints, family)
    free0 = np.array(
        [
            constraints.values[j] - eps[j] * constraints.qindex[j].g
            for j in constraints.free_js
        ]
    )
    det = constraints.det_values_from_free(free0)
    if np.any(det[1:] <= det[:-1]):
        raise InitializationError(
            "could not order the determining order statistics; the observed "
            "quantile values are too close together for this sample size"
        )
    pdf_at = family.pdf(det)
    if np.any(np.atleast_1d(pdf_at) <= 0.0):
        bad = int(np.argmax(np.atleast_1d(pdf_at) <= 0.0))
        raise InitializationError(
            f"determining order statistic at {det[bad]:.6g} has zero density "
            "under the initial parameters"
        )

    counts = zone_counts(constraints.det_indices, constraints.n)
    zones = []
    bounds = np.concatenate(([-np.inf], det, [np.inf]))
    for t, count in enumerate(counts):
        if count == 0:
            zones.append(np.empty(0))
            continue
        lo, hi = bounds[t], bounds[t + 1]
        if family.interval_mass(lo, hi) <= 0.0:
            raise InitializationError(
                f"zone ({lo:.6g}, {hi:.6g}) must hold {count} coordinates but has "
                f"zero mass under the initial parameters; constraint values "
                f"{constraints.values} are infeasible for this support"
            )
        zones.append(family.truncation(lo, hi).draw(rng, count))
    return QuantileState(constraints, det, zones, free0)


def proposal_scales(constraints: QuantileConstraints, family: Family) -> np.ndarray:
    """Per-free-coordinate proposal variances Var(X_(i_j)) / (1 - g_j)."""
    out = np.empty(constraints.n_free)
    for t, j in enumerate(constraints.free_js):
        qi = constraints.qindex[j]
        out[t] = orderstat_variance_approx(family, qi.i, constraints.n) / (1.0 - qi.g)
    return out


def mh_update_orderstats(
    state: QuantileState,
    family: Family,
    rng,
    scale: float = 1.0,
    scales: np.ndarray | None = None,
) -> np.ndarray:
    """One Metropolis sweep over the free order statistics, one at a time.

    Gaussian random walk with per-coordinate variance scale * Var(X_(i_j)) /
    (1 - g_j).  On acceptance the partner coordinate moves deterministically
    so the observed quantile is preserved exactly.  Returns accept flags.
    """
    cons = state.constraints
    if cons.n_free == 0:
        return np.zeros(0, dtype=bool)
    if scales is None:
        scales = proposal_scales(cons, family)
    accepted = np.zeros(cons.n_free, dtype=bool)
    free = state.free_values
    cur_logp = conditional_orderstat_logdensity(cons, family, free)
    for t, j in enumerate(cons.free_js):
        sd = math.sqrt(scale * scales[t])
        prop = free.copy()
        prop[t] = free[t] + sd * rng.standard_normal()
        new_logp = conditional_orderstat_logdensity(cons, family, prop)
        if new_logp > -math.inf and (
            new_logp >= cur_logp or rng.random() < math.exp(new_logp - cur_logp)
        ):
            free = prop
            cur_logp = new_logp
            accepted[t] = True
    if accepted.any():
        state.free_values = free
        state.det_values = cons.det_values_from_free(free)
    return accepted


def refill_free_coordinates(state: QuantileState, family: Family, rng) -> None:
    """Redraw every non-determining coordinate truncated to its zone."""
    state.refill(family, rng)
