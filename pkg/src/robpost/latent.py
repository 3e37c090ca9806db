"""Shared scaffolding for latent vectors pinned at a few order statistics.

A constrained latent vector is stored as the determining order statistics
(index/value pairs, kept sorted) plus one array of free coordinates per zone
between consecutive determining values.  Zone occupancy counts are fixed by
the indices, so constraint audits never need a global sort.
"""

from __future__ import annotations

import numpy as np

from .distributions import Family
from .errors import InfeasibleIntervalError


def zone_counts(det_indices, n: int) -> list[int]:
    """Free-coordinate counts implied by 1-based determining indices."""
    idx = list(det_indices)
    bounds = [0] + idx + [n + 1]
    return [bounds[t + 1] - bounds[t] - 1 for t in range(len(bounds) - 1)]


class ZonedState:
    """Latent vector partitioned by its determining order statistics."""

    def __init__(self, n: int, det_indices, det_values, zones):
        self.n = n
        self.det_indices = tuple(int(k) for k in det_indices)
        self.det_values = np.asarray(det_values, dtype=float).copy()
        self.zones = [np.asarray(z, dtype=float).copy() for z in zones]
        counts = zone_counts(self.det_indices, n)
        actual = [len(z) for z in self.zones]
        if counts != actual:
            raise ValueError(f"zone counts {actual} do not match indices (want {counts})")

    @property
    def x(self) -> np.ndarray:
        """The full latent vector (zone coordinates interleaved with pins)."""
        parts = []
        for t, z in enumerate(self.zones):
            parts.append(z)
            if t < len(self.det_values):
                parts.append(self.det_values[t : t + 1])
        return np.concatenate(parts)

    def zone_bounds(self, t: int) -> tuple[float, float]:
        lo = self.det_values[t - 1] if t > 0 else -np.inf
        hi = self.det_values[t] if t < len(self.det_values) else np.inf
        return float(lo), float(hi)

    def refill(self, family: Family, rng) -> None:
        """Redraw every free coordinate i.i.d. truncated to its zone."""
        for t, z in enumerate(self.zones):
            count = len(z)
            if count == 0:
                continue
            lo, hi = self.zone_bounds(t)
            try:
                sampler = family.truncation(lo, hi)
            except InfeasibleIntervalError as exc:
                raise InfeasibleIntervalError(
                    f"zone {t} = ({lo}, {hi}) holds {count} coordinates but has "
                    f"zero mass under the current parameters"
                ) from exc
            self.zones[t] = sampler.draw(rng, count)


class ScaleAdapter:
    """Robbins-Monro adaptation of a log proposal scale toward a target rate.

    Only applied during burn-in; freeze() stops all further adjustment so
    the transition kernel stays Markov afterwards.
    """

    def __init__(self, n_components: int, target: float = 0.44):
        self.log_scales = np.zeros(n_components)
        self.target = target
        self._t = 0
        self._frozen = False

    def scales(self) -> np.ndarray:
        return np.exp(self.log_scales)

    def update(self, accepted) -> None:
        if self._frozen:
            return
        self._t += 1
        step = min(0.5, self._t ** -0.6)
        adj = (np.asarray(accepted, dtype=float) - self.target) * step
        self.log_scales = np.clip(self.log_scales + adj, -8.0, 8.0)

    def freeze(self) -> None:
        self._frozen = True
