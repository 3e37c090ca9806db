"""Pairwise Gibbs resampling of a latent vector given its median and MAD.

Holding median(X) = m and MAD(X) = s fixed pins one coordinate at m and one
at m +/- s when N is odd, and two median / two MAD coordinates when N is
even.  Single-coordinate updates can never change the apportionment of the
remaining coordinates between the zones those pins delimit, so coordinates
are resampled two at a time.

Odd N = 2n+1 partitions the line into Z1 = (-inf, m-s), Z2 = (m-s, m),
Z3 = (m, m+s), Z4 = (m+s, inf) with occupancies (n-k+delta, k-1, n-k,
k-delta), where k = #{X_i >= m+s} and delta = 1 iff the scale pin sits at
m+s.  Even N = 2n uses seven intervals delimited by m-s2 < m-s1 < m1 < m2 <
m+s1 < m+s2, where m = (m1+m2)/2 and s = (s1+s2)/2; the three pin bands
(m-s2, m-s1), (m1, m2), (m+s1, m+s2) contain no other coordinates.

Each pair update dispatches on whether the chosen coordinates are pins or
ordinary and redraws them from truncated (or reflected) conditionals that
preserve both statistics exactly.  With ``exact=True`` (the default) the
moves that the uncorrected recipe would leave slightly off-target carry
either a zone-mass weighting or a Metropolis correction; ``exact=False``
keeps the uncorrected moves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import Family, TruncatedSampler
from .errors import ConfigError, InfeasibleIntervalError, InitializationError
from .order_stats import empirical_mad, empirical_median

Z1, Z2, Z3, Z4 = 1, 2, 3, 4
_ZM = 5
_BUF_LO = 6
_BUF_HI = 7

_SYMMETRIC = {Z1: Z4, Z2: Z3, Z3: Z2, Z4: Z1}
_COMPLEMENT = {Z1: Z3, Z2: Z4, Z3: Z1, Z4: Z2}


def reflect(center: float, x: float) -> float:
    """Mirror image of x through center (an involution)."""
    return 2.0 * center - x


def symmetric_zone(z: int) -> int:
    """Zone of the mirror image about the median."""
    return _SYMMETRIC[z]


def complementary_zone(z: int) -> int:
    """Zone a coordinate must move to when its partner swaps stripes."""
    return _COMPLEMENT[z]


@dataclass(frozen=True)
class MedMadConstraints:
    n: int
    median: float
    mad: float

    def __post_init__(self):
        if not self.mad > 0:
            raise ConfigError(f"MAD must be positive, got {self.mad}")
        if self.n % 2 == 1:
            if self.n < 3:
                raise ConfigError(f"odd median/MAD constraints need N >= 3, got {self.n}")
        else:
            if self.n < 8:
                raise ConfigError(f"even median/MAD constraints need N >= 8, got {self.n}")

    @property
    def parity(self) -> str:
        return "odd" if self.n % 2 == 1 else "even"

    @property
    def half(self) -> int:
        """n such that N = 2n+1 (odd) or N = 2n (even)."""
        return self.n // 2


class _UnionSampler:
    """Mass-weighted mixture over prebuilt truncated samplers."""

    __slots__ = ("parts", "masses", "total")

    def __init__(self, parts):
        self.parts = [p for p in parts if p.mass > 0.0]
        self.masses = [p.mass for p in self.parts]
        self.total = sum(self.masses)

    def draw1(self, rng) -> float:
        if self.total <= 0.0:
            raise InfeasibleIntervalError(
                "union of intervals carries zero probability mass; the support "
                "is too small for the median/MAD constraints"
            )
        u = rng.random() * self.total
        acc = 0.0
        for p, w in zip(self.parts, self.masses):
            acc += w
            if u <= acc:
                return p.draw1(rng)
        return self.parts[-1].draw1(rng)


# ---------------------------------------------------------------------------
# odd case
# ---------------------------------------------------------------------------


class MedMadStateOdd:
    """Latent vector of odd size with median and MAD pinned exactly.

    Coordinates live in unordered storage; ``med_pos`` and ``mad_pos`` point
    at the two pinned entries.  The pin values are always written as the
    exact floats m and m +/- s, so zone membership tests are unambiguous.
    """

    parity = "odd"

    def __init__(self, constraints: MedMadConstraints, x, med_pos: int, mad_pos: int):
        self.constraints = constraints
        self.x = np.asarray(x, dtype=float).copy()
        self.med_pos = int(med_pos)
        self.mad_pos = int(mad_pos)
        self.m = constraints.median
        self.s = constraints.mad
        self.lo = self.m - self.s
        self.hi = self.m + self.s
        if self.x.shape != (constraints.n,):
            raise ValueError(f"latent vector must have length {constraints.n}")
        if med_pos == mad_pos:
            raise ValueError("median and MAD pins must be distinct coordinates")

    @property
    def delta(self) -> int:
        return int(self.x[self.mad_pos] > self.m)

    @property
    def k(self) -> int:
        return int(np.count_nonzero(self.x >= self.hi))

    def census_key(self) -> tuple[int, int]:
        return (self.k, self.delta)

    def zone_of(self, v: float) -> int:
        if v < self.lo:
            return Z1
        if v < self.m:
            return Z2
        if v < self.hi:
            return Z3
        return Z4

    def zone_counts(self) -> tuple[int, int, int, int]:
        counts = [0, 0, 0, 0]
        for pos, v in enumerate(self.x):
            if pos == self.med_pos or pos == self.mad_pos:
                continue
            counts[self.zone_of(v) - 1] += 1
        return tuple(counts)


class _OddZoneCache:
    """Zone samplers and masses for one (family, m, s) combination."""

    def __init__(self):
        self._fam = None

    def ensure(self, family: Family, state: MedMadStateOdd) -> None:
        if family is self._fam:
            return
        self._fam = family
        lo, m, hi = state.lo, state.m, state.hi
        self.samplers = {
            Z1: TruncatedSampler(family, -math.inf, lo, allow_empty=True),
            Z2: TruncatedSampler(family, lo, m, allow_empty=True),
            Z3: TruncatedSampler(family, m, hi, allow_empty=True),
            Z4: TruncatedSampler(family, hi, math.inf, allow_empty=True),
        }
        self.mass = {z: self.samplers[z].mass for z in (Z1, Z2, Z3, Z4)}
        self.union_outer = _UnionSampler([self.samplers[Z1], self.samplers[Z4]])
        self.union_inner = _UnionSampler([self.samplers[Z2], self.samplers[Z3]])
        self.f_lo = family.pdf1(lo)
        self.f_hi = family.pdf1(hi)

    def draw_zone(self, z: int, rng) -> float:
        sampler = self.samplers[z]
        if sampler.mass <= 0.0:
            raise InfeasibleIntervalError(
                f"zone {z} has zero mass under the current parameters; the "
                "support is too small for the median/MAD constraints"
            )
        return sampler.draw1(rng)


def pair_update_odd(
    state: MedMadStateOdd,
    i: int,
    j: int,
    family: Family,
    rng,
    cache: _OddZoneCache | None = None,
    exact: bool = True,
) -> str:
    """Resample coordinates i and j jointly, preserving median and MAD.

    Returns a case label (diagnostic only).  With exact=True the opposite-
    side pin flip weights the pin side by its density and the complementary-
    zone move draws the zone pair proportionally to its probability mass;
    with exact=False both follow the uncorrected sequential recipe.
    """
    if i == j:
        raise ValueError("pair update needs two distinct coordinates")
    if cache is None:
        cache = _OddZoneCache()
    cache.ensure(family, state)
    x = state.x
    med_pos, mad_pos = state.med_pos, state.mad_pos
    m = state.m

    i_med = i == med_pos
    j_med = j == med_pos
    i_mad = i == mad_pos
    j_mad = j == mad_pos

    if (i_med and j_mad) or (i_mad and j_med):
        return "1"

    if i_med or j_med:
        other = j if i_med else i
        x[other] = cache.draw_zone(state.zone_of(x[other]), rng)
        return "2"

    if i_mad or j_mad:
        ord_pos = j if i_mad else i
        pin_val = x[mad_pos]
        if (x[ord_pos] - m) * (pin_val - m) > 0:
            x[ord_pos] = cache.draw_zone(state.zone_of(x[ord_pos]), rng)
            return "3a"
        inner = state.zone_of(x[ord_pos]) in (Z2, Z3)
        below_zone, above_zone = (Z2, Z3) if inner else (Z1, Z4)
        if exact:
            # joint law of (coordinate, pin side) weights each side by the
            # zone mass times the density at the forced pin value
            w_below = cache.mass[below_zone] * cache.f_hi
            w_above = cache.mass[above_zone] * cache.f_lo
            total = w_below + w_above
            if total <= 0.0:
                raise InfeasibleIntervalError(
                    "both sides of the median carry zero mass; constraints infeasible"
                )
            if rng.random() * total < w_below:
                x[ord_pos] = cache.draw_zone(below_zone, rng)
                x[mad_pos] = state.hi
            else:
                x[ord_pos] = cache.draw_zone(above_zone, rng)
                x[mad_pos] = state.lo
        else:
            union = cache.union_inner if inner else cache.union_outer
            new_val = union.draw1(rng)
            x[ord_pos] = new_val
            x[mad_pos] = state.lo if new_val > m else state.hi
        return "3b"

    zi = state.zone_of(x[i])
    zj = state.zone_of(x[j])
    if zi != zj and (zi + zj == 4 or zi + zj == 6):
        # {Z1, Z3} or {Z2, Z4}: the complementary configurations
        if exact:
            w13 = cache.mass[Z1] * cache.mass[Z3]
            w24 = cache.mass[Z2] * cache.mass[Z4]
            total = w13 + w24
            if total <= 0.0:
                raise InfeasibleIntervalError(
                    "no feasible complementary zone pair; constraints infeasible"
                )
            pair = (Z1, Z3) if rng.random() * total < w13 else (Z2, Z4)
            if rng.random() < 0.5:
                pair = (pair[1], pair[0])
            x[i] = cache.draw_zone(pair[0], rng)
            x[j] = cache.draw_zone(pair[1], rng)
        else:
            xi_new = float(family.sample(rng))
            zone_new = state.zone_of(xi_new)
            x[i] = xi_new
            x[j] = cache.draw_zone(complementary_zone(zone_new), rng)
        return "4a"

    x[i] = cache.draw_zone(zi, rng)
    x[j] = cache.draw_zone(zj, rng)
    return "4b"


def _odd_ladder(constraints: MedMadConstraints, k: int, delta: int) -> tuple[np.ndarray, int, int]:
    n = constraints.half
    m, s = constraints.median, constraints.mad
    if not 1 <= k <= n or delta not in (0, 1):
        raise ConfigError(f"need 1 <= k <= {n} and delta in {{0,1}}, got k={k}, delta={delta}")
    counts = (n - k + delta, k - 1, n - k, k - delta)
    if any(c < 0 for c in counts):
        raise ConfigError(f"(k={k}, delta={delta}) gives negative zone counts {counts}")
    vals = [m - 1.5 * s] * counts[0] + [m - 0.5 * s] * counts[1]
    med_pos = len(vals)
    vals.append(m)
    vals += [m + 0.5 * s] * counts[2]
    mad_pos = len(vals)
    vals.append(m + s if delta else m - s)
    vals += [m + 1.5 * s] * counts[3]
    return np.array(vals), med_pos, mad_pos


# ---------------------------------------------------------------------------
# even case
# ---------------------------------------------------------------------------


class MedMadStateEven:
    """Latent vector of even size N = 2n with median and MAD pinned.

    Four coordinates are pinned: the middle pair (m1, m2 with (m1+m2)/2 = m)
    and the two distance pins (|x - m| = s1 and s2 with (s1+s2)/2 = s).
    ``bounds`` caches the seven-interval delimiters (m-s2, m-s1, m1, m2,
    m+s1, m+s2); any code that moves a pin must call ``sync_bounds()``.
    """

    parity = "even"

    def __init__(
        self,
        constraints: MedMadConstraints,
        x,
        pos_m1: int,
        pos_m2: int,
        pos_mad1: int,
        pos_mad2: int,
    ):
        self.constraints = constraints
        self.x = np.asarray(x, dtype=float).copy()
        self.pos_m1 = int(pos_m1)
        self.pos_m2 = int(pos_m2)
        self.pos_mad1 = int(pos_mad1)
        self.pos_mad2 = int(pos_mad2)
        self.m = constraints.median
        self.s = constraints.mad
        if len({self.pos_m1, self.pos_m2, self.pos_mad1, self.pos_mad2}) != 4:
            raise ValueError("the four pinned coordinates must be distinct")
        if self.x.shape != (constraints.n,):
            raise ValueError(f"latent vector must have length {constraints.n}")
        self.sync_bounds()

    def sync_bounds(self) -> None:
        m = self.m
        s1 = abs(float(self.x[self.pos_mad1]) - m)
        s2 = abs(float(self.x[self.pos_mad2]) - m)
        self.bounds = (
            m - s2,
            m - s1,
            float(self.x[self.pos_m1]),
            float(self.x[self.pos_m2]),
            m + s1,
            m + s2,
        )

    # pin values -------------------------------------------------------------
    @property
    def m1(self) -> float:
        return float(self.x[self.pos_m1])

    @property
    def m2(self) -> float:
        return float(self.x[self.pos_m2])

    @property
    def s1(self) -> float:
        return abs(float(self.x[self.pos_mad1]) - self.m)

    @property
    def s2(self) -> float:
        return abs(float(self.x[self.pos_mad2]) - self.m)

    @property
    def delta1(self) -> int:
        return int(self.x[self.pos_mad1] > self.m)

    @property
    def delta2(self) -> int:
        return int(self.x[self.pos_mad2] > self.m)

    def census_key(self) -> tuple[int, int]:
        return (self.delta1, self.delta2)

    def boundaries(self) -> tuple:
        return self.bounds

    def pin_positions(self) -> set[int]:
        return {self.pos_m1, self.pos_m2, self.pos_mad1, self.pos_mad2}

    def zone_of(self, v: float) -> int:
        b = self.bounds
        if v < b[2]:
            if v < b[0]:
                return Z1
            if v < b[1]:
                return _BUF_LO
            return Z2
        if v < b[3]:
            return _ZM
        if v < b[4]:
            return Z3
        if v < b[5]:
            return _BUF_HI
        return Z4

    def zone_counts(self) -> dict:
        counts = {Z1: 0, Z2: 0, Z3: 0, Z4: 0, _ZM: 0, _BUF_LO: 0, _BUF_HI: 0}
        pins = self.pin_positions()
        for pos, v in enumerate(self.x):
            if pos in pins:
                continue
            counts[self.zone_of(v)] += 1
        return counts

    def distance_orderstats(self) -> tuple[float, float, float]:
        """(Y_(3), Y_(n-1), Y_(n+2)): the distance order stats the kernel needs."""
        d = np.abs(self.x - self.m)
        n = self.constraints.half
        part = np.partition(d, [2, n - 2, n + 1])
        return float(part[2]), float(part[n - 2]), float(part[n + 1])


class _EvenZoneCache:
    """Zone, band and union samplers keyed on the current boundary tuple."""

    def __init__(self):
        self._fam = None
        self._bounds = None

    def ensure(self, family: Family, state: MedMadStateEven) -> None:
        b = state.bounds
        if family is self._fam and b is self._bounds:
            return
        self._fam = family
        self._bounds = b
        m, s = state.m, state.s
        mk = TruncatedSampler
        self.samplers = {
            Z1: mk(family, -math.inf, b[0], allow_empty=True),
            Z2: mk(family, b[1], b[2], allow_empty=True),
            Z3: mk(family, b[3], b[4], allow_empty=True),
            Z4: mk(family, b[5], math.inf, allow_empty=True),
            _ZM: mk(family, b[2], b[3], allow_empty=True),
            _BUF_LO: mk(family, b[0], b[1], allow_empty=True),
            _BUF_HI: mk(family, b[4], b[5], allow_empty=True),
        }
        self.mass = {z: self.samplers[z].mass for z in self.samplers}
        # extended zones: each ordinary zone grown into the adjacent pin band
        # up to its midpoint m +/- s
        self.extended = {
            Z1: mk(family, -math.inf, m - s, allow_empty=True),
            Z2: mk(family, m - s, b[2], allow_empty=True),
            Z3: mk(family, b[3], m + s, allow_empty=True),
            Z4: mk(family, m + s, math.inf, allow_empty=True),
        }
        self.union_adjacent = {
            "lo": _UnionSampler([self.extended[Z1], self.extended[Z2]]),
            "hi": _UnionSampler([self.extended[Z3], self.extended[Z4]]),
        }
        self.union_mid = _UnionSampler(
            [self.samplers[Z2], self.samplers[_ZM], self.samplers[Z3]]
        )
        cross_parts = [
            self.samplers[z]
            for z in (Z1, Z2, Z3, Z4)
            if self.mass[z] > 0.0 and self.mass[complementary_zone(z)] > 0.0
        ]
        cross_parts += [self.samplers[_BUF_LO], self.samplers[_BUF_HI]]
        self.union_cross = _UnionSampler(cross_parts)
        self.union_mirror = {
            Z1: _UnionSampler([self.samplers[Z1], self.samplers[Z4]]),
            Z4: _UnionSampler([self.samplers[Z1], self.samplers[Z4]]),
            Z2: _UnionSampler([self.samplers[Z2], self.samplers[Z3]]),
            Z3: _UnionSampler([self.samplers[Z2], self.samplers[Z3]]),
        }

    def draw_zone(self, z: int, rng) -> float:
        sampler = self.samplers[z]
        if sampler.mass <= 0.0:
            raise InfeasibleIntervalError(
                f"zone {z} has zero mass under the current parameters; the "
                "support is too small for the median/MAD constraints"
            )
        return sampler.draw1(rng)


def _accept(rng, log_ratio: float) -> bool:
    return log_ratio >= 0.0 or rng.random() < math.exp(log_ratio)


def pair_update_even(
    state: MedMadStateEven,
    i: int,
    j: int,
    family: Family,
    rng,
    cache: _EvenZoneCache | None = None,
    exact: bool = True,
) -> str:
    """Resample coordinates i and j of an even-size vector jointly.

    Implements the seven-interval case table: the median pair reflects
    through m, the scale pins reflect through m +/- s inside an eps-buffered
    band, ordinary coordinates may enter the pin bands (taking over a pin
    role, with the displaced pin repositioned deterministically), and the
    remaining combinations reduce to truncated in-zone redraws.  With
    exact=True the reversible reflection moves carry their Metropolis
    correction.
    """
    if i == j:
        raise ValueError("pair update needs two distinct coordinates")
    if cache is None:
        cache = _EvenZoneCache()
    cache.ensure(family, state)
    x = state.x
    m, s = state.m, state.s
    b = state.bounds
    pm1, pm2 = state.pos_m1, state.pos_m2
    pq1, pq2 = state.pos_mad1, state.pos_mad2
    i_med = i == pm1 or i == pm2
    j_med = j == pm1 or j == pm2
    i_mad = i == pq1 or i == pq2
    j_mad = j == pq1 or j == pq2

    # case 1: the median pair moves symmetrically about m
    if i_med and j_med:
        y3, _, _ = state.distance_orderstats()
        sampler = TruncatedSampler(family, m - y3, m + y3, allow_empty=True)
        if sampler.mass <= 0.0:
            raise InfeasibleIntervalError("no mass around the median; infeasible")
        a = sampler.draw1(rng)
        b_new = reflect(m, a)
        if a == b_new or a in b:
            return "1-degenerate"
        if exact:
            log_ratio = family.logpdf1(b_new) - family.logpdf1(x[j])
            if not _accept(rng, log_ratio):
                return "1-reject"
        x[i], x[j] = a, b_new
        state.pos_m1, state.pos_m2 = (i, j) if a < b_new else (j, i)
        state.sync_bounds()
        return "1"

    # case 2: the scale-pin pair moves inside the eps-buffered bands
    if i_mad and j_mad:
        _, y_nm1, y_np2 = state.distance_orderstats()
        s1, s2 = state.s1, state.s2
        eps = max(min(s1 - y_nm1, y_np2 - s2), 0.0)
        side_i = 1 if x[i] > m else -1
        side_j = 1 if x[j] > m else -1
        if side_i == side_j:
            if side_i > 0:
                iv = (m + s1 - eps, m + s2 + eps)
            else:
                iv = (m - s2 - eps, m - s1 + eps)
            center = m + side_i * s
            sampler = TruncatedSampler(family, iv[0], iv[1], allow_empty=True)
            if sampler.mass <= 0.0:
                raise InfeasibleIntervalError("scale-pin band has zero mass")
            a = sampler.draw1(rng)
            b_new = reflect(center, a)
            label = "2a" if side_i > 0 else "2b"
            mass_cur = sampler.mass
        else:
            iv_lo = (m - s2 - eps, m - s1 + eps)
            iv_hi = (m + s1 - eps, m + s2 + eps)
            a = family.sample_truncated_union([iv_lo, iv_hi], rng)
            d_new = abs(a - m)
            b_new = m - math.copysign(2.0 * s - d_new, a - m)
            label = "2c"
            mass_cur = family.interval_mass(*iv_lo) + family.interval_mass(*iv_hi)
        d_a, d_b = abs(a - m), abs(b_new - m)
        if d_a == d_b or a in b:
            return label + "-degenerate"
        if exact:
            # reverse-move band from the post-move distances
            s1n, s2n = min(d_a, d_b), max(d_a, d_b)
            eps_n = max(min(s1n - y_nm1, y_np2 - s2n), 0.0)
            if side_i == side_j:
                if side_i > 0:
                    mass_new = family.interval_mass(m + s1n - eps_n, m + s2n + eps_n)
                else:
                    mass_new = family.interval_mass(m - s2n - eps_n, m - s1n + eps_n)
            else:
                mass_new = family.interval_mass(
                    m - s2n - eps_n, m - s1n + eps_n
                ) + family.interval_mass(m + s1n - eps_n, m + s2n + eps_n)
            if not mass_new > 0.0:
                return label + "-reject"
            log_ratio = (
                family.logpdf1(b_new)
                - family.logpdf1(x[j])
                + math.log(mass_cur)
                - math.log(mass_new)
            )
            if not _accept(rng, log_ratio):
                return label + "-reject"
        x[i], x[j] = a, b_new
        state.pos_mad1, state.pos_mad2 = (i, j) if d_a < d_b else (j, i)
        state.sync_bounds()
        return label

    # case 3: one median pin with one scale pin never moves
    if (i_med and j_mad) or (i_mad and j_med):
        return "3"

    # case 4: a median pin with an ordinary coordinate
    if i_med or j_med:
        pin = i if i_med else j
        other = j if i_med else i
        v_other = x[other]
        zone_other = state.zone_of(v_other)
        if pin == pm2 and zone_other == Z2:
            sampler = TruncatedSampler(family, b[1], m, allow_empty=True)
            if sampler.mass <= 0.0:
                raise InfeasibleIntervalError("inner-left band has zero mass")
            a = sampler.draw1(rng)
            if a in b:
                return "4b-degenerate"
            if a > b[2]:
                # the pair becomes the new, tighter median pair
                x[pin], x[other] = a, reflect(m, a)
                state.pos_m1, state.pos_m2 = pin, other
            else:
                # the pin role hands over; the ordinary coordinate takes m2
                x[pin], x[other] = a, x[pin]
                state.pos_m2 = other
            state.sync_bounds()
            return "4b"
        if pin == pm1 and zone_other == Z3:
            sampler = TruncatedSampler(family, m, b[4], allow_empty=True)
            if sampler.mass <= 0.0:
                raise InfeasibleIntervalError("inner-right band has zero mass")
            a = sampler.draw1(rng)
            if a in b:
                return "4a-degenerate"
            if a < b[3]:
                x[pin], x[other] = a, reflect(m, a)
                state.pos_m1, state.pos_m2 = other, pin
            else:
                x[pin], x[other] = a, x[pin]
                state.pos_m1 = other
            state.sync_bounds()
            return "4a"
        if zone_other <= Z4:
            x[other] = cache.draw_zone(zone_other, rng)
        return "4c"

    # case 5: a scale pin with an ordinary coordinate
    if i_mad or j_mad:
        pin = i if i_mad else j
        other = j if i_mad else i
        v_o, v_p = x[other], x[pin]
        same_side = (v_o - m) * (v_p - m) > 0
        same_band = (abs(v_o - m) - s) * (abs(v_p - m) - s) > 0
        zone_o = state.zone_of(v_o)
        if same_side and not same_band:
            a = cache.extended[zone_o].draw1(rng)
            if a in b:
                return "5a-degenerate"
            az = state.zone_of(a)
            if az == _BUF_LO or az == _BUF_HI:
                center = m + s if a > m else m - s
                b_new = reflect(center, a)
                d_a, d_b = abs(a - m), abs(b_new - m)
                if d_a == d_b:
                    return "5a-degenerate"
                x[other], x[pin] = a, b_new
                # the untouched old pin leaves the pin set; (other, pin) enter
                state.pos_mad1, state.pos_mad2 = (
                    (other, pin) if d_a < d_b else (pin, other)
                )
                state.sync_bounds()
                return "5a-swap"
            x[other] = a
            return "5a"
        if same_side and same_band:
            if zone_o <= Z4:
                x[other] = cache.draw_zone(zone_o, rng)
            return "5b"
        if not same_side and same_band:
            a = cache.union_mirror[zone_o].draw1(rng)
            if a in b:
                return "5c-degenerate"
            if state.zone_of(a) == symmetric_zone(zone_o):
                b_new = reflect(m, v_p)
                if exact:
                    log_ratio = family.logpdf1(b_new) - family.logpdf1(v_p)
                    if not _accept(rng, log_ratio):
                        return "5c-reject"
                x[other], x[pin] = a, b_new
                state.sync_bounds()
            else:
                x[other] = a
            return "5c"
        # opposite sides, opposite bands
        a = cache.extended[zone_o].draw1(rng)
        if a in b:
            return "5d-degenerate"
        az = state.zone_of(a)
        if az == _BUF_LO or az == _BUF_HI:
            d_a = abs(a - m)
            b_new = m - math.copysign(2.0 * s - d_a, a - m)
            d_b = abs(b_new - m)
            if d_a == d_b:
                return "5d-degenerate"
            x[other], x[pin] = a, b_new
            state.pos_mad1, state.pos_mad2 = (
                (other, pin) if d_a < d_b else (pin, other)
            )
            state.sync_bounds()
            return "5d-swap"
        x[other] = a
        return "5d"

    # case 6: two ordinary coordinates
    zi = state.zone_of(x[i])
    zj = state.zone_of(x[j])

    if (zi == Z1 and zj == Z2) or (zi == Z2 and zj == Z1):
        union, low_side = cache.union_adjacent["lo"], True
    elif (zi == Z3 and zj == Z4) or (zi == Z4 and zj == Z3):
        union, low_side = cache.union_adjacent["hi"], False
    else:
        union = None

    if union is not None:
        a = union.draw1(rng)
        if a in b:
            return "6a-degenerate"
        az = state.zone_of(a)
        if az == _BUF_LO or az == _BUF_HI:
            center = m - s if low_side else m + s
            b_new = reflect(center, a)
            d_a, d_b = abs(a - m), abs(b_new - m)
            if d_a == d_b:
                return "6a-degenerate"
            x[i], x[j] = a, b_new
            state.pos_mad1, state.pos_mad2 = (i, j) if d_a < d_b else (j, i)
            state.sync_bounds()
            return "6a-swap"
        if az == zi:
            x[i], x[j] = a, cache.draw_zone(zj, rng)
        else:
            x[i], x[j] = a, cache.draw_zone(zi, rng)
        return "6a"

    if (zi == Z2 and zj == Z3) or (zi == Z3 and zj == Z2):
        a = cache.union_mid.draw1(rng)
        if a in b:
            return "6b-degenerate"
        az = state.zone_of(a)
        if az == _ZM:
            b_new = reflect(m, a)
            if a == b_new:
                return "6b-degenerate"
            x[i], x[j] = a, b_new
            state.pos_m1, state.pos_m2 = (i, j) if a < b_new else (j, i)
            state.sync_bounds()
            return "6b-swap"
        if az == zi:
            x[i], x[j] = a, cache.draw_zone(zj, rng)
        else:
            x[i], x[j] = a, cache.draw_zone(zi, rng)
        return "6b"

    if zi != zj and (zi + zj == 4 or zi + zj == 6):
        # {Z1, Z3} or {Z2, Z4}: complementary stripes
        a = cache.union_cross.draw1(rng)
        if a in b:
            return "6c-degenerate"
        az = state.zone_of(a)
        if az == _BUF_LO or az == _BUF_HI:
            d_a = abs(a - m)
            b_new = m - math.copysign(2.0 * s - d_a, a - m)
            d_b = abs(b_new - m)
            if d_a == d_b:
                return "6c-degenerate"
            x[i], x[j] = a, b_new
            state.pos_mad1, state.pos_mad2 = (i, j) if d_a < d_b else (j, i)
            state.sync_bounds()
            return "6c-swap"
        x[i] = a
        x[j] = cache.draw_zone(complementary_zone(az), rng)
        return "6c"

    x[i] = cache.draw_zone(zi, rng)
    return "6d"


# ---------------------------------------------------------------------------
# initialization
# ---------------------------------------------------------------------------


def _even_ladder(
    constraints: MedMadConstraints, side1: int, side2: int
) -> tuple[np.ndarray, int, int, int, int]:
    """Deterministic even-N configuration with chosen scale-pin sides."""
    n = constraints.half
    m, s = constraints.median, constraints.mad
    d1 = 1 if side1 > 0 else 0
    d2 = 1 if side2 > 0 else 0
    n2 = (n - 3 + 1) // 2
    n3 = (n - 3) - n2
    n1 = n - 3 + d1 + d2 - n2
    n4 = (n - 1) - n1
    if min(n1, n2, n3, n4) < 0:
        raise ConfigError(f"even ladder infeasible for N={constraints.n}")
    vals = [m - 2.0 * s] * n1 + [m - 0.5 * s] * n2
    pos_m1 = len(vals)
    vals.append(m - 0.125 * s)
    pos_m2 = len(vals)
    vals.append(m + 0.125 * s)
    vals += [m + 0.5 * s] * n3
    pos_mad1 = len(vals)
    vals.append(m + 0.75 * s if d1 else m - 0.75 * s)
    pos_mad2 = len(vals)
    vals.append(m + 1.25 * s if d2 else m - 1.25 * s)
    vals += [m + 2.0 * s] * n4
    return np.array(vals), pos_m1, pos_m2, pos_mad1, pos_mad2


def init_medmad_state(
    constraints: MedMadConstraints,
    family: Family,
    rng,
    mode: str = "linear",
    k: int | None = None,
    delta: int | None = None,
    mad_sides: tuple[int, int] | None = None,
):
    """Build a latent vector with the observed median and MAD.

    linear mode rescales a standard normal draw onto the constraints and then
    snaps the pinned coordinates so both statistics hold exactly.
    deterministic mode lays out a fixed ladder: for odd N the apportionment
    uses k = ceil(n/2) and delta = 1 unless overridden; for even N the
    scale-pin sides can be chosen through ``mad_sides``.
    """
    m, s = constraints.median, constraints.mad
    n_total = constraints.n

    if mode == "deterministic":
        if constraints.parity == "odd":
            n = constraints.half
            k0 = k if k is not None else math.ceil(n / 2)
            d0 = delta if delta is not None else 1
            x, med_pos, mad_pos = _odd_ladder(constraints, k0, d0)
            _check_support(family, x)
            return MedMadStateOdd(constraints, x, med_pos, mad_pos)
        sides = mad_sides if mad_sides is not None else (1, 1)
        x, p1, p2, q1, q2 = _even_ladder(constraints, *sides)
        _check_support(family, x)
        return MedMadStateEven(constraints, x, p1, p2, q1, q2)

    if mode != "linear":
        raise ConfigError(f"unknown initialization mode {mode!r}")

    for _ in range(32):
        z = rng.standard_normal(n_total)
        mad_z = empirical_mad(z)
        if mad_z <= 0:
            continue
        x = (z - empirical_median(z)) * (s / mad_z) + m
        if family.support_lo > -math.inf and x.min() <= family.support_lo:
            raise InitializationError(
                f"linear initialization put a coordinate at {x.min():.6g}, outside "
                f"the support lower bound {family.support_lo:.6g}; use deterministic mode"
            )
        state = _state_from_vector(constraints, x)
        if state is not None:
            return state
    raise InitializationError("could not build a non-degenerate initial vector")


def _check_support(family: Family, x: np.ndarray) -> None:
    if family.support_lo > -math.inf and x.min() <= family.support_lo:
        raise InitializationError(
            f"deterministic ladder value {x.min():.6g} lies outside the support "
            f"lower bound {family.support_lo:.6g}; pick different initial parameters"
        )


def _state_from_vector(constraints: MedMadConstraints, x: np.ndarray):
    """Identify and snap the pinned coordinates of a constraint-satisfying vector."""
    m, s = constraints.median, constraints.mad
    order = np.argsort(x)
    if constraints.parity == "odd":
        n = constraints.half
        med_pos = int(order[n])
        x[med_pos] = m
        d = np.abs(x - m)
        mad_pos = int(np.argsort(d, kind="stable")[n])
        if mad_pos == med_pos:
            return None
        x[mad_pos] = m + s if x[mad_pos] > m else m - s
        return MedMadStateOdd(constraints, x, med_pos, mad_pos)
    n = constraints.half
    pos_m1 = int(order[n - 1])
    pos_m2 = int(order[n])
    # snap the median pair so (m1 + m2) / 2 == m exactly
    x[pos_m2] = 2.0 * m - x[pos_m1]
    if x[pos_m2] <= x[pos_m1]:
        return None
    d = np.abs(x - m)
    dorder = np.argsort(d, kind="stable")
    pos_mad1 = int(dorder[n - 1])
    pos_mad2 = int(dorder[n])
    pins = {pos_m1, pos_m2, pos_mad1, pos_mad2}
    if len(pins) != 4:
        return None
    s1 = d[pos_mad1]
    x[pos_mad2] = m + (2.0 * s - s1) if x[pos_mad2] > m else m - (2.0 * s - s1)
    if abs(x[pos_mad2] - m) <= s1:
        return None
    return MedMadStateEven(constraints, x, pos_m1, pos_m2, pos_mad1, pos_mad2)


# ---------------------------------------------------------------------------
# sweeps and audits
# ---------------------------------------------------------------------------


def make_zone_cache(state):
    return _OddZoneCache() if state.parity == "odd" else _EvenZoneCache()


def gibbs_sweep_medmad(
    state,
    family: Family,
    rng,
    n_pairs: int | None = None,
    cache=None,
    exact: bool = True,
) -> None:
    """Perform n_pairs pairwise updates with uniformly chosen distinct indices.

    Defaults to N pairs per sweep, giving each coordinate about two refresh
    opportunities.
    """
    n = state.constraints.n
    if n_pairs is None:
        n_pairs = n
    if n_pairs < 1:
        raise ConfigError(f"n_pairs must be >= 1, got {n_pairs}")
    if cache is None:
        cache = make_zone_cache(state)
    idx = rng.integers(0, n, size=(n_pairs, 2))
    update = pair_update_odd if state.parity == "odd" else pair_update_even
    for t in range(n_pairs):
        i, j = int(idx[t, 0]), int(idx[t, 1])
        while j == i:
            j = int(rng.integers(0, n))
        update(state, i, j, family, rng, cache=cache, exact=exact)


@dataclass
class MedMadAudit:
    """From-scratch recomputation of the constraints and apportionment."""

    median_residual: float
    mad_residual: float
    zone_counts: object
    k: int | None = None
    delta: int | None = None
    pins: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def audit_medmad(state, tol: float = 1e-9) -> MedMadAudit:
    """Recompute median, MAD and zone occupancy; report violations as data."""
    cons = state.constraints
    x = state.x
    scale = max(1.0, abs(cons.median), cons.mad)
    med_res = abs(empirical_median(x) - cons.median) / scale
    mad_res = abs(empirical_mad(x) - cons.mad) / scale
    violations = []
    if med_res > tol:
        violations.append(f"median residual {med_res:.3g} exceeds {tol}")
    if mad_res > tol:
        violations.append(f"MAD residual {mad_res:.3g} exceeds {tol}")
    if state.parity == "odd":
        counts = state.zone_counts()
        n, k, d = cons.half, state.k, state.delta
        expected = (n - k + d, k - 1, n - k, k - d)
        if counts != expected:
            violations.append(f"zone counts {counts} differ from expected {expected}")
        return MedMadAudit(
            median_residual=med_res,
            mad_residual=mad_res,
            zone_counts=counts,
            k=k,
            delta=d,
            violations=violations,
        )
    counts = state.zone_counts()
    n = cons.half
    pins = {
        "m1": state.m1,
        "m2": state.m2,
        "s1": state.s1,
        "s2": state.s2,
        "delta1": state.delta1,
        "delta2": state.delta2,
    }
    if counts[_ZM] or counts[_BUF_LO] or counts[_BUF_HI]:
        violations.append(f"pin bands are not empty: {counts}")
    if counts[Z2] + counts[Z3] != n - 3:
        violations.append(f"inner occupancy {counts[Z2] + counts[Z3]} != {n - 3}")
    if counts[Z1] + counts[Z4] != n - 1:
        violations.append(f"outer occupancy {counts[Z1] + counts[Z4]} != {n - 1}")
    expected_left = n - 3 + pins["delta1"] + pins["delta2"]
    if counts[Z1] + counts[Z2] != expected_left:
        violations.append(
            f"left occupancy {counts[Z1] + counts[Z2]} != expected {expected_left}"
        )
    return MedMadAudit(
        median_residual=med_res,
        mad_residual=mad_res,
        zone_counts=counts,
        pins=pins,
        violations=violations,
    )
