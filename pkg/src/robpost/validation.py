"""Named validation suites runnable from the CLI.

Each suite returns a machine-readable report: a dict with one entry per
check (name, passed, detail).  Suites are deliberately small and fast; the
full statistical battery lives in the test suite.
"""

from __future__ import annotations

import numpy as np

from .distributions import Cauchy, Gaussian, TranslatedWeibull
from .errors import ConfigError
from .med_iqr_conditional import (
    MedIqrConstraints,
    init_mediqr_state,
    mh_update_mediqr,
    refill_free_coordinates_mediqr,
)
from .med_mad_conditional import (
    MedMadConstraints,
    audit_medmad,
    gibbs_sweep_medmad,
    init_medmad_state,
    make_zone_cache,
)
from .quantile_conditional import (
    QuantileConstraints,
    init_quantile_state,
    mh_update_orderstats,
    refill_free_coordinates,
)

_FAMILIES = {
    "gaussian": Gaussian(0.0, 1.0),
    "cauchy": Cauchy(0.0, 1.0),
    "weibull3": TranslatedWeibull(-8.0, 8.0, 2.0),
}


def _check(name: str, passed: bool, detail: str = "") -> dict:
    return {"name": name, "passed": bool(passed), "detail": detail}


def suite_quantile_invariants(seed: int = 0, iterations: int = 500) -> dict:
    checks = []
    rng = np.random.default_rng(seed)
    for fam_name, fam in _FAMILIES.items():
        cons = QuantileConstraints(21, (0.25, 0.5, 0.75), (-0.6, 0.0, 0.6))
        state = init_quantile_state(cons, fam, rng)
        worst = state.residuals().max()
        for _ in range(iterations):
            mh_update_orderstats(state, fam, rng)
            refill_free_coordinates(state, fam, rng)
            worst = max(worst, state.residuals().max())
        checks.append(
            _check(f"quantiles-preserved-{fam_name}", worst < 1e-9, f"max residual {worst:.3g}")
        )
    return _report("quantile-invariants", checks)


def suite_mediqr_invariants(seed: int = 0, iterations: int = 500) -> dict:
    checks = []
    rng = np.random.default_rng(seed)
    for n in (9, 11, 12, 14):
        cons = MedIqrConstraints(n, 0.0, 2.0)
        fam = Gaussian(0.0, 2.5)
        state = init_mediqr_state(cons, fam, rng, mode="linear")
        worst = max(state.residuals())
        for _ in range(iterations):
            mh_update_mediqr(state, fam, rng)
            refill_free_coordinates_mediqr(state, fam, rng)
            worst = max(worst, max(state.residuals()))
        checks.append(
            _check(f"mediqr-preserved-N{n}", worst < 1e-9, f"max residual {worst:.3g}")
        )
    return _report("mediqr-invariants", checks)


def suite_medmad_invariants(seed: int = 0, iterations: int = 500) -> dict:
    checks = []
    rng = np.random.default_rng(seed)
    for n in (9, 12):
        cons = MedMadConstraints(n, 0.0, 1.0)
        fam = Gaussian(0.0, 2.0)
        state = init_medmad_state(cons, fam, rng, mode="linear")
        cache = make_zone_cache(state)
        worst = 0.0
        bad_counts = 0
        for _ in range(iterations):
            gibbs_sweep_medmad(state, fam, rng, cache=cache)
            audit = audit_medmad(state)
            worst = max(worst, audit.median_residual, audit.mad_residual)
            if not audit.ok:
                bad_counts += 1
        checks.append(
            _check(
                f"medmad-preserved-N{n}",
                worst < 1e-9 and bad_counts == 0,
                f"max residual {worst:.3g}, audit failures {bad_counts}",
            )
        )
    return _report("medmad-invariants", checks)


def suite_negative_control(seed: int = 0) -> dict:
    """Corrupt a coordinate on purpose and confirm the audit reports it."""
    rng = np.random.default_rng(seed)
    cons = MedMadConstraints(9, 0.0, 1.0)
    state = init_medmad_state(cons, Gaussian(0.0, 1.0), rng, mode="deterministic")
    ordinary = [
        p for p in range(cons.n) if p not in (state.med_pos, state.mad_pos)
    ]
    state.x[ordinary[0]] += 3.7
    audit = audit_medmad(state)
    checks = [
        _check(
            "corruption-detected",
            not audit.ok,
            f"violations: {audit.violations}" if not audit.ok else "corruption went unnoticed",
        )
    ]
    return _report("negative-control", checks)


def suite_reachability(seed: int = 0, max_sweeps: int = 100_000) -> dict:
    """Irreducibility witness: every bookkeeping state is visited.

    Odd N=9: all 8 (k, delta) states from every deterministic start.  Even
    N=12: all four scale-pin side configurations.
    """
    checks = []
    fam = Gaussian(0.0, 1.3)

    cons = MedMadConstraints(9, 0.0, 1.0)
    n = cons.half
    all_states = {(k, d) for k in range(1, n + 1) for d in (0, 1)}
    for k0 in range(1, n + 1):
        for d0 in (0, 1):
            rng = np.random.default_rng(seed + 13 * k0 + d0)
            state = init_medmad_state(
                cons, fam, rng, mode="deterministic", k=k0, delta=d0
            )
            cache = make_zone_cache(state)
            seen = {state.census_key()}
            sweeps = 0
            while seen != all_states and sweeps < max_sweeps:
                gibbs_sweep_medmad(state, fam, rng, cache=cache)
                seen.add(state.census_key())
                sweeps += 1
            checks.append(
                _check(
                    f"odd-N9-from-k{k0}-d{d0}",
                    seen == all_states,
                    f"visited {len(seen)}/8 states in {sweeps} sweeps",
                )
            )

    cons_e = MedMadConstraints(12, 0.0, 1.0)
    all_sides = {(0, 0), (0, 1), (1, 0), (1, 1)}
    for sides in ((1, 1), (-1, -1), (1, -1), (-1, 1)):
        rng = np.random.default_rng(seed + hash(sides) % 1000)
        state = init_medmad_state(cons_e, fam, rng, mode="deterministic", mad_sides=sides)
        cache = make_zone_cache(state)
        seen = {state.census_key()}
        sweeps = 0
        while seen != all_sides and sweeps < max_sweeps:
            gibbs_sweep_medmad(state, fam, rng, cache=cache)
            seen.add(state.census_key())
            sweeps += 1
        checks.append(
            _check(
                f"even-N12-from-sides{sides}",
                seen == all_sides,
                f"visited {len(seen)}/4 pin-side configurations in {sweeps} sweeps",
            )
        )
    return _report("reachability", checks)


def _report(suite: str, checks: list) -> dict:
    return {"suite": suite, "passed": all(c["passed"] for c in checks), "checks": checks}


SUITES = {
    "quantile-invariants": suite_quantile_invariants,
    "mediqr-invariants": suite_mediqr_invariants,
    "medmad-invariants": suite_medmad_invariants,
    "negative-control": suite_negative_control,
    "reachability": suite_reachability,
}


def run_suite(name: str, seed: int = 0) -> dict:
    if name not in SUITES:
        raise ConfigError(f"unknown validation suite {name!r}; choose from {sorted(SUITES)}")
    return SUITES[name](seed=seed)
