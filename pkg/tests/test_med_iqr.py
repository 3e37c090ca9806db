import math

import numpy as np
import pytest
from scipy import stats

from robpost.distributions import Cauchy, Gaussian, TranslatedWeibull
from robpost.errors import ConfigError, InitializationError
from robpost.med_iqr_conditional import (
    MedIqrConstraints,
    conditional_mediqr_logdensity,
    init_mediqr_state,
    mediqr_free_variables,
    mh_update_mediqr,
    refill_free_coordinates_mediqr,
    verify_mediqr,
)

ALL_CASES = [9, 11, 12, 14]  # one N per residue class mod 4


class TestCaseDispatch:
    def test_case_4n1(self):
        layout = mediqr_free_variables(9)
        assert layout.label == "4n+1"
        assert layout.det_indices == (3, 5, 7)
        assert layout.free_indices == (3,)

    def test_case_4n3(self):
        layout = mediqr_free_variables(7)
        assert layout.label == "4n+3"
        assert layout.det_indices == (2, 3, 4, 5, 6)
        assert layout.free_indices == (2, 5, 6)
        assert layout.g1 == 0.5 and layout.g3 == 0.5

    def test_case_4k(self):
        layout = mediqr_free_variables(8)
        assert layout.det_indices == (2, 3, 4, 5, 6, 7)
        assert (layout.g1, layout.g3) == (0.75, 0.25)

    def test_case_4k2(self):
        layout = mediqr_free_variables(14)
        # k = 3: i1 = 4, i2 = 7, i3 = 10
        assert layout.det_indices == (4, 5, 7, 8, 10, 11)
        assert (layout.g1, layout.g3) == (0.25, 0.75)

    def test_total_for_all_feasible_n(self):
        for n in range(5, 60):
            if n in (6,) or (n % 4 == 3 and n < 7) or (n % 4 == 0 and n < 8) or (
                n % 4 == 2 and n < 10
            ):
                continue
            layout = mediqr_free_variables(n)
            assert all(1 <= k <= n for k in layout.det_indices)

    def test_minimum_n_enforced(self):
        with pytest.raises(ConfigError):
            mediqr_free_variables(4)
        with pytest.raises(ConfigError):
            mediqr_free_variables(6)


class TestInit:
    def test_linear_mode_hits_constraints(self):
        rng = np.random.default_rng(0)
        for n in ALL_CASES:
            cons = MedIqrConstraints(n, -2.0, 6.0)
            state = init_mediqr_state(cons, Gaussian(0.0, 1.0), rng, mode="linear")
            assert verify_mediqr(state)

    def test_deterministic_ladder_n9(self):
        # n = 2, m = 0, i = 4: ladder (-3,-3,q1,-1,0,1,q3,3,3) with q1=-2, q3=2
        cons = MedIqrConstraints(9, 0.0, 4.0)
        state = init_mediqr_state(
            cons, Gaussian(0.0, 4.0), np.random.default_rng(0), mode="deterministic"
        )
        assert np.allclose(
            np.sort(state.x), [-3, -3, -2, -1, 0, 1, 2, 3, 3]
        )
        assert verify_mediqr(state)

    def test_deterministic_other_cases(self):
        for n in ALL_CASES:
            cons = MedIqrConstraints(n, 1.0, 2.0)
            state = init_mediqr_state(
                cons, Gaussian(1.0, 4.0), np.random.default_rng(1), mode="deterministic"
            )
            assert verify_mediqr(state)

    def test_weibull_support_violation(self):
        cons = MedIqrConstraints(9, 0.0, 4.0)
        fam = TranslatedWeibull(-1.0, 2.0, 2.0)  # support starts above m - 3i/4
        with pytest.raises(InitializationError):
            init_mediqr_state(cons, fam, np.random.default_rng(0), mode="linear")
        with pytest.raises(InitializationError):
            init_mediqr_state(cons, fam, np.random.default_rng(0), mode="deterministic")

    def test_weibull_feasible_deterministic(self):
        cons = MedIqrConstraints(11, 10.0, 2.0)
        fam = TranslatedWeibull(5.0, 6.0, 2.0)
        state = init_mediqr_state(cons, fam, np.random.default_rng(2), mode="deterministic")
        assert verify_mediqr(state)


class TestConditionalDensity:
    def test_feasible_region_n5(self):
        # N = 5 (n = 1): the free quartile lives on (m - i, m)
        cons = MedIqrConstraints(5, 0.0, 2.0)
        g = Gaussian(0.0, 1.0)
        assert conditional_mediqr_logdensity(cons, g, [-1.0]) > -math.inf
        assert conditional_mediqr_logdensity(cons, g, [-2.2]) == -math.inf
        assert conditional_mediqr_logdensity(cons, g, [0.1]) == -math.inf

    def test_density_integral_finite(self):
        cons = MedIqrConstraints(5, 0.0, 2.0)
        g = Gaussian(0.0, 1.0)
        grid = np.linspace(-1.999, -0.001, 2000)
        vals = np.array(
            [math.exp(conditional_mediqr_logdensity(cons, g, [v])) for v in grid]
        )
        total = np.trapezoid(vals, grid)
        assert 0.0 < total < math.inf

    def test_size_mismatch(self):
        cons = MedIqrConstraints(9, 0.0, 2.0)
        with pytest.raises(ValueError):
            conditional_mediqr_logdensity(cons, Gaussian(0.0, 1.0), [0.0, 1.0])


class TestMh:
    def test_rejected_move_leaves_state_identical(self):
        cons = MedIqrConstraints(9, 0.0, 2.0)
        g = Gaussian(0.0, 1.0)
        rng = np.random.default_rng(3)
        state = init_mediqr_state(cons, g, rng, mode="linear")
        before = state.x.copy()
        acc = mh_update_mediqr(state, g, rng, scale=1e14)
        if not acc.any():
            assert np.array_equal(np.sort(state.x), np.sort(before))

    def test_q1_q3_move_together_case_4n1(self):
        cons = MedIqrConstraints(9, 0.0, 2.0)
        g = Gaussian(0.0, 1.0)
        rng = np.random.default_rng(4)
        state = init_mediqr_state(cons, g, rng, mode="linear")
        for _ in range(200):
            q1_before, q3_before = state.det_values[0], state.det_values[2]
            acc = mh_update_mediqr(state, g, rng)
            if acc.any():
                shift1 = state.det_values[0] - q1_before
                shift3 = state.det_values[2] - q3_before
                assert shift1 == pytest.approx(shift3, abs=1e-12)

    @pytest.mark.parametrize("n", ALL_CASES)
    @pytest.mark.parametrize(
        "family",
        [Gaussian(0.0, 2.0), Cauchy(0.0, 1.5), TranslatedWeibull(-9.0, 9.5, 2.0)],
    )
    def test_constraints_preserved(self, n, family):
        cons = MedIqrConstraints(n, 0.0, 2.0)
        rng = np.random.default_rng(5)
        state = init_mediqr_state(cons, family, rng, mode="deterministic")
        worst = 0.0
        for _ in range(300):
            mh_update_mediqr(state, family, rng)
            refill_free_coordinates_mediqr(state, family, rng)
            worst = max(worst, *state.residuals())
        assert worst < 1e-9


class TestRefill:
    def test_counts_restored(self):
        cons = MedIqrConstraints(9, 0.0, 2.0)
        g = Gaussian(0.0, 1.0)
        rng = np.random.default_rng(6)
        state = init_mediqr_state(cons, g, rng, mode="linear")
        for _ in range(30):
            mh_update_mediqr(state, g, rng)
            refill_free_coordinates_mediqr(state, g, rng)
            # zones: n, n-1, n-1, n around (q1, m, q3) for the 4n+1 case
            assert [len(z) for z in state.zones] == [2, 1, 1, 2]
            assert np.all(np.diff(np.sort(state.x)) > 0)


def test_small_n_stationary_law_matches_quadrature():
    # N=5, Gaussian: the stationary law of X_(2) must match the normalized
    # 1-D conditional density computed by quadrature
    cons = MedIqrConstraints(5, 0.0, 2.0)
    g = Gaussian(0.0, 1.0)
    rng = np.random.default_rng(7)
    state = init_mediqr_state(cons, g, rng, mode="linear")
    draws = np.empty(10_000)
    for t in range(draws.size):
        mh_update_mediqr(state, g, rng)
        refill_free_coordinates_mediqr(state, g, rng)
        draws[t] = state.free_values[0]

    grid = np.linspace(-2.0 + 1e-9, 0.0 - 1e-9, 4001)
    dens = np.array([math.exp(conditional_mediqr_logdensity(cons, g, [v])) for v in grid])
    cdf_grid = np.cumsum((dens[1:] + dens[:-1]) * 0.5 * np.diff(grid))
    cdf_grid = np.concatenate([[0.0], cdf_grid]) / cdf_grid[-1]

    def quad_cdf(v):
        return np.interp(v, grid, cdf_grid)

    d = stats.ks_1samp(draws, quad_cdf).statistic
    assert d < 0.05
