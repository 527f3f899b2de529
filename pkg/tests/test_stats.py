"""Levene and Kruskal-Wallis against hand-derived values and invariances.

Frozen expectations below were derived by direct formula evaluation
(rational arithmetic for the statistics, mpmath for the tail areas) and
cross-checked against an independent statistics library.
"""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from consentaudit.errors import InsufficientData
from consentaudit.special import (
    chi2_cdf,
    chi2_sf,
    f_cdf,
    f_sf,
    reg_inc_beta,
    reg_lower_gamma,
    reg_upper_gamma,
)
from consentaudit.stats import kruskal_wallis, levene


class TestLevene:
    def test_two_identical_groups(self):
        result = levene([[1.0, 2.0, 3.0], [1.0, 2.0, 3.0]])
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_hand_computed_fixture(self):
        # Z1 = {1.5,.5,.5,1.5}, Z2 = {15,5,5,15}; between = 162, within = 101
        # W = 6 * 162/101 = 972/101; p = F_sf(W; 1, 6) = 0.021056767112156504
        result = levene([[1, 2, 3, 4], [10, 20, 30, 40]])
        assert result.statistic == pytest.approx(972 / 101, abs=1e-12)
        assert result.p_value == pytest.approx(0.021056767112156504, abs=1e-10)
        assert result.df == "F(1, 6)"
        assert result.n_groups == 2
        assert result.n_total == 8

    def test_unequal_variances_significant(self):
        wide = [x * 50.0 for x in (-2, -1, 0, 1, 2, 3, -3, 1.5)]
        narrow = [0.0, 0.1, -0.1, 0.05, -0.05, 0.02, -0.02, 0.01]
        assert levene([narrow, wide]).p_value < 0.05

    def test_insufficient_groups(self):
        with pytest.raises(InsufficientData):
            levene([[1.0, 2.0]])

    def test_insufficient_observations(self):
        with pytest.raises(InsufficientData):
            levene([[1.0], [2.0, 3.0]])

    def test_median_centering_supported(self):
        groups = [[1, 2, 3, 4, 100], [10, 20, 30, 40, 50]]
        mean_w = levene(groups, center="mean").statistic
        median_w = levene(groups, center="median").statistic
        assert mean_w != median_w  # the outlier separates the two centerings

    @settings(max_examples=50, deadline=None)
    @given(
        shift=st.floats(-1000, 1000, allow_nan=False),
        seed=st.integers(0, 10_000),
    )
    def test_shift_invariance(self, shift, seed):
        rng = random.Random(seed)
        groups = [
            [rng.uniform(-5, 5) for _ in range(rng.randint(3, 8))] for _ in range(3)
        ]
        base = levene(groups).statistic
        shifted = levene([[x + shift for x in g] for g in groups]).statistic
        assert shifted == pytest.approx(base, abs=1e-6)

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_permutation_invariance(self, seed):
        rng = random.Random(seed)
        groups = [[rng.uniform(0, 10) for _ in range(5)] for _ in range(3)]
        shuffled = [sorted(g, reverse=True) for g in reversed(groups)]
        assert levene(shuffled).statistic == pytest.approx(
            levene(groups).statistic, abs=1e-9
        )


class TestKruskalWallis:
    def test_all_equal_reports_h_zero(self):
        result = kruskal_wallis([[5.0, 5.0], [5.0, 5.0, 5.0]])
        assert result.statistic == 0.0
        assert result.p_value == 1.0

    def test_hand_computed_rank_sums(self):
        # ranks 1..6; R1 = 6, R2 = 15; H = 12/42 * (12 + 75) - 21 = 27/7
        result = kruskal_wallis([[1, 2, 3], [4, 5, 6]])
        assert result.statistic == pytest.approx(27 / 7, abs=1e-12)
        assert result.p_value == pytest.approx(0.04953461343562674, abs=1e-10)
        assert result.df == "chi2(1)"

    def test_result_structure(self):
        result = kruskal_wallis([[1, 2], [3, 4]])
        assert result.n_groups == 2 and result.n_total == 4
        assert 0.0 <= result.p_value <= 1.0
        assert result.statistic >= 0.0

    def test_ties_use_midranks(self):
        # {1,1,1} vs {2,2,2}: R1 = 6, R2 = 15, same rank sums as untied case
        # but the tie correction rescales H
        result = kruskal_wallis([[1, 1, 1], [2, 2, 2]])
        untied = kruskal_wallis([[1, 2, 3], [4, 5, 6]])
        assert result.statistic > untied.statistic

    def test_insufficient_data(self):
        with pytest.raises(InsufficientData):
            kruskal_wallis([[1.0]])
        with pytest.raises(InsufficientData):
            kruskal_wallis([[1.0, 2.0], []])

    @settings(max_examples=50, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_invariant_under_strictly_monotone_transform(self, seed):
        rng = random.Random(seed)
        groups = [
            [rng.uniform(0, 10) for _ in range(rng.randint(2, 6))] for _ in range(3)
        ]
        transformed = [[math.exp(x) + x for x in g] for g in groups]
        assert kruskal_wallis(transformed).statistic == pytest.approx(
            kruskal_wallis(groups).statistic, abs=1e-9
        )

    @settings(max_examples=30, deadline=None)
    @given(seed=st.integers(0, 10_000))
    def test_group_order_invariance(self, seed):
        rng = random.Random(seed)
        groups = [[rng.uniform(0, 10) for _ in range(4)] for _ in range(4)]
        assert kruskal_wallis(list(reversed(groups))).statistic == pytest.approx(
            kruskal_wallis(groups).statistic, abs=1e-9
        )


class TestSpecialFunctions:
    def test_gamma_boundaries(self):
        assert reg_lower_gamma(2.5, 0.0) == 0.0
        assert reg_upper_gamma(2.5, 0.0) == 1.0
        assert reg_lower_gamma(2.5, 1e8) == pytest.approx(1.0, abs=1e-12)

    def test_beta_boundaries(self):
        assert reg_inc_beta(2.0, 3.0, 0.0) == 0.0
        assert reg_inc_beta(2.0, 3.0, 1.0) == 1.0

    def test_beta_symmetry(self):
        # I_x(a,b) = 1 - I_{1-x}(b,a)
        for a, b, x in [(2.0, 5.0, 0.3), (0.5, 0.5, 0.7), (7.0, 1.5, 0.05)]:
            assert reg_inc_beta(a, b, x) == pytest.approx(
                1.0 - reg_inc_beta(b, a, 1.0 - x), abs=1e-12
            )

    def test_chi2_closed_form_df2(self):
        # chi-square with 2 df is Exp(1/2): sf(x) = exp(-x/2)
        for x in (0.1, 1.0, 3.7, 10.0):
            assert chi2_sf(x, 2) == pytest.approx(math.exp(-x / 2), abs=1e-12)

    def test_f_closed_form_df_2_2(self):
        # F(2,2): cdf(x) = x / (1 + x)
        for x in (0.2, 1.0, 4.0):
            assert f_cdf(x, 2, 2) == pytest.approx(x / (1 + x), abs=1e-12)

    @pytest.mark.parametrize(
        "cdf,args",
        [
            (chi2_cdf, (3,)),
            (chi2_cdf, (7,)),
            (lambda x, d=1, e=6: f_cdf(x, d, e), ()),
        ],
    )
    def test_cdfs_monotone_on_grid(self, cdf, args):
        grid = [i * 0.37 for i in range(60)]
        values = [cdf(x, *args) for x in grid]
        assert values[0] == 0.0
        assert all(a <= b + 1e-15 for a, b in zip(values, values[1:]))
        assert values[-1] <= 1.0

    def test_sf_cdf_complementarity(self):
        for x in (0.5, 2.0, 9.0):
            assert chi2_sf(x, 4) + chi2_cdf(x, 4) == pytest.approx(1.0, abs=1e-12)
            assert f_sf(x, 3, 11) + f_cdf(x, 3, 11) == pytest.approx(1.0, abs=1e-12)
