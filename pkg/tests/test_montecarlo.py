"""Unit tests for gee.montecarlo."""

import math

import numpy as np
import pytest
from numpy.random import Generator, Philox
from pytest import approx

from gee.montecarlo import (
    PartitionMap,
    SimPlan,
    ErrorEstimate,
    estimate_pf,
    estimate_pm,
    sample_occupancy,
    simulate_statistics,
    sweep,
)
from gee.oracle import exact_error_probs
from gee.pmf import Pmf, biuniform_worst_case, permuted_worst_case, uniform
from gee.statistics import (
    Coincidence,
    ExtendedCoincidence,
    Pearson,
    absolute_threshold,
    make_threshold,
)


def coincidence_plan(n, m, eps, tau, trials, seed, streams=1, alternative=None):
    stat = Coincidence()
    rule = make_threshold(stat, n, m, tau=tau)
    return SimPlan(
        n=n, m=m, eps=eps, statistic=stat, rule=rule,
        trials=trials, seed=seed, streams=streams, alternative=alternative,
    )


class TestSampleOccupancy:
    def test_point_mass(self):
        p = Pmf([1.0, 0.0])
        rng = np.random.default_rng(0)
        for _ in range(5):
            fp = sample_occupancy(p, 5, rng)
            assert fp.level(5) == 1 and fp.level(0) == 1

    def test_fixed_seed_reproducible(self):
        a = [sample_occupancy(uniform(50), 10, np.random.default_rng(42)).phi for _ in range(1)]
        b = [sample_occupancy(uniform(50), 10, np.random.default_rng(42)).phi for _ in range(1)]
        assert all(np.array_equal(x, y) for x, y in zip(a, b))

    def test_invariants_hold(self, rng):
        for _ in range(200):
            n = int(rng.integers(0, 30))
            m = int(rng.integers(2, 40))
            fp = sample_occupancy(uniform(m), n, rng)
            assert fp.n == n and fp.m == m

    def test_two_symbol_singleton_frequency(self):
        # P(both draws distinct) = 1/2 for n=2, m=2
        values = simulate_statistics(uniform(2), [Coincidence()], 2, 100_000, seed=3)[0]
        p_hat = float(np.mean(values == -2.0))
        sigma = math.sqrt(0.25 / 100_000)
        assert abs(p_hat - 0.5) <= 4 * sigma


class TestEstimates:
    def test_threshold_above_max_gives_zero(self):
        plan = SimPlan(
            n=10, m=20, eps=0.3, statistic=Coincidence(),
            rule=absolute_threshold(Coincidence(), 10, 20, cut=1.0),
            trials=500, seed=1,
        )
        est = estimate_pf(plan)
        assert est.p_hat == 0.0 and est.ci95_halfwidth == 0.0

    def test_matches_exact_oracle(self):
        n, m, eps, tau, trials = 20, 50, 0.3, 0.2, 100_000
        plan = coincidence_plan(n, m, eps, tau, trials, seed=5)
        pf_exact, pm_exact = exact_error_probs(
            plan.statistic, plan.rule, uniform(m), plan.alternative, n
        )
        pf = estimate_pf(plan)
        pm = estimate_pm(plan)
        sf = math.sqrt(pf_exact * (1 - pf_exact) / trials)
        sm = math.sqrt(pm_exact * (1 - pm_exact) / trials)
        assert abs(pf.p_hat - pf_exact) <= 4 * sf
        assert abs(pm.p_hat - pm_exact) <= 4 * sm

    def test_stream_count_does_not_change_counts(self):
        plans = [coincidence_plan(12, 30, 0.3, 0.2, 20_000, seed=7, streams=s) for s in (1, 8)]
        pf_counts = {estimate_pf(p).exceed_count for p in plans}
        pm_counts = {estimate_pm(p).exceed_count for p in plans}
        assert len(pf_counts) == 1 and len(pm_counts) == 1

    def test_repeated_runs_identical(self):
        plan = coincidence_plan(12, 30, 0.3, 0.2, 20_000, seed=9)
        assert estimate_pf(plan) == estimate_pf(plan)

    def test_seed_changes_counts(self):
        a = estimate_pf(coincidence_plan(12, 30, 0.3, 0.2, 20_000, seed=1))
        b = estimate_pf(coincidence_plan(12, 30, 0.3, 0.2, 20_000, seed=2))
        assert a.exceed_count != b.exceed_count

    def test_counts_path_matches_sorted_path_law(self):
        # n >= 4m triggers the conditional-binomial path; compare against
        # the exact oracle rather than another sampler
        n, m, tau, trials = 60, 12, 0.3, 50_000
        plan = coincidence_plan(n, m, 0.3, tau, trials, seed=11)
        pf_exact, _ = exact_error_probs(
            plan.statistic, plan.rule, uniform(m), plan.alternative, n
        )
        pf = estimate_pf(plan)
        assert abs(pf.p_hat - pf_exact) <= 4 * math.sqrt(pf_exact * (1 - pf_exact) / trials)

    def test_permuted_alternative_uses_alias_path(self):
        # permuted worst case is neither uniform nor banded; the alias
        # sampler must still produce the right acceptance probability
        n, m, eps, tau, trials = 12, 30, 0.3, 0.2, 50_000
        alt = permuted_worst_case(m, eps, set(range(2, 2 + m // 2)))
        plan = coincidence_plan(n, m, eps, tau, trials, seed=13, alternative=alt)
        # symmetric statistic: permuting symbols leaves the law unchanged
        _, pm_exact = exact_error_probs(
            plan.statistic, plan.rule, uniform(m), biuniform_worst_case(m, eps), n
        )
        pm = estimate_pm(plan)
        assert abs(pm.p_hat - pm_exact) <= 4 * math.sqrt(pm_exact * (1 - pm_exact) / trials)

    def test_error_estimate_fields(self):
        est = ErrorEstimate.from_count(250, 1000)
        assert est.p_hat == 0.25
        assert est.ci95_halfwidth == approx(1.96 * math.sqrt(0.25 * 0.75 / 1000))
        assert ErrorEstimate.from_count(0, 10).ci95_halfwidth == 0.0
        assert ErrorEstimate.from_count(10, 10).ci95_halfwidth == 0.0


class TestPairedProperties:
    def test_threshold_monotonicity_on_shared_trials(self):
        values = simulate_statistics(uniform(30), [Coincidence()], 12, 20_000, seed=21)[0]
        base = make_threshold(Coincidence(), 12, 30, tau=0.0).cut
        taus = np.linspace(0.0, 1.0, 11)
        scale = 144 / 30
        pf = [float(np.mean(values >= base + t * scale)) for t in taus]
        pm = [float(np.mean(values < base + t * scale)) for t in taus]
        assert all(a >= b for a, b in zip(pf, pf[1:]))
        assert all(a <= b for a, b in zip(pm, pm[1:]))

    def test_extended_acceptance_dominated_pairwise(self):
        coin = Coincidence()
        ext = ExtendedCoincidence(weights=(0.0, 1.0, 2.0))
        assert ext.weights_valid
        alt = biuniform_worst_case(30, 0.3)
        coin_vals, ext_vals = simulate_statistics(alt, [coin, ext], 12, 20_000, seed=23)
        assert np.all(ext_vals >= coin_vals)
        # equal cuts: accepting under the extended statistic implies
        # accepting under the plain one, so paired pm is ordered
        cut = make_threshold(coin, 12, 30, tau=0.2).cut
        assert np.all((ext_vals < cut) <= (coin_vals < cut))


class TestSweep:
    def test_rows_ordered_and_r_grows(self):
        rows = sweep(
            eps=0.3, statistic=Coincidence(), tau=0.2,
            n_list=(20, 10, 40), m_rule=lambda n: math.ceil(n**1.5),
            trials=2000, seed=3,
        )
        assert [row.n for row in rows] == [10, 20, 40]
        rs = [row.r for row in rows]
        assert all(a < b for a, b in zip(rs, rs[1:]))
        for row in rows:
            assert row.r == approx(row.n**2 / row.m)

    def test_empty_n_list(self):
        assert sweep(0.3, Coincidence(), 0.2, (), lambda n: 2 * n, 100, 1) == []

    def test_zero_rows_flagged_not_dropped(self):
        # eps=0.8 allows tau up to 4, pushing the cut above the maximum
        # statistic value 0, so no trial can ever reject
        stat = Coincidence()
        with pytest.warns(UserWarning):
            rows = sweep(
                eps=0.8, statistic=stat, tau=4.0,
                n_list=(10,), m_rule=lambda n: 3 * n, trials=200, seed=5,
            )
        assert len(rows) == 1
        assert "pf_zero" in rows[0].flags
        assert rows[0].pf.p_hat == 0.0

    def test_pearson_sweep_uses_consistency_rule(self):
        rows = sweep(
            eps=0.35, statistic=Pearson(), tau=None,
            n_list=(20,), m_rule=lambda n: 2 * n, trials=2000, seed=6,
        )
        r = rows[0]
        assert r.pf.trials == 2000

    def test_matches_exact_at_small_sizes(self):
        rows = sweep(
            eps=0.3, statistic=Coincidence(), tau=0.2,
            n_list=(10, 12), m_rule=lambda n: math.ceil(2.5 * n),
            trials=100_000, seed=8,
        )
        for row in rows:
            rule = make_threshold(Coincidence(), row.n, row.m, tau=0.2)
            pf_exact, pm_exact = exact_error_probs(
                Coincidence(), rule, uniform(row.m),
                biuniform_worst_case(row.m, 0.3), row.n,
            )
            assert abs(row.pf.p_hat - pf_exact) <= 4 * math.sqrt(
                pf_exact * (1 - pf_exact) / row.pf.trials
            )
            assert abs(row.pm.p_hat - pm_exact) <= 4 * math.sqrt(
                pm_exact * (1 - pm_exact) / row.pm.trials
            )


class TestPartitionMap:
    def test_unit_interval_cells(self):
        pmap = PartitionMap(lambda t: t, 4)
        assert pmap(0.30) == 2
        assert pmap(0.0) == 1
        assert pmap(0.25) == 2  # cells are right-open
        assert pmap(1.0) == 4  # top edge closed

    def test_domain_error(self):
        pmap = PartitionMap(lambda t: t, 4)
        with pytest.raises(ValueError):
            pmap(1.5)
        with pytest.raises(ValueError):
            pmap(-0.1)

    def test_vectorized(self):
        pmap = PartitionMap(lambda t: t, 4)
        out = pmap(np.array([0.1, 0.3, 0.6, 0.9]))
        assert out.tolist() == [1, 2, 3, 4]

    def test_null_induces_uniform_symbols(self):
        # P has cdf sqrt(y) on [0,1]; its quantile is t^2
        m, draws = 8, 100_000
        pmap = PartitionMap(lambda t: t * t, m)
        rng = np.random.default_rng(17)
        y = rng.random(draws) ** 2
        symbols = pmap(y)
        counts = np.bincount(symbols, minlength=m + 1)[1:]
        expected = draws / m
        sigma = math.sqrt(draws * (1 / m) * (1 - 1 / m))
        assert np.all(np.abs(counts - expected) <= 4 * sigma)

    def test_monotonicity_required(self):
        with pytest.raises(ValueError):
            PartitionMap(lambda t: -t, 4)
