import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tourpart.bounds import (
    ChernoffScenario,
    HoeffdingScenario,
    MarkovScenario,
    chernoff_bound,
    hoeffding_bound,
    markov_bound,
    monte_carlo_validate,
    standard_scenarios,
)
from tourpart.errors import PreconditionError


class TestCalculators:
    def test_hoeffding_paper_scale(self):
        rho = 10**4
        res = hoeffding_bound(2**6 * rho, 1.0)
        assert res.log_bound == pytest.approx(-8 * 10**4)
        assert res.bound == 0.0  # underflows; the log carries the value

    def test_hoeffding_exponent_minus_one(self):
        res = hoeffding_bound(8.0, 1.0, ell=3.0)
        assert res.bound == pytest.approx(math.exp(-1))
        assert res.threshold == 3.0

    def test_hoeffding_boundary_excluded(self):
        with pytest.raises(PreconditionError) as e:
            hoeffding_bound(4.0, 1.0)
        assert e.value.kind == "precondition-violation"

    def test_markov(self):
        res = markov_bound(0.5, 10)
        assert res.threshold == 5 and res.bound == pytest.approx(0.5)
        empty = markov_bound(0.3, 0)
        assert empty.threshold == 0 and empty.bound == 0
        with pytest.raises(PreconditionError):
            markov_bound(1.0, 3)

    def test_chernoff(self):
        assert chernoff_bound(10, 1, "lower").bound == pytest.approx(math.exp(-5))
        assert chernoff_bound(9, 1, "upper").bound == pytest.approx(math.exp(-3))
        for tail in ("lower", "upper"):
            assert chernoff_bound(7, 0, tail).bound == 1.0
        with pytest.raises(PreconditionError):
            chernoff_bound(5, 1.5, "lower")
        with pytest.raises(PreconditionError):
            chernoff_bound(5, 0.5, "middle")

    @given(st.floats(0.01, 100), st.floats(0, 1), st.floats(0, 1))
    def test_chernoff_monotone(self, mu, d1, d2):
        lo, hi = sorted((d1, d2))
        for tail in ("lower", "upper"):
            a, b = chernoff_bound(mu, lo, tail), chernoff_bound(mu, hi, tail)
            assert 0 <= b.bound <= a.bound <= 1
            assert chernoff_bound(mu * 2, hi, tail).bound <= b.bound

    @given(st.floats(0.1, 10), st.floats(4.01, 1000), st.floats(1.01, 10))
    def test_hoeffding_monotone(self, eta2, ratio, more):
        a = hoeffding_bound(ratio * eta2, eta2)
        b = hoeffding_bound(ratio * more * eta2, eta2)
        assert 0 <= b.bound <= a.bound <= 1


class TestMonteCarlo:
    @pytest.mark.parametrize("name,scenario", standard_scenarios())
    def test_within_three_sigma(self, name, scenario):
        res = monte_carlo_validate(scenario, 100_000, seed=1)
        assert res.within_three_sigma, (name, res.to_dict())

    def test_markov_example(self):
        res = monte_carlo_validate(MarkovScenario(0.1, 1000, 0.99), 100_000, seed=2)
        assert res.frequency <= 0.1

    def test_chernoff_example(self):
        res = monte_carlo_validate(ChernoffScenario(100, 0.5, 0.5, "lower"), 100_000, seed=3)
        assert res.frequency <= math.exp(-6.25) + 3 * res.sigma

    def test_hoeffding_equal_values(self):
        sc = HoeffdingScenario(8.0, 1.0, (0.08,) * 100)
        res = monte_carlo_validate(sc, 100_000, seed=4)
        assert res.frequency <= math.exp(-1) + 3 * res.sigma

    def test_deterministic_per_seed(self):
        sc = ChernoffScenario(40, 0.25, 0.8, "upper")
        assert monte_carlo_validate(sc, 5000, seed=9) == monte_carlo_validate(sc, 5000, seed=9)

    def test_degenerate(self):
        never = monte_carlo_validate(ChernoffScenario(10, 1.0, 0.5, "upper"), 1000)
        always = monte_carlo_validate(ChernoffScenario(10, 0.0, 0.5, "lower"), 1000)
        assert never.frequency == 0.0 and always.frequency == 1.0

    def test_zero_trials(self):
        with pytest.raises(PreconditionError):
            monte_carlo_validate(MarkovScenario(0.5, 10, 0.75), 0)

    def test_scenario_hypotheses_checked(self):
        with pytest.raises(PreconditionError):
            monte_carlo_validate(HoeffdingScenario(8.0, 1.0, (2.0,) * 10), 10)
        with pytest.raises(PreconditionError):
            monte_carlo_validate(MarkovScenario(0.1, 10, 0.5), 10)

    def test_grouped_sampler_matches_direct_sum(self):
        # independent sampler: one Bernoulli per value
        sc = HoeffdingScenario(5.0, 1.0, (1.0,) * 3 + (0.25,) * 12 + (0.1,) * 10)
        rng = np.random.default_rng(0)
        vals = np.array(sc.values)
        direct = ((rng.random((100_000, len(vals))) < 0.5) * vals).sum(axis=1) < 1.0
        grouped = sc.failures(np.random.default_rng(1), 100_000)
        assert abs(direct.mean() - grouped.mean()) < 0.01
