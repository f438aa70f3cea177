import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aligndp.accountant import (
    ADVANCED,
    BASIC,
    ChargeResult,
    PrivacyLedger,
    ReleaseBundle,
    aggregate,
    compose_advanced,
    compose_basic,
)
from aligndp.mechanism import (
    CategoricalDistribution,
    PrivatizedReport,
    classify_rarity,
    derive_params,
    privatize_many,
)

LN3 = math.log(3)


class TestComposeBasic:
    def test_linear(self):
        assert compose_basic(100, 0.1) == 100 * 0.1
        assert compose_basic(100, 0.1) == pytest.approx(10.0, abs=1e-12)

    def test_empty(self):
        assert compose_basic(0, 5.0) == 0.0

    def test_reference_epsilon(self):
        assert compose_basic(10, LN3) == pytest.approx(10.986122886681098, abs=1e-12)

    def test_rejects_negative(self):
        with pytest.raises(ValueError):
            compose_basic(-1, 0.1)
        with pytest.raises(ValueError):
            compose_basic(1, -0.1)


class TestComposeAdvanced:
    def test_reference_value(self):
        # oracle: arbitrary-precision evaluation of the closed form
        mp = pytest.importorskip("mpmath")
        mp.mp.dps = 50
        oracle = float(
            mp.sqrt(2 * 100 * mp.log(mp.mpf(10) ** 5)) * mp.mpf("0.1")
            + 100 * mp.mpf("0.1") * (mp.e ** mp.mpf("0.1") - 1)
        )
        assert compose_advanced(100, 0.1, 1e-5) == pytest.approx(oracle, abs=1e-9)
        assert compose_advanced(100, 0.1, 1e-5) == pytest.approx(5.850235, abs=1e-5)

    def test_single_query_dominates_eps(self):
        value = compose_advanced(1, 0.5, 0.01)
        assert value == pytest.approx(
            math.sqrt(2 * math.log(100)) * 0.5 + 0.5 * (math.e**0.5 - 1), abs=1e-12
        )
        assert value >= 0.5

    def test_monotone_in_count(self):
        assert compose_advanced(200, 0.1, 1e-5) > compose_advanced(100, 0.1, 1e-5)

    def test_beats_basic_for_many_small_queries(self):
        for k in range(50, 501):
            assert compose_advanced(k, 0.1, 1e-5) < compose_basic(k, 0.1)

    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.2, 2.0])
    def test_rejects_bad_delta(self, delta):
        with pytest.raises(ValueError, match="delta"):
            compose_advanced(10, 0.1, delta)

    def test_rejects_bad_count_or_eps(self):
        with pytest.raises(ValueError):
            compose_advanced(0, 0.1, 1e-5)
        with pytest.raises(ValueError):
            compose_advanced(10, 0.0, 1e-5)


class TestPrivacyLedger:
    def test_single_charge_accepted(self):
        ledger = PrivacyLedger(budget=5.0, mode=BASIC)
        outcome = ledger.charge(LN3)
        assert outcome.accepted
        assert outcome.spent == pytest.approx(LN3, abs=1e-12)

    def test_refusal_at_fifth_reference_charge(self):
        ledger = PrivacyLedger(budget=5.0, mode=BASIC)
        for _ in range(4):
            assert ledger.charge(LN3).accepted
        outcome = ledger.charge(LN3)
        assert not outcome.accepted
        assert "budget" in outcome.reason
        assert ledger.spent == pytest.approx(4 * LN3, abs=1e-9)

    def test_zero_budget_refuses_everything(self):
        ledger = PrivacyLedger(budget=0.0)
        assert not ledger.charge(0.1).accepted
        assert ledger.charge(0.0).accepted  # free queries stay free

    def test_refusal_is_atomic(self):
        ledger = PrivacyLedger(budget=1.0, mode=BASIC)
        ledger.charge(0.9)
        before = ledger.to_text()
        assert not ledger.charge(0.5).accepted
        assert ledger.to_text() == before

    def test_mode_is_validated(self):
        with pytest.raises(ValueError, match="mode"):
            PrivacyLedger(budget=1.0, mode="renyi")

    def test_rejects_negative_charge(self):
        with pytest.raises(ValueError, match="eps"):
            PrivacyLedger(budget=1.0).charge(-0.1)

    def test_text_round_trip(self):
        ledger = PrivacyLedger(budget=5.0, mode=ADVANCED, delta_target=1e-6)
        ledger.charge(0.1)
        ledger.charge(0.2)
        clone = PrivacyLedger.from_text(ledger.to_text())
        assert clone.to_text() == ledger.to_text()
        assert clone.spent == pytest.approx(ledger.spent, abs=1e-15)

    @given(charges=st.lists(st.floats(0.0, 0.5), max_size=20))
    @settings(max_examples=100)
    def test_basic_spend_recomputes_from_history(self, charges):
        ledger = PrivacyLedger(budget=math.inf, mode=BASIC)
        for eps in charges:
            ledger.charge(eps)
        assert ledger.spent == pytest.approx(math.fsum(ledger.query_epsilons), abs=1e-9)

    @given(charges=st.lists(st.floats(0.01, 0.5), max_size=20))
    @settings(max_examples=100)
    def test_advanced_spend_recomputes_from_history(self, charges):
        ledger = PrivacyLedger(budget=math.inf, mode=ADVANCED, delta_target=1e-5)
        for eps in charges:
            ledger.charge(eps)
        history = ledger.query_epsilons
        if history:
            expected = math.sqrt(
                2 * math.log(1e5) * sum(e * e for e in history)
            ) + sum(e * (math.exp(e) - 1) for e in history)
        else:
            expected = 0.0
        assert ledger.spent == pytest.approx(expected, abs=1e-9)

    def test_advanced_homogeneous_matches_closed_form(self):
        ledger = PrivacyLedger(budget=math.inf, mode=ADVANCED, delta_target=1e-5)
        for _ in range(40):
            ledger.charge(0.1)
        assert ledger.spent == pytest.approx(compose_advanced(40, 0.1, 1e-5), abs=1e-9)


def _setup(seed=4242, n=1000):
    masses = np.empty(20)
    masses[:4] = 0.0025
    ranks = np.arange(1, 17, dtype=float)
    weights = 1 / ranks
    masses[4:] = 0.99 * weights / weights.sum()
    dist = CategoricalDistribution(masses)
    partition = classify_rarity(dist, 0.01)
    params = derive_params(0.25, 20)
    rng = np.random.default_rng(seed)
    records = rng.choice(20, size=n, p=dist.masses)
    values = privatize_many(records, partition, params, rng)
    reports = [
        PrivatizedReport.shielded_rare() if v < 0 else PrivatizedReport.reported(v)
        for v in values.tolist()
    ]
    return dist, partition, params, reports


class TestAggregate:
    def test_monte_carlo_release(self):
        dist, partition, params, reports = _setup()
        ledger = PrivacyLedger(budget=math.inf)
        bundle = aggregate(reports, partition, params, ledger, max_rare_mass=0.0025)
        assert isinstance(bundle, ReleaseBundle)
        assert bundle.n == 1000
        # frozen for seed 4242: max error 0.0169, shielded count 11
        errors = [abs(bundle.nonrare_estimates[j] - dist.masses[j]) for j in partition.nonrare]
        assert max(errors) <= 0.05
        assert bundle.rare_total_count == 11
        assert 2 <= bundle.rare_total_count <= 25  # ~ Binomial(1000, 0.01)
        assert bundle.ledger_snapshot == (ledger.spent, math.inf, BASIC)
        assert bundle.rare_pac.hoeffding_gap == pytest.approx(math.exp(-0.1125), abs=1e-12)

    def test_rare_keys_are_never_released(self):
        for seed in range(8):
            _, partition, params, reports = _setup(seed=seed, n=400)
            bundle = aggregate(reports, partition, params, PrivacyLedger(budget=math.inf))
            assert set(bundle.nonrare_estimates) & set(partition.rare) == set()
            assert set(bundle.nonrare_estimates) == set(partition.nonrare)

    def test_all_shielded_degenerate_input(self):
        _, partition, params, _ = _setup()
        reports = [PrivatizedReport.shielded_rare()] * 50
        bundle = aggregate(reports, partition, params, PrivacyLedger(budget=math.inf))
        assert bundle.rare_total_count == 50
        # all-zero histogram debiases to the constant -p/k / (1-p)
        expected = (0.0 - 0.0125) / 0.75
        for value in bundle.nonrare_estimates.values():
            assert value == pytest.approx(expected, abs=1e-12)

    def test_budget_gate_precedes_computation(self):
        _, partition, params, reports = _setup()
        ledger = PrivacyLedger(budget=0.5)  # below one eps_nominal
        outcome = aggregate(reports, partition, params, ledger)
        assert isinstance(outcome, ChargeResult)
        assert not outcome.accepted
        assert ledger.query_epsilons == []

    def test_rejects_empty_reports(self):
        _, partition, params, _ = _setup()
        with pytest.raises(ValueError, match="non-empty"):
            aggregate([], partition, params, PrivacyLedger(budget=math.inf))

    def test_pac_fallback_without_known_rare_mass(self):
        _, partition, params, reports = _setup()
        bundle = aggregate(reports, partition, params, PrivacyLedger(budget=math.inf))
        # mu falls back to alpha/2
        assert bundle.rare_pac.hoeffding_gap == pytest.approx(
            math.exp(-2 * 1000 * 0.005**2), abs=1e-12
        )
        assert bundle.rare_pac.hoeffding_alpha == pytest.approx(
            math.exp(-2 * 1000 * 0.01**2), abs=1e-12
        )
