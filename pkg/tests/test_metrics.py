"""Horizon-restricted Hellinger affinity and total variation."""

import math

import numpy as np
import pytest

from mergebet.errors import BudgetExceeded, DomainError, MethodUnsupported
from mergebet.measures import BetaLearner, FiniteMixture, IID, Markov, bernoulli
from mergebet.metrics import (HorizonProfile, affinity_profile,
                              expectation_sqrt_ratio, hellinger_restricted,
                              hellinger_tv_bounds, horizon_distribution,
                              tv_profile, tv_restricted)
from mergebet.harness import oracle_metrics

from conftest import random_markov, random_measure

RHO = 2.0 * math.sqrt(0.24)  # one-step affinity of Bernoulli(0.4) vs (0.6)


# -- frozen values -----------------------------------------------------------


def test_affinity_identical_measures():
    p = bernoulli(0.37)
    for m in range(6):
        assert hellinger_restricted(p, p, m) == pytest.approx(1.0, abs=1e-12)


def test_affinity_bernoulli_one_step():
    h = hellinger_restricted(bernoulli(0.4), bernoulli(0.6), 1)
    assert h == pytest.approx(RHO, abs=1e-12)
    assert h == pytest.approx(0.9797959, abs=1e-7)


def test_affinity_bernoulli_two_steps_exact():
    assert hellinger_restricted(bernoulli(0.4), bernoulli(0.6), 2) == 0.96


def test_tv_identical_measures():
    p = bernoulli(0.37)
    for m in range(6):
        assert tv_restricted(p, p, m) == pytest.approx(0.0, abs=1e-12)


def test_tv_bernoulli_values():
    p, q = bernoulli(0.4), bernoulli(0.6)
    assert tv_restricted(p, q, 1) == pytest.approx(0.4, abs=1e-12)
    assert tv_restricted(p, q, 3) == pytest.approx(0.592, abs=1e-12)


def test_bounds_endpoints():
    assert hellinger_tv_bounds(1.0) == (0.0, 0.0)
    lo, hi = hellinger_tv_bounds(RHO)
    assert lo == pytest.approx(0.0404082, abs=1e-6)
    assert hi == pytest.approx(0.4020356, abs=1e-6)
    tv = tv_restricted(bernoulli(0.4), bernoulli(0.6), 1)
    assert lo <= tv <= hi


def test_bounds_rejects_out_of_range():
    with pytest.raises(DomainError):
        hellinger_tv_bounds(-0.1)
    with pytest.raises(DomainError):
        hellinger_tv_bounds(1.1)


# -- methods and errors ------------------------------------------------------


def test_methods_agree_on_iid():
    p, q = bernoulli(0.25), bernoulli(0.8)
    for m in range(9):
        d = hellinger_restricted(p, q, m, method="dp")
        e = hellinger_restricted(p, q, m, method="enumerate")
        assert abs(d - e) <= 1e-12


def test_methods_agree_on_markov(rng):
    for _ in range(50):
        p = random_markov(rng, order=int(rng.integers(1, 3)))
        q = random_markov(rng, order=int(rng.integers(1, 3)))
        for m in (1, 5, 10):
            d = hellinger_restricted(p, q, m, method="dp")
            e = hellinger_restricted(p, q, m, method="enumerate")
            assert abs(d - e) <= 1e-12


def test_dp_unsupported_for_learner():
    with pytest.raises(MethodUnsupported):
        hellinger_restricted(BetaLearner([1, 1]), bernoulli(0.4), 3,
                             method="dp")


def test_enumerate_respects_budget():
    with pytest.raises(BudgetExceeded):
        hellinger_restricted(bernoulli(0.4), bernoulli(0.6), 40,
                             method="enumerate", budget=2 ** 10)


def test_unknown_method():
    with pytest.raises(DomainError):
        hellinger_restricted(bernoulli(0.4), bernoulli(0.6), 2, method="magic")


def test_negative_horizon():
    with pytest.raises(DomainError):
        hellinger_restricted(bernoulli(0.4), bernoulli(0.6), -1)
    with pytest.raises(DomainError):
        tv_restricted(bernoulli(0.4), bernoulli(0.6), -1)


def test_alphabet_mismatch():
    with pytest.raises(DomainError):
        hellinger_restricted(bernoulli(0.4), IID([0.3, 0.3, 0.4]), 2)


# -- monotonicity and sandwich -------------------------------------------------


def test_monotone_and_sandwich_random_pairs(rng):
    for _ in range(300):
        p, q = random_measure(rng), random_measure(rng)
        hs = affinity_profile(p, q, 8)
        tvs = tv_profile(p, q, 8)
        assert hs[0] == 1.0 and tvs[0] == 0.0
        for m in range(8):
            assert hs[m + 1] <= hs[m] + 1e-10
            assert tvs[m + 1] >= tvs[m] - 1e-10
        for h, tv in zip(hs, tvs):
            lo, hi = hellinger_tv_bounds(min(float(h), 1.0))
            assert lo - 1e-10 <= tv <= hi + 1e-10


def test_profiles_match_pointwise(rng):
    for _ in range(25):
        p, q = random_measure(rng), random_measure(rng)
        hs = affinity_profile(p, q, 6)
        tvs = tv_profile(p, q, 6)
        for m in range(7):
            assert hs[m] == pytest.approx(hellinger_restricted(p, q, m),
                                          abs=1e-12)
            assert tvs[m] == pytest.approx(tv_restricted(p, q, m), abs=1e-12)


# -- sup-over-events total variation ------------------------------------------


def test_tv_sup_form_matches_l1(rng):
    for _ in range(30):
        p, q = random_measure(rng), random_measure(rng)
        for m in (1, 2, 3):  # 2^m <= 12 strings, all events scanned
            h, tv, sup_tv = oracle_metrics(p, q, m)
            assert sup_tv is not None
            assert abs(sup_tv - tv) <= 1e-12
            assert abs(tv - tv_restricted(p, q, m)) <= 1e-12
            assert abs(h - hellinger_restricted(p, q, m)) <= 1e-12


# -- expectation primitive ------------------------------------------------


def test_expectation_sqrt_ratio_equals_affinity(rng):
    # E_P[sqrt(Q/P)] over Y^m is exactly H_m
    for _ in range(20):
        p, q = random_measure(rng), random_measure(rng)
        for m in range(5):
            esr = expectation_sqrt_ratio(p, p, q, m)
            assert esr == pytest.approx(hellinger_restricted(p, q, m),
                                        abs=1e-10)


def test_expectation_sqrt_ratio_base_cases():
    p, q = bernoulli(0.4), bernoulli(0.6)
    assert expectation_sqrt_ratio(p, p, q, 0) == 1.0
    with pytest.raises(DomainError):
        expectation_sqrt_ratio(p, p, q, -1)


# -- horizon profile -----------------------------------------------------------


def test_find_below_matches_linear_scan(rng):
    for _ in range(50):
        p, q = random_measure(rng), random_measure(rng)
        prof = HorizonProfile(p, q)
        threshold = float(rng.uniform(0.2, 1.0))
        got = prof.find_below(threshold, 12)
        expect = None
        for m in range(1, 13):
            if hellinger_restricted(p, q, m) < threshold:
                expect = m
                break
        assert got == expect


def test_find_below_short_circuit():
    p = bernoulli(0.4)
    prof = HorizonProfile(p, p)
    assert prof.find_below(0.5, 0) is None
    assert prof.find_below(0.5, 64) is None


# -- explicit restrictions ---------------------------------------------------


def test_horizon_distribution_normalizes(rng):
    for _ in range(10):
        p = random_measure(rng)
        dist = horizon_distribution(p, 5)
        assert dist.horizon == 5
        assert len(dist.items) == 32
        total = math.fsum(math.exp(lp) for _, lp in dist.items)
        assert total == pytest.approx(1.0, abs=1e-9)


def test_horizon_distribution_budget():
    with pytest.raises(BudgetExceeded):
        horizon_distribution(bernoulli(0.5), 30, budget=2 ** 10)
