import itertools
import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from twoexperts import oracles, policies as pol
from twoexperts.errors import DomainError, ResourceError


def count_zero_visits(T):
    """E[Z_T(0)] by listing all 2^T walks."""
    total = 0
    for steps in itertools.product((-1, 1), repeat=T):
        s, visits = 0, 1
        for x in steps:
            s += x
            visits += s == 0
        total += visits
    return Fraction(total, 2 ** T)


class TestBruteForce:
    def test_erfc_small(self):
        assert oracles.brute_force_worst(pol.make_erfc_policy(1))[0] == 0.5
        assert oracles.brute_force_worst(pol.make_erfc_policy(2))[0] == pytest.approx(0.5, abs=1e-15)

    def test_cover_T3(self):
        v, seq = oracles.brute_force_worst(pol.make_cover_policy(pol.build_cover_tables(3)))
        assert v == 0.75 and seq.T == 3

    def test_exact_dfs(self):
        for T in (1, 4, 9):
            c = pol.make_cover_policy(pol.build_cover_tables(T, exact=True))
            v, _ = oracles.brute_force_worst(c, exact=True)
            assert v == oracles.passages_exact(T - 1, exact=True) / 2

    def test_cap(self):
        with pytest.raises(ResourceError):
            oracles.brute_force_worst(pol.make_uniform_policy(23))


class TestPassages:
    def test_values(self):
        assert oracles.passages_exact(0) == 1
        assert oracles.passages_exact(1) == 1.0
        assert oracles.passages_exact(2) == 1.5
        assert oracles.passages_exact(10) == 2.70703125
        assert oracles.passages_exact(10, exact=True) == Fraction(2772, 1024)

    @pytest.mark.parametrize("T", range(0, 13))
    def test_vs_enumeration(self, T):
        assert oracles.passages_exact(T, exact=True) == count_zero_visits(T)

    def test_central_binomial_sum(self):
        for T in (5, 40, 101):
            ref = sum(Fraction(math.comb(2 * k, k), 4 ** k) for k in range(T // 2 + 1))
            assert oracles.passages_exact(T, exact=True) == ref
            assert oracles.passages_exact(T) == pytest.approx(float(ref), rel=1e-14)

    @settings(max_examples=50)
    @given(st.integers(0, 3000))
    def test_float_tracks_exact(self, T):
        ex = oracles.passages_exact(T, exact=True)
        assert oracles.passages_exact(T) == pytest.approx(float(ex), rel=1e-13)
        assert 1 <= ex <= T + 1

    @settings(max_examples=30)
    @given(st.integers(1, 12), st.integers(0, 2 ** 32))
    def test_cover_regret_is_constant(self, T, seed):
        # Cover's player equalises: every restricted sequence yields V*[0][0]
        c = pol.make_cover_policy(pol.build_cover_tables(T))
        mean, _ = oracles.expected_regret_random_adversary(c, T, 5, seed)
        assert mean == pytest.approx(oracles.passages_exact(T - 1) / 2, abs=1e-12)

    def test_domain(self):
        with pytest.raises(DomainError):
            oracles.passages_exact(-1)
        with pytest.raises(DomainError):
            oracles.passages_exact(2.5)

    def test_upper_bound(self):
        T = np.arange(1, 100_001)
        k = np.arange(1, 50_001)
        terms = np.concatenate(([1.0], np.cumprod((2 * k - 1) / (2 * k))))
        exact = np.cumsum(terms)[T // 2]
        assert np.all(exact <= 1 + np.sqrt(2 * T / np.pi))

    def test_bounds_T10(self):
        lo, hi = oracles.passages_bounds(10)
        assert lo == pytest.approx(3.12313, abs=1e-5) and hi == pytest.approx(3.52313, abs=1e-5)
        assert oracles.passages_exact(10) <= hi
        # the published lower end is false here
        assert oracles.passages_exact(10) < lo

    def test_mc(self):
        mean, se = oracles.passages_mc(10, 1_000_000, 1)
        assert abs(mean - 2.70703125) <= 4 * se
        assert oracles.passages_mc(10, 5000, 3) == oracles.passages_mc(10, 5000, 3)
        assert oracles.passages_mc(0, 10, 3) == (1.0, 0.0)

    def test_mc_repetitions(self):
        hits = 0
        for seed in range(100):
            mean, se = oracles.passages_mc(8, 2000, seed)
            hits += abs(mean - oracles.passages_exact(8)) <= 4 * se
        assert hits >= 99

    def test_stats(self):
        s = oracles.passage_stats(10, trials=1000, seed=2)
        assert s.exact == Fraction(2772, 1024)
        assert 1 <= s.exact <= 11
        assert s.mc_mean is not None and s.upper > s.exact


class TestCentralBinomial:
    def test_examples(self):
        lo, hi = oracles.central_binom_bounds(1)
        # (4 / sqrt(pi)) * 13/15
        assert float(lo) == pytest.approx(1.9558572229655550, rel=1e-15)
        assert lo <= 2
        assert float(hi) == pytest.approx(2.25676, abs=1e-5)
        lo, hi = oracles.central_binom_bounds(5)
        assert 251.1 < lo < 252 < hi < 258.4

    def test_bracket_1000(self):
        for n in range(1, 1001):
            lo, hi = oracles.central_binom_bounds(n)
            assert lo <= math.comb(2 * n, n) <= hi

    def test_domain(self):
        with pytest.raises(DomainError):
            oracles.central_binom_bounds(0)


class TestRandomAdversary:
    def test_T1(self):
        for p in (pol.make_erfc_policy(1), pol.make_mwu_policy(1)):
            mean, se = oracles.expected_regret_random_adversary(p, 1, 50, 0)
            assert mean == 0.5 and se == 0

    @pytest.mark.parametrize("make", [pol.make_erfc_policy, pol.make_uniform_policy,
                                      pol.make_mwu_policy])
    def test_T3(self, make):
        mean, se = oracles.expected_regret_random_adversary(make(3), 3, 20_000, 5)
        assert abs(mean - 0.75) <= 4 * se

    def test_deterministic(self):
        p = pol.make_erfc_policy(20)
        a = oracles.expected_regret_random_adversary(p, 20, 3000, 9)
        assert a == oracles.expected_regret_random_adversary(p, 20, 3000, 9)


def test_report_schema():
    r = oracles.report("x", 4, Fraction(1, 2), np.float64(0.5), 1e-12, True, extra=np.int64(3))
    assert r == {"check": "x", "T": 4, "expected": 0.5, "actual": 0.5, "tolerance": 1e-12,
                 "pass": True, "extra": 3}
    doc = json.loads(oracles.dumps_reports([r, dict(r, **{"pass": False})]))
    assert doc["pass"] is False and len(doc["checks"]) == 2
