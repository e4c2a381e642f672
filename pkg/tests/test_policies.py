import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from twoexperts import policies as pol
from twoexperts.errors import DomainError, ResourceError


def hand_cover_value(T):
    """Cover's V[0][0] by memoised recursion over (t, g) with plain Fractions."""
    memo = {}

    def V(t, g):
        if t == T or g > T:
            return Fraction(0)
        if (t, g) not in memo:
            if g == 0:
                memo[t, g] = V(t + 1, 1) + Fraction(1, 2)
            else:
                memo[t, g] = (V(t + 1, g + 1) + V(t + 1, g - 1)) / 2
        return memo[t, g]

    return V(0, 0)


def walk_pstar(t, g, T):
    """1/2 Pr(S = g) + Pr(S > g) by listing every walk of length T - t."""
    m = T - t
    hits = above = 0
    for k in range(1 << m):
        s = sum(1 if (k >> i) & 1 else -1 for i in range(m))
        hits += s == g
        above += s > g
    return Fraction(hits, 2 * (1 << m)) + Fraction(above, 1 << m)


class TestGapPolicies:
    def test_erfc(self):
        T = 12
        p = pol.make_erfc_policy(T)
        assert all(p.p(t, 0) == 0.5 for t in range(1, T + 1))
        assert p.p(T, 3) == 0
        assert p.p(T - 1, 1) == pytest.approx(0.19522578889230152, rel=1e-14)
        assert p.label == "erfc"

    def test_continuous(self):
        T = 9
        p = pol.make_continuous_policy(T)
        assert p.p(1, 0) == 0.5
        assert p.p(T, 0) == 0.5
        assert p.p(T, 2) == pytest.approx(0.022750131948179207, rel=1e-14)

    def test_uniform(self):
        p = pol.make_uniform_policy(4)
        assert p.p(2, 3) == 0.5

    @pytest.mark.parametrize("make", [pol.make_erfc_policy, pol.make_continuous_policy,
                                      pol.make_uniform_policy])
    @given(T=st.integers(1, 3000), frac=st.floats(0, 1), L1=st.floats(0, 3000), L2=st.floats(0, 3000))
    def test_distribution_valid(self, make, T, frac, L1, L2):
        t = 1 + int(frac * (T - 1))
        x1, x2 = make(T).distribution(t, L1, L2)
        assert x1 >= 0 and x2 >= 0 and abs(x1 + x2 - 1) <= 1e-12
        if L1 == L2:
            assert x1 == x2 == 0.5

    def test_distribution_array(self):
        p = pol.make_erfc_policy(20)
        L1 = np.array([0.0, 3.0, 1.0, 2.5])
        L2 = np.array([0.0, 1.0, 3.0, 0.0])
        x1, x2 = p.distribution(5, L1, L2)
        for i in range(4):
            s1, s2 = p.distribution(5, float(L1[i]), float(L2[i]))
            assert x1[i] == pytest.approx(s1, abs=1e-15) and x2[i] == pytest.approx(s2, abs=1e-15)


class TestAct:
    def test_zero_gap(self):
        p = pol.make_erfc_policy(5)
        assert pol.act(p, 2, 0, None) == (0.5, 0.5)
        assert pol.act(p, 2, 0, 2) == (0.5, 0.5)

    def test_lagging(self):
        p = pol.GapPolicy(5, lambda t, g: 0.25, "quarter")
        assert pol.act(p, 1, 2, 1) == (0.25, 0.75)
        assert pol.act(p, 1, 2, 2) == (0.75, 0.25)

    def test_missing_lagging(self):
        with pytest.raises(DomainError):
            pol.act(pol.make_erfc_policy(5), 1, 1, None)


class TestCover:
    def test_T3_hand(self):
        tab = pol.build_cover_tables(3)
        assert tab.V[0][0] == 0.75
        assert tab.V[2][0] == 0.5 and tab.V[1][1] == 0.25
        assert tab.P[1][1] == 0.25
        assert np.all(tab.V[3] == 0)

    @pytest.mark.parametrize("T", [1, 2, 3, 5, 8, 13])
    def test_exact_matches_recursion(self, T):
        ex = pol.build_cover_tables(T, exact=True)
        assert ex.V[0][0] == hand_cover_value(T)
        fl = pol.build_cover_tables(T)
        assert fl.V[0][0] == float(ex.V[0][0])
        assert pol.cover_value(T) == pytest.approx(float(ex.V[0][0]), abs=1e-12)

    def test_exact_cap(self):
        with pytest.raises(ResourceError):
            pol.build_cover_tables(65, exact=True)

    def test_closed_form_small(self):
        assert pol.cover_pstar_closed_form(1, 1, 3) == 0.25
        assert pol.cover_pstar_closed_form(1, 1, 3, exact=True) == Fraction(1, 4)
        assert pol.cover_pstar_closed_form(2, 0, 7) == 0.5
        assert pol.cover_pstar_closed_form(5, 4, 7) == 0

    @pytest.mark.parametrize("T", [4, 7, 10])
    def test_closed_form_vs_walks(self, T):
        for t in range(1, T + 1):
            for g in range(T):
                assert pol.cover_pstar_closed_form(t, g, T, exact=True) == walk_pstar(t, g, T)

    def test_closed_form_vs_dp_256(self):
        T = 256
        tab = pol.build_cover_tables(T)
        worst = max(abs(pol.cover_pstar_closed_form(t, g, T) - tab.P[t][g])
                    for t in range(1, T + 1) for g in range(T))
        assert worst <= 1e-12

    def test_closed_form_domain(self):
        with pytest.raises(DomainError):
            pol.cover_pstar_closed_form(0, 0, 4)
        with pytest.raises(DomainError):
            pol.cover_pstar_closed_form(1, 4, 4)

    @pytest.mark.parametrize("T", [1, 2, 17, 100])
    def test_invariants(self, T):
        tab = pol.build_cover_tables(T)
        V, P = tab.V, tab.P
        if T > 1:
            d = V[:, :T - 1] - V[:, 2:]
            assert d.min() >= -1e-12 and d.max() <= 1 + 1e-12
        assert np.nanmax(P) <= 0.5 + 1e-12 and np.nanmin(P) >= 0
        for t in range(1, T):
            for g in range(1, T - 1):
                r = V[t][g] - V[t - 1][g] + 0.5 * (V[t][g + 1] + V[t][g - 1] - 2 * V[t][g])
                assert abs(r) <= 1e-12

    def test_discrete_heat_exact(self):
        T = 20
        V = pol.build_cover_tables(T, exact=True).V
        for t in range(1, T):
            for g in range(1, T - 1):
                assert V[t][g] - V[t - 1][g] + (V[t][g + 1] + V[t][g - 1] - 2 * V[t][g]) / 2 == 0

    def test_policy(self):
        p = pol.make_cover_policy(pol.build_cover_tables(3))
        assert p.p(1, 0) == 0.5
        assert p.p(1, 1) == 0.25
        assert p.p(1, 1.0) == 0.25
        with pytest.raises(DomainError, match="binary adversary"):
            p.p(1, 0.5)
        with pytest.raises(DomainError):
            p.p(4, 0)
        with pytest.raises(DomainError):
            p.p(1, 3)

    def test_exact_policy_fractions(self):
        p = pol.make_cover_policy(pol.build_cover_tables(6, exact=True))
        assert p.p(2, 1) == pol.cover_pstar_closed_form(2, 1, 6, exact=True)


class TestMWU:
    def test_tie(self):
        assert pol.make_mwu_policy(10).distribution(1, 3.0, 3.0) == (0.5, 0.5)

    def test_eta_one(self):
        x1, x2 = pol.make_mwu_policy(10, 1.0).distribution(2, 1.0, 0.0)
        assert x1 == pytest.approx(1 / (1 + math.e), rel=1e-15)
        assert x2 == pytest.approx(math.e / (1 + math.e), rel=1e-15)

    def test_eta_zero(self):
        m = pol.make_mwu_policy(10, 0.0)
        assert m.distribution(3, 7.0, 1.0) == (0.5, 0.5)

    def test_default_eta(self):
        assert pol.make_mwu_policy(100).eta == pytest.approx(math.sqrt(8 * math.log(2) / 100))

    @given(st.floats(0, 50), st.floats(0, 1e4), st.floats(0, 1e4))
    def test_valid(self, eta, L1, L2):
        x1, x2 = pol.make_mwu_policy(10, eta).distribution(1, L1, L2)
        assert x1 >= 0 and x2 >= 0 and abs(x1 + x2 - 1) <= 1e-12

    def test_bad_eta(self):
        with pytest.raises(DomainError):
            pol.make_mwu_policy(10, -1.0)
        with pytest.raises(DomainError):
            pol.make_mwu_policy(10, math.inf)


def test_make_policy():
    assert pol.make_policy("erfc", 5).label == "erfc"
    assert pol.make_policy("Q", 5).label == pol.make_continuous_policy(5).label
    assert pol.make_policy("mwu", 5, 0.3).eta == 0.3
    with pytest.raises(DomainError):
        pol.make_policy("hedge", 5)


@pytest.mark.parametrize("T", [1, 2, 9])
def test_table_roundtrip(T):
    tab = pol.build_cover_tables(T)
    blob = pol.tables_to_bytes(tab)
    assert len(blob) == 8 + 8 * ((T + 1) ** 2 + (T + 1) * T)
    back = pol.tables_from_bytes(blob)
    assert back.T == T
    assert np.array_equal(back.V, tab.V)
    assert np.array_equal(back.P, tab.P, equal_nan=True)
    j = pol.tables_from_json(pol.tables_to_json(tab))
    assert np.array_equal(j.V, tab.V) and np.array_equal(j.P, tab.P, equal_nan=True)
    ex = pol.build_cover_tables(T, exact=True)
    assert pol.tables_to_bytes(ex) == blob
