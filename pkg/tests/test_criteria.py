import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from dilation_lab import (EXACT, FLOAT, BohrSeries, Tau, TruncatedSeries, bohr_lift, coprime_pairs,
                          coprime_residual, inner_test, monomial_diagnostic, norm_sq, orthogonality_test,
                          product_constant_test, proof_chain, tau_symmetry_test)
from dilation_lab.criteria import (classify, gram_level, nij_power, nij_power_minus_one,
                                   shifted_level)
from dilation_lab.fixtures import blaschke

Z_PLUS_Z2 = TruncatedSeries({1: 1, 2: 1})


def test_pair_order_is_by_product_then_first():
    pairs = list(coprime_pairs(4))
    assert pairs == [(1, 2), (1, 3), (1, 4), (2, 3), (3, 4)]
    ordered = list(coprime_pairs(3, ordered=True))
    assert ordered[:2] == [(1, 2), (2, 1)]


class TestCoprimeResidual:
    def test_no_overlap(self):
        z2 = TruncatedSeries({2: 1})
        assert coprime_residual(z2, z2, 2, 3) == 0

    def test_single_term(self):
        assert coprime_residual(Z_PLUS_Z2, Z_PLUS_Z2, 1, 2) == 1

    def test_rejects_common_factor(self):
        with pytest.raises(ValueError):
            coprime_residual(Z_PLUS_Z2, Z_PLUS_Z2, 2, 4)

    def test_weight_laws(self):
        assert nij_power(-1)(1, 1, 2, EXACT) == Fraction(1, 2)
        assert nij_power_minus_one(1)(3, 1, 2, EXACT) == 1
        assert gram_level(-1, 2)(1, 1, 3, EXACT) == Fraction(1, 7)
        assert shifted_level(-1, 4)(1, 1, 2, EXACT) == Fraction(4, 9)

    def test_blaschke_truncation_scale(self):
        # lost terms a_{2^m} a_{2^(m+1)}, m >= M, sum to (1-|a|^2) |a|^(2M-1)
        a = Fraction(1, 2)
        for M in (4, 8, 12):
            f = blaschke(a, M, EXACT)
            r = coprime_residual(f, f, 1, 2)
            assert r == -(1 - a * a) * a ** (2 * M - 1)


class TestOrthogonality:
    @pytest.mark.parametrize("t", [-2, -1, 0, 1, 2])
    def test_monomial(self, t):
        assert orthogonality_test(TruncatedSeries({4: (2, 1)}), t, 9).verdict == "all_zero"

    def test_z_plus_z2(self):
        rep = orthogonality_test(Z_PLUS_Z2, -1, 4)
        assert rep.verdict == "violated_at(1,2)"
        assert rep.residual_at(1, 2) == Fraction(1, 3)

    def test_gram_position_is_reported(self):
        f = TruncatedSeries({1: 1, 3: 1})
        rep = orthogonality_test(f, 1, 6)
        assert rep.verdict == "violated_at(1,3)"

    def test_blaschke_t0(self):
        assert orthogonality_test(blaschke(Fraction(1, 2), 12, EXACT), 0, 8).verdict == "all_zero"
        assert orthogonality_test(blaschke(Fraction(1, 2), 3, EXACT), 0, 8).verdict == "inconclusive"

    def test_float_blaschke(self):
        rep = orthogonality_test(blaschke(Fraction(1, 2), 14, FLOAT), 0, 6)
        assert rep.verdict == "all_zero"
        assert all(abs(p.residual) <= p.tail_bound for p in rep.pairs)

    def test_needs_two_dilations(self):
        with pytest.raises(ValueError):
            orthogonality_test(Z_PLUS_Z2, 0, 1)

    def test_json(self):
        js = orthogonality_test(Z_PLUS_Z2, 0, 3).to_json()
        assert js["verdict"] == "violated_at(1,2)"
        assert js["pairs"][0]["residual"] == [1, 1, 0, 1]


def test_float_verdicts_need_margin_over_rounding():
    assert classify(1e-17, 0.0, FLOAT, 4, 1.0, 1e-6) == "zero"
    assert classify(1e-3, 0.0, FLOAT, 4, 1.0, 1e-6) == "violated"
    assert classify(1e-8, 1e-4, FLOAT, 4, 1.0, 1e-6) == "inconclusive"
    assert classify(Fraction(1, 10**20), 0.0, EXACT, 1, 0.0, 1e-6) == "violated"


class TestInner:
    def test_monomial(self):
        rep = inner_test(BohrSeries({(1,): 1}, EXACT), 6)
        assert rep.verdict == "all_zero" and rep.extra["c2"] == 1

    def test_one_plus_half(self):
        rep = inner_test(BohrSeries({(): 1, (1,): Fraction(1, 2)}, EXACT), 6)
        assert rep.verdict == "violated_at(1,2)"
        assert rep.residual_at(1, 2) == Fraction(1, 2)

    def test_blaschke(self):
        rep = inner_test(bohr_lift(blaschke(Fraction(1, 2), 12, EXACT)), 8)
        assert rep.verdict == "all_zero"
        assert 0 <= 1 - rep.extra["c2"] <= rep.extra["c2_tail"]

    @given(st.dictionaries(st.integers(1, 40), st.tuples(st.integers(-2, 2), st.integers(-2, 2)), max_size=5))
    def test_constant_is_hardy_norm(self, terms):
        f = TruncatedSeries(terms, EXACT)
        assert inner_test(bohr_lift(f), 4).extra["c2"] == norm_sq(f, 0)


@settings(max_examples=60)
@given(st.dictionaries(st.integers(1, 16), st.sampled_from([(1, 0), (-1, 0), (1, 1), (0, -1)]),
                       min_size=1, max_size=4),
       st.integers(2, 6))
def test_orthogonality_equals_inner_at_t0(terms, K):
    f = TruncatedSeries(terms, EXACT)
    ortho = orthogonality_test(f, 0, K).verdict == "all_zero"
    inner = inner_test(bohr_lift(f), K).verdict == "all_zero"
    assert ortho == inner


class TestProduct:
    def test_examples(self):
        z1 = BohrSeries({(1,): 1}, EXACT)
        rep = product_constant_test(z1, z1, 5)
        assert rep.verdict == "all_zero" and rep.extra["constant"] == 1
        one = BohrSeries({(): 1}, EXACT)
        assert product_constant_test(one, one, 5).extra["constant"] == 1
        both = BohrSeries({(): 1, (1,): 1}, EXACT)
        assert product_constant_test(both, one, 5).verdict == "violated_at(1,2)"

    def test_non_constant_product_found_in_either_order(self):
        f = BohrSeries({(): 1}, EXACT)
        g = BohrSeries({(): 1, (0, 1): 1}, EXACT)
        assert product_constant_test(f, g, 4).violated
        assert product_constant_test(g, f, 4).violated


class TestTauSymmetry:
    def test_monomial_any_tau(self):
        F = BohrSeries({(1,): 1}, EXACT)
        for tau in (Tau.ones(), Tau.explicit([Fraction(1, 3)]), Tau.star()):
            assert tau_symmetry_test(F, tau, 5).identity_holds

    def test_all_ones_reduces_to_inner(self):
        F = bohr_lift(Z_PLUS_Z2)
        rep = tau_symmetry_test(F, Tau.ones(), 6)
        assert rep.modulus_verdict == inner_test(F, 6).verdict
        assert rep.equivalent

    def test_star_on_z_plus_z2(self):
        rep = tau_symmetry_test(bohr_lift(Z_PLUS_Z2), Tau.star(), 6)
        assert rep.mode == FLOAT and rep.identity_holds and rep.equivalent

    def test_exact_with_rational_radii(self):
        F = bohr_lift(TruncatedSeries({1: 1, 2: (1, 1), 6: -1, 9: 2}))
        rep = tau_symmetry_test(F, Tau.explicit([Fraction(1, 2), Fraction(2, 3)]), 8)
        assert rep.mode == EXACT and rep.identity_holds
        assert all(r["lhs"] == r["rhs"] for r in rep.rows)


class TestMonomialDiagnostic:
    def test_monomial(self):
        d = monomial_diagnostic(TruncatedSeries({5: 3}), -1)
        assert d.ratio_spread == 0 and d.verdict == "monomial"
        assert d.limit_residuals.all_zero and d.correction_residuals.all_zero

    def test_non_monomial(self):
        d = monomial_diagnostic(Z_PLUS_Z2, -1)
        assert d.verdict == "non-monomial" and d.ratio_spread == 1
        assert d.limit_residuals.residual_at(1, 2) == Fraction(1, 2)
        assert monomial_diagnostic(Z_PLUS_Z2, 1).limit_residuals.residual_at(1, 2) == 2

    def test_t_zero_rejected(self):
        with pytest.raises(ValueError):
            monomial_diagnostic(Z_PLUS_Z2, 0)


def test_proof_chain_limits():
    f = TruncatedSeries({1: 1, 2: (1, -1), 3: 2, 6: 1})
    rows = proof_chain(f, 1, 2, -2, [1, 10, 100, 1000])
    gaps = [abs(r["gap"]) for r in rows]
    assert gaps == sorted(gaps, reverse=True)
    last = rows[-1]
    assert abs(last["scaled_gap"] - last["derivative"]) < 0.01 * abs(last["derivative"])


def test_non_monomial_sweep_small():
    # every two-term exact f fails orthogonality for t != 0 with K = 2 * max index
    for (m, n), a, b, t in itertools.product(itertools.combinations(range(1, 7), 2),
                                             [(1, 0), (-1, 1)], [(1, 0), (0, -1)], (-2, 2)):
        f = TruncatedSeries({m: a, n: b})
        assert orthogonality_test(f, t, 2 * n).violated
