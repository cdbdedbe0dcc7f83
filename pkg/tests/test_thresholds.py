import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sdmm.errors import BadSpec
from sdmm.schemes import SchemeParams
from sdmm.thresholds import (
    admissible_ds,
    ggasp_threshold_closed_form,
    mp_step_size_probe,
    mp_threshold_closed_form,
    optimal_r,
    product_class_support,
    rate_sweep,
    rate_sweep_fixed_n,
    symbolic_support,
    threshold,
)


def test_admissible_ds():
    assert admissible_ds(1) == (1,)
    assert admissible_ds(4) == (1, 3)
    assert admissible_ds(6) == (1, 5)
    assert admissible_ds(7) == (1, 2, 3, 4, 5, 6)


def test_symbolic_support_small_reference():
    # K=L=1, M=2, T=1: f has exps {0,1,2}, g has {1,0,2}; sums cover 0..4
    p = SchemeParams.mp(1, 2, 1, 1)
    assert symbolic_support(p) == (0, 1, 2, 3, 4)


def test_class_support_is_filter_of_support():
    p = SchemeParams.mp(2, 3, 2, 2)
    supp = symbolic_support(p)
    assert product_class_support(p) == tuple(e for e in supp if (e + 1) % 3 == 0)


def test_modular_layout_anchor_2322():
    rep = threshold(SchemeParams.mp(2, 3, 2, 3))
    assert (rep.P, rep.N, rep.N_prime, rep.P_prime) == (8, 24, 28, 8)
    rep1 = threshold(SchemeParams.mp(2, 3, 2, 1))
    assert (rep1.N, rep1.N_prime, rep1.P_prime) == (21, 22, 7)
    rep2 = threshold(SchemeParams.mp(2, 3, 2, 2))
    assert (rep2.N, rep2.N_prime) == (24, 25)
    assert product_class_support(SchemeParams.mp(2, 3, 2, 3)) == \
        (2, 5, 8, 11, 14, 17, 20, 26)


def test_grouped_layout_anchor_5254():
    ns = [ggasp_threshold_closed_form(5, 2, 5, 4, r).N for r in (1, 2, 3, 4)]
    assert ns == [85, 82, 86, 87]
    best = optimal_r(5, 2, 5, 4)
    assert (best.params.r, best.N) == (2, 82)
    assert symbolic_support(SchemeParams.ggasp(5, 2, 5, 4, 2))[-1] == 114
    assert mp_threshold_closed_form(5, 2, 5, 4, 1).N == 82


def test_noise_free_thresholds():
    for K, M, L in ((1, 1, 1), (2, 3, 2), (4, 4, 4), (1, 4, 2)):
        assert threshold(SchemeParams.mp(K, M, L, 0)).N == K * M * L
        assert threshold(SchemeParams.ggasp(K, M, L, 0)).N == K * M * L + M - 1


def test_rate_is_exact_fraction():
    rep = threshold(SchemeParams.ggasp(5, 2, 5, 4, 2))
    assert rep.rate == Fraction(50, 82)
    assert isinstance(rep.rate, Fraction)


@st.composite
def any_layout(draw):
    K = draw(st.integers(1, 4))
    M = draw(st.integers(1, 4))
    L = draw(st.integers(1, 4))
    T = draw(st.integers(0, 8))
    if draw(st.booleans()):
        D = draw(st.sampled_from(admissible_ds(M)))
        return SchemeParams.mp(K, M, L, T, D=D)
    r = draw(st.integers(1, max(1, min(K * M, T)))) if T else 1
    return SchemeParams.ggasp(K, M, L, T, r=r)


@given(any_layout())
@settings(max_examples=150, deadline=None)
def test_closed_form_equals_enumeration(params):
    # the closed forms are interval-arithmetic sweeps; the oracle counts the
    # explicit exponent sumset element by element
    supp = symbolic_support(params)
    rep = threshold(params)
    assert rep.N_prime == len(supp)
    assert rep.P_prime == sum(1 for e in supp if (e + 1) % params.M == 0)
    if params.variant == "mp":
        assert rep.N == params.M * rep.P_prime
        assert rep.P == rep.P_prime
    else:
        assert rep.N == len(supp)


@given(any_layout())
@settings(max_examples=60, deadline=None)
def test_threshold_monotone_in_t(params):
    if params.T == 0:
        return
    lower = (SchemeParams.mp(params.K, params.M, params.L, params.T - 1, params.D)
             if params.variant == "mp" and params.T > 1
             else SchemeParams.mp(params.K, params.M, params.L, params.T - 1)
             if params.variant == "mp"
             else SchemeParams.ggasp(params.K, params.M, params.L, params.T - 1,
                                     min(params.r, max(1, params.T - 1))))
    assert threshold(lower).N <= threshold(params).N


def test_optimal_r_is_brute_force_minimum():
    for K, M, L, T in ((2, 3, 2, 4), (3, 2, 2, 5), (1, 4, 1, 6)):
        best = optimal_r(K, M, L, T)
        ns = {r: ggasp_threshold_closed_form(K, M, L, T, r).N
              for r in range(1, min(K * M, T) + 1)}
        assert best.N == min(ns.values())


def test_rate_sweep_rows():
    rows = rate_sweep(2, 3, 2, 3)
    assert len(rows) == 8  # two schemes, T = 0..3
    assert [r["T"] for r in rows] == [0, 0, 1, 1, 2, 2, 3, 3]
    for row in rows:
        assert set(row) == {"scheme", "K", "M", "L", "T", "D_or_r", "N", "P", "rate"}
        if row["T"] == 0:
            assert row["D_or_r"] == 0
        if row["scheme"] == "ggasp":
            assert row["P"] == ""
    with pytest.raises(BadSpec):
        rate_sweep(0, 3, 2, 3)


def test_rate_sweep_empty_range():
    assert rate_sweep(2, 3, 2, -1) == []


def test_fixed_budget_search_respects_budget():
    rows = rate_sweep_fixed_n(100, T_max=3, K_min=2, L_min=2, M_min=2)
    assert rows
    for row in rows:
        assert row["N"] <= 100
        assert row["K"] >= 2 and row["L"] >= 2 and row["M"] >= 2
    # per (T, scheme) the reported grid is the best-rate grid; re-derive one
    t2 = [r for r in rows if r["T"] == 2 and r["scheme"] == "mp"][0]
    best = Fraction(0)
    for K in range(2, 26):
        for M in range(2, 26):
            for L in range(2, 26):
                if K * M * L > 100:
                    continue
                rep = mp_threshold_closed_form(K, M, L, 2, 1)
                if rep.N <= 100:
                    best = max(best, rep.rate)
    assert Fraction(t2["rate"]) == best


def test_step_size_probe_reports_d1_optimal():
    probe = mp_step_size_probe(K_max=3, M_max=6, L_max=3, T_max=6)
    assert probe["cases"] == 3 * 6 * 3 * 6
    # N is not always monotone in D, but D=1 is never strictly beaten
    assert probe["d1_beaten"] == []
