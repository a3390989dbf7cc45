from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shiftdyn.errors import CapacityError, InputError
from shiftdyn.fcriterion import (
    Block,
    build_family,
    check_separation,
    compute_Ckl,
    family_sets,
    full_report,
    series_norm,
)
from shiftdyn.natset import NatSet, longest_ap_fixed_difference
from shiftdyn.seqspace import C0, SpaceTag
from shiftdyn.shiftop import ConstantWeights, CounterexampleWeights, counterexample_set

from oracles import separation_violated_brute

TWO = ConstantWeights(2)
ONE = ConstantWeights(1)
CE = CounterexampleWeights()


@pytest.fixture(scope="module")
def family_1e6():
    return build_family(2, 3, 10**6)


# --- family construction -----------------------------------------------------------


def test_single_block_family():
    (spec,) = build_family(1, 1, 10**4)
    (b,) = spec.blocks
    assert b.difference == 100 and b.length >= 1
    A = spec.natset(10**4)
    assert longest_ap_fixed_difference(A, 100).length == b.length


def test_zero_blocks_is_empty():
    assert build_family(1, 0, 10**4) == []


def test_two_families_at_large_horizon():
    fam = build_family(2, 2, 10**8)
    a1, a2 = fam
    assert all(b.difference == 10**4 for b in a2.blocks)
    assert [b.length for b in a2.blocks] == [1, 2]
    assert check_separation(fam).ok
    s1, s2 = set(a1.elements()), set(a2.elements())
    assert min(abs(x - y) for x in s1 for y in s2) >= 2


def test_family_at_one_million(family_1e6):
    rows = [(s.k, b.start, b.difference, b.length) for s in family_1e6 for b in s.blocks]
    assert rows == [
        (1, 10, 100, 1),
        (1, 1000, 100, 2),
        (1, 100_000, 100, 3),
        (2, 100, 10_000, 1),
        (2, 10_000, 10_000, 2),
        (2, 10**6, 10_000, 1),
    ]


def test_blocks_are_increasing_and_disjoint():
    fam = build_family(3, 4, 10**30)
    blocks = sorted((b for s in fam for b in s.blocks), key=lambda b: b.start)
    for a, b in zip(blocks, blocks[1:]):
        assert a.last < b.start
    for s in fam:
        lengths = [b.length for b in s.blocks]
        assert lengths == sorted(lengths) and len(set(lengths)) == len(lengths)


def test_capacity_error_names_block():
    with pytest.raises(CapacityError) as exc:
        build_family(3, 5, 100)
    assert (exc.value.k, exc.value.block) == (3, 1)


def test_bad_arguments():
    with pytest.raises(InputError):
        build_family(0, 1, 100)
    with pytest.raises(InputError):
        build_family(1, -1, 100)


@pytest.mark.parametrize("kmax, blocks", [(1, 3), (2, 3), (3, 3)])
def test_each_set_holds_its_longest_block(kmax, blocks):
    h = 10**12
    fam = build_family(kmax, blocks, h)
    for spec in fam:
        w = longest_ap_fixed_difference(spec.natset(h), 10 ** (2 * spec.k))
        assert w.length == max(b.length for b in spec.blocks)


def test_block_terms():
    assert Block(2, 100, 3).terms() == [100, 200, 300]


# --- condition i) ------------------------------------------------------------------


def test_separation_examples():
    assert check_separation({1: [10, 20], 2: [15]}).ok
    sep = check_separation({1: [10], 2: [11]})
    assert not sep.ok and sep.witness == (10, 11)
    assert check_separation({3: [7]}).ok


@settings(max_examples=200)
@given(st.dictionaries(st.integers(1, 6), st.sets(st.integers(1, 300), max_size=40), max_size=5))
def test_separation_matches_pairwise_check(sets):
    assert check_separation(sets).ok == (not separation_violated_brute(sets))


# --- condition ii) -----------------------------------------------------------------


def test_series_norm_examples():
    assert series_norm(TWO, NatSet.empty(10), 0) == 0
    assert series_norm(TWO, NatSet((3, 5), 5), 0, C0) == Fraction(1, 8)


def test_series_norm_on_a_run_of_s():
    S = counterexample_set(20_000)
    run = NatSet(tuple(range(9996, 10_005)), 20_000)
    assert run.issubset(S)
    E = CE.exponents(20_000)
    assert series_norm(CE, run, 0, C0, 20_000) == Fraction(1, 2 ** min(int(E[n]) for n in run))


def test_unweighted_series_never_decays(family_1e6):
    rep = full_report(ONE, family_1e6, horizon=10**6)
    assert rep.series_norms and all(v >= 1 for v in rep.series_norms.values())


def _float_series(rule, ns):
    # direct float products, no exponent bookkeeping
    out = 0.0
    for n in ns:
        p = 1.0
        for v in range(1, n + 1):
            p *= float(rule.weight(v))
        out = max(out, 1.0 / p)
    return out


@pytest.mark.parametrize("rule", [TWO, CE, ConstantWeights(Fraction(3, 2))])
def test_series_norm_agrees_with_float_products(rule):
    A = NatSet((9, 11, 12, 20, 40), 40)
    for kp in (0, 1, 2):
        exact = series_norm(rule, A, kp, C0)
        ref = _float_series(rule, [a + kp for a in A])
        if ref >= 2.0**-40:
            assert abs(float(exact) - ref) <= 1e-12 * ref


@given(st.sets(st.integers(1, 400), min_size=1, max_size=20), st.integers(0, 3), st.integers(1, 400))
def test_enlarging_horizon_never_shrinks_series_norm(els, kp, extra):
    A = NatSet.from_iterable(els, 400)
    for space in (C0, SpaceTag("lp", 2)):
        small = series_norm(CE, A, kp, space, 200)
        big = series_norm(CE, A, kp, space, 200 + extra)
        assert big >= small


# --- condition iii) ----------------------------------------------------------------


def test_Ckl_examples():
    fam = {1: [10], 2: [4]}
    assert compute_Ckl(TWO, fam, 1, 2, 0, C0, 100) == Fraction(1, 64)
    assert compute_Ckl(TWO, fam, 1, 2, 1, C0, 100) == Fraction(1, 64)
    # A_k - j never lands in [1, horizon]
    assert compute_Ckl(TWO, {1: [3], 2: [50]}, 1, 2, 0, C0, 100) == 0


def test_Ckl_with_shifted_product_on_counterexample():
    # n = 6, k' = 4: prod_{v=1}^{6} w_{v+4} = w_5 ... w_10 = 2 * 2 = 4
    assert compute_Ckl(CE, {1: [10], 2: [4]}, 1, 2, 4, C0, 100) == Fraction(1, 4)


def test_Ckl_unknown_index():
    with pytest.raises(InputError):
        compute_Ckl(TWO, {1: [10]}, 1, 2, 0)


# --- report ------------------------------------------------------------------------


def test_empty_family_report():
    rep = full_report(CE, [])
    assert rep.passed and rep.separation_ok
    assert rep.series_norms == {} and rep.Ckl == {}


def test_counterexample_report(family_1e6):
    rep = full_report(CE, family_1e6, horizon=10**6)
    assert rep.separation_ok
    assert all(v <= 1 for v in rep.series_norms.values())
    assert rep.series_norms == {(1, 0): Fraction(1, 4), (2, 0): Fraction(1, 8), (2, 1): Fraction(1, 16)}
    assert rep.Ckl == {(1, 1): Fraction(1, 4), (1, 2): Fraction(1, 8), (2, 1): Fraction(1, 4), (2, 2): Fraction(1, 8)}
    assert all(rep.flags.values()) and rep.passed


def test_report_tables(family_1e6):
    rep = full_report(CE, family_1e6, horizon=10**6)
    tables = rep.csv_tables()
    assert tables["condition_ii"].splitlines()[0] == "k,kprime,norm"
    assert tables["family"].splitlines()[1] == "1,10,100,1"
    d = rep.to_dict()
    assert d["condition_i"]["separation_ok"] is True
    assert len(d["family"]) == 6


def test_separation_failure_shows_in_report():
    rep = full_report(TWO, {1: [10], 2: [11]}, horizon=100)
    assert not rep.separation_ok and not rep.passed
    assert rep.separation_witness == (10, 11)


def test_family_sets_normalisation(family_1e6):
    sets = family_sets(family_1e6, 10**6)
    assert sets[1].elements == (10, 1000, 1100, 100_000, 100_100, 100_200)
    assert family_sets(sets) == sets
