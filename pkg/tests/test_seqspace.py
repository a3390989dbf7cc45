import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from shiftdyn.errors import InputError, ParseError
from shiftdyn.seqspace import (
    C0,
    Ball,
    SeqVector,
    SpaceTag,
    format_vector,
    in_ball,
    norm,
    parse_scalar,
    parse_space,
    parse_vector,
    pow2,
    to_scalar,
)

L2 = SpaceTag("lp", 2)

dyadics = st.builds(lambda p, q: Fraction(p, 1 << q), st.integers(-64, 64), st.integers(0, 12))
vectors = st.dictionaries(st.integers(1, 40), dyadics, max_size=20).map(SeqVector)
spaces = st.sampled_from([C0, L2, SpaceTag("lp", 3), SpaceTag("lp", 1.5)])


def e(n, v=1):
    return SeqVector.basis(n, v)


# --- construction ---------------------------------------------------------------


def test_zero_entries_are_dropped():
    x = SeqVector({1: 1, 2: 0, 5: Fraction(1, 4)})
    assert x.support == [1, 5] and x.max_index == 5
    assert SeqVector.zero().max_index == 0


def test_indices_are_one_based():
    with pytest.raises(InputError):
        SeqVector({0: 1})


def test_non_dyadic_degrades_to_float():
    x = SeqVector({1: Fraction(1, 3)})
    assert isinstance(x[1], float) and not x.exact
    assert e(1, Fraction(1, 8)).exact


@given(vectors, vectors, dyadics)
def test_dyadic_arithmetic_stays_exact(x, y, c):
    z = c * x + y - x
    assert z.exact
    assert all(v != 0 for _, v in z.items())
    assert z.max_index == max(z.support, default=0)


def test_repr_truncates_long_vectors():
    x = SeqVector({i: 1 for i in range(1, 30)})
    assert "29 entries" in repr(x)
    assert repr(e(3)) == "SeqVector(3:1)"


# --- norms -------------------------------------------------------------------------


def test_zero_norm():
    assert norm(SeqVector.zero(), C0) == 0
    assert norm(SeqVector.zero(), L2) == 0


def test_basis_norm():
    assert norm(e(3), C0) == 1


def test_norm_examples():
    x = SeqVector({1: 1, 2: Fraction(1, 2), 3: Fraction(1, 4)})
    assert norm(x, C0) == 1
    assert math.isclose(norm(x, L2), math.sqrt(21) / 4, rel_tol=1e-15)


def test_c0_norm_is_exact():
    assert norm(e(2, Fraction(-3, 1 << 40)), C0) == Fraction(3, 1 << 40)


@given(vectors, dyadics, spaces)
def test_homogeneity(x, c, space):
    assert math.isclose(float(norm(c * x, space)), abs(float(c)) * float(norm(x, space)), rel_tol=1e-12, abs_tol=1e-300)


@given(vectors, vectors, spaces)
def test_triangle_inequality(x, y, space):
    assert float(norm(x + y, space)) <= float(norm(x, space)) + float(norm(y, space)) * (1 + 1e-12) + 1e-300


@given(vectors)
def test_l64_brackets_the_c0_norm(x):
    # ||x||_inf <= ||x||_64 <= |supp x|^(1/64) ||x||_inf; with 20 points that factor is ~1.048
    c0 = float(norm(x, C0))
    l64 = float(norm(x, SpaceTag("lp", 64)))
    assert c0 * (1 - 1e-12) <= l64 <= c0 * max(len(x), 1) ** (1 / 64) * (1 + 1e-12)


def test_l64_close_to_c0_for_single_spike():
    x = SeqVector({1: 1, **{i: Fraction(1, 1 << 10) for i in range(2, 21)}})
    assert abs(norm(x, SpaceTag("lp", 64)) - float(norm(x, C0))) < 1e-6


def test_tiny_entries_do_not_underflow():
    # squaring 2^-1000 underflows a float; the scaled sum must not
    x = SeqVector({1: pow2(-1000), 2: pow2(-1000)})
    assert math.isclose(norm(x, L2), math.sqrt(2) * 2.0**-1000, rel_tol=1e-15)


# --- balls -------------------------------------------------------------------------


def test_center_is_inside():
    B = Ball(e(1), Fraction(1, 4))
    assert in_ball(e(1), B)


def test_boundary_is_outside():
    B = Ball(e(1), Fraction(1, 4))
    assert not in_ball(e(1) + e(1, Fraction(1, 4)), B)
    assert not in_ball(e(1) + e(7, Fraction(1, 4)), Ball(e(1), Fraction(1, 4), L2))


def test_small_perturbation_is_inside():
    assert e(1) + e(5, Fraction(1, 8)) in Ball(e(1), Fraction(1, 4))


def test_radius_must_be_positive():
    with pytest.raises(InputError):
        Ball(e(1), 0)


def test_lp_ball_boundary_is_exact():
    # (3/4, 1) scaled: ||(3, 4)/5||_2 = 1 exactly; not representable dyadically,
    # so use (1/2, 1/2) with radius^2 = 1/2 boundary checked through integer powers
    x = SeqVector({1: Fraction(1, 2), 2: Fraction(1, 2)})
    assert not in_ball(x, Ball(SeqVector.zero(), Fraction(1, 2), L2))
    assert in_ball(x, Ball(SeqVector.zero(), Fraction(3, 4), L2))


# --- spaces and literals -----------------------------------------------------------


def test_space_tags():
    assert parse_space("c0") == C0
    assert parse_space("lp:2") == L2
    assert str(parse_space("lp:2.5")) == "lp:2.5"
    for bad in ("lp:1", "lp:0.5", "l2", "lp:x"):
        with pytest.raises(InputError):
            parse_space(bad)


@pytest.mark.parametrize(
    "text, value",
    [("3/2^4", Fraction(3, 16)), ("-1/2^0", Fraction(-1)), ("0.25", Fraction(1, 4)), ("7", Fraction(7))],
)
def test_parse_scalar(text, value):
    v = parse_scalar(text)
    assert v == value and isinstance(v, Fraction)


def test_parse_scalar_non_dyadic():
    assert isinstance(parse_scalar("0.1"), float)
    with pytest.raises(ParseError):
        parse_scalar("abc")


def test_vector_literal():
    x = parse_vector("1:1, 3:-3/2^4, 5:0.25")
    assert x == SeqVector({1: 1, 3: Fraction(-3, 16), 5: Fraction(1, 4)})
    assert format_vector(x) == "1:1,3:-3/2^4,5:1/2^2"
    assert parse_vector("").is_zero()


@pytest.mark.parametrize("bad", ["1", "x:1", "0:1", "1:1,1:2", "1:zz"])
def test_bad_vector_literals(bad):
    with pytest.raises(ParseError):
        parse_vector(bad)


@given(vectors)
def test_literal_round_trip(x):
    assert parse_vector(format_vector(x)) == x


def test_to_scalar_rejects_non_finite():
    with pytest.raises(InputError):
        to_scalar(float("inf"))
