from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from bertnet.numerics import (
    MalformedNumber,
    Tolerance,
    format_rational,
    format_scalar,
    parse_rational,
    rat_arith,
    snap_rational,
)

rationals = st.fractions(max_denominator=10**6)


@pytest.mark.parametrize(
    "text, value",
    [("3/4", F(3, 4)), ("6/8", F(3, 4)), ("-2", F(-2)), ("0.5", F(1, 2)), (" 7 / 9 ", F(7, 9)), (2, F(2)), (0.1, F(1, 10))],
)
def test_parse_rational(text, value):
    assert parse_rational(text) == value


@pytest.mark.parametrize("bad", ["1/0", "abc", "1/2/3", float("nan"), True, None, "inf"])
def test_parse_rational_rejects(bad):
    with pytest.raises(MalformedNumber):
        parse_rational(bad)


def test_format_rational():
    assert format_rational(F(14, 15)) == "14/15"
    assert format_rational(F(4, 2)) == "2"
    assert format_scalar(0.25) == 0.25


@given(rationals, rationals)
def test_rat_arith_matches_field_ops(a, b):
    assert rat_arith(a, b, "add") == a + b
    assert rat_arith(a, b, "sub") == a - b
    assert rat_arith(a, b, "mul") == a * b
    if b != 0:
        assert rat_arith(a, b, "div") * b == a
    r = rat_arith(a, b, "mul")
    assert r.denominator > 0


def test_rat_arith_division_by_zero():
    with pytest.raises(ZeroDivisionError):
        rat_arith(F(1), F(0), "div")


@given(rationals)
def test_format_parse_round_trip(x):
    assert parse_rational(format_rational(x)) == x


def test_tolerance_modes():
    ex = Tolerance.exact()
    assert ex.eq(F(1, 3), F(2, 6)) and not ex.eq(F(1, 3), F(1, 3) + F(1, 10**12))
    t = Tolerance(1e-9)
    assert t.eq(1 / 3, 0.3333333333)
    assert t.le(1.0 + 1e-10, 1.0) and not t.lt(1.0 - 1e-10, 1.0)
    assert t.cmp(0.0, 1.0) == -1 and t.cmp(1.0, 1.0 + 1e-12) == 0


def test_snap_rational():
    assert snap_rational(7 / 9) == F(7, 9)
    assert snap_rational(0.1 + 1e-6) is not None  # near some rational; quality is the caller's call
    assert snap_rational(0.5 + 1e-5, max_denominator=10) is None
