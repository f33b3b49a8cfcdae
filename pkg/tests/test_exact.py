from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from selfsim.exact import (QSqrt3, SQRT3, as_scalar, format_scalar, parse_scalar, solve_affine)

rationals = st.builds(Fraction, st.integers(-99, 99), st.integers(1, 50))
quads = st.builds(QSqrt3, rationals, rationals)


@given(quads, quads, quads)
def test_field_axioms(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert x * y == y * x
    assert x - x == QSqrt3()


@given(quads)
def test_inverse(x):
    if x:
        assert x * (1 / x) == QSqrt3(1)


@given(quads, quads)
def test_order_matches_floats(x, y):
    if abs(float(x) - float(y)) > 1e-9:
        assert (x < y) == (float(x) < float(y))


@given(quads)
def test_format_parse_roundtrip(x):
    assert parse_scalar(format_scalar(x)) == x


@given(rationals)
def test_rational_roundtrip(q):
    assert parse_scalar(format_scalar(q)) == q


def test_sqrt3_squares_to_three():
    assert SQRT3 * SQRT3 == QSqrt3(3)
    assert format_scalar(QSqrt3(Fraction(1, 4), Fraction(1, 4))) == "1/4+1/4*sqrt3"
    assert format_scalar(QSqrt3(0, -1)) == "-1*sqrt3"
    assert parse_scalar("-sqrt3") == QSqrt3(0, -1)


def test_as_scalar_refuses_floats():
    with pytest.raises(TypeError):
        as_scalar(0.5)
    with pytest.raises(ValueError):
        as_scalar(SQRT3, "rational")
    assert as_scalar("1/3", "quadratic-sqrt3") == QSqrt3(Fraction(1, 3))


def test_solve_unique_and_degenerate():
    res = solve_affine([[Fraction(2), Fraction(1)], [Fraction(1), Fraction(3)]], [Fraction(3), Fraction(5)])
    assert res.kind == "unique"
    assert res.solution == (Fraction(4, 5), Fraction(7, 5))
    assert solve_affine([[Fraction(1), Fraction(1)], [Fraction(2), Fraction(2)]],
                        [Fraction(1), Fraction(3)]).kind == "none"
    sub = solve_affine([[Fraction(1), Fraction(1)], [Fraction(2), Fraction(2)]], [Fraction(1), Fraction(2)])
    assert sub.kind == "subspace" and sub.nullity == 1


@given(st.lists(st.lists(rationals, min_size=3, max_size=3), min_size=3, max_size=3),
       st.lists(rationals, min_size=3, max_size=3))
def test_solve_satisfies_system(m, x):
    rhs = [sum(a * b for a, b in zip(row, x)) for row in m]
    res = solve_affine(m, rhs)
    assert res.kind in ("unique", "subspace")
    assert [sum(a * b for a, b in zip(row, res.solution)) for row in m] == rhs
