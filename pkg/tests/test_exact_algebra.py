import pytest
from sympy.polys.domains import QQ

from killing.errors import ExactAlgebraError, ZeroDenominatorError
from killing.exact_algebra import (
    ONE,
    X,
    Y,
    arith,
    const,
    diff,
    diff_multi,
    evaluate,
    format_poly,
    format_rat,
    format_ratfunc,
    parse_point,
    rat,
    taylor_jet,
    vanishes_at,
)
from killing.expression import parse_expression


def test_rat_parses_literals():
    assert rat("3/5") == QQ(3, 5)
    assert rat("-2") == QQ(-2)
    assert rat(" 6/4 ") == QQ(3, 2)
    assert rat(7) == QQ(7)


def test_rat_rejects_bad_literals():
    with pytest.raises(ValueError):
        rat("abc")
    with pytest.raises(ExactAlgebraError):
        rat("1/0")


def test_format_rat_is_canonical():
    assert format_rat(QQ(6, 4)) == "3/2"
    assert format_rat(QQ(-4, 2)) == "-2"


def test_parse_point():
    assert parse_point("1/2,2") == (QQ(1, 2), QQ(2))
    with pytest.raises(ValueError):
        parse_point("1/2")


def test_rational_functions_are_cancelled():
    assert (X**2 - 1) / (X - 1) == X + 1
    assert (2 * X * Y) / (4 * Y) == X / 2


def test_arith_division_by_zero():
    assert arith(X, Y, "div") == X / Y
    with pytest.raises(ExactAlgebraError):
        arith(X, X - X, "div")
    with pytest.raises(ExactAlgebraError):
        arith(X, Y, "pow")


def test_diff():
    assert diff(X**3 * Y, "x") == 3 * X**2 * Y
    assert diff(1 / Y, "y") == -1 / Y**2
    assert diff_multi(X**3 * Y**2, 2, 1) == 12 * X * Y
    with pytest.raises(ExactAlgebraError):
        diff(X, "z")


def test_evaluate():
    point = (QQ(2), QQ(1))
    assert evaluate((X + Y) / (X - Y), point) == QQ(3)
    with pytest.raises(ZeroDenominatorError):
        evaluate(ONE / (X - 2), point)


def test_taylor_jet_of_geometric_series():
    jet = taylor_jet(ONE / (1 - X), (QQ(0), QQ(0)), 3)
    assert [jet[(n, 0)] for n in range(4)] == [1, 1, 2, 6]
    assert jet[(0, 1)] == 0
    assert jet[(1, 2)] == 0


def test_taylor_jet_matches_symbolic_derivatives():
    f = (X**2 * Y + 3) / (X - 2 * Y + 5) + Y / (X**2 + 1)
    point = (QQ(1, 2), QQ(2))
    jet = taylor_jet(f, point, 4)
    for (a, b), value in jet.items():
        assert value == evaluate(diff_multi(f, a, b), point), (a, b)
    assert len(jet) == 15


def test_taylor_jet_rejects_poles():
    with pytest.raises(ZeroDenominatorError):
        taylor_jet(ONE / (X - Y), (QQ(1), QQ(1)), 2)


def test_format_poly():
    assert format_poly((X**2 - Y).numer) == "x^2 - y"
    assert format_poly((3 * X * Y - 2).numer) == "3*x*y - 2"
    assert format_poly((X - X).numer) == "0"


def test_format_ratfunc_parses_back():
    f = (const("3/5") * X**2 - Y) / (X * Y + 7)
    assert parse_expression(format_ratfunc(f)) == f


def test_vanishes_at():
    polys = [(X - 1).numer, (X + Y).numer]
    assert vanishes_at(polys, (QQ(1), QQ(5)))
    assert vanishes_at(polys, (QQ(2), QQ(-2)))
    assert not vanishes_at(polys, (QQ(2), QQ(3)))
