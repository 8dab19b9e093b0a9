"""
Exact scalars and bivariate rational functions.

Rational functions in the two non-ignorable coordinates (x, y) are elements of
sympy's fraction field QQ(x, y). sympy keeps numerator and denominator
cancelled (content and polynomial gcd removed), so equality of two elements is
equality of their canonical forms.
"""

import logging
import re
from functools import lru_cache
from math import comb, factorial
from typing import Dict, Iterable, Tuple, Union

from sympy.polys.domains import QQ
from sympy.polys.fields import FracElement, field
from sympy.polys.rings import PolyElement

from .errors import ExactAlgebraError, ZeroDenominatorError

logger = logging.getLogger(__name__)

FIELD, X, Y = field("x,y", QQ)
RING = FIELD.ring

# Type aliases for readability; all three are sympy domain types.
Rat = type(QQ.one)
BiPoly = PolyElement
RatFunc = FracElement
Point = Tuple[Rat, Rat]

VARIABLES = {"x": X, "y": Y}
ZERO = FIELD.zero
ONE = FIELD.one

_RATIONAL_LITERAL = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def rat(value: Union[int, str, Rat]) -> Rat:
    """
    Convert an integer, a 'p/q' literal or a rational into an exact rational.

    Args:
        value: int, rational, or string such as '3/5' or '-2'

    Returns:
        Exact rational in canonical form
    """
    if isinstance(value, str):
        match = _RATIONAL_LITERAL.match(value)
        if not match:
            raise ValueError(f"Not a rational literal: {value!r}")
        numerator = int(match.group(1))
        denominator = int(match.group(2)) if match.group(2) else 1
        if denominator == 0:
            raise ExactAlgebraError(f"Zero denominator in literal {value!r}")
        return QQ(numerator, denominator)
    if isinstance(value, int):
        return QQ(value)
    return QQ.convert(value)


def format_rat(value: Rat) -> str:
    """Render a rational as 'p/q' (or 'p' for integers)."""
    numerator, denominator = QQ.numer(value), QQ.denom(value)
    if denominator == 1:
        return str(numerator)
    return f"{numerator}/{denominator}"


def parse_point(text: str) -> Point:
    """Parse 'r1,r2' with exact rational components."""
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"Point must have two components: {text!r}")
    return rat(parts[0]), rat(parts[1])


def format_point(point: Point) -> str:
    return f"{format_rat(point[0])},{format_rat(point[1])}"


def const(value: Union[int, str, Rat]) -> RatFunc:
    """Constant rational function."""
    return FIELD(rat(value))


def variable(name: str) -> RatFunc:
    try:
        return VARIABLES[name]
    except KeyError:
        raise ExactAlgebraError(f"Unknown variable {name!r}, expected one of {sorted(VARIABLES)}")


def arith(a: RatFunc, b: RatFunc, op: str) -> RatFunc:
    """
    Apply one of add, sub, mul, div to two rational functions.

    Raises:
        ExactAlgebraError: on division by the zero function or an unknown op
    """
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        if not b:
            raise ExactAlgebraError("Division by the zero rational function")
        return a / b
    raise ExactAlgebraError(f"Unknown operation {op!r}")


@lru_cache(maxsize=65536)
def _diff_cached(f: RatFunc, index: int) -> RatFunc:
    return f.diff(FIELD.gens[index])


def diff(f: RatFunc, var: str) -> RatFunc:
    """Exact partial derivative w.r.t. 'x' or 'y'."""
    if var == "x":
        return _diff_cached(f, 0)
    if var == "y":
        return _diff_cached(f, 1)
    raise ExactAlgebraError(f"Cannot differentiate w.r.t. {var!r}")


def diff_multi(f: RatFunc, nx: int, ny: int) -> RatFunc:
    """Mixed partial derivative d^nx/dx^nx d^ny/dy^ny."""
    for _ in range(nx):
        f = diff(f, "x")
    for _ in range(ny):
        f = diff(f, "y")
    return f


def poly_value(p: BiPoly, point: Point) -> Rat:
    """Value of a polynomial at an exact point."""
    total = QQ.zero
    x0, y0 = point
    for (a, b), coeff in p.items():
        total += coeff * x0**a * y0**b
    return total


def evaluate(f: RatFunc, point: Point) -> Rat:
    """
    Exact value of a rational function at a rational point.

    Raises:
        ZeroDenominatorError: if the denominator vanishes at the point
    """
    denominator = poly_value(f.denom, point)
    if not denominator:
        raise ZeroDenominatorError(point, detail=f"denominator {f.denom.as_expr()} vanishes")
    return poly_value(f.numer, point) / denominator


def _shifted_coefficients(p: BiPoly, point: Point, order: int) -> Dict[Tuple[int, int], Rat]:
    """
    Coefficients of p(x0 + u, y0 + v) in u^a v^b for a + b <= order.
    """
    x0, y0 = point
    shifted: Dict[Tuple[int, int], Rat] = {}
    for (ex, ey), coeff in p.items():
        for a in range(min(ex, order) + 1):
            ca = coeff * comb(ex, a) * x0 ** (ex - a)
            if not ca:
                continue
            for b in range(min(ey, order - a) + 1):
                cb = ca * comb(ey, b) * y0 ** (ey - b)
                if cb:
                    shifted[(a, b)] = shifted.get((a, b), QQ.zero) + cb
    return shifted


def taylor_jet(f: RatFunc, point: Point, order: int) -> Dict[Tuple[int, int], Rat]:
    """
    All partial derivatives of f at a point up to a total order.

    Numerator and denominator are shifted to the point and divided as
    truncated power series; the series coefficient of u^a v^b times a! b!
    is the derivative d^(a+b) f / dx^a dy^b at the point.

    Args:
        f: Rational function
        point: Exact reference point
        order: Maximal total derivative order

    Returns:
        Map (a, b) -> exact derivative value, for all a + b <= order

    Raises:
        ZeroDenominatorError: if the denominator vanishes at the point
    """
    numerator = _shifted_coefficients(f.numer, point, order)
    denominator = _shifted_coefficients(f.denom, point, order)
    lead = denominator.get((0, 0), QQ.zero)
    if not lead:
        raise ZeroDenominatorError(point, detail=f"denominator {f.denom.as_expr()} vanishes")

    tail = [(key, value) for key, value in denominator.items() if key != (0, 0) and value]
    series: Dict[Tuple[int, int], Rat] = {}
    for total in range(order + 1):
        for a in range(total, -1, -1):
            b = total - a
            acc = numerator.get((a, b), QQ.zero)
            for (c, e), value in tail:
                if c <= a and e <= b:
                    previous = series.get((a - c, b - e))
                    if previous:
                        acc -= value * previous
            series[(a, b)] = acc / lead

    return {
        (a, b): value * factorial(a) * factorial(b)
        for (a, b), value in series.items()
    }


def format_poly(p: BiPoly) -> str:
    """Render a polynomial in the plain-text expression grammar."""
    if not p:
        return "0"
    pieces = []
    for (a, b), coeff in sorted(p.items(), reverse=True):
        factors = []
        if a:
            factors.append("x" if a == 1 else f"x^{a}")
        if b:
            factors.append("y" if b == 1 else f"y^{b}")
        magnitude = -coeff if coeff < 0 else coeff
        if magnitude != 1 or not factors:
            factors.insert(0, format_rat(magnitude))
        term = "*".join(factors)
        if not pieces:
            pieces.append(f"-{term}" if coeff < 0 else term)
        else:
            pieces.append(f" - {term}" if coeff < 0 else f" + {term}")
    return "".join(pieces)


def format_ratfunc(f: RatFunc) -> str:
    """Render a rational function as '(num)/(den)' in the expression grammar."""
    numerator = format_poly(f.numer)
    if f.denom == RING.one:
        return numerator
    return f"({numerator})/({format_poly(f.denom)})"


def vanishes_at(polys: Iterable[BiPoly], point: Point) -> bool:
    """True if any of the polynomials is zero at the point."""
    return any(not poly_value(p, point) for p in polys)
