"""
Polynomials in the four momenta (p_x, p_y, p_phi, p_t) with rational-function
coefficients in the non-ignorable coordinates (x, y), and the Poisson bracket
reduced to the non-ignorable coordinates.
"""

from types import MappingProxyType
from typing import Dict, Iterator, Mapping, NamedTuple, Optional, Tuple, Union

from .exact_algebra import FIELD, ONE, RatFunc, diff

Exponent = Tuple[int, int, int, int]

PX, PY, PPHI, PT = range(4)
MOMENTUM_NAMES = ("p_x", "p_y", "p_phi", "p_t")
COORDINATES = ("x", "y")

Scalar = Union[int, RatFunc]


class MomPoly:
    """
    Immutable polynomial in (p_x, p_y, p_phi, p_t).

    Terms map exponent tuples (a1, a2, a3, a4) to nonzero rational functions.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[Exponent, RatFunc]] = None):
        cleaned = {}
        for exponent, coeff in (terms or {}).items():
            if coeff:
                cleaned[tuple(exponent)] = coeff
        self._terms = MappingProxyType(cleaned)

    @property
    def terms(self) -> Mapping[Exponent, RatFunc]:
        return self._terms

    @classmethod
    def zero(cls) -> "MomPoly":
        return cls()

    @classmethod
    def constant(cls, value: Scalar) -> "MomPoly":
        return cls({(0, 0, 0, 0): FIELD(value) if isinstance(value, int) else value})

    @classmethod
    def momentum(cls, index: int) -> "MomPoly":
        exponent = [0, 0, 0, 0]
        exponent[index] = 1
        return cls({tuple(exponent): ONE})

    @classmethod
    def monomial(cls, exponent: Exponent, coeff: Optional[RatFunc] = None) -> "MomPoly":
        return cls({exponent: ONE if coeff is None else coeff})

    def __iter__(self) -> Iterator[Tuple[Exponent, RatFunc]]:
        return iter(self._terms.items())

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int) and other == 0:
            return not self._terms
        if not isinstance(other, MomPoly):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        if not self._terms:
            return "MomPoly(0)"
        parts = []
        for exponent, coeff in sorted(self._terms.items(), reverse=True):
            factors = [
                name if power == 1 else f"{name}^{power}"
                for name, power in zip(MOMENTUM_NAMES, exponent) if power
            ]
            parts.append(f"({coeff})" + ("*" + "*".join(factors) if factors else ""))
        return "MomPoly(" + " + ".join(parts) + ")"

    def __neg__(self) -> "MomPoly":
        return MomPoly({e: -c for e, c in self._terms.items()})

    def __add__(self, other: "MomPoly") -> "MomPoly":
        if not isinstance(other, MomPoly):
            return NotImplemented
        result = dict(self._terms)
        for exponent, coeff in other._terms.items():
            result[exponent] = result[exponent] + coeff if exponent in result else coeff
        return MomPoly(result)

    def __sub__(self, other: "MomPoly") -> "MomPoly":
        if not isinstance(other, MomPoly):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other: Union["MomPoly", Scalar]) -> "MomPoly":
        if isinstance(other, MomPoly):
            result: Dict[Exponent, RatFunc] = {}
            for e1, c1 in self._terms.items():
                for e2, c2 in other._terms.items():
                    exponent = (e1[0] + e2[0], e1[1] + e2[1], e1[2] + e2[2], e1[3] + e2[3])
                    product = c1 * c2
                    result[exponent] = result[exponent] + product if exponent in result else product
            return MomPoly(result)
        return MomPoly({e: c * other for e, c in self._terms.items()})

    def __rmul__(self, other: Scalar) -> "MomPoly":
        return self * other

    def __pow__(self, n: int) -> "MomPoly":
        if n < 0:
            raise ValueError("MomPoly powers must be nonnegative")
        result = MomPoly.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def degree(self) -> int:
        """Total degree in the momenta (-1 for the zero polynomial)."""
        return max((sum(e) for e in self._terms), default=-1)

    def is_homogeneous(self) -> bool:
        return len({sum(e) for e in self._terms}) <= 1

    def coefficient(self, exponent: Exponent) -> RatFunc:
        return self._terms.get(tuple(exponent), FIELD.zero)

    def diff_coordinate(self, var: str) -> "MomPoly":
        """Partial derivative w.r.t. the coordinate 'x' or 'y'."""
        return MomPoly({e: diff(c, var) for e, c in self._terms.items()})

    def diff_momentum(self, index: int) -> "MomPoly":
        """Partial derivative w.r.t. the momentum with the given index."""
        result = {}
        for exponent, coeff in self._terms.items():
            power = exponent[index]
            if power:
                lowered = list(exponent)
                lowered[index] -= 1
                result[tuple(lowered)] = coeff * power
        return MomPoly(result)


def poisson(a: MomPoly, b: MomPoly) -> MomPoly:
    """
    Poisson bracket reduced to the non-ignorable coordinates.

    {A, B} = sum over q in (x, y) of dA/dq * dB/dp_q - dA/dp_q * dB/dq.
    Coefficients never depend on phi or t, so those pairs contribute nothing.
    """
    result = MomPoly.zero()
    for var, index in zip(COORDINATES, (PX, PY)):
        result = result + a.diff_coordinate(var) * b.diff_momentum(index)
        result = result - a.diff_momentum(index) * b.diff_coordinate(var)
    return result


class MonomialIndex(NamedTuple):
    """
    Index (i, j, k) of the momentum monomial p_x^(i-j) p_y^j p_phi^k p_t^(deg-i-k).
    """
    i: int
    j: int
    k: int


def index_of(exponent: Exponent) -> MonomialIndex:
    return MonomialIndex(exponent[PX] + exponent[PY], exponent[PY], exponent[PPHI])


def exponent_of(index: MonomialIndex, degree: int) -> Exponent:
    i, j, k = index
    if not (0 <= j <= i and 0 <= k <= degree - i):
        raise ValueError(f"Index {tuple(index)} out of range for degree {degree}")
    return (i - j, j, k, degree - i - k)


def coefficients(p: MomPoly) -> Dict[MonomialIndex, RatFunc]:
    """
    Nonzero coefficients of a homogeneous momentum polynomial, keyed by (i, j, k).

    Raises:
        ValueError: if p is not homogeneous (the p_t exponent would be ambiguous)
    """
    if not p.is_homogeneous():
        raise ValueError("coefficients() requires a homogeneous momentum polynomial")
    return {index_of(exponent): coeff for exponent, coeff in p}


class ParityClass(NamedTuple):
    """
    Parity selection: e is the parity in (p_x, p_y) (None for any),
    phi_parity is 'even', 'odd' or 'any'.
    """
    e: Optional[int] = None
    phi_parity: str = "any"

    def contains(self, exponent: Exponent) -> bool:
        if self.e is not None and (exponent[PX] + exponent[PY]) % 2 != self.e:
            return False
        if self.phi_parity == "even":
            return exponent[PPHI] % 2 == 0
        if self.phi_parity == "odd":
            return exponent[PPHI] % 2 == 1
        return True


EVEN = ParityClass(e=0)
ODD = ParityClass(e=1)
PHI_EVEN = ParityClass(phi_parity="even")
PHI_ODD = ParityClass(phi_parity="odd")


def parity_project(p: MomPoly, parity: ParityClass) -> MomPoly:
    """Sum of the terms of p lying in the parity class."""
    return MomPoly({e: c for e, c in p if parity.contains(e)})


def is_pure_parity(p: MomPoly, parity: ParityClass) -> bool:
    return parity_project(p, parity) == p
