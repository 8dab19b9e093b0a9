"""
Linear PDE system for polynomial integrals of a given valence and parity branch.

The integral ansatz is

    I = sum I^(i,j)_k(x, y) p_x^(i-j) p_y^j p_phi^k p_t^(d-i-k),    i = e (mod 2)

and the equations are the coefficients of {H, I} with respect to the momentum
monomials of degree d + 1. Derivatives of the unknown functions are treated as
new unknowns I^(i,j,m,mu)_k (m = total order, mu = order in x).
"""

import logging
from dataclasses import dataclass
from math import comb
from types import MappingProxyType
from typing import Callable, Dict, Iterable, List, Mapping, NamedTuple, Optional, Tuple

from .errors import BranchError, InternalConsistencyError
from .exact_algebra import ZERO, RatFunc, diff, diff_multi
from .metric_catalog import MetricSpec
from .momentum_poly import (
    EVEN,
    PHI_EVEN,
    PPHI,
    PT,
    PX,
    PY,
    MomPoly,
    MonomialIndex,
    ParityClass,
    exponent_of,
    index_of,
    is_pure_parity,
)

logger = logging.getLogger(__name__)

PHI_PARITIES = ("even", "any")


class UnknownId(NamedTuple):
    """Derivative d^m / dx^mu dy^(m-mu) of the coefficient function I^(i,j)_k."""
    i: int
    j: int
    k: int
    m: int = 0
    mu: int = 0

    def shifted(self, var: str) -> "UnknownId":
        if var == "x":
            return UnknownId(self.i, self.j, self.k, self.m + 1, self.mu + 1)
        return UnknownId(self.i, self.j, self.k, self.m + 1, self.mu)

    def shifted_by(self, nx: int, ny: int) -> "UnknownId":
        return UnknownId(self.i, self.j, self.k, self.m + nx + ny, self.mu + nx)

    @property
    def index(self) -> MonomialIndex:
        return MonomialIndex(self.i, self.j, self.k)

    def label(self) -> str:
        return f"I({self.i},{self.j},{self.m},{self.mu})_{self.k}"


class EquationId(NamedTuple):
    """Equation P^(i,j,m,mu)_k: coefficient (i, j, k) of {H, I}, differentiated m times."""
    i: int
    j: int
    k: int
    m: int = 0
    mu: int = 0

    def label(self) -> str:
        return f"{self.i}.{self.j}.{self.k}.{self.m}.{self.mu}"


@dataclass(frozen=True)
class BranchSpec:
    """
    Parity branch: valence d, parity e in (p_x, p_y), parity in p_phi, and the
    multiplicity with which the branch enters the static split.
    """
    d: int
    e: int
    phi_parity: str = "any"
    multiplicity: int = 1

    def __post_init__(self):
        if self.d < 0:
            raise BranchError(f"Valence must be nonnegative, got {self.d}")
        if self.e not in (0, 1):
            raise BranchError(f"Parity e must be 0 or 1, got {self.e}")
        if self.phi_parity not in PHI_PARITIES:
            raise BranchError(f"phi parity must be one of {PHI_PARITIES}, got {self.phi_parity!r}")
        if self.multiplicity not in (1, 2):
            raise BranchError(f"Multiplicity must be 1 or 2, got {self.multiplicity}")

    @property
    def parity_class(self) -> ParityClass:
        return ParityClass(self.e, self.phi_parity)

    @property
    def tilde_e(self) -> int:
        return (self.d + self.e) % 2

    def label(self) -> str:
        if self.phi_parity == "even" and self.e == self.d % 2:
            return f"S{self.d}"
        return f"d={self.d},e={self.e},phi={self.phi_parity}"

    def check_metric(self, metric: MetricSpec) -> None:
        if self.phi_parity == "even" and not metric.static_flag:
            raise BranchError(f"Branch {self.label()} requires a static metric, {metric.name!r} is not static")


class LinearForm:
    """
    Homogeneous linear form in the unknowns with rational-function coefficients.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Mapping[UnknownId, RatFunc]] = None):
        self._terms = MappingProxyType({u: c for u, c in (terms or {}).items() if c})

    @property
    def terms(self) -> Mapping[UnknownId, RatFunc]:
        return self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearForm):
            return NotImplemented
        return dict(self._terms) == dict(other._terms)

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __repr__(self) -> str:
        parts = [f"({c})*{u.label()}" for u, c in sorted(self._terms.items(), key=lambda t: t[0])]
        return "LinearForm(" + " + ".join(parts) + ")" if parts else "LinearForm(0)"

    def __add__(self, other: "LinearForm") -> "LinearForm":
        result = dict(self._terms)
        for u, c in other._terms.items():
            result[u] = result[u] + c if u in result else c
        return LinearForm(result)

    def __neg__(self) -> "LinearForm":
        return LinearForm({u: -c for u, c in self._terms.items()})

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def scale(self, factor: RatFunc) -> "LinearForm":
        return LinearForm({u: c * factor for u, c in self._terms.items()})

    def max_order(self) -> int:
        return max((u.m for u in self._terms), default=-1)

    def diff(self, var: str) -> "LinearForm":
        """Total derivative w.r.t. a coordinate (Leibniz rule)."""
        result: Dict[UnknownId, RatFunc] = {}
        for u, c in self._terms.items():
            dc = diff(c, var)
            if dc:
                result[u] = result[u] + dc if u in result else dc
            shifted = u.shifted(var)
            result[shifted] = result[shifted] + c if shifted in result else c
        return LinearForm(result)

    def substitute(self, jet: Callable[[UnknownId], RatFunc]) -> RatFunc:
        """Value of the form when every unknown is replaced by jet(unknown)."""
        total = ZERO
        for u, c in self._terms.items():
            value = jet(u)
            if value:
                total += c * value
        return total


@dataclass(frozen=True)
class Equation:
    eq_id: EquationId
    form: LinearForm


# Index ranges ----------------------------------------------------------------


def _k_values(limit: int, phi_parity: str) -> range:
    return range(0, limit + 1, 2) if phi_parity == "even" else range(limit + 1)


def ansatz(branch: BranchSpec) -> List[UnknownId]:
    """All order-0 unknowns I^(i,j)_k of the branch."""
    d = branch.d
    return [
        UnknownId(i, j, k)
        for i in range(branch.e, d + 1, 2)
        for j in range(i + 1)
        for k in _k_values(d - i, branch.phi_parity)
    ]


def equation_slots(branch: BranchSpec) -> List[MonomialIndex]:
    """Indices (i, j, k) of the coefficients of {H, I} that can be nonzero."""
    d = branch.d
    return [
        MonomialIndex(i, j, k)
        for i in range(1 - branch.e, d + 2, 2)
        for j in range(i + 1)
        for k in _k_values(d + 1 - i, branch.phi_parity)
    ]


def top_unknown_degree(d: int, e: int) -> int:
    return d if d % 2 == e else d - 1


def top_equation_degree(d: int, e: int) -> int:
    return d + 1 if d % 2 == e else d


def unknown_block(u: UnknownId, d: int, e: int) -> int:
    """Homogeneity block l of an unknown, counted from the top degree in (p_x, p_y)."""
    return (top_unknown_degree(d, e) - u.i) // 2


def equation_block(eq: EquationId, d: int, e: int) -> int:
    """Homogeneity block l of an equation (the E_l of the inhomogeneous decomposition)."""
    return (top_equation_degree(d, e) - eq.i) // 2


def homogeneous_blocks(eqs: Iterable[Equation], d: int, e: int) -> Dict[Tuple[int, int], List[Equation]]:
    """Group equations into the (l, m) cells of the tabular ordering."""
    cells: Dict[Tuple[int, int], List[Equation]] = {}
    for eq in eqs:
        cells.setdefault((equation_block(eq.eq_id, d, e), eq.eq_id.m), []).append(eq)
    return dict(sorted(cells.items()))


# Equations -------------------------------------------------------------------


def _check_hamiltonian(h: MomPoly, branch: BranchSpec) -> None:
    if not is_pure_parity(h, EVEN):
        raise BranchError("Hamiltonian must be even in (p_x, p_y)")
    if branch.phi_parity == "even" and not is_pure_parity(h, PHI_EVEN):
        raise BranchError(f"Branch {branch.label()} requires a Hamiltonian even in p_phi")


def equations(h: MomPoly, branch: BranchSpec) -> List[Equation]:
    """
    Order-0 equations: coefficients of {H, I_ansatz} w.r.t. all momentum monomials.

    Every admissible slot (i, j, k) yields one equation, even when its form is
    identically zero, so the count always equals meqns(d, e, 0).

    Raises:
        BranchError: if H does not have the parities the branch relies on
    """
    _check_hamiltonian(h, branch)
    d = branch.d
    dh_dq = {"x": h.diff_coordinate("x"), "y": h.diff_coordinate("y")}
    dh_dp = {PX: h.diff_momentum(PX), PY: h.diff_momentum(PY)}

    forms: Dict[Tuple[int, int, int, int], Dict[UnknownId, RatFunc]] = {}

    def accumulate(exponent, unknown, coeff):
        terms = forms.setdefault(exponent, {})
        terms[unknown] = terms[unknown] + coeff if unknown in terms else coeff

    for unknown in ansatz(branch):
        mono = exponent_of(unknown.index, d)
        for var, p_index in (("x", PX), ("y", PY)):
            # dH/dq * dI/dp_q
            power = mono[p_index]
            if power:
                lowered = list(mono)
                lowered[p_index] -= 1
                for e_h, c_h in dh_dq[var]:
                    exponent = tuple(a + b for a, b in zip(e_h, lowered))
                    accumulate(exponent, unknown, c_h * power)
            # - dH/dp_q * dI/dq
            derivative = unknown.shifted(var)
            for e_h, c_h in dh_dp[p_index]:
                exponent = tuple(a + b for a, b in zip(e_h, mono))
                accumulate(exponent, derivative, -c_h)

    slots = equation_slots(branch)
    slot_exponents = {exponent_of(slot, d + 1) for slot in slots}
    stray = [e for e, terms in forms.items() if e not in slot_exponents and any(terms.values())]
    if stray:
        raise InternalConsistencyError(f"Bracket has terms outside the branch slots: {stray[:3]}")

    result = [
        Equation(EquationId(*slot), LinearForm(forms.get(exponent_of(slot, d + 1), {})))
        for slot in slots
    ]
    logger.debug(f"Built {len(result)} order-0 equations for {branch.label()}")
    return result


def integral_jet(member: MomPoly, d: int) -> Callable[[UnknownId], RatFunc]:
    """
    Symbolic jet of a concrete integral: maps I^(i,j,m,mu)_k to the corresponding
    derivative of the member's coefficient.
    """
    def jet(u: UnknownId) -> RatFunc:
        coeff = member.coefficient(exponent_of(u.index, d))
        if not coeff:
            return ZERO
        return diff_multi(coeff, u.mu, u.m - u.mu)
    return jet


# Trivial integrals -----------------------------------------------------------


def trivial_exponents(branch: BranchSpec) -> List[Tuple[int, int, int]]:
    """Exponents (alpha, beta, gamma) of p_phi^alpha p_t^beta H^gamma in the branch."""
    d = branch.d
    if branch.e != 0:
        return []
    exponents = []
    for gamma in range(d // 2 + 1):
        for alpha in range(d - 2 * gamma + 1):
            if branch.phi_parity == "even" and alpha % 2:
                continue
            exponents.append((alpha, d - 2 * gamma - alpha, gamma))
    return exponents


def trivial_family(h: MomPoly, branch: BranchSpec) -> List[MomPoly]:
    """
    All products p_phi^alpha p_t^beta H^gamma of valence d lying in the branch.
    """
    d = branch.d
    p_phi = MomPoly.momentum(PPHI)
    p_t = MomPoly.momentum(PT)
    h_powers = [MomPoly.constant(1)]
    for _ in range(d // 2):
        h_powers.append(h_powers[-1] * h)

    family = []
    for alpha, beta, gamma in trivial_exponents(branch):
        member = p_phi**alpha * p_t**beta * h_powers[gamma]
        if not is_pure_parity(member, branch.parity_class):
            raise BranchError(f"Trivial integral p_phi^{alpha} p_t^{beta} H^{gamma} is not in {branch.label()}")
        family.append(member)
    return family


def trivials_count(d: int, D: int = 4) -> int:
    """Number of trivial integrals of valence d for D-dimensional metrics with D-2 commuting Killing vectors."""
    if d < 0:
        raise ValueError("Valence must be nonnegative")
    return sum(comb(D + d - 2 * l - 3, d - 2 * l) for l in range(d // 2 + 1))


def branch_trivials_count(branch: BranchSpec) -> int:
    """Number of trivial integrals of the branch valence lying in the branch."""
    d = branch.d
    if branch.e != 0:
        return 0
    if branch.phi_parity == "even":
        return sum((d - 2 * gamma) // 2 + 1 for gamma in range(d // 2 + 1))
    return sum(d - 2 * gamma + 1 for gamma in range(d // 2 + 1))


# Counting --------------------------------------------------------------------


def _tilde_e(d: int, e: int) -> int:
    return (d + e) % 2


def nvars_sum(d: int, e: int, M: int) -> int:
    """Number of unknowns, summed over homogeneity blocks."""
    te = _tilde_e(d, e)
    upper = (d - e - te) // 2
    return sum((2 * l + 1 + te) * (d + 1 - te - 2 * l) for l in range(upper + 1)) * comb(M + 3, 2)


def meqns_sum(d: int, e: int, M: int) -> int:
    """Number of equations, summed over homogeneity blocks."""
    te = _tilde_e(d, e)
    upper = (d + e - te) // 2
    return sum((2 * l + 1 + te) * (d + 2 - te - 2 * l) for l in range(upper + 1)) * comb(M + 2, 2)


def nvars_closed(d: int, e: int, M: int) -> int:
    """Closed polynomial form of the unknown count (all p_phi parities)."""
    s = e + _tilde_e(d, e)
    numerator = (d + 2 - s) * (M + 2) * (M + 3) * (d * d + d * s - 2 * s * s + 4 * d + 6 * e * (s - 1) + 2 * s + 6)
    if numerator % 24:
        raise InternalConsistencyError(f"nvars closed form not integral for d={d}, e={e}, M={M}")
    return numerator // 24


def meqns_closed(d: int, e: int, M: int) -> int:
    """Closed polynomial form of the equation count (all p_phi parities)."""
    delta = e - _tilde_e(d, e)
    numerator = (d + 2 + delta) * (M + 1) * (M + 2) * (
        d * d - d * delta - 2 * delta * delta + 6 * e * delta + 7 * d - 5 * delta + 12
    )
    if numerator % 24:
        raise InternalConsistencyError(f"meqns closed form not integral for d={d}, e={e}, M={M}")
    return numerator // 24


def nvars(d: int, e: int, M: int, phi_parity: str = "any") -> int:
    """Number of unknowns I^(i,j,m,mu)_k with m <= M + 1."""
    if M < 0:
        raise ValueError("Prolongation order must be nonnegative")
    if phi_parity == "any":
        return nvars_closed(d, e, M)
    per_order = sum((i + 1) * ((d - i) // 2 + 1) for i in range(e, d + 1, 2))
    return per_order * comb(M + 3, 2)


def meqns(d: int, e: int, M: int, phi_parity: str = "any") -> int:
    """Number of equations P^(i,j,m,mu)_k with m <= M."""
    if M < 0:
        raise ValueError("Prolongation order must be nonnegative")
    if phi_parity == "any":
        return meqns_closed(d, e, M)
    per_order = sum((i + 1) * ((d + 1 - i) // 2 + 1) for i in range(1 - e, d + 2, 2))
    return per_order * comb(M + 2, 2)


# Static split ----------------------------------------------------------------


def static_split_plan(d: int, metric: Optional[MetricSpec] = None) -> List[BranchSpec]:
    """
    Branches whose bounds combine to the bound for valence d of a static metric:
    S_d once, S_(d-1) twice, S_(d-2) once. S_k has even p_phi parity and e = k mod 2.

    Raises:
        BranchError: if the metric is not static
    """
    if metric is not None and not metric.static_flag:
        raise BranchError(f"Static split requires a static metric, {metric.name!r} has a dphi*dt term")
    plan = []
    for offset, multiplicity in ((0, 1), (1, 2), (2, 1)):
        k = d - offset
        if k >= 0:
            plan.append(BranchSpec(k, k % 2, "even", multiplicity))
    return plan


def two_parity_plan(d: int) -> List[BranchSpec]:
    return [BranchSpec(d, 0, "any"), BranchSpec(d, 1, "any")]
