import pytest

from killing.exact_algebra import ONE, X, Y
from killing.momentum_poly import (
    EVEN,
    ODD,
    PHI_EVEN,
    PPHI,
    PT,
    PX,
    PY,
    MomPoly,
    MonomialIndex,
    coefficients,
    exponent_of,
    index_of,
    is_pure_parity,
    parity_project,
    poisson,
)

p_x, p_y, p_phi, p_t = (MomPoly.momentum(i) for i in (PX, PY, PPHI, PT))


def test_arithmetic_drops_zero_terms():
    assert p_x - p_x == MomPoly.zero()
    assert not (p_x * X - p_x * X)
    assert (p_x + p_y) * (p_x - p_y) == p_x**2 - p_y**2


def test_degree_and_homogeneity():
    poly = p_x**2 * X + p_t * p_phi
    assert poly.degree() == 2
    assert poly.is_homogeneous()
    assert not (poly + p_t).is_homogeneous()
    assert MomPoly.zero().degree() == -1


def test_canonical_bracket():
    assert poisson(MomPoly.constant(X), p_x) == MomPoly.constant(1)
    assert poisson(MomPoly.constant(Y), p_x) == MomPoly.zero()
    assert poisson(p_x, MomPoly.constant(X)) == MomPoly.constant(-1)


def test_bracket_is_antisymmetric_and_satisfies_jacobi():
    a = p_x**2 * Y + p_phi * X
    b = p_y * X**2 + p_t * p_x
    c = p_x * p_y * (ONE / (X + 1)) + MomPoly.constant(Y)
    assert poisson(a, b) == -poisson(b, a)
    jacobi = poisson(a, poisson(b, c)) + poisson(b, poisson(c, a)) + poisson(c, poisson(a, b))
    assert jacobi == MomPoly.zero()


def test_ignorable_momenta_commute_with_any_hamiltonian():
    h = p_x**2 * (ONE / X) + p_y**2 * Y + p_phi * p_t * X * Y - p_t**2
    assert poisson(h, p_phi) == MomPoly.zero()
    assert poisson(h, p_t) == MomPoly.zero()
    assert poisson(h, h) == MomPoly.zero()


def test_monomial_index_round_trip():
    assert exponent_of(MonomialIndex(3, 1, 2), 7) == (2, 1, 2, 2)
    assert index_of((2, 1, 2, 2)) == MonomialIndex(3, 1, 2)
    with pytest.raises(ValueError):
        exponent_of(MonomialIndex(3, 4, 0), 7)


def test_coefficients_requires_homogeneous_input():
    poly = p_x * p_t * X + p_phi**2 * ONE
    assert coefficients(poly) == {MonomialIndex(1, 0, 0): X, MonomialIndex(0, 0, 2): ONE}
    with pytest.raises(ValueError):
        coefficients(poly + p_t)


def test_parity_projection():
    poly = p_x * p_y * X + p_x * p_t + p_phi * p_t
    assert parity_project(poly, EVEN) == p_x * p_y * X + p_phi * p_t
    assert parity_project(poly, ODD) == p_x * p_t
    assert not is_pure_parity(poly, PHI_EVEN)
    assert is_pure_parity(p_phi**2 + p_x**2, PHI_EVEN)
