import math

import pytest
from sympy.polys.domains import QQ

from killing import builtin
from killing.errors import BranchError, ZeroDenominatorError
from killing.exact_algebra import evaluate as value_at
from killing.exact_rank import certify_rank, choose_primes, kernel_basis, rank_exact
from killing.killing_system import BranchSpec, equations, trivial_family
from killing.pipeline import analysis_points
from killing.prolongation import (
    derivative_pairs,
    dump_point_system,
    eliminate,
    evaluate,
    family_jets,
    gauge_fix,
    lift_solution,
    parse_point_system_dump,
    prolong,
    rational_rows_to_int,
    to_int_matrix,
)

KERR_POINT = (QQ(2), QQ(1, 2))


def _nullity(ps):
    matrix = to_int_matrix(ps)
    return matrix.ncols - rank_exact(matrix)


@pytest.fixture
def kerr_d2(kerr):
    branch = BranchSpec(2, 0)
    system = prolong(equations(kerr.hamiltonian, branch), 2, branch)
    return system, evaluate(system, KERR_POINT, kerr)


def test_derivative_pairs():
    assert derivative_pairs(2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]


def test_negative_order_is_rejected(flat):
    branch = BranchSpec(1, 1)
    with pytest.raises(BranchError):
        prolong(equations(flat.hamiltonian, branch), -1, branch)


def test_point_evaluation_matches_symbolic_prolongation(kerr):
    branch = BranchSpec(1, 0)
    system = prolong(equations(kerr.hamiltonian, branch), 2, branch)
    ps = evaluate(system, KERR_POINT, kerr)
    rows = dict(zip(ps.row_ids, ps.rows))
    index = system.unknown_index
    empty = 0
    for eq in system.materialize():
        expected = {index[u]: value_at(c, KERR_POINT) for u, c in eq.form.terms.items()}
        expected = {c: v for c, v in expected.items() if v}
        empty += not expected
        assert rows.get(eq.eq_id, {}) == expected, eq.eq_id.label()
    assert ps.zero_rows_dropped == empty
    assert len(ps.rows) + ps.zero_rows_dropped == system.meqns


def test_excluded_point_is_rejected(kerr_d2, kerr):
    system, _ = kerr_d2
    with pytest.raises(ZeroDenominatorError):
        evaluate(system, (QQ(1), QQ(1, 2)), kerr)


def test_trivial_integrals_lie_in_the_kernel(kerr_d2, kerr):
    system, ps = kerr_d2
    jets = family_jets(trivial_family(kerr.hamiltonian, system.branch), system, KERR_POINT)
    assert len(jets) == 4
    assert all(ps.residual(jet) is None for jet in jets)


def test_gauge_fixing_removes_exactly_the_chosen_columns(kerr_d2, kerr):
    system, ps = kerr_d2
    jets = family_jets(trivial_family(kerr.hamiltonian, system.branch), system, KERR_POINT)
    gauged = gauge_fix(ps, jets)
    assert len(gauged.gauge_log) == 4
    assert all(entry.unknown.m == 0 for entry in gauged.gauge_log)
    assert _nullity(gauged) == _nullity(ps) - 4
    assert gauge_fix(ps, []) is ps


def test_elimination_preserves_nullity(kerr_d2):
    system, ps = kerr_d2
    reduced = eliminate(ps)
    matrix = to_int_matrix(reduced)
    assert reduced.substitutions
    assert matrix.ncols + len(reduced.substitutions) == system.nvars
    assert _nullity(reduced) == _nullity(ps)
    # Each substituted column had the highest order in its row
    orders = [u.m for u in ps.columns]
    for substitution in reduced.substitutions:
        assert all(orders[c] < orders[substitution.column] for c, _ in substitution.expression)


@pytest.mark.parametrize("d", [1, 2, 3])
@pytest.mark.parametrize("e", [0, 1])
def test_elimination_preserves_nullity_in_flat_space(flat, d, e):
    branch = BranchSpec(d, e)
    system = prolong(equations(flat.hamiltonian, branch), d, branch)
    ps = evaluate(system, (QQ(2), QQ(1, 3)), flat)
    assert _nullity(eliminate(ps)) == _nullity(ps)


def _certified_nullity(ps):
    matrix = to_int_matrix(ps)
    return matrix.ncols - certify_rank(matrix, choose_primes(0)).rank


@pytest.mark.slow
@pytest.mark.parametrize("d", [4, 5])
@pytest.mark.parametrize("e", [0, 1])
def test_elimination_preserves_nullity_for_tomimatsu_sato(d, e):
    ts = builtin("ts2")
    branch = BranchSpec(d, e)
    system = prolong(equations(ts.hamiltonian, branch), d, branch)
    nullities = []
    for point in analysis_points(ts, None, 0):
        ps = evaluate(system, point, ts)
        nullity = _certified_nullity(ps)
        assert _certified_nullity(eliminate(ps)) == nullity
        nullities.append(nullity)
    assert nullities[0] == nullities[1]


def test_lifted_kernel_solves_the_full_system(kerr_d2):
    _, ps = kerr_d2
    reduced = eliminate(ps)
    matrix = to_int_matrix(reduced)
    basis, certificate = kernel_basis(matrix)
    assert len(basis) == matrix.ncols - certificate.rank
    for vector in basis:
        lifted = lift_solution(reduced, {matrix.column_ids[c]: v for c, v in vector.items()})
        assert ps.residual(lifted) is None


def test_integer_rows_are_primitive(kerr_d2):
    _, ps = kerr_d2
    matrix = to_int_matrix(ps)
    assert matrix.nrows == len(ps.rows)
    for row, scale, original in zip(matrix.rows, matrix.row_scales, ps.rows):
        assert math.gcd(*row.values()) == 1
        assert {c: QQ(v) for c, v in row.items()} == {c: v * scale for c, v in original.items()}


def test_rational_rows_to_int():
    matrix = rational_rows_to_int([{0: QQ(1, 2), 2: QQ(3, 4)}, {}, {0: QQ(2), 1: QQ(4)}], 3)
    assert matrix.rows == ({0: 2, 2: 3}, {0: 1, 1: 2})
    assert matrix.row_scales == (QQ(4), QQ(1, 2))
    assert matrix.nnz == 4


def test_dump_parses_back(kerr_d2):
    _, ps = kerr_d2
    assert parse_point_system_dump(dump_point_system(ps)) == list(zip(ps.row_ids, ps.rows))
    with pytest.raises(ValueError):
        parse_point_system_dump("1.0.0.x: 0:1\n")
