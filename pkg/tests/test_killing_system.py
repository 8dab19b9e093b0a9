import pytest

from killing.errors import BranchError
from killing.exact_algebra import ONE, X, ZERO
from killing.killing_system import (
    BranchSpec,
    LinearForm,
    UnknownId,
    ansatz,
    branch_trivials_count,
    equations,
    homogeneous_blocks,
    integral_jet,
    meqns,
    meqns_closed,
    meqns_sum,
    nvars,
    nvars_closed,
    nvars_sum,
    static_split_plan,
    trivial_family,
    trivials_count,
    two_parity_plan,
)
from killing.momentum_poly import MomPoly, poisson
from killing.prolongation import prolong


@pytest.mark.parametrize("d,e,M,expected_meqns,expected_nvars", [
    (7, 0, 7, 2880, 2700),
    (7, 1, 7, 3060, 2700),
    (2, 0, 2, 60, 60),
    (1, 0, 0, 4, 6),
])
def test_counts(d, e, M, expected_meqns, expected_nvars):
    assert meqns(d, e, M) == expected_meqns
    assert nvars(d, e, M) == expected_nvars


@pytest.mark.parametrize("label,d,e,expected_meqns,expected_nvars", [
    ("S7", 7, 1, 1980, 1800),
    ("S8", 8, 0, 3150, 3025),
    ("S9", 9, 1, 5005, 4620),
])
def test_static_branch_counts(label, d, e, expected_meqns, expected_nvars):
    assert BranchSpec(d, e, "even").label() == label
    assert meqns(d, e, d, "even") == expected_meqns
    assert nvars(d, e, d, "even") == expected_nvars


def test_closed_forms_agree_with_block_sums():
    for d in range(0, 12):
        for e in (0, 1):
            for M in range(0, 5):
                assert nvars_closed(d, e, M) == nvars_sum(d, e, M), (d, e, M)
                assert meqns_closed(d, e, M) == meqns_sum(d, e, M), (d, e, M)


@pytest.mark.parametrize("d", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("e", [0, 1])
@pytest.mark.parametrize("phi_parity", ["any", "even"])
def test_counts_match_built_system(flat, d, e, phi_parity):
    branch = BranchSpec(d, e, phi_parity)
    eqs = equations(flat.hamiltonian, branch)
    assert len(eqs) == meqns(d, e, 0, phi_parity)
    system = prolong(eqs, 2, branch)
    assert system.meqns == meqns(d, e, 2, phi_parity)
    assert system.nvars == nvars(d, e, 2, phi_parity)
    assert len(set(system.columns)) == system.nvars


def test_trivials_count():
    assert [trivials_count(d) for d in range(1, 5)] == [2, 4, 6, 9]
    assert trivials_count(7) == 20
    assert trivials_count(9) == 30
    assert trivials_count(10) == 36
    assert trivials_count(11) == 42
    assert trivials_count(2, D=3) == 2


def test_branch_trivials():
    assert branch_trivials_count(BranchSpec(8, 0, "even")) == 15
    assert branch_trivials_count(BranchSpec(10, 0, "even")) == 21
    assert branch_trivials_count(BranchSpec(9, 1, "even")) == 0
    assert branch_trivials_count(BranchSpec(7, 1)) == 0


@pytest.mark.parametrize("d", range(0, 11))
def test_branch_plans_account_for_every_trivial_integral(d):
    static_total = sum(b.multiplicity * branch_trivials_count(b) for b in static_split_plan(d))
    parity_total = sum(branch_trivials_count(b) for b in two_parity_plan(d))
    assert static_total == trivials_count(d)
    assert parity_total == trivials_count(d)


def test_static_split_plan(kerr):
    plan = static_split_plan(9)
    assert [(b.label(), b.multiplicity) for b in plan] == [("S9", 1), ("S8", 2), ("S7", 1)]
    assert [b.label() for b in static_split_plan(1)] == ["S1", "S0"]
    with pytest.raises(BranchError):
        static_split_plan(4, kerr)


def test_branch_validation():
    with pytest.raises(BranchError):
        BranchSpec(-1, 0)
    with pytest.raises(BranchError):
        BranchSpec(3, 2)
    with pytest.raises(BranchError):
        BranchSpec(3, 1, "odd")
    with pytest.raises(BranchError):
        BranchSpec(3, 1, multiplicity=3)
    assert BranchSpec(7, 0).label() == "d=7,e=0,phi=any"
    assert BranchSpec(7, 0).tilde_e == 1


def test_even_phi_branch_needs_static_metric(kerr):
    branch = BranchSpec(2, 0, "even")
    with pytest.raises(BranchError):
        branch.check_metric(kerr)
    with pytest.raises(BranchError):
        equations(kerr.hamiltonian, branch)


@pytest.mark.parametrize("name,d,branch", [
    ("flat_cyl", 2, BranchSpec(2, 0, "even")),
    ("kerr_extreme", 2, BranchSpec(2, 0)),
    ("kerr_extreme", 3, BranchSpec(3, 0)),
    ("darmois", 4, BranchSpec(4, 0, "even")),
])
def test_trivial_integrals_solve_the_equations(name, d, branch):
    from killing.metric_catalog import builtin

    h = builtin(name).hamiltonian
    family = trivial_family(h, branch)
    assert len(family) == branch_trivials_count(branch)
    eqs = equations(h, branch)
    for member in family:
        assert poisson(h, member) == MomPoly.zero()
        jet = integral_jet(member, d)
        assert all(eq.form.substitute(jet) == ZERO for eq in eqs)


def test_non_integral_violates_the_equations(flat):
    branch = BranchSpec(1, 1)
    jet = integral_jet(MomPoly.momentum(0), 1)
    assert any(eq.form.substitute(jet) != ZERO for eq in equations(flat.hamiltonian, branch))


def test_ansatz_respects_parity():
    unknowns = ansatz(BranchSpec(4, 0, "even"))
    assert all(u.i % 2 == 0 and u.k % 2 == 0 and u.m == 0 for u in unknowns)
    assert UnknownId(0, 0, 4) in unknowns
    assert UnknownId(0, 0, 3) not in unknowns
    assert len(ansatz(BranchSpec(1, 1))) == 2
    assert len(ansatz(BranchSpec(2, 0))) == 6
    assert len(ansatz(BranchSpec(2, 0, "even"))) == 5


def test_linear_form_leibniz_rule():
    u = UnknownId(1, 0, 0)
    form = LinearForm({u: X**2})
    assert form.diff("x") == LinearForm({u: 2 * X, u.shifted("x"): X**2})
    assert form.diff("y") == LinearForm({u.shifted("y"): X**2})
    assert (form - form) == LinearForm()
    assert form.scale(ONE / X).terms == {u: X}
    assert form.diff("x").max_order() == 1


def test_equations_are_grouped_into_blocks(kerr):
    eqs = equations(kerr.hamiltonian, BranchSpec(3, 0))
    cells = homogeneous_blocks(eqs, 3, 0)
    assert sum(len(cell) for cell in cells.values()) == len(eqs)
    assert list(cells) == sorted(cells)
