"""
Prolongation of the order-0 system, evaluation at a point, gauge fixing of the
trivial integrals, elimination of single-top-order rows and conversion to an
integer matrix.

Differentiating all order-0 equations up to total order M gives the prolonged
system. It is never expanded symbolically on the analysis path: the rows at a
point follow from the Taylor jets of the order-0 coefficients by the Leibniz
rule

    d^a_x d^b_y (c U) = sum C(a, a') C(b, b') d^(a-a')_x d^(b-b')_y c * d^a'_x d^b'_y U
"""

import heapq
import logging
from dataclasses import dataclass, replace
from functools import cached_property
from math import comb, gcd
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

from sympy.polys.domains import QQ

from .errors import BranchError, InternalConsistencyError, ZeroDenominatorError
from .exact_algebra import Point, Rat, RatFunc, format_rat, rat, taylor_jet, vanishes_at
from .killing_system import (
    BranchSpec,
    Equation,
    EquationId,
    UnknownId,
    ansatz,
    equation_block,
    unknown_block,
)
from .metric_catalog import MetricSpec
from .momentum_poly import MomPoly, exponent_of, index_of

logger = logging.getLogger(__name__)

Row = Dict[int, Rat]


def column_key(u: UnknownId, d: int, e: int) -> Tuple[int, ...]:
    return (unknown_block(u, d, e), u.m, u.i, u.j, u.k, u.mu)


def row_key(eq: EquationId, d: int, e: int) -> Tuple[int, ...]:
    return (equation_block(eq, d, e), eq.m, eq.i, eq.j, eq.k, eq.mu)


def derivative_pairs(order: int) -> List[Tuple[int, int]]:
    """All (a, b) with a + b <= order, as (x-order, y-order)."""
    return [(mu, m - mu) for m in range(order + 1) for mu in range(m, -1, -1)]


@dataclass(frozen=True)
class ProlongedSystem:
    """
    Order-0 equations together with all their derivatives up to total order M.

    Rows are identified by (base equation, a, b); row_ids carries the
    corresponding EquationId (m = a + b, mu = a).
    """
    branch: BranchSpec
    order: int
    base: Tuple[Equation, ...]
    columns: Tuple[UnknownId, ...]
    row_ids: Tuple[EquationId, ...]
    row_sources: Tuple[Tuple[int, int, int], ...]

    @cached_property
    def unknown_index(self) -> Dict[UnknownId, int]:
        return {u: n for n, u in enumerate(self.columns)}

    @property
    def nvars(self) -> int:
        return len(self.columns)

    @property
    def meqns(self) -> int:
        return len(self.row_ids)

    def materialize(self) -> List[Equation]:
        """
        Symbolic prolonged equations (total derivatives of the order-0 forms).

        Only used for small systems and cross-checks; evaluate() never calls it.
        """
        cache: Dict[Tuple[int, int, int], object] = {}

        def form(source: int, a: int, b: int):
            key = (source, a, b)
            if key not in cache:
                if a == 0 and b == 0:
                    cache[key] = self.base[source].form
                elif b > 0:
                    cache[key] = form(source, a, b - 1).diff("y")
                else:
                    cache[key] = form(source, a - 1, 0).diff("x")
            return cache[key]

        return [
            Equation(eq_id, form(source, a, b))
            for eq_id, (source, a, b) in zip(self.row_ids, self.row_sources)
        ]


def prolong(eqs: Sequence[Equation], order: int, branch: BranchSpec) -> ProlongedSystem:
    """
    Adjoin all partial derivatives of the order-0 equations up to total order M.

    The unknowns are all I^(i,j,m,mu)_k with m <= M + 1, ordered by
    (block, m, i, j, k, mu); rows use the same ordering on equation indices.
    """
    if order < 0:
        raise BranchError(f"Prolongation order must be nonnegative, got {order}")
    d, e = branch.d, branch.e
    if any(eq.eq_id.m for eq in eqs):
        raise BranchError("prolong() expects order-0 equations")

    columns = [
        base.shifted_by(a, b)
        for base in ansatz(branch)
        for a, b in derivative_pairs(order + 1)
    ]
    columns.sort(key=lambda u: column_key(u, d, e))

    rows = []
    for source, eq in enumerate(eqs):
        i, j, k = eq.eq_id.i, eq.eq_id.j, eq.eq_id.k
        for a, b in derivative_pairs(order):
            rows.append((EquationId(i, j, k, a + b, a), (source, a, b)))
    rows.sort(key=lambda item: row_key(item[0], d, e))

    system = ProlongedSystem(
        branch=branch,
        order=order,
        base=tuple(eqs),
        columns=tuple(columns),
        row_ids=tuple(r[0] for r in rows),
        row_sources=tuple(r[1] for r in rows),
    )
    logger.debug(f"Prolonged {branch.label()} to order {order}: {system.meqns} equations, {system.nvars} unknowns")
    return system


@dataclass(frozen=True)
class Substitution:
    """Column eliminated by solving row `row_id` for it."""
    column: int
    row_id: EquationId
    expression: Tuple[Tuple[int, Rat], ...]


@dataclass(frozen=True)
class GaugeEntry:
    """Column set to zero, with the values the trivial integrals take there."""
    column: int
    unknown: UnknownId
    family_values: Tuple[Rat, ...]


@dataclass(frozen=True)
class PointSystem:
    """
    Linear system with exact rational coefficients at a fixed point.

    Rows are sparse maps column -> nonzero rational. Every step returns a new
    snapshot; rows are never mutated after construction.
    """
    branch: BranchSpec
    point: Point
    columns: Tuple[UnknownId, ...]
    rows: Tuple[Row, ...]
    row_ids: Tuple[EquationId, ...]
    meqns: int
    zero_rows_dropped: int = 0
    gauge_log: Tuple[GaugeEntry, ...] = ()
    substitutions: Tuple[Substitution, ...] = ()

    @cached_property
    def gauged(self) -> FrozenSet[int]:
        return frozenset(entry.column for entry in self.gauge_log)

    @cached_property
    def eliminated(self) -> FrozenSet[int]:
        return frozenset(s.column for s in self.substitutions)

    def free_columns(self) -> List[int]:
        removed = self.gauged | self.eliminated
        return [c for c in range(len(self.columns)) if c not in removed]

    @property
    def nvars(self) -> int:
        return len(self.columns)

    @property
    def nonzero_rows(self) -> int:
        return sum(1 for row in self.rows if row)

    def residual(self, vector: Dict[int, Rat]) -> Optional[EquationId]:
        """First row not satisfied by the vector, or None."""
        for row_id, row in zip(self.row_ids, self.rows):
            total = QQ.zero
            for column, value in row.items():
                entry = vector.get(column)
                if entry:
                    total += value * entry
            if total:
                return row_id
        return None


def _coefficient_jets(
    system: ProlongedSystem, point: Point
) -> List[List[Tuple[UnknownId, Dict[Tuple[int, int], Rat]]]]:
    """Per base equation: (unknown U_u, Taylor jet of its coefficient) pairs."""
    jets: Dict[RatFunc, Dict[Tuple[int, int], Rat]] = {}
    result = []
    for eq in system.base:
        terms = []
        for u, coeff in sorted(eq.form.terms.items()):
            if coeff not in jets:
                try:
                    jets[coeff] = taylor_jet(coeff, point, system.order)
                except ZeroDenominatorError as e:
                    raise ZeroDenominatorError(point, eq.eq_id.label(), str(e)) from e
            terms.append((u, jets[coeff]))
        result.append(terms)
    logger.debug(f"Computed {len(jets)} coefficient jets at order {system.order}")
    return result


def evaluate(system: ProlongedSystem, point: Point, metric: Optional[MetricSpec] = None) -> PointSystem:
    """
    Substitute an exact point into the prolonged system.

    Rows that vanish identically at the point are dropped and counted.

    Raises:
        ZeroDenominatorError: if the point hits the metric's excluded locus or
            a coefficient denominator (naming the equation)
    """
    if metric is not None and vanishes_at(list(metric.excluded_locus) + metric.denominators(), point):
        raise ZeroDenominatorError(point, detail=f"point lies on the excluded locus of {metric.name}")

    base_jets = _coefficient_jets(system, point)
    index = system.unknown_index
    rows: List[Row] = []
    row_ids: List[EquationId] = []
    dropped = 0
    for eq_id, (source, a, b) in zip(system.row_ids, system.row_sources):
        row: Row = {}
        for u, jet in base_jets[source]:
            for a1 in range(a + 1):
                ca = comb(a, a1)
                for b1 in range(b + 1):
                    value = jet.get((a - a1, b - b1))
                    if not value:
                        continue
                    column = index[u.shifted_by(a1, b1)]
                    row[column] = row.get(column, QQ.zero) + value * ca * comb(b, b1)
        row = {c: v for c, v in row.items() if v}
        if row:
            rows.append(row)
            row_ids.append(eq_id)
        else:
            dropped += 1

    logger.debug(f"Evaluated {system.branch.label()} at ({point[0]}, {point[1]}): {len(rows)} nonzero rows, {dropped} dropped")
    return PointSystem(
        branch=system.branch,
        point=point,
        columns=system.columns,
        rows=tuple(rows),
        row_ids=tuple(row_ids),
        meqns=system.meqns,
        zero_rows_dropped=dropped,
    )


def family_jets(family: Sequence[MomPoly], system: ProlongedSystem, point: Point) -> List[Row]:
    """
    Values of concrete integrals on the columns of the system: the column of
    I^(i,j,m,mu)_k gets d^mu_x d^(m-mu)_y of the member's (i, j, k) coefficient.
    """
    d = system.branch.d
    index = system.unknown_index
    order = system.order + 1
    jets = []
    for member in family:
        vector: Row = {}
        for exponent, coeff in member:
            i, j, k = index_of(exponent)
            if exponent_of((i, j, k), d) != exponent or UnknownId(i, j, k) not in index:
                raise BranchError(f"Integral has a term p^{exponent} outside the branch {system.branch.label()}")
            for (a, b), value in taylor_jet(coeff, point, order).items():
                if value:
                    vector[index[UnknownId(i, j, k).shifted_by(a, b)]] = value
        jets.append(vector)
    return jets


def _reduce(vector: List[Rat], basis: List[Tuple[int, List[Rat]]]) -> List[Rat]:
    vector = list(vector)
    for pivot, row in basis:
        factor = vector[pivot]
        if factor:
            vector = [v - factor * r for v, r in zip(vector, row)]
    return vector


def gauge_fix(ps: PointSystem, jets: Sequence[Row]) -> PointSystem:
    """
    Remove the trivial integrals by zeroing order-0 columns.

    A column is zeroed when the values of the trivial integrals on it are
    independent of those on the columns already chosen; columns with j = 0 are
    preferred. Any solution minus a suitable trivial combination vanishes on the
    chosen columns, so the nullity drops by exactly the number chosen.
    """
    if not jets:
        return ps
    d, e = ps.branch.d, ps.branch.e
    candidates = sorted(
        (c for c, u in enumerate(ps.columns) if u.m == 0),
        key=lambda c: (ps.columns[c].j != 0, column_key(ps.columns[c], d, e)),
    )
    basis: List[Tuple[int, List[Rat]]] = []
    chosen: List[GaugeEntry] = []
    for column in candidates:
        values = [jet.get(column, QQ.zero) for jet in jets]
        reduced = _reduce(values, basis)
        pivot = next((n for n, v in enumerate(reduced) if v), None)
        if pivot is None:
            continue
        scale = reduced[pivot]
        normalized = [v / scale for v in reduced]
        basis = [
            (p, [r - row[pivot] * n for r, n in zip(row, normalized)]) for p, row in basis
        ]
        basis.append((pivot, normalized))
        chosen.append(GaugeEntry(column, ps.columns[column], tuple(values)))
        if len(chosen) == len(jets):
            break

    zeroed = {entry.column for entry in chosen}
    rows = tuple({c: v for c, v in row.items() if c not in zeroed} for row in ps.rows)
    logger.debug(f"Gauge fixed {len(chosen)} columns of {ps.branch.label()}")
    return replace(ps, rows=rows, gauge_log=ps.gauge_log + tuple(chosen))


def eliminate(ps: PointSystem) -> PointSystem:
    """
    Repeatedly solve rows with exactly one unknown of the row's highest order
    for that unknown and substitute it everywhere.

    Candidates are taken by (m, block, nnz) of the row. Every substitution is
    logged so solutions of the reduced system lift back to the full one.
    """
    d, e = ps.branch.d, ps.branch.e
    orders = [u.m for u in ps.columns]
    rows: Dict[int, Row] = {n: dict(row) for n, row in enumerate(ps.rows)}
    col_rows: Dict[int, set] = {}
    for n, row in rows.items():
        for c in row:
            col_rows.setdefault(c, set()).add(n)

    def single_top(row: Row) -> Optional[int]:
        top = max(orders[c] for c in row)
        tops = [c for c in row if orders[c] == top]
        return tops[0] if len(tops) == 1 else None

    def key(n: int) -> Tuple[int, int, int, int]:
        eq_id = ps.row_ids[n]
        return (eq_id.m, equation_block(eq_id, d, e), len(rows[n]), n)

    heap = [key(n) for n, row in rows.items() if row and single_top(row) is not None]
    heapq.heapify(heap)
    substitutions = list(ps.substitutions)

    while heap:
        entry = heapq.heappop(heap)
        n = entry[-1]
        row = rows.get(n)
        if not row:
            continue
        if key(n) != entry:
            heapq.heappush(heap, key(n))
            continue
        column = single_top(row)
        if column is None:
            continue

        pivot = row[column]
        expression = {c: -v / pivot for c, v in row.items() if c != column}
        del rows[n]
        for c in row:
            col_rows[c].discard(n)
        for other in list(col_rows.get(column, ())):
            target = rows[other]
            factor = target.pop(column)
            for c, v in expression.items():
                value = target.get(c, QQ.zero) + factor * v
                if value:
                    if c not in target:
                        col_rows.setdefault(c, set()).add(other)
                    target[c] = value
                elif c in target:
                    del target[c]
                    col_rows[c].discard(other)
            if target and single_top(target) is not None:
                heapq.heappush(heap, key(other))
        col_rows[column] = set()
        substitutions.append(Substitution(column, ps.row_ids[n], tuple(sorted(expression.items()))))

    kept = sorted(rows)
    logger.debug(
        f"Eliminated {len(substitutions) - len(ps.substitutions)} columns of {ps.branch.label()}, {len(kept)} rows left"
    )
    return replace(
        ps,
        rows=tuple(rows[n] for n in kept),
        row_ids=tuple(ps.row_ids[n] for n in kept),
        substitutions=tuple(substitutions),
    )


def lift_solution(ps: PointSystem, values: Dict[int, Rat]) -> Dict[int, Rat]:
    """
    Extend a solution on the free columns to all columns: eliminated columns
    are recovered from the substitution log (latest first), gauged columns are zero.
    """
    full = {c: v for c, v in values.items() if v}
    for substitution in reversed(ps.substitutions):
        total = QQ.zero
        for c, coeff in substitution.expression:
            value = full.get(c)
            if value:
                total += coeff * value
        if total:
            full[substitution.column] = total
    return full


@dataclass(frozen=True)
class SparseIntMatrix:
    """Integer matrix in row-sparse form, obtained by scaling each row by a positive rational."""
    nrows: int
    ncols: int
    rows: Tuple[Dict[int, int], ...]
    row_scales: Tuple[Rat, ...] = ()
    column_ids: Tuple[int, ...] = ()
    zero_rows_removed: int = 0

    @property
    def nnz(self) -> int:
        return sum(len(row) for row in self.rows)

    def entries(self) -> Iterable[Tuple[int, int, int]]:
        for r, row in enumerate(self.rows):
            for c in sorted(row):
                yield r, c, row[c]


def _integer_row(row: Row) -> Tuple[Dict[int, int], Rat]:
    denominator = 1
    for value in row.values():
        q = int(QQ.denom(value))
        denominator = denominator * q // gcd(denominator, q)
    scaled = {c: int(QQ.numer(v)) * (denominator // int(QQ.denom(v))) for c, v in row.items()}
    content = 0
    for value in scaled.values():
        content = gcd(content, value)
    return {c: v // content for c, v in scaled.items()}, QQ(denominator, content)


def to_int_matrix(ps: PointSystem) -> SparseIntMatrix:
    """
    Scale every row to primitive integers and renumber the free columns 0..ncols-1.

    Columns that appear in no row still count towards ncols: they are free
    unknowns of the system.
    """
    free = ps.free_columns()
    renumber = {c: n for n, c in enumerate(free)}
    rows = []
    scales = []
    removed = 0
    for row in ps.rows:
        if not row:
            removed += 1
            continue
        if any(c not in renumber for c in row):
            raise InternalConsistencyError("Row refers to an eliminated or gauged column")
        integer_row, scale = _integer_row({renumber[c]: v for c, v in row.items()})
        rows.append(integer_row)
        scales.append(scale)
    return SparseIntMatrix(
        nrows=len(rows),
        ncols=len(free),
        rows=tuple(rows),
        row_scales=tuple(scales),
        column_ids=tuple(free),
        zero_rows_removed=removed,
    )


def rational_rows_to_int(rows: Sequence[Row], ncols: int) -> SparseIntMatrix:
    """Integer matrix with the same row space as the given rational rows."""
    integer_rows = []
    scales = []
    for row in rows:
        row = {c: v for c, v in row.items() if v}
        if row:
            integer_row, scale = _integer_row(row)
            integer_rows.append(integer_row)
            scales.append(scale)
    return SparseIntMatrix(len(integer_rows), ncols, tuple(integer_rows), tuple(scales), tuple(range(ncols)))


def dump_point_system(ps: PointSystem) -> str:
    """Debug listing, one row per line: 'i.j.k.m.mu: col:coeff col:coeff ...'."""
    lines = []
    for row_id, row in zip(ps.row_ids, ps.rows):
        entries = " ".join(f"{c}:{format_rat(v)}" for c, v in sorted(row.items()))
        lines.append(f"{row_id.label()}: {entries}".rstrip())
    return "\n".join(lines) + ("\n" if lines else "")


def parse_point_system_dump(text: str) -> List[Tuple[EquationId, Row]]:
    """Read back a listing written by dump_point_system()."""
    result = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        label, _, body = line.partition(":")
        try:
            eq_id = EquationId(*(int(part) for part in label.split(".")))
            row = {}
            for item in body.split():
                column, _, value = item.partition(":")
                row[int(column)] = rat(value)
        except (TypeError, ValueError) as e:
            raise ValueError(f"Malformed dump line {number}: {line!r}") from e
        result.append((eq_id, row))
    return result
