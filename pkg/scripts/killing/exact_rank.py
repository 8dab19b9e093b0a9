"""
Exact rank and kernel of sparse integer matrices.

Ranks modulo large primes are lower bounds for the rational rank; when one of
them already equals the column count the matrix has full column rank and no
exact elimination is needed. Otherwise the rank is computed by fraction-free
elimination over the integers with content removal after every update.

Pivots follow the Markowitz strategy: a row of least fill is taken and, within
it, the column with the fewest entries; singleton rows and columns go first.
"""

import logging
import random
from dataclasses import dataclass
from math import gcd
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from sympy import nextprime
from sympy.polys.domains import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import InternalConsistencyError
from .exact_algebra import Rat
from .prolongation import SparseIntMatrix

logger = logging.getLogger(__name__)

PRIME_LOW = 2**61
PRIME_HIGH = 2**62
DEFAULT_PRIME_COUNT = 3

# Rows of equal length considered when choosing a pivot.
_PIVOT_CANDIDATES = 8

METHOD_MODULAR = "modular-full-rank"
METHOD_EXACT = "exact-elimination"


@dataclass(frozen=True)
class RankCertificate:
    """How a rank was established and what it was checked against."""
    rank: int
    method: str
    primes_used: Tuple[int, ...] = ()
    modular_ranks: Tuple[int, ...] = ()
    kernel_dim: int = 0
    kernel_verified: bool = False

    def to_dict(self) -> Dict:
        return {
            "rank": self.rank,
            "method": self.method,
            "primes": [str(p) for p in self.primes_used],
            "modular_ranks": list(self.modular_ranks),
            "kernel_dim": self.kernel_dim,
            "kernel_verified": self.kernel_verified,
        }


def choose_primes(seed: int, count: int = DEFAULT_PRIME_COUNT) -> List[int]:
    """Distinct primes in [2^61, 2^62), drawn reproducibly from the seed."""
    rng = random.Random(seed)
    primes: List[int] = []
    while len(primes) < count:
        p = nextprime(rng.randrange(PRIME_LOW, PRIME_HIGH - 2**20))
        if p not in primes:
            primes.append(int(p))
    return primes


class _Elimination:
    """
    Shared Markowitz bookkeeping: active rows and, per column, the rows touching it.
    """

    def __init__(self, rows: Iterable[Dict[int, int]]):
        self.rows: Dict[int, Dict[int, int]] = {}
        self.col_rows: Dict[int, set] = {}
        for n, row in enumerate(rows):
            row = {c: v for c, v in row.items() if v}
            if row:
                self._insert(n, row)

    def _insert(self, n: int, row: Dict[int, int]) -> None:
        self.rows[n] = row
        for c in row:
            self.col_rows.setdefault(c, set()).add(n)

    def _remove(self, n: int) -> Dict[int, int]:
        row = self.rows.pop(n)
        for c in row:
            self.col_rows[c].discard(n)
        return row

    def _replace(self, n: int, row: Dict[int, int]) -> None:
        self._remove(n)
        if row:
            self._insert(n, row)

    def select_pivot(self, magnitude: bool) -> Tuple[int, int]:
        """Pivot (row, column) minimizing (row length - 1) * (column count - 1)."""
        for c, touching in self.col_rows.items():
            if len(touching) == 1:
                return next(iter(touching)), c
        shortest = min(len(row) for row in self.rows.values())
        candidates = [n for n, row in self.rows.items() if len(row) == shortest][:_PIVOT_CANDIDATES]
        best = None
        for n in candidates:
            row = self.rows[n]
            for c, value in row.items():
                cost = (len(row) - 1) * (len(self.col_rows[c]) - 1)
                key = (cost, abs(value) if magnitude else 0, n, c)
                if best is None or key < best:
                    best = key
        return best[2], best[3]


def rank_mod_p(matrix: SparseIntMatrix, prime: int) -> int:
    """Rank of the matrix reduced modulo a prime."""
    state = _Elimination({c: v % prime for c, v in row.items()} for row in matrix.rows)
    rank = 0
    while state.rows:
        n, column = state.select_pivot(magnitude=False)
        pivot_row = state._remove(n)
        inverse = pow(pivot_row[column], -1, prime)
        for other in list(state.col_rows.get(column, ())):
            target = dict(state.rows[other])
            factor = target[column] * inverse % prime
            for c, v in pivot_row.items():
                value = (target.get(c, 0) - factor * v) % prime
                if value:
                    target[c] = value
                else:
                    target.pop(c, None)
            state._replace(other, target)
        rank += 1
    return rank


def _primitive(row: Dict[int, int]) -> Dict[int, int]:
    content = 0
    for value in row.values():
        content = gcd(content, value)
        if content == 1:
            return row
    return {c: v // content for c, v in row.items()} if content > 1 else row


def rank_exact(matrix: SparseIntMatrix) -> int:
    """
    Rank over the rationals by fraction-free elimination.

    Each updated row is pivot * row - entry * pivot_row divided by the gcd of
    pivot and entry, then reduced to its primitive part.
    """
    state = _Elimination(matrix.rows)
    rank = 0
    while state.rows:
        n, column = state.select_pivot(magnitude=True)
        pivot_row = state._remove(n)
        pivot = pivot_row[column]
        for other in list(state.col_rows.get(column, ())):
            target = state.rows[other]
            entry = target[column]
            common = gcd(pivot, entry)
            scale_target, scale_pivot = pivot // common, entry // common
            updated = {c: v * scale_target for c, v in target.items() if c != column}
            for c, v in pivot_row.items():
                if c == column:
                    continue
                value = updated.get(c, 0) - scale_pivot * v
                if value:
                    updated[c] = value
                else:
                    updated.pop(c, None)
            state._replace(other, _primitive(updated))
        rank += 1
    return rank


def _to_domain_matrix(matrix: SparseIntMatrix) -> DomainMatrix:
    rows = {r: {c: QQ(v) for c, v in row.items()} for r, row in enumerate(matrix.rows) if row}
    return DomainMatrix(rows, (matrix.nrows, matrix.ncols), QQ)


def check_kernel(matrix: SparseIntMatrix, vectors: Sequence[Dict[int, Rat]]) -> bool:
    """True if every vector is annihilated by every row, in exact arithmetic."""
    for vector in vectors:
        for row in matrix.rows:
            total = QQ.zero
            for c, v in row.items():
                entry = vector.get(c)
                if entry:
                    total += entry * v
            if total:
                return False
    return True


def kernel_basis(matrix: SparseIntMatrix) -> Tuple[List[Dict[int, Rat]], RankCertificate]:
    """
    Basis of the rational kernel from the reduced row echelon form.

    Every basis vector is checked against the original integer rows.

    Raises:
        InternalConsistencyError: if a basis vector is not annihilated
    """
    reduced, pivots = _to_domain_matrix(matrix).rref()
    echelon = reduced.to_sparse().rep
    pivot_set = set(pivots)
    basis: List[Dict[int, Rat]] = []
    for free in range(matrix.ncols):
        if free in pivot_set:
            continue
        vector = {free: QQ.one}
        for r, pivot_column in enumerate(pivots):
            value = echelon.get(r, {}).get(free)
            if value:
                vector[pivot_column] = -value
        basis.append(vector)
    if not check_kernel(matrix, basis):
        raise InternalConsistencyError("Kernel basis vector is not annihilated by the matrix")
    certificate = RankCertificate(
        rank=len(pivots),
        method=METHOD_EXACT,
        kernel_dim=len(basis),
        kernel_verified=True,
    )
    return basis, certificate


def certify_rank(
    matrix: SparseIntMatrix,
    primes: Optional[Sequence[int]] = None,
    force_exact: bool = False,
) -> RankCertificate:
    """
    Rigorous rank of an integer matrix.

    Modular ranks are computed first; any of them equal to ncols proves full
    column rank. Otherwise (or with force_exact) the exact rank is computed and
    checked against the modular lower bounds.

    Raises:
        InternalConsistencyError: if a modular rank exceeds the exact rank
    """
    primes = tuple(primes) if primes is not None else tuple(choose_primes(0))
    modular = []
    for prime in primes:
        modular.append(rank_mod_p(matrix, prime))
        logger.debug(f"Rank mod {prime}: {modular[-1]} of {matrix.ncols} columns")
        if modular[-1] == matrix.ncols and not force_exact:
            return RankCertificate(
                rank=matrix.ncols,
                method=METHOD_MODULAR,
                primes_used=primes[: len(modular)],
                modular_ranks=tuple(modular),
                kernel_dim=0,
                kernel_verified=True,
            )

    exact = rank_exact(matrix)
    if any(r > exact for r in modular):
        raise InternalConsistencyError(f"Modular rank {max(modular)} exceeds exact rank {exact}")
    logger.debug(f"Exact rank {exact} of {matrix.nrows}x{matrix.ncols} matrix")
    return RankCertificate(
        rank=exact,
        method=METHOD_EXACT,
        primes_used=primes,
        modular_ranks=tuple(modular),
        kernel_dim=matrix.ncols - exact,
    )


# Triplet files ---------------------------------------------------------------


def write_triplets(matrix: SparseIntMatrix) -> str:
    """Header 'nrows ncols nnz', then one 'row col value' line per nonzero (0-based)."""
    lines = [f"{matrix.nrows} {matrix.ncols} {matrix.nnz}"]
    lines.extend(f"{r} {c} {v}" for r, c, v in matrix.entries())
    return "\n".join(lines) + "\n"


def read_triplets(text: str) -> SparseIntMatrix:
    """
    Parse a triplet listing.

    Raises:
        ValueError: on a malformed header or entry, or an out-of-range index
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise ValueError("Empty triplet file")
    try:
        nrows, ncols, nnz = (int(part) for part in lines[0].split())
    except ValueError as e:
        raise ValueError(f"Malformed triplet header: {lines[0]!r}") from e
    rows: List[Dict[int, int]] = [{} for _ in range(nrows)]
    for number, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"Malformed triplet on line {number}: {line!r}")
        r, c, v = (int(part) for part in parts)
        if not (0 <= r < nrows and 0 <= c < ncols):
            raise ValueError(f"Index out of range on line {number}: {line!r}")
        if v:
            rows[r][c] = v
    matrix = SparseIntMatrix(nrows, ncols, tuple(rows), column_ids=tuple(range(ncols)))
    if matrix.nnz != nnz:
        raise ValueError(f"Header announces {nnz} nonzeros, found {matrix.nnz}")
    return matrix
