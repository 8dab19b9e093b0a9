import random
from itertools import combinations

import pytest
from sympy import Matrix, isprime

from killing.errors import InternalConsistencyError
from killing.exact_rank import (
    METHOD_EXACT,
    METHOD_MODULAR,
    PRIME_HIGH,
    PRIME_LOW,
    certify_rank,
    check_kernel,
    choose_primes,
    kernel_basis,
    rank_exact,
    rank_mod_p,
    read_triplets,
    write_triplets,
)
from killing.prolongation import SparseIntMatrix


def _sparse(dense):
    rows = tuple({c: v for c, v in enumerate(row) if v} for row in dense)
    ncols = len(dense[0]) if dense else 0
    return SparseIntMatrix(len(dense), ncols, rows, column_ids=tuple(range(ncols)))


def _random_dense(seed, nrows, ncols, rank):
    """Product of random integer factors, so the rank is at most `rank`."""
    rng = random.Random(seed)
    left = [[rng.choice([0, 0, 1, -2, 3, 7]) for _ in range(rank)] for _ in range(nrows)]
    right = [[rng.choice([0, 0, 0, 1, -1, 5, 11]) for _ in range(ncols)] for _ in range(rank)]
    return [[sum(left[i][k] * right[k][j] for k in range(rank)) for j in range(ncols)] for i in range(nrows)]


@pytest.mark.parametrize("seed", range(8))
def test_ranks_agree_with_sympy(seed):
    dense = _random_dense(seed, 14, 11, 3 + seed)
    matrix = _sparse(dense)
    expected = Matrix(dense).rank()
    assert rank_exact(matrix) == expected
    for prime in choose_primes(seed):
        assert rank_mod_p(matrix, prime) == expected


def _rank_from_minors(dense):
    nrows, ncols = len(dense), len(dense[0])
    for k in range(min(nrows, ncols), 0, -1):
        for rows in combinations(range(nrows), k):
            for cols in combinations(range(ncols), k):
                if Matrix([[dense[i][j] for j in cols] for i in rows]).det() != 0:
                    return k
    return 0


@pytest.mark.parametrize("shape", [(2, 3), (3, 3), (4, 3), (4, 4)])
@pytest.mark.parametrize("rank", [0, 1, 2, 3])
def test_rank_matches_largest_nonzero_minor(shape, rank):
    nrows, ncols = shape
    for seed in range(5):
        dense = _random_dense(100 * rank + seed, nrows, ncols, rank)
        assert rank_exact(_sparse(dense)) == _rank_from_minors(dense)


def test_rank_mod_small_prime_can_drop():
    matrix = _sparse([[1, 2], [3, 1]])
    assert rank_exact(matrix) == 2
    assert rank_mod_p(matrix, 5) == 1


def test_full_column_rank_is_certified_modularly():
    matrix = _sparse([[2, 0, 1], [0, 3, 0], [1, 1, 1], [4, 0, 2]])
    certificate = certify_rank(matrix, choose_primes(1))
    assert certificate.rank == 3
    assert certificate.method == METHOD_MODULAR
    assert certificate.modular_ranks == (3,)
    assert certificate.kernel_dim == 0


def test_deficient_rank_falls_back_to_exact_elimination():
    matrix = _sparse([[1, 2, 3], [2, 4, 6], [1, 0, 1]])
    certificate = certify_rank(matrix, choose_primes(2))
    assert certificate.rank == 2
    assert certificate.method == METHOD_EXACT
    assert certificate.modular_ranks == (2, 2, 2)
    assert certificate.kernel_dim == 1


def test_forced_exact_rank():
    matrix = _sparse([[1, 0], [0, 1]])
    certificate = certify_rank(matrix, choose_primes(0), force_exact=True)
    assert certificate.method == METHOD_EXACT
    assert certificate.rank == 2


def test_empty_rows_have_rank_zero():
    matrix = SparseIntMatrix(0, 3, ())
    assert rank_exact(matrix) == 0
    assert certify_rank(matrix).kernel_dim == 3


def test_kernel_basis_is_verified():
    dense = _random_dense(3, 9, 12, 5)
    matrix = _sparse(dense)
    basis, certificate = kernel_basis(matrix)
    assert certificate.rank == Matrix(dense).rank()
    assert len(basis) == 12 - certificate.rank
    assert certificate.kernel_verified
    assert check_kernel(matrix, basis)
    nonzero_column = next(c for c in range(12) if any(row[c] for row in dense))
    assert not check_kernel(matrix, [{nonzero_column: 1}])


def test_choose_primes_is_reproducible():
    primes = choose_primes(42)
    assert primes == choose_primes(42)
    assert primes != choose_primes(43)
    assert len(set(primes)) == 3
    assert all(PRIME_LOW <= p < PRIME_HIGH and isprime(p) for p in primes)


def test_triplets_round_trip():
    matrix = _sparse([[0, 5, 0], [-1, 0, 2]])
    text = write_triplets(matrix)
    assert text.splitlines()[0] == "2 3 3"
    again = read_triplets(text)
    assert again.rows == matrix.rows
    assert (again.nrows, again.ncols) == (2, 3)


@pytest.mark.parametrize("text", [
    "",
    "2 3\n",
    "2 3 1\n0 5 1\n",
    "2 3 1\n0 1\n",
    "2 3 2\n0 1 4\n",
])
def test_malformed_triplets(text):
    with pytest.raises(ValueError):
        read_triplets(text)


def test_inconsistent_modular_rank_is_reported(monkeypatch):
    import killing.exact_rank as exact_rank

    monkeypatch.setattr(exact_rank, "rank_exact", lambda matrix: 1)
    with pytest.raises(InternalConsistencyError):
        certify_rank(_sparse([[1, 0, 0], [0, 1, 0]]), choose_primes(0))
