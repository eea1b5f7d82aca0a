import math
import random
from fractions import Fraction
from itertools import combinations

from sclkit.exactlin import (
    smith_normal_form,
    check_snf,
    det_int,
    rank_q,
    kernel_q,
    kernel_z,
    solve_q,
    mat_mul,
    mat_vec,
    coords_in_basis,
)


def minors_gcd(mat, k):
    """gcd of all k x k minors; independent oracle for invariant factors."""
    rows = range(len(mat))
    cols = range(len(mat[0]) if mat else 0)
    g = 0
    for ri in combinations(rows, k):
        for ci in combinations(cols, k):
            sub = [[mat[i][j] for j in ci] for i in ri]
            g = math.gcd(g, abs(det_int(sub)))
    return g


def invariant_factors_oracle(mat):
    """d_k = gcd of k-minors divided by gcd of (k-1)-minors."""
    r = rank_q(mat)
    facs = []
    prev = 1
    for k in range(1, r + 1):
        g = minors_gcd(mat, k)
        facs.append(g // prev)
        prev = g
    return facs


def test_snf_hand_example():
    m = [[2, 4], [6, 8]]
    res = smith_normal_form(m)
    check_snf(m, res)
    assert res.diagonal == [2, 4]
    assert invariant_factors_oracle(m) == [2, 4]


def test_snf_zero_matrix():
    m = [[0, 0, 0], [0, 0, 0]]
    res = smith_normal_form(m)
    check_snf(m, res)
    assert res.diagonal == [0, 0]


def test_snf_identity_fixed_by_pivot_rule():
    m = [[1, 0], [0, 1]]
    res = smith_normal_form(m)
    check_snf(m, res)
    assert res.D == m
    assert res.U == [[1, 0], [0, 1]]
    assert res.V == [[1, 0], [0, 1]]


def test_snf_empty_and_degenerate():
    for m in ([], [[]], [[5]], [[0]]):
        res = smith_normal_form(m)
        if m and m[0]:
            check_snf(m, res)


def test_snf_random_small_against_minor_oracle():
    rng = random.Random(7)
    for _ in range(60):
        rows = rng.randint(1, 4)
        cols = rng.randint(1, 4)
        m = [[rng.randint(-6, 6) for _ in range(cols)] for _ in range(rows)]
        res = smith_normal_form(m)
        check_snf(m, res)
        assert res.invariant_factors == invariant_factors_oracle(m)


def test_snf_random_medium_invariants():
    rng = random.Random(11)
    for _ in range(40):
        rows = rng.randint(1, 12)
        cols = rng.randint(1, 12)
        m = [[rng.randint(-9, 9) for _ in range(cols)] for _ in range(rows)]
        res = smith_normal_form(m)
        check_snf(m, res)
        assert res.rank == rank_q(m)


def test_kernels_agree_over_q():
    rng = random.Random(3)
    for _ in range(30):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 6)
        m = [[rng.randint(-4, 4) for _ in range(cols)] for _ in range(rows)]
        kq = kernel_q(m)
        kz = kernel_z(m)
        assert len(kq) == len(kz) == cols - rank_q(m)
        for vec in kz:
            assert all(x == 0 for x in mat_vec(m, vec))
        for vec in kq:
            assert all(x == 0 for x in mat_vec(m, vec))


def test_solve_q_roundtrip():
    rng = random.Random(5)
    for _ in range(30):
        rows = rng.randint(1, 5)
        cols = rng.randint(1, 5)
        m = [[rng.randint(-4, 4) for _ in range(cols)] for _ in range(rows)]
        x = [Fraction(rng.randint(-3, 3), rng.randint(1, 3)) for _ in range(cols)]
        b = mat_vec(m, x)
        sol = solve_q(m, b)
        assert sol is not None
        assert mat_vec(m, sol) == b


def test_solve_q_inconsistent():
    assert solve_q([[1, 1], [1, 1]], [0, 1]) is None


def test_coords_in_basis():
    basis = [[Fraction(1), Fraction(0), Fraction(2)], [Fraction(0), Fraction(1), Fraction(1)]]
    v = [Fraction(3), Fraction(-2), Fraction(4)]
    coords = coords_in_basis(basis, v)
    assert coords == [Fraction(3), Fraction(-2)]
    assert coords_in_basis(basis, [Fraction(0), Fraction(0), Fraction(1)]) is None


def test_mat_mul_shapes():
    a = [[1, 2], [3, 4], [5, 6]]
    b = [[1, 0, 1], [0, 1, 1]]
    assert mat_mul(a, b) == [[1, 2, 3], [3, 4, 7], [5, 6, 11]]
