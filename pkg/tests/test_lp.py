from fractions import Fraction

from sclkit.lp import solve_lp


def test_basic_minimisation():
    # min x + y  s.t.  x + 2y = 4, x, y >= 0
    res = solve_lp([1, 1], [[1, 2]], [4])
    assert res.status == "optimal"
    assert res.value == 2
    assert res.solution == [Fraction(0), Fraction(2)]


def test_degenerate_equalities():
    # redundant constraint pair
    res = solve_lp([1, 0], [[1, 1], [2, 2]], [3, 6])
    assert res.status == "optimal"
    assert res.value == 0


def test_infeasible():
    res = solve_lp([1], [[1], [1]], [1, 2])
    assert res.status == "infeasible"


def test_unbounded():
    # min -x s.t. x - y = 0: x can grow forever
    res = solve_lp([-1, 0], [[1, -1]], [0])
    assert res.status == "unbounded"


def test_negative_rhs_normalised():
    res = solve_lp([1, 1], [[-1, -2]], [-4])
    assert res.status == "optimal"
    assert res.value == 2


def test_exact_fractions():
    # min x s.t. 3x = 1
    res = solve_lp([1], [[3]], [1])
    assert res.value == Fraction(1, 3)


def test_determinism():
    objective = [3, 1, 4, 1, 5]
    rows = [[1, 1, 0, 2, 0], [0, 1, 1, 0, 1], [2, 0, 1, 1, 0]]
    rhs = [5, 4, 6]
    first = solve_lp(objective, rows, rhs)
    for _ in range(3):
        again = solve_lp(objective, rows, rhs)
        assert again.value == first.value
        assert again.solution == first.solution
        assert again.pivots == first.pivots
