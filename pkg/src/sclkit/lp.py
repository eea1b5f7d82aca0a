"""Exact-rational linear programming.

A two-phase primal simplex over fractions.Fraction with Bland's pivoting
rule: entering variable = lowest-index eligible column, leaving row =
lowest-index argmin of the ratio test.  Bland's rule makes the solver
deterministic and immune to cycling; no floating point is used anywhere.

Problems are given in equality standard form:

    minimise c . x   subject to   A x = b,  x >= 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


class LpError(RuntimeError):
    pass


@dataclass
class LpResult:
    status: str  # 'optimal' | 'infeasible' | 'unbounded'
    value: Fraction | None
    solution: list | None
    pivots: int = 0

    def certificate(self):
        return {
            "status": self.status,
            "value": None if self.value is None else str(self.value),
            "solution": None
            if self.solution is None
            else [str(x) for x in self.solution],
            "pivots": self.pivots,
        }


def _pivot(tab, basis, row, col):
    piv = tab[row][col]
    inv = 1 / piv
    tab[row] = [x * inv for x in tab[row]]
    prow = tab[row]
    for i, r in enumerate(tab):
        if i == row:
            continue
        f = r[col]
        if f:
            tab[i] = [a - f * b if b else a for a, b in zip(r, prow)]
    basis[row] = col


def _simplex_phase(tab, basis, ncols, limit=2_000_000):
    """Minimise the objective stored in the last tableau row (Bland's rule)."""
    pivots = 0
    while True:
        obj = tab[-1]
        col = None
        for j in range(ncols):
            if obj[j] < 0:
                col = j
                break
        if col is None:
            return "optimal", pivots
        row = None
        best = None
        for i in range(len(tab) - 1):
            a = tab[i][col]
            if a > 0:
                ratio = tab[i][-1] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[row]):
                    best = ratio
                    row = i
        if row is None:
            return "unbounded", pivots
        _pivot(tab, basis, row, col)
        pivots += 1
        if pivots > limit:
            raise LpError("pivot limit exceeded")


def solve_lp(objective, a_rows, b_vals) -> LpResult:
    """Minimise objective . x subject to a_rows x = b_vals, x >= 0."""
    m = len(a_rows)
    n = len(objective)
    c = [Fraction(x) for x in objective]
    rows = [[Fraction(x) for x in row] for row in a_rows]
    b = [Fraction(x) for x in b_vals]
    for i in range(m):
        if b[i] < 0:
            rows[i] = [-x for x in rows[i]]
            b[i] = -b[i]

    # phase 1: minimise the sum of artificial variables
    ncols = n + m
    tab = []
    for i in range(m):
        art = [Fraction(1) if j == i else Fraction(0) for j in range(m)]
        tab.append(rows[i] + art + [b[i]])
    obj = [Fraction(0)] * (ncols + 1)
    for i in range(m):
        for j in range(n):
            obj[j] -= rows[i][j]
        obj[-1] -= b[i]
    tab.append(obj)
    basis = [n + i for i in range(m)]
    status, p1 = _simplex_phase(tab, basis, ncols)
    if status != "optimal" or tab[-1][-1] != 0:
        return LpResult("infeasible", None, None, p1)

    # drive leftover artificials out of the basis where possible
    for i in range(m):
        if basis[i] >= n:
            col = next((j for j in range(n) if tab[i][j] != 0), None)
            if col is not None:
                _pivot(tab, basis, i, col)

    # rows still basic in an artificial are redundant constraints: drop them
    keep = [i for i in range(m) if basis[i] < n]
    tab2 = [[tab[i][j] for j in range(n)] + [tab[i][-1]] for i in keep]
    basis2 = [basis[i] for i in keep]

    # phase 2 objective, reduced against the current basis
    obj2 = c + [Fraction(0)]
    for i, bj in enumerate(basis2):
        f = obj2[bj]
        if f:
            obj2 = [a - f * b2 for a, b2 in zip(obj2, tab2[i])]
    tab2.append(obj2)
    status, p2 = _simplex_phase(tab2, basis2, n)
    if status == "unbounded":
        return LpResult("unbounded", None, None, p1 + p2)
    x = [Fraction(0)] * n
    for i, bj in enumerate(basis2):
        x[bj] = tab2[i][-1]
    value = sum(ci * xi for ci, xi in zip(c, x))
    result = LpResult("optimal", value, x, p1 + p2)
    replay_check(objective, a_rows, b_vals, result)
    return result


def replay_check(objective, a_rows, b_vals, result: LpResult):
    """Replay a primal certificate: feasibility and objective value, exactly."""
    if result.status != "optimal":
        return
    x = result.solution
    assert all(xi >= 0 for xi in x), "negative variable in certificate"
    for row, rhs in zip(a_rows, b_vals):
        lhs = sum(Fraction(a) * xi for a, xi in zip(row, x) if a)
        assert lhs == Fraction(rhs), "certificate violates a constraint"
    val = sum(Fraction(ci) * xi for ci, xi in zip(objective, x) if ci)
    assert val == result.value, "certificate objective mismatch"
