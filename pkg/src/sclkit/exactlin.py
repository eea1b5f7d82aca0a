"""Exact linear algebra over Z and Q.

Matrices are plain lists of lists.  Integer routines never leave Z;
rational routines use fractions.Fraction.  Everything here is deterministic:
the Smith normal form uses a fixed pivot rule (smallest nonzero absolute
value, ties broken by lowest row then lowest column index).
"""

from __future__ import annotations

from fractions import Fraction
from dataclasses import dataclass


def zeros(m, n):
    return [[0] * n for _ in range(m)]


def identity(n):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    if not a or not b:
        return [[0] * (len(b[0]) if b else 0) for _ in a]
    n, k, m = len(a), len(b), len(b[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            s = ai[t]
            if s:
                bt = b[t]
                for j in range(m):
                    if bt[j]:
                        oi[j] += s * bt[j]
    return out


def mat_transpose(a):
    if not a:
        return []
    return [list(col) for col in zip(*a)]


def mat_vec(a, v):
    return [sum(row[j] * v[j] for j in range(len(v)) if v[j]) for row in a]


def det_int(a):
    """Determinant of a square integer matrix (Bareiss, exact)."""
    n = len(a)
    if n == 0:
        return 1
    m = [row[:] for row in a]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if m[k][k] == 0:
            for i in range(k + 1, n):
                if m[i][k]:
                    m[k], m[i] = m[i], m[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                m[i][j] = (m[i][j] * m[k][k] - m[i][k] * m[k][j]) // prev
            m[i][k] = 0
        prev = m[k][k]
    return sign * m[n - 1][n - 1]


@dataclass
class SnfResult:
    """Factorisation U * M * V = D with U, V unimodular and D diagonal.

    The diagonal entries are nonnegative and satisfy d1 | d2 | ... ;
    trailing zeros are allowed.  ``diagonal`` lists min(rows, cols) entries.
    """

    U: list
    D: list
    V: list

    @property
    def diagonal(self):
        return [self.D[i][i] for i in range(min(len(self.D), len(self.D[0]) if self.D else 0))]

    @property
    def rank(self):
        return sum(1 for d in self.diagonal if d != 0)

    @property
    def invariant_factors(self):
        return [d for d in self.diagonal if d != 0]

    @property
    def torsion(self):
        return [d for d in self.diagonal if d > 1]


def smith_normal_form(mat) -> SnfResult:
    """Smith normal form of an integer matrix.

    Pivot rule: among nonzero entries of the working block, pick the one of
    smallest absolute value, breaking ties by lowest row then lowest column.
    """
    m = [row[:] for row in mat]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    u = identity(rows)
    v = identity(cols)

    def swap_rows(i, j):
        m[i], m[j] = m[j], m[i]
        u[i], u[j] = u[j], u[i]

    def swap_cols(i, j):
        for r in m:
            r[i], r[j] = r[j], r[i]
        for r in v:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, c):
        # row dst += c * row src
        ms, md = m[src], m[dst]
        for j in range(cols):
            if ms[j]:
                md[j] += c * ms[j]
        us, ud = u[src], u[dst]
        for j in range(rows):
            if us[j]:
                ud[j] += c * us[j]

    def add_col(src, dst, c):
        for r in m:
            if r[src]:
                r[dst] += c * r[src]
        for r in v:
            if r[src]:
                r[dst] += c * r[src]

    def negate_row(i):
        m[i] = [-x for x in m[i]]
        u[i] = [-x for x in u[i]]

    t = 0
    limit = min(rows, cols)
    while t < limit:
        # locate pivot
        pivot = None
        best = None
        for i in range(t, rows):
            mi = m[i]
            for j in range(t, cols):
                val = mi[j]
                if val:
                    a = abs(val)
                    if best is None or a < best:
                        best = a
                        pivot = (i, j)
        if pivot is None:
            break
        pi, pj = pivot
        if pi != t:
            swap_rows(t, pi)
        if pj != t:
            swap_cols(t, pj)
        if m[t][t] < 0:
            negate_row(t)
        # clear row and column t; restart if a remainder creates a smaller entry
        dirty = False
        for i in range(t + 1, rows):
            if m[i][t]:
                q = m[i][t] // m[t][t]
                add_row(t, i, -q)
                if m[i][t]:
                    dirty = True
        for j in range(t + 1, cols):
            if m[t][j]:
                q = m[t][j] // m[t][t]
                add_col(t, j, -q)
                if m[t][j]:
                    dirty = True
        if dirty:
            continue
        # pivot must divide the rest of the block
        d = m[t][t]
        offender = None
        for i in range(t + 1, rows):
            mi = m[i]
            for j in range(t + 1, cols):
                if mi[j] % d:
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            add_row(offender, t, 1)
            continue
        t += 1

    return SnfResult(U=u, D=m, V=v)


def check_snf(mat, res: SnfResult):
    """Verify every SnfResult invariant; raise AssertionError on failure."""
    prod = mat_mul(mat_mul(res.U, mat), res.V)
    assert prod == res.D, "U*M*V != D"
    assert abs(det_int(res.U)) == 1, "U not unimodular"
    assert abs(det_int(res.V)) == 1, "V not unimodular"
    diag = res.diagonal
    rows = len(res.D)
    cols = len(res.D[0]) if rows else 0
    for i in range(rows):
        for j in range(cols):
            if i != j:
                assert res.D[i][j] == 0, "D not diagonal"
    for a, b in zip(diag, diag[1:]):
        assert a >= 0 and b >= 0, "negative invariant factor"
        if a == 0:
            assert b == 0, "zero before nonzero in diagonal"
        else:
            assert b % a == 0, "divisibility chain broken"


def rank_q(mat) -> int:
    """Rank over Q by fraction Gaussian elimination."""
    m = [[Fraction(x) for x in row] for row in mat]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    rank = 0
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        r += 1
        rank += 1
        if r == rows:
            break
    return rank


def rref(mat):
    """Reduced row echelon form over Q; returns (rref matrix, pivot columns)."""
    m = [[Fraction(x) for x in row] for row in mat]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots = []
    r = 0
    for c in range(cols):
        piv = None
        for i in range(r, rows):
            if m[i][c]:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        inv = 1 / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c]:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def kernel_q(mat):
    """Basis of the rational kernel of ``mat`` (list of Fraction vectors)."""
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    if cols == 0:
        return []
    if rows == 0:
        return [[Fraction(1 if i == j else 0) for j in range(cols)] for i in range(cols)]
    red, pivots = rref(mat)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * cols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -red[r][fc]
        basis.append(vec)
    return basis


def kernel_z(mat):
    """Basis of the integer kernel lattice of an integer matrix.

    Columns of V matching zero diagonal entries of the Smith form give a
    Z-basis; it also spans the Q-kernel.
    """
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    if cols == 0:
        return []
    if rows == 0:
        return [[1 if i == j else 0 for j in range(cols)] for i in range(cols)]
    res = smith_normal_form(mat)
    diag = res.diagonal
    basis = []
    for j in range(cols):
        d = diag[j] if j < len(diag) else 0
        if d == 0:
            basis.append([res.V[i][j] for i in range(cols)])
    return basis


def solve_q(mat, rhs):
    """One exact solution of mat * x = rhs over Q, or None if inconsistent."""
    rows = len(mat)
    cols = len(mat[0]) if rows else 0
    aug = [[Fraction(mat[i][j]) for j in range(cols)] + [Fraction(rhs[i])] for i in range(rows)]
    red, pivots = rref(aug)
    for r in range(len(red)):
        if all(red[r][c] == 0 for c in range(cols)) and red[r][cols] != 0:
            return None
    x = [Fraction(0)] * cols
    for r, pc in enumerate(pivots):
        if pc == cols:
            return None
        x[pc] = red[r][cols]
    return x


def coords_in_basis(basis, vec):
    """Coordinates of ``vec`` in the span of ``basis`` (None if outside)."""
    if not basis:
        return [] if all(x == 0 for x in vec) else None
    cols = len(basis)
    mat = [[basis[j][i] for j in range(cols)] for i in range(len(vec))]
    return solve_q(mat, vec)
