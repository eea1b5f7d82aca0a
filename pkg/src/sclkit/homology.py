"""Exact cellular homology of finite 2-complexes.

Coefficients are Z or Q, selected by the ring tag "Z" / "Q".  Z carries
torsion via Smith normal form; Q is rank data only.  The homology of a
pair (X, c), where c is an integral 1-chain of loops on the 1-skeleton,
is computed through the algebraic mapping cone of the chain map from a
disjoint union of cellulated circles into X.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import exactlin
from .complexes import ComplexError, Subcomplex, TwoComplex, boundary_subcomplex
from .exactlin import kernel_q, kernel_z, mat_vec, rank_q, smith_normal_form


class RingError(ValueError):
    pass


def check_ring(ring):
    if ring not in ("Z", "Q"):
        raise RingError(f"ring must be 'Z' or 'Q', got {ring!r}")


@dataclass(frozen=True)
class ChainVec:
    """Sparse chain vector: cell id -> coefficient, zero entries dropped."""

    ring: str
    coeffs: tuple  # sorted ((cell id, coefficient), ...)

    @classmethod
    def make(cls, ring, mapping):
        check_ring(ring)
        items = []
        for cell in sorted(mapping):
            c = mapping[cell]
            if ring == "Q" and not isinstance(c, Fraction):
                c = Fraction(c)
            if c:
                items.append((cell, c))
        return cls(ring, tuple(items))

    def as_dict(self):
        return dict(self.coeffs)

    def support(self):
        return frozenset(cell for cell, _ in self.coeffs)

    def __add__(self, other):
        assert self.ring == other.ring
        out = self.as_dict()
        for cell, c in other.coeffs:
            out[cell] = out.get(cell, 0) + c
        return ChainVec.make(self.ring, out)

    def scale(self, k):
        return ChainVec.make(self.ring, {cell: k * c for cell, c in self.coeffs})

    def __bool__(self):
        return bool(self.coeffs)


def boundary_matrices(cx: TwoComplex, ring="Z"):
    """(d2, d1) with d1 * d2 = 0.

    d2 is edges x faces (signed side counts), d1 is vertices x edges
    (target minus source).  Row and column order is ascending cell id.
    """
    check_ring(ring)
    vs = list(cx.vertices)
    es = list(cx.edges)
    fs = list(cx.faces)
    vix = {v: i for i, v in enumerate(vs)}
    eix = {e: i for i, e in enumerate(es)}
    d2 = exactlin.zeros(len(es), len(fs))
    for j, f in enumerate(fs):
        for e, sign in cx.faces[f]:
            d2[eix[e]][j] += sign
    d1 = exactlin.zeros(len(vs), len(es))
    for j, e in enumerate(es):
        s, t = cx.edges[e]
        d1[vix[t]][j] += 1
        d1[vix[s]][j] -= 1
    prod = exactlin.mat_mul(d1, d2)
    assert all(all(x == 0 for x in row) for row in prod), "d1*d2 != 0"
    if ring == "Q":
        d2 = [[Fraction(x) for x in row] for row in d2]
        d1 = [[Fraction(x) for x in row] for row in d1]
    return d2, d1


@dataclass
class HomologySummary:
    """Betti numbers per degree, with invariant-factor torsion over Z."""

    ring: str
    ranks: tuple  # (b0, b1, b2)
    torsion: tuple = ((), (), ())  # per degree, Z only

    def rank(self, n):
        return self.ranks[n] if 0 <= n < len(self.ranks) else 0

    def torsion_of(self, n):
        return self.torsion[n] if 0 <= n < len(self.torsion) else ()

    def is_zero(self, n):
        return self.rank(n) == 0 and not self.torsion_of(n)

    def describe(self):
        parts = []
        for n in range(len(self.ranks)):
            t = "".join(f" + Z/{d}" for d in self.torsion_of(n))
            base = f"{self.ring}^{self.rank(n)}" if self.ring == "Q" else f"Z^{self.rank(n)}"
            parts.append(f"H{n} = {base}{t}")
        return "; ".join(parts)


def _complex_homology(d2, d1, n2, n1, n0, ring):
    """Homology of  0 -> Q^n2 --d2--> Q^n1 --d1--> Q^n0 -> 0   (or over Z)."""
    r2 = rank_q(d2) if n2 and n1 else 0
    r1 = rank_q(d1) if n1 and n0 else 0
    b2 = n2 - r2
    b1 = n1 - r1 - r2
    b0 = n0 - r1
    if ring == "Q":
        return HomologySummary("Q", (b0, b1, b2))
    # torsion of H_(n-1) comes from the invariant factors of d_n
    t1 = tuple(smith_normal_form(d2).torsion) if n2 and n1 else ()
    t0 = tuple(smith_normal_form(d1).torsion) if n1 and n0 else ()
    # top degree is a subgroup of a free module: no torsion possible
    return HomologySummary("Z", (b0, b1, b2), ((*t0,), (*t1,), ()))


def homology(cx: TwoComplex, ring="Z") -> HomologySummary:
    check_ring(ring)
    d2, d1 = boundary_matrices(cx, "Z")
    return _complex_homology(
        d2, d1, len(cx.faces), len(cx.edges), len(cx.vertices), ring
    )


def _quotient_matrices(cx: TwoComplex, sub: Subcomplex):
    """Boundary matrices of C_*(X)/C_*(Y) and the surviving cell orders."""
    vs = [v for v in cx.vertices if v not in sub.vertex_set]
    es = [e for e in cx.edges if e not in sub.edge_set]
    fs = [f for f in cx.faces if f not in sub.face_set]
    vix = {v: i for i, v in enumerate(vs)}
    eix = {e: i for i, e in enumerate(es)}
    d2 = exactlin.zeros(len(es), len(fs))
    for j, f in enumerate(fs):
        for e, sign in cx.faces[f]:
            if e in eix:
                d2[eix[e]][j] += sign
    d1 = exactlin.zeros(len(vs), len(es))
    for j, e in enumerate(es):
        s, t = cx.edges[e]
        if t in vix:
            d1[vix[t]][j] += 1
        if s in vix:
            d1[vix[s]][j] -= 1
    return d2, d1, vs, es, fs


def relative_homology(cx: TwoComplex, sub: Subcomplex, ring="Z") -> HomologySummary:
    """Homology of the quotient chain complex C_*(X)/C_*(Y)."""
    check_ring(ring)
    if sub.parent is not cx:
        # allow equal-by-content subcomplexes of a rebuilt complex
        if not (
            sub.vertex_set <= set(cx.vertices)
            and sub.edge_set <= set(cx.edges)
            and sub.face_set <= set(cx.faces)
        ):
            raise ComplexError("subcomplex does not live in the given complex")
    d2, d1, vs, es, fs = _quotient_matrices(cx, sub)
    return _complex_homology(d2, d1, len(fs), len(es), len(vs), ring)


def relative_class_is_zero(cx: TwoComplex, sub: Subcomplex, two_chain: dict):
    """Is the class of a relative 2-cycle zero in H2(X, Y)?

    A 2-complex has no 3-cells, so H2(X, Y) is the group of relative
    2-cycles itself: the class vanishes iff the chain is supported in Y.
    Returns (is_zero, offending faces outside Y).
    """
    outside = sorted(
        f for f, c in two_chain.items() if c and f not in sub.face_set
    )
    return (not outside), tuple(outside)


# -- mapping cone of a chain of loops -------------------------------------


@dataclass
class CircleComplex:
    """A cellulated circle subdivided into len(letters) edges.

    Edge k runs from circle vertex k to vertex k+1 (mod length) and maps to
    the signed complex edge letters[k].
    """

    letters: tuple  # signed edges of the target complex

    @property
    def length(self):
        return len(self.letters)


@dataclass
class ConeComplex:
    """Algebraic mapping cone of circles -> X for a chain of loops.

    Degree n of the cone is C_(n-1)(circles) + C_n(X); the differential is
    (a, x) -> (-d a, d x - gamma a).  With no 3-cells anywhere, H2 of the
    cone is exactly the kernel of its degree-2 differential.
    """

    cx: TwoComplex
    circles: tuple  # CircleComplex per chain term
    d2: list  # (circle vertices + X edges) x (circle edges + X faces)
    d1: list  # (X vertices) x (circle vertices + X edges)
    kernel_basis: list  # rational basis of H2(X, c)
    edge_index: dict
    face_index: dict
    circle_edge_offset: tuple  # start column of each circle's edges in d2
    summary: HomologySummary

    def class_coords(self, circle_cycle, two_chain):
        """Coordinates in the kernel basis of the cone cycle (a, x).

        circle_cycle: per circle, the winding multiple of its fundamental
        cycle.  two_chain: face id -> coefficient.  Returns None if (a, x)
        is not a cycle or lies outside the computed kernel (both indicate
        inconsistent boundary data).
        """
        vec = self._cycle_vector(circle_cycle, two_chain)
        cols = len(self.d2[0]) if self.d2 else 0
        rows = len(self.d2)
        for i in range(rows):
            s = sum(self.d2[i][j] * vec[j] for j in range(cols) if vec[j])
            if s != 0:
                return None
        return exactlin.coords_in_basis(self.kernel_basis, vec)

    def _cycle_vector(self, circle_cycle, two_chain):
        n_ce = sum(c.length for c in self.circles)
        n_f = len(self.face_index)
        vec = [Fraction(0)] * (n_ce + n_f)
        for i, mult in enumerate(circle_cycle):
            off = self.circle_edge_offset[i]
            for k in range(self.circles[i].length):
                vec[off + k] = Fraction(mult)
        for f, c in two_chain.items():
            vec[n_ce + self.face_index[f]] = Fraction(c)
        return vec

    def boundary_degrees(self, coords):
        """Image of a class (in kernel-basis coordinates) in H1 of the circles."""
        vec = [Fraction(0)] * (len(self.kernel_basis[0]) if self.kernel_basis else 0)
        for c, basis_vec in zip(coords, self.kernel_basis):
            if c:
                vec = [a + c * b for a, b in zip(vec, basis_vec)]
        degs = []
        for i, circle in enumerate(self.circles):
            off = self.circle_edge_offset[i]
            degs.append(vec[off] if circle.length else Fraction(0))
        return degs


def chain_circles(cx: TwoComplex, terms):
    """Cellulated circles for integral chain terms (coeff, loop word).

    The circle of a term (n, w) is subdivided into |w| * |n| edges and reads
    the loop w traversed n times (reversed when n < 0).
    """
    circles = []
    for coeff, word in terms:
        if coeff == 0:
            raise ComplexError("chain term with zero coefficient")
        if not word:
            raise ComplexError("chain term with empty loop")
        for k in range(len(word)):
            here = cx.endpoint(word[k], 1)
            there = cx.endpoint(word[(k + 1) % len(word)], 0)
            if here != there:
                raise ComplexError("chain loop is not a closed edge path")
        if coeff > 0:
            letters = tuple(word) * coeff
        else:
            rev = tuple((e, -s) for e, s in reversed(word))
            letters = rev * (-coeff)
        circles.append(CircleComplex(letters))
    return circles


def cone_complex(cx: TwoComplex, terms) -> ConeComplex:
    """Build the mapping cone for the chain with the given (coeff, loop) terms."""
    circles = chain_circles(cx, terms)
    es = list(cx.edges)
    fs = list(cx.faces)
    vs = list(cx.vertices)
    eix = {e: i for i, e in enumerate(es)}
    fix = {f: i for i, f in enumerate(fs)}
    vix = {v: i for i, v in enumerate(vs)}

    n_cv = sum(c.length for c in circles)  # circle vertices
    n_ce = n_cv  # circle edges
    offsets = []
    off = 0
    for c in circles:
        offsets.append(off)
        off += c.length

    rows2 = n_cv + len(es)
    cols2 = n_ce + len(fs)
    d2 = exactlin.zeros(rows2, cols2)
    # block -d_circle : circle edge k runs vertex k -> vertex k+1
    for i, c in enumerate(circles):
        off = offsets[i]
        for k in range(c.length):
            d2[off + ((k + 1) % c.length)][off + k] -= 1
            d2[off + k][off + k] += 1
    # block -gamma_1 : circle edge k maps to the signed letter
    for i, c in enumerate(circles):
        off = offsets[i]
        for k, (e, sign) in enumerate(c.letters):
            d2[n_cv + eix[e]][off + k] -= sign
    # block d2 of X
    for j, f in enumerate(fs):
        for e, sign in cx.faces[f]:
            d2[n_cv + eix[e]][n_ce + j] += sign

    rows1 = len(vs)
    cols1 = rows2
    d1 = exactlin.zeros(rows1, cols1)
    # block -gamma_0 : circle vertex k maps to the start of letter k
    for i, c in enumerate(circles):
        off = offsets[i]
        for k in range(c.length):
            v = cx.endpoint(c.letters[k], 0)
            d1[vix[v]][off + k] -= 1
    # block d1 of X
    for j, e in enumerate(es):
        s, t = cx.edges[e]
        d1[vix[t]][n_cv + j] += 1
        d1[vix[s]][n_cv + j] -= 1

    prod = exactlin.mat_mul(d1, d2)
    assert all(all(x == 0 for x in row) for row in prod), "cone differential squares to nonzero"

    kernel = kernel_q(d2) if cols2 else []
    r2 = rank_q(d2) if rows2 and cols2 else 0
    r1 = rank_q(d1) if rows1 and cols1 else 0
    b2 = cols2 - r2
    b1 = cols1 - r1 - r2
    b0 = rows1 - r1
    summary = HomologySummary("Q", (b0, b1, b2))

    cone = ConeComplex(
        cx=cx,
        circles=tuple(circles),
        d2=d2,
        d1=d1,
        kernel_basis=kernel,
        edge_index=eix,
        face_index=fix,
        circle_edge_offset=tuple(offsets),
        summary=summary,
    )
    _assert_cone_rank_identity(cone)
    return cone


def _assert_cone_rank_identity(cone: ConeComplex):
    """rank H2(X,c) = rank H2(X) + dim ker(H1(circles) -> H1(X))."""
    cx = cone.cx
    hx = homology(cx, "Q")
    d2x, d1x = boundary_matrices(cx, "Z")
    es = list(cx.edges)
    eix = {e: i for i, e in enumerate(es)}
    # image of each circle's fundamental cycle in C1(X)
    gamma_cols = []
    for c in cone.circles:
        col = [0] * len(es)
        for e, sign in c.letters:
            col[eix[e]] += sign
        gamma_cols.append(col)
    n_circ = len(gamma_cols)
    if n_circ == 0:
        ker_gamma = 0
    else:
        # rank of the composite  Q^circles -> H1(X) = ker d1 / im d2:
        # columns are cycles, so rank in H1 = rank([gamma | d2]) - rank(d2)
        cols = [list(col) for col in zip(*gamma_cols)] if gamma_cols else []
        stacked = [
            [gamma_cols[j][i] for j in range(n_circ)] + list(d2x[i])
            for i in range(len(es))
        ]
        rank_with = rank_q(stacked) if es else 0
        rank_d2 = rank_q(d2x) if es and cx.faces else 0
        ker_gamma = n_circ - (rank_with - rank_d2)
    expected = hx.rank(2) + ker_gamma
    assert cone.summary.rank(2) == expected, (
        f"cone rank identity failed: {cone.summary.rank(2)} != {expected}"
    )


def cone_homology(cx: TwoComplex, terms):
    """Homology of the pair (X, c): returns the ConeComplex.

    The summary carries H_*(X, c; Q); the connecting map to H1 of the
    circles is available through ConeComplex.boundary_degrees.
    """
    return cone_complex(cx, terms)


# -- orientability ---------------------------------------------------------


def is_orientable(cx: TwoComplex, ring="Z"):
    """Search a relative 2-cycle (mod boundary) supported on every face.

    Returns the witness ChainVec, or None when impossible.  Over Z and Q
    the answer agrees: the integer kernel basis spans the rational kernel,
    and any rational witness scales to an integer one.
    """
    check_ring(ring)
    if not cx.faces:
        return ChainVec.make(ring, {})
    bsub = boundary_subcomplex(cx)
    es = [e for e in cx.edges if e not in bsub.edge_set]
    fs = list(cx.faces)
    eix = {e: i for i, e in enumerate(es)}
    mat = exactlin.zeros(len(es), len(fs))
    for j, f in enumerate(fs):
        for e, sign in cx.faces[f]:
            if e in eix:
                mat[eix[e]][j] += sign
    basis = kernel_z(mat) if es else [
        [1 if i == j else 0 for j in range(len(fs))] for i in range(len(fs))
    ]
    covered = set()
    for vec in basis:
        for j, x in enumerate(vec):
            if x:
                covered.add(j)
    if covered != set(range(len(fs))):
        return None
    # weight the basis so supports cannot cancel; start with powers of 3,
    # fall back to a base larger than any possible partial sum
    max_entry = max((abs(x) for vec in basis for x in vec), default=0)
    for base in (3, 2 * max_entry * max(3, len(basis)) + 3):
        combo = [0] * len(fs)
        w = 1
        for vec in basis:
            for j, x in enumerate(vec):
                combo[j] += w * x
            w *= base
        if all(combo[j] != 0 for j in range(len(fs))):
            chain = ChainVec.make(ring, {fs[j]: combo[j] for j in range(len(fs))})
            _assert_orientation_witness(cx, chain)
            return chain
    raise AssertionError("orientation witness combination failed unexpectedly")


def _assert_orientation_witness(cx: TwoComplex, chain: ChainVec):
    coeffs = chain.as_dict()
    assert set(coeffs) == set(cx.faces), "witness must be supported on every face"
    bsub = boundary_subcomplex(cx)
    totals = {}
    for f, c in coeffs.items():
        for e, sign in cx.faces[f]:
            totals[e] = totals.get(e, 0) + sign * c
    for e, total in totals.items():
        if total != 0:
            assert e in bsub.edge_set, "witness boundary leaks outside the complex boundary"


@dataclass
class SupportVerdict:
    ok: bool
    kind: str  # 'contains-all-faces' | 'hypothesis-fails'
    h2_rank: int = 0
    detail: str = ""


def check_support_lemma(cx: TwoComplex, sub: Subcomplex, ring="Z") -> SupportVerdict:
    """Orientable X with boundary(X) <= Y <= X and H2(X, Y) = 0 forces Y
    to contain every 2-cell of X.

    Verifies the preconditions, then either asserts the conclusion or
    reports the nonvanishing H2 rank.
    """
    check_ring(ring)
    bsub = boundary_subcomplex(cx)
    bsub_sub = Subcomplex(cx, bsub.vertex_set, bsub.edge_set, bsub.face_set)
    if not bsub_sub.is_subset_of(sub):
        raise ComplexError("precondition: boundary of X must lie in Y")
    if is_orientable(cx, ring) is None:
        raise ComplexError("precondition: X must be orientable over the ring")
    h2 = relative_homology(cx, sub, ring)
    if h2.is_zero(2):
        missing = sorted(set(cx.faces) - sub.face_set)
        assert not missing, f"support lemma violated: faces {missing} escape Y"
        return SupportVerdict(True, "contains-all-faces")
    return SupportVerdict(
        False,
        "hypothesis-fails",
        h2_rank=h2.rank(2),
        detail=f"H2(X, Y; {ring}) has rank {h2.rank(2)}"
        + (f" and torsion {list(h2.torsion_of(2))}" if h2.torsion_of(2) else ""),
    )


# -- chain file format -----------------------------------------------------


def parse_chain_file(text, cx: TwoComplex, kind="f", ring="Z"):
    """Lines '<coeff> <cell name>' into a ChainVec over cells of one kind."""
    check_ring(ring)
    coeffs = {}
    lookup = {"v": cx.vertex_id, "e": cx.edge_id, "f": cx.face_id}[kind]
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ComplexError(f"line {lineno}: want '<coeff> <cell>'")
        if ring == "Z":
            c = int(parts[0])
        else:
            c = Fraction(parts[0])
        ident = lookup(parts[1])
        coeffs[ident] = coeffs.get(ident, 0) + c
    return ChainVec.make(ring, coeffs)


def print_homology(summary: HomologySummary) -> str:
    lines = []
    for n in (0, 1, 2):
        line = f"H{n} rank {summary.rank(n)}"
        tor = summary.torsion_of(n)
        if tor:
            line += " torsion " + ",".join(str(d) for d in tor)
        lines.append(line)
    return "\n".join(lines) + "\n"
