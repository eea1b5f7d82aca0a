"""Exact scl in free groups, with the rotation-number sandwich.

The calculator encodes monotone admissible surfaces over a wedge of
circles in disc-and-band normal form:

* a band pairs two letter positions carrying inverse letters and its two
  long sides lie on the boundary, which reads every circle word with total
  degree n (normalised to 1, so multiplicities are rational);
* vertex discs are the complementary polygons; walking the boundary, the
  transition after position p enters the band covering p+1 and emerges at
  the paired position q, so vertex discs are exactly the cycles of the
  induced flow on transition gaps.

With coverage 1 per position,  -chi(surface) = (number of bands) - (number
of discs), and scl is half the minimum.  Disc counting is made linear by
colouring flow by the least gap on each cycle: a conserved flow supported
on gaps >= m contributes its out-flow at m many cycles through m, and any
cycle decomposition arises this way.  All arithmetic is exact rational.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .complexes import ComplexError, TwoComplex
from .homology import boundary_matrices, homology
from .exactlin import solve_q
from .lp import LpResult, solve_lp
from .words import ChainError, EdgeChain, OneChain, letter_inverse, word_inverse


INFINITE = "infinite"


@dataclass
class SclResult:
    value: Fraction | None  # None means infinite
    status: str  # 'exact' | 'infinite'
    lp: LpResult | None = None
    method: str = "lp"

    @property
    def is_infinite(self):
        return self.status == INFINITE


def _expand_positions(chain: OneChain):
    """Circle words w_i^{n_i} as one global list of letter positions."""
    letters = []
    word_ranges = []
    for coeff, word in chain.terms:
        if coeff < 0:
            word = word_inverse(word)
            coeff = -coeff
        expanded = tuple(word) * coeff
        start = len(letters)
        letters.extend(expanded)
        word_ranges.append((start, len(letters)))
    return letters, word_ranges


def _cyclic_prev(pos, word_ranges):
    for start, end in word_ranges:
        if start <= pos < end:
            return end - 1 if pos == start else pos - 1
    raise IndexError(pos)


def scl_lp(chain: OneChain) -> SclResult:
    """Exact scl of an integral chain over the free group on its basis."""
    if chain.is_zero():
        return SclResult(Fraction(0), "exact", method="trivial")
    if not chain.is_boundary():
        return SclResult(None, INFINITE, method="homology")

    letters, word_ranges = _expand_positions(chain)
    npos = len(letters)
    prev = [_cyclic_prev(p, word_ranges) for p in range(npos)]

    pairs = []  # unordered (u, v), u < v, inverse letters
    for u in range(npos):
        for v in range(u + 1, npos):
            if letters[v] == letter_inverse(letters[u]):
                pairs.append((u, v))
    partners = {u: [] for u in range(npos)}
    for idx, (u, v) in enumerate(pairs):
        partners[u].append(idx)
        partners[v].append(idx)
    if any(not lst for lst in partners.values()):
        # cannot happen for a 1-boundary; defensive
        raise ChainError("position without an inverse partner in a boundary chain")

    # directed gap edges: pair (u, v) crossed at u gives prev(u) -> v
    edges = []  # (src gap, dst gap, pair index)
    for idx, (u, v) in enumerate(pairs):
        edges.append((prev[u], v, idx))
        edges.append((prev[v], u, idx))

    if all(len(lst) == 1 for lst in partners.values()):
        return _scl_forced(chain, npos, edges)

    return _scl_full_lp(chain, npos, pairs, partners, edges)


def _scl_forced(chain, npos, edges):
    """All pair multiplicities forced to 1: count flow cycles directly."""
    nxt = {}
    for src, dst, _ in edges:
        assert src not in nxt, "forced flow is not a permutation"
        nxt[src] = dst
    seen = set()
    discs = 0
    for g in range(npos):
        if g in seen:
            continue
        discs += 1
        cur = g
        while cur not in seen:
            seen.add(cur)
            cur = nxt[cur]
    bands = len(edges) // 2
    value = Fraction(bands - discs, 2)
    return SclResult(value, "exact", method="forced")


def _scl_full_lp(chain, npos, pairs, partners, edges):
    edge_index = {}
    for src, dst, pidx in edges:
        assert (src, dst) not in edge_index, "duplicate directed gap edge"
        edge_index[(src, dst)] = pidx

    # variables: pair multiplicities, then coloured flows
    nvar = len(pairs)
    colour_vars = {}  # (colour, src, dst) -> column
    for src, dst, _ in edges:
        for colour in range(min(src, dst) + 1):
            colour_vars[(colour, src, dst)] = nvar
            nvar += 1

    rows = []
    rhs = []

    def new_row():
        rows.append([Fraction(0)] * nvar)
        rhs.append(Fraction(0))
        return rows[-1]

    # coverage: each position is covered once
    for u in range(npos):
        row = new_row()
        for pidx in partners[u]:
            row[pidx] += 1
        rhs[-1] = Fraction(1)

    # colour totals: sum of colours on a directed edge equals its pair weight
    for src, dst, pidx in edges:
        row = new_row()
        row[pidx] -= 1
        for colour in range(min(src, dst) + 1):
            row[colour_vars[(colour, src, dst)]] += 1

    # conservation of each colour at each eligible node
    incident = {}
    for src, dst, _ in edges:
        for colour in range(min(src, dst) + 1):
            incident.setdefault((colour, src), [0, 0])
            incident.setdefault((colour, dst), [0, 0])
    for colour in range(npos):
        for node in range(colour, npos):
            ins = [
                colour_vars[(colour, src, dst)]
                for (src, dst, _) in edges
                if dst == node and colour <= min(src, dst)
            ]
            outs = [
                colour_vars[(colour, src, dst)]
                for (src, dst, _) in edges
                if src == node and colour <= min(src, dst)
            ]
            if not ins and not outs:
                continue
            row = new_row()
            for j in ins:
                row[j] += 1
            for j in outs:
                row[j] -= 1

    # objective: bands minus discs
    objective = [Fraction(0)] * nvar
    for pidx in range(len(pairs)):
        objective[pidx] += 1
    for (colour, src, dst), j in colour_vars.items():
        if src == colour:
            objective[j] -= 1

    result = solve_lp(objective, rows, rhs)
    if result.status != "optimal":
        raise ChainError(f"scl programme unexpectedly {result.status}")
    return SclResult(result.value / 2, "exact", lp=result, method="lp")


def scl_upper_from_surface(surface) -> Fraction:
    """Upper bound -chi^- / 2n from a monotone admissible surface."""
    n = surface.uniform_degree()
    if n is None:
        raise ComplexError("surface degrees are not uniform across circles")
    if n <= 0:
        raise ComplexError("surface degree must be positive")
    return Fraction(-surface.reduced_euler(), 2 * n)


# -- rotation number via cellular area -------------------------------------


@dataclass
class RotStructure:
    """Per-face positive area weights, in units of pi, totalling -2 chi.

    Requires H2(S; Q) = 0, so a cellular 1-boundary has a unique bounding
    2-chain and the enclosed area is well defined.
    """

    cx: TwoComplex
    weights: dict  # face id -> positive Fraction

    def __post_init__(self):
        if homology(self.cx, "Q").rank(2) != 0:
            raise ComplexError("rot structure needs H2(S; Q) = 0")
        if set(self.weights) != set(self.cx.faces):
            raise ComplexError("rot structure must weight every face")
        total = Fraction(0)
        for f, w in self.weights.items():
            w = Fraction(w)
            if w <= 0:
                raise ComplexError("area weights must be positive")
            total += w
        expected = Fraction(-2 * self.cx.euler_characteristic())
        if total != expected:
            raise ComplexError(
                f"area weights total {total} pi but -2 chi = {expected} pi"
            )


def default_rot_structure(cx: TwoComplex) -> RotStructure:
    """Weights proportional to (degree - 2), scaled to total -2 chi."""
    raw = {f: cx.degree(f) - 2 for f in cx.faces}
    total = sum(raw.values())
    if total <= 0 or any(v <= 0 for v in raw.values()):
        raise ComplexError("default weighting needs every face degree > 2")
    target = Fraction(-2 * cx.euler_characteristic())
    if target <= 0:
        raise ComplexError("rot needs a complex with negative Euler characteristic")
    weights = {f: Fraction(v) * target / total for f, v in raw.items()}
    return RotStructure(cx, weights)


def rot_value(structure: RotStructure, chain: EdgeChain) -> Fraction:
    """rot(c) = enclosed area / 2 pi for a cellular 1-boundary c."""
    cx = structure.cx
    vec = chain.one_chain_vector(cx)
    es = list(cx.edges)
    fs = list(cx.faces)
    d2, _ = boundary_matrices(cx, "Z")
    rhs = [vec.get(e, 0) for e in es]
    sol = solve_q(d2, rhs)
    if sol is None:
        raise ComplexError("chain is not a cellular 1-boundary")
    return sum(sol[j] * Fraction(structure.weights[f]) for j, f in enumerate(fs)) / 2


@dataclass
class SandwichVerdict:
    lower: Fraction
    upper: Fraction | None
    exact: Fraction | None

    def describe(self):
        if self.exact is not None:
            return f"scl = {self.exact} (rot lower bound meets surface upper bound)"
        if self.upper is not None:
            return f"scl in [{self.lower}, {self.upper}]"
        return f"scl >= {self.lower}"


def bavard_sandwich(structure: RotStructure, chain: EdgeChain, witness=None) -> SandwichVerdict:
    """Lower bound rot/2 (the defect of rot is 1) against a witness bound.

    When the bounds agree the value is certified independently of the LP.
    """
    lower = rot_value(structure, chain) / 2
    upper = None
    if witness is not None:
        upper = scl_upper_from_surface(witness)
    exact = lower if (upper is not None and upper == lower) else None
    return SandwichVerdict(lower=lower, upper=upper, exact=exact)


@dataclass
class InclusionReport:
    small_basis: tuple
    big_basis: tuple
    small: SclResult
    big: SclResult

    @property
    def gap(self):
        if self.small.is_infinite or self.big.is_infinite:
            return None
        return self.small.value - self.big.value


def scl_compare_under_inclusion(chain: OneChain, ambient_basis) -> InclusionReport:
    """scl of the chain in its own free group and in a larger one.

    Any homomorphism is scl-nonincreasing, so the ambient value can never
    exceed the small one; for basis inclusions they agree, and the report
    asserts monotonicity while leaving equality to the caller's check.
    """
    big_chain = chain.in_basis(ambient_basis)
    small = scl_lp(chain)
    big = scl_lp(big_chain)
    if small.is_infinite:
        assert big.is_infinite, "chain became a boundary in a larger basis"
    else:
        assert not big.is_infinite
        assert big.value <= small.value, "monotonicity of scl violated"
    return InclusionReport(
        small_basis=chain.basis,
        big_basis=tuple(ambient_basis),
        small=small,
        big=big,
    )
