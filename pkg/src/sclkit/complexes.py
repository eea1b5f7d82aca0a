"""Finite combinatorial 2-complexes.

A complex is given by vertices, directed edges, and faces attached along
closed edge paths written as words of signed edges.  A signed edge
``(e, +1)`` is traversed from source to target, ``(e, -1)`` backwards.
Cells are identified by opaque integer ids assigned in input order; names
are kept alongside for I/O.  All iteration is in ascending id order, so
every derived object is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class ComplexError(ValueError):
    """Malformed complex description."""


def inv(signed):
    return (signed[0], -signed[1])


class TwoComplex:
    """Immutable finite 2-complex with combinatorial attaching maps."""

    def __init__(self, vertices, edges, faces, names=None):
        """Build and validate.

        vertices: iterable of vertex ids.
        edges:    dict id -> (source id, target id).
        faces:    dict id -> tuple of signed edges (edge id, +1/-1).
        names:    optional dict ('v'|'e'|'f', id) -> str.
        """
        self.vertices = tuple(sorted(vertices))
        self.edges = {e: tuple(edges[e]) for e in sorted(edges)}
        self.faces = {f: tuple(tuple(se) for se in faces[f]) for f in sorted(faces)}
        self.names = dict(names or {})
        vset = set(self.vertices)
        if len(vset) != len(self.vertices):
            raise ComplexError("duplicate vertex id")
        for e, (s, t) in self.edges.items():
            if s not in vset or t not in vset:
                raise ComplexError(f"edge {self.name('e', e)} has dangling endpoint")
        for f, word in self.faces.items():
            if not word:
                raise ComplexError(f"face {self.name('f', f)} has empty attaching word")
            for e, sign in word:
                if e not in self.edges:
                    raise ComplexError(f"face {self.name('f', f)} uses unknown edge {e}")
                if sign not in (1, -1):
                    raise ComplexError(f"face {self.name('f', f)} has bad sign {sign}")
            for k in range(len(word)):
                here = self.endpoint(word[k], 1)
                there = self.endpoint(word[(k + 1) % len(word)], 0)
                if here != there:
                    raise ComplexError(
                        f"face {self.name('f', f)} does not close at position {k}"
                    )

    # -- construction helpers -------------------------------------------

    @classmethod
    def build(cls, vertices, edges, faces):
        """Build from named data.

        vertices: list of names; edges: list of (name, src, dst);
        faces: list of (name, [(edge name, sign), ...]).
        """
        vid = {name: i for i, name in enumerate(vertices)}
        if len(vid) != len(vertices):
            raise ComplexError("duplicate vertex name")
        eid = {}
        edict = {}
        names = {}
        for i, name in enumerate(vertices):
            names[("v", i)] = name
        for i, (name, s, t) in enumerate(edges):
            if name in eid:
                raise ComplexError(f"duplicate edge name {name}")
            if s not in vid or t not in vid:
                raise ComplexError(f"edge {name} has dangling endpoint")
            eid[name] = i
            edict[i] = (vid[s], vid[t])
            names[("e", i)] = name
        fdict = {}
        for i, (name, word) in enumerate(faces):
            try:
                fdict[i] = tuple((eid[e], sign) for e, sign in word)
            except KeyError as exc:
                raise ComplexError(f"face {name} uses unknown edge {exc.args[0]}") from exc
            names[("f", i)] = name
        return cls(range(len(vertices)), edict, fdict, names)

    def name(self, kind, ident):
        return self.names.get((kind, ident), f"{kind}{ident}")

    def vertex_id(self, name):
        for v in self.vertices:
            if self.name("v", v) == name:
                return v
        raise ComplexError(f"unknown vertex {name}")

    def edge_id(self, name):
        for e in self.edges:
            if self.name("e", e) == name:
                return e
        raise ComplexError(f"unknown edge {name}")

    def face_id(self, name):
        for f in self.faces:
            if self.name("f", f) == name:
                return f
        raise ComplexError(f"unknown face {name}")

    # -- basic structure -------------------------------------------------

    def endpoint(self, signed, which):
        """Endpoint of a signed edge: which=0 start, which=1 end."""
        e, sign = signed
        s, t = self.edges[e]
        if sign == 1:
            return t if which else s
        return s if which else t

    def degree(self, f):
        return len(self.faces[f])

    def side_incidence(self, e):
        """Number of face sides glued to edge e, counted with multiplicity."""
        return sum(1 for word in self.faces.values() for e2, _ in word if e2 == e)

    def half_edges(self, v):
        """Oriented half-edges starting at v; a loop contributes two."""
        out = []
        for e, (s, t) in self.edges.items():
            if s == v:
                out.append((e, 1))
            if t == v:
                out.append((e, -1))
        return out

    def corners(self):
        """All face corners: (face, index k) for the pair (word[k], word[k+1])."""
        return [(f, k) for f, word in self.faces.items() for k in range(len(word))]

    def corner_vertex(self, f, k):
        return self.endpoint(self.faces[f][k], 1)

    def corner_halves(self, f, k):
        """Link endpoints of a corner: (inverse of word[k], word[k+1])."""
        word = self.faces[f]
        return inv(word[k]), word[(k + 1) % len(word)]

    # -- invariants ------------------------------------------------------

    def euler_characteristic(self):
        return len(self.vertices) - len(self.edges) + len(self.faces)

    def cells(self):
        out = [("v", v) for v in self.vertices]
        out += [("e", e) for e in self.edges]
        out += [("f", f) for f in self.faces]
        return out

    def connected_components(self):
        """Partition of cells by 1-skeleton plus face incidence connectivity."""
        parent = {c: c for c in self.cells()}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

        for e, (s, t) in self.edges.items():
            union(("e", e), ("v", s))
            union(("e", e), ("v", t))
        for f, word in self.faces.items():
            for e, _ in word:
                union(("f", f), ("e", e))
        groups = {}
        for c in self.cells():
            groups.setdefault(find(c), []).append(c)
        return [sorted(groups[r]) for r in sorted(groups)]

    def __repr__(self):
        return (
            f"TwoComplex({len(self.vertices)} vertices, "
            f"{len(self.edges)} edges, {len(self.faces)} faces)"
        )


@dataclass(frozen=True)
class LinkGraph:
    """Link of a vertex: a multigraph on oriented half-edges.

    Each corner of a face word passing through the vertex contributes one
    edge between the inverse of the incoming side and the outgoing side,
    tagged by (face id, corner index).
    """

    vertex: int
    nodes: tuple
    links: tuple  # ((half1, half2), (face, corner index)) pairs

    def adjacency(self):
        adj = {n: [] for n in self.nodes}
        for idx, ((h1, h2), _prov) in enumerate(self.links):
            adj[h1].append((h2, idx))
            adj[h2].append((h1, idx))
        return adj

    def node_degrees(self):
        deg = {n: 0 for n in self.nodes}
        for (h1, h2), _prov in self.links:
            deg[h1] += 1
            deg[h2] += 1
        return deg

    def components(self):
        adj = self.adjacency()
        seen = set()
        out = []
        for n in sorted(self.nodes):
            if n in seen:
                continue
            comp = []
            stack = [n]
            seen.add(n)
            while stack:
                cur = stack.pop()
                comp.append(cur)
                for nxt, _ in adj[cur]:
                    if nxt not in seen:
                        seen.add(nxt)
                        stack.append(nxt)
            out.append(sorted(comp))
        return out

    def classify(self):
        """'circle' | 'arc' | 'point' | 'union' | 'branched' | 'empty'.

        circle: connected, every node degree 2.
        arc:    connected, two degree-1 ends, rest degree 2, at least 1 edge.
        point:  single node, no edges (degenerate arc).
        union:  disconnected but all degrees <= 2.
        branched: some node of degree >= 3.
        """
        if not self.nodes:
            return "empty"
        deg = self.node_degrees()
        if any(d > 2 for d in deg.values()):
            return "branched"
        comps = self.components()
        if len(comps) > 1:
            return "union"
        ones = sum(1 for d in deg.values() if d == 1)
        zeros = sum(1 for d in deg.values() if d == 0)
        if zeros:
            return "point" if len(self.nodes) == 1 else "union"
        if ones == 0:
            return "circle"
        if ones == 2:
            return "arc"
        return "branched"


def link_graph(cx: TwoComplex, v) -> LinkGraph:
    """Link of vertex v in cx."""
    if v not in cx.vertices:
        raise ComplexError(f"unknown vertex id {v}")
    nodes = tuple(sorted(cx.half_edges(v)))
    links = []
    for f, k in cx.corners():
        if cx.corner_vertex(f, k) == v:
            links.append((cx.corner_halves(f, k), (f, k)))
    return LinkGraph(vertex=v, nodes=nodes, links=tuple(links))


def has_small_links(cx: TwoComplex):
    """True iff every edge meets at most two face sides, with a witness.

    Returns (ok, witness edge id or None).  Equivalent to every vertex link
    being a disjoint union of arcs (possibly degenerate) and circles.
    """
    for e in cx.edges:
        if cx.side_incidence(e) > 2:
            return False, e
    return True, None


@dataclass
class SurfaceReport:
    is_surface: bool
    boundary_vertices: tuple
    witnesses: tuple  # (vertex, link classification) for non-surface vertices


def surface_check(cx: TwoComplex) -> SurfaceReport:
    """Surface criterion: every vertex link a circle or nondegenerate arc.

    Vertices with arc links are exactly the boundary vertices.
    """
    boundary = []
    bad = []
    for v in cx.vertices:
        kind = link_graph(cx, v).classify()
        if kind == "arc":
            boundary.append(v)
        elif kind != "circle":
            bad.append((v, kind))
    return SurfaceReport(
        is_surface=not bad,
        boundary_vertices=tuple(boundary),
        witnesses=tuple(bad),
    )


@dataclass(frozen=True)
class Subcomplex:
    """A subset of cells closed under the boundary relations."""

    parent: TwoComplex
    vertex_set: frozenset
    edge_set: frozenset
    face_set: frozenset

    def __post_init__(self):
        cx = self.parent
        for f in self.face_set:
            if f not in cx.faces:
                raise ComplexError(f"unknown face id {f}")
            for e, _ in cx.faces[f]:
                if e not in self.edge_set:
                    raise ComplexError("subcomplex not closed: face edge missing")
        for e in self.edge_set:
            if e not in cx.edges:
                raise ComplexError(f"unknown edge id {e}")
            s, t = cx.edges[e]
            if s not in self.vertex_set or t not in self.vertex_set:
                raise ComplexError("subcomplex not closed: edge endpoint missing")
        for v in self.vertex_set:
            if v not in cx.vertices:
                raise ComplexError(f"unknown vertex id {v}")

    def as_complex(self) -> TwoComplex:
        """The subcomplex as a TwoComplex, keeping the parent's cell ids."""
        cx = self.parent
        return TwoComplex(
            sorted(self.vertex_set),
            {e: cx.edges[e] for e in sorted(self.edge_set)},
            {f: cx.faces[f] for f in sorted(self.face_set)},
            names={k: v for k, v in cx.names.items() if self._has(k)},
        )

    def _has(self, key):
        kind, ident = key
        if kind == "v":
            return ident in self.vertex_set
        if kind == "e":
            return ident in self.edge_set
        return ident in self.face_set

    def cells(self):
        out = [("v", v) for v in sorted(self.vertex_set)]
        out += [("e", e) for e in sorted(self.edge_set)]
        out += [("f", f) for f in sorted(self.face_set)]
        return out

    def contains_cell(self, kind, ident):
        return self._has((kind, ident))

    def __contains__(self, cell):
        return self._has(cell)

    def is_subset_of(self, other: "Subcomplex"):
        return (
            self.vertex_set <= other.vertex_set
            and self.edge_set <= other.edge_set
            and self.face_set <= other.face_set
        )


def induced_subcomplex(cx: TwoComplex, cells) -> Subcomplex:
    """Close a cell set under face boundaries and edge endpoints."""
    vs, es, fs = set(), set(), set()
    for kind, ident in cells:
        if kind == "v":
            if ident not in cx.vertices:
                raise ComplexError(f"unknown vertex id {ident}")
            vs.add(ident)
        elif kind == "e":
            if ident not in cx.edges:
                raise ComplexError(f"unknown edge id {ident}")
            es.add(ident)
        elif kind == "f":
            if ident not in cx.faces:
                raise ComplexError(f"unknown face id {ident}")
            fs.add(ident)
        else:
            raise ComplexError(f"unknown cell kind {kind}")
    for f in fs:
        for e, _ in cx.faces[f]:
            es.add(e)
    for e in es:
        s, t = cx.edges[e]
        vs.add(s)
        vs.add(t)
    return Subcomplex(cx, frozenset(vs), frozenset(es), frozenset(fs))


def full_subcomplex(cx: TwoComplex) -> Subcomplex:
    return Subcomplex(
        cx, frozenset(cx.vertices), frozenset(cx.edges), frozenset(cx.faces)
    )


def boundary_subcomplex(cx: TwoComplex) -> Subcomplex:
    """Edges glued to exactly one face side, plus their endpoints.

    For a cellulated surface this is the topological boundary: interior
    points of such edges have half-disc neighbourhoods.
    """
    es = {e for e in cx.edges if cx.side_incidence(e) == 1}
    vs = set()
    for e in es:
        s, t = cx.edges[e]
        vs.add(s)
        vs.add(t)
    return Subcomplex(cx, frozenset(vs), frozenset(es), frozenset())


def euler_characteristic(cx: TwoComplex):
    return cx.euler_characteristic()


def reduced_euler(cx: TwoComplex):
    """Sum of min(0, euler characteristic) over connected components.

    Only defined for cellulated surfaces; discs and spheres are discarded
    by the min.
    """
    report = surface_check(cx)
    if not report.is_surface:
        raise ComplexError(f"reduced Euler characteristic needs a surface: {report.witnesses}")
    total = 0
    for comp in cx.connected_components():
        chi = sum(1 for kind, _ in comp if kind == "v")
        chi -= sum(1 for kind, _ in comp if kind == "e")
        chi += sum(1 for kind, _ in comp if kind == "f")
        total += min(0, chi)
    return total


# -- text format ---------------------------------------------------------
#
#   # comment
#   vertex <name>
#   edge <name> <src> <dst>
#   face <name> = <edge><+|-> <edge><+|-> ...


def parse_complex(text) -> TwoComplex:
    vertices = []
    edges = []
    faces = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "vertex":
            if len(parts) != 2:
                raise ComplexError(f"line {lineno}: vertex wants one name")
            vertices.append(parts[1])
        elif kind == "edge":
            if len(parts) != 4:
                raise ComplexError(f"line {lineno}: edge wants name src dst")
            edges.append((parts[1], parts[2], parts[3]))
        elif kind == "face":
            if len(parts) < 4 or parts[2] != "=":
                raise ComplexError(f"line {lineno}: face wants 'face <name> = <word>'")
            word = []
            for tok in parts[3:]:
                if tok.endswith("+"):
                    word.append((tok[:-1], 1))
                elif tok.endswith("-"):
                    word.append((tok[:-1], -1))
                else:
                    raise ComplexError(f"line {lineno}: side {tok} needs +/- suffix")
            faces.append((parts[1], word))
        else:
            raise ComplexError(f"line {lineno}: unknown directive {kind}")
    return TwoComplex.build(vertices, edges, faces)


def print_complex(cx: TwoComplex) -> str:
    """Canonical text form; parse(print(cx)) is byte-stable."""
    lines = []
    for v in cx.vertices:
        lines.append(f"vertex {cx.name('v', v)}")
    for e, (s, t) in cx.edges.items():
        lines.append(f"edge {cx.name('e', e)} {cx.name('v', s)} {cx.name('v', t)}")
    for f, word in cx.faces.items():
        sides = " ".join(
            f"{cx.name('e', e)}{'+' if sign == 1 else '-'}" for e, sign in word
        )
        lines.append(f"face {cx.name('f', f)} = {sides}")
    return "\n".join(lines) + "\n"


def subdivided(cx: TwoComplex) -> TwoComplex:
    """Coned subdivision: each face becomes a fan of triangles.

    A barycentre vertex is added per face, with one spoke per polygon
    corner; face words of length 1 or 2 subdivide like the rest (the spokes
    make every triangle word length 3).  Old cells keep their ids, so
    chains and subcomplex cell sets remain meaningful.
    """
    vertices = list(cx.vertices)
    edges = dict(cx.edges)
    faces = {}
    names = {k: v for k, v in cx.names.items() if k[0] != "f"}
    next_v = max(cx.vertices, default=-1) + 1
    next_e = max(cx.edges, default=-1) + 1
    next_f = 0
    for f, word in cx.faces.items():
        deg = len(word)
        beta = next_v
        next_v += 1
        vertices.append(beta)
        names[("v", beta)] = f"{cx.name('f', f)}*"
        spokes = []
        for i in range(deg):
            corner = cx.endpoint(word[i], 0)
            spokes.append(next_e)
            edges[next_e] = (corner, beta)
            names[("e", next_e)] = f"{cx.name('f', f)}*{i}"
            next_e += 1
        for i in range(deg):
            tri = (word[i], (spokes[(i + 1) % deg], 1), (spokes[i], -1))
            faces[next_f] = tri
            names[("f", next_f)] = f"{cx.name('f', f)}.{i}"
            next_f += 1
    return TwoComplex(vertices, edges, faces, names)


def barycentric(cx: TwoComplex):
    """Full barycentric-style subdivision.

    Every edge is halved through a midpoint and every face becomes 2 x degree
    triangles around a barycentre.  Each triangle has three distinct
    vertices (corner, midpoint, barycentre) and three distinct edges, which
    makes every surface surgery over the result non-degenerate.  Returns
    (complex, edge map) with edge map: old edge id -> (first half, second
    half) ids in the new complex.
    """
    vertices = list(cx.vertices)
    names = {}
    for v in cx.vertices:
        names[("v", v)] = cx.name("v", v)
    next_v = max(cx.vertices, default=-1) + 1
    mid = {}
    for e in cx.edges:
        mid[e] = next_v
        names[("v", next_v)] = cx.name("e", e) + ":m"
        vertices.append(next_v)
        next_v += 1
    edges = {}
    next_e = 0
    halves = {}
    for e, (u, w) in cx.edges.items():
        h1, h2 = next_e, next_e + 1
        next_e += 2
        edges[h1] = (u, mid[e])
        edges[h2] = (mid[e], w)
        names[("e", h1)] = cx.name("e", e) + ":1"
        names[("e", h2)] = cx.name("e", e) + ":2"
        halves[e] = (h1, h2)
    faces = {}
    next_f = 0
    for f, word in cx.faces.items():
        deg = len(word)
        bary = next_v
        next_v += 1
        vertices.append(bary)
        names[("v", bary)] = cx.name("f", f) + ":b"
        corner_spokes = []
        mid_spokes = []
        for i in range(deg):
            corner = cx.endpoint(word[i], 0)
            s = next_e
            next_e += 1
            edges[s] = (corner, bary)
            names[("e", s)] = f"{cx.name('f', f)}:s{i}"
            corner_spokes.append(s)
            t = next_e
            next_e += 1
            edges[t] = (mid[word[i][0]], bary)
            names[("e", t)] = f"{cx.name('f', f)}:t{i}"
            mid_spokes.append(t)
        for i in range(deg):
            e, eps = word[i]
            h1, h2 = halves[e]
            first = (h1, 1) if eps == 1 else (h2, -1)
            second = (h2, 1) if eps == 1 else (h1, -1)
            faces[next_f] = (first, (mid_spokes[i], 1), (corner_spokes[i], -1))
            names[("f", next_f)] = f"{cx.name('f', f)}:a{i}"
            next_f += 1
            faces[next_f] = (
                second,
                (corner_spokes[(i + 1) % deg], 1),
                (mid_spokes[i], -1),
            )
            names[("f", next_f)] = f"{cx.name('f', f)}:b{i}"
            next_f += 1
    out = TwoComplex(vertices, edges, faces, names)
    return out, halves
