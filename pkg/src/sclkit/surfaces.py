"""Transverse admissible surfaces over a cellulated surface.

A surface mapping to a 2-complex S in transverse form decomposes into

* vertex discs ("vpieces"): discs mapping to vertices, with a cyclic
  boundary of slots, each slot either the end of a 1-handle or a free arc
  lying on the boundary of the surface;
* 1-handles ("hpieces"): bands mapping onto edges, with two long sides
  (glued to cellular-disc sides or free) and two short ends glued to
  vertex-disc slots;
* cellular discs ("fpieces"): polygons mapping homeomorphically onto
  faces, carrying an orientation sign, with one side per position of the
  face's attaching word, each glued to a handle long side.

Both the surface and the target are oriented.  The target must be written
with a coherent positive orientation: the sum of all its face words is a
relative cycle.  Every piece's attaching word below is its counterclockwise
boundary, and the assembly conventions make the identifications canonical:

* vertex disc with m slots: corner points p_0..p_{m-1}; slot edge j runs
  p_j -> p_{j+1}; the disc's word is slot_0 ... slot_{m-1}.
* handle over e glued at slots (D, j) and (D', j'): the src end is the
  slot edge of (D, j) in the same direction, the tgt end is the slot edge
  of (D', j') reversed.  Its long edges run parallel to e: long0 from p_j
  to p_{j'+1}, long1 from p_{j+1} to p_{j'}; its word is
  long0 . slot(D',j')^-1 . long1^-1 . slot(D,j)^-1, so it traverses long0
  positively and long1 negatively.
* cellular disc over sigma with sign s: its word lists the referenced long
  edges in attaching-word order (reversed and inverted when s = -1).
  Cancellation forces a side with polygon sign -1 onto a long0 and a side
  with polygon sign +1 onto a long1.

Validation assembles the complex, checks it is an oriented surface whose
boundary is exactly the free items, extracts the boundary circuits and
matches their words against the chain's circles.  Surfaces produced by
homotopy moves carry a 2-chain certificate instead of literal word
equality: the total boundary 1-chain minus the degree-weighted circle
1-chains must equal the boundary of the certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from .complexes import (
    ComplexError,
    TwoComplex,
    boundary_subcomplex,
    link_graph,
    surface_check,
)
from .homology import cone_complex
from .words import EdgeChain, cyclic_rotations, cyclically_equal, word_inverse


class SurfaceError(ValueError):
    """Invalid admissible-surface description."""


@dataclass(frozen=True)
class VPiece:
    vertex: int
    slots: tuple  # ("h", hpiece id, "s"|"t") or ("free",)


@dataclass(frozen=True)
class HPiece:
    edge: int
    longs: tuple  # two entries: ("f", fpiece id, side index) or ("free",)
    src: tuple  # (vpiece id, slot index)
    tgt: tuple


@dataclass(frozen=True)
class FPiece:
    face: int
    sign: int
    sides: tuple  # per word position: (hpiece id, long index)


FREE = ("free",)


def polygon_order(fp: FPiece, degree):
    """Polygon word data: [(position, polygon sign placeholder), ...]."""
    if fp.sign == 1:
        return list(range(degree))
    return list(range(degree - 1, -1, -1))


def polygon_sign(fp: FPiece, word, position):
    return fp.sign * word[position][1]


def required_long_index(psign):
    # a handle traverses long0 positively and long1 negatively, so a
    # polygon side must traverse with the opposite sign
    return 0 if psign == -1 else 1


@dataclass(frozen=True)
class Circuit:
    items: tuple  # ("long", h, li, dir) | ("arc", vp, slot, dir)
    word: tuple  # signed target edges read along the circuit
    circle: int | None
    degree: int

    def key(self):
        return min(self.items)


@dataclass
class StandardFormReport:
    transverse: bool
    disc_sphere_free: bool
    monotone: bool
    connected_links: bool
    non_folded: bool
    orientation_perfect: bool
    incompressible: bool
    witnesses: dict

    def in_standard_form(self):
        return (
            self.disc_sphere_free
            and self.connected_links
            and self.non_folded
            and self.incompressible
        )

    def in_perfect_standard_form(self):
        return self.in_standard_form() and self.orientation_perfect

    def describe(self):
        flags = [
            ("transverse", self.transverse),
            ("disc_sphere_free", self.disc_sphere_free),
            ("monotone", self.monotone),
            ("connected_links", self.connected_links),
            ("non_folded", self.non_folded),
            ("orientation_perfect", self.orientation_perfect),
            ("incompressible(cert)", self.incompressible),
        ]
        return "; ".join(f"{name}={'yes' if ok else 'NO'}" for name, ok in flags)


class AdmissibleSurface:
    """A validated transverse admissible surface over a cellulated surface."""

    def __init__(
        self,
        target: TwoComplex,
        chain: EdgeChain,
        vpieces: dict,
        hpieces: dict,
        fpieces: dict,
        assignments=None,
        homotopy=None,
        incompressible=True,
        relaxed_boundary=False,
    ):
        self.target = target
        self.chain = chain
        self.vpieces = {k: vpieces[k] for k in sorted(vpieces)}
        self.hpieces = {k: hpieces[k] for k in sorted(hpieces)}
        self.fpieces = {k: fpieces[k] for k in sorted(fpieces)}
        self.homotopy = {f: c for f, c in (homotopy or {}).items() if c}
        self.relaxed = bool(relaxed_boundary) or bool(self.homotopy)
        self.incompressible = bool(incompressible)
        self._validate_target()
        self._validate_pieces()
        self._assemble()
        self._validate_surface()
        self._extract_circuits()
        self._resolve_assignments(assignments)
        self._validate_boundary_words()
        self._cross_checks()

    # -- validation ------------------------------------------------------

    def _validate_target(self):
        cx = self.target
        report = surface_check(cx)
        if not report.is_surface:
            raise SurfaceError(f"target is not a surface: {report.witnesses}")
        totals = {}
        for f, word in cx.faces.items():
            for e, sign in word:
                totals[e] = totals.get(e, 0) + sign
        bset = boundary_subcomplex(cx).edge_set
        for e, total in totals.items():
            expected_interior = 0 if e not in bset else None
            if e in bset:
                if total not in (1, -1):
                    raise SurfaceError("target words are not coherently oriented")
            elif total != 0:
                raise SurfaceError(
                    "target words are not coherently oriented: "
                    f"edge {cx.name('e', e)} has signed incidence {total}"
                )

    def _validate_pieces(self):
        cx = self.target
        for vid, vp in self.vpieces.items():
            if vp.vertex not in cx.vertices:
                raise SurfaceError(f"vertex disc {vid} maps to unknown vertex")
            if not vp.slots:
                raise SurfaceError(f"vertex disc {vid} has no slots")
        for hid, hp in self.hpieces.items():
            if hp.edge not in cx.edges:
                raise SurfaceError(f"handle {hid} maps to unknown edge")
            if len(hp.longs) != 2:
                raise SurfaceError(f"handle {hid} must have two long sides")
            for which, (vpid, j) in (("s", hp.src), ("t", hp.tgt)):
                if vpid not in self.vpieces:
                    raise SurfaceError(f"handle {hid} end on unknown vertex disc")
                vp = self.vpieces[vpid]
                if not (0 <= j < len(vp.slots)):
                    raise SurfaceError(f"handle {hid} end on missing slot")
                if vp.slots[j] != ("h", hid, which):
                    raise SurfaceError(
                        f"handle {hid} {which}-end and slot {j} of disc {vpid} "
                        "are not mutual"
                    )
                want = cx.edges[hp.edge][0 if which == "s" else 1]
                if vp.vertex != want:
                    raise SurfaceError(
                        f"handle {hid} {which}-end sits on a disc over the wrong vertex"
                    )
        for vid, vp in self.vpieces.items():
            for j, slot in enumerate(vp.slots):
                if slot == FREE:
                    continue
                kind, hid, which = slot
                if kind != "h" or hid not in self.hpieces:
                    raise SurfaceError(f"disc {vid} slot {j} references a missing handle")
                end = self.hpieces[hid].src if which == "s" else self.hpieces[hid].tgt
                if end != (vid, j):
                    raise SurfaceError(
                        f"disc {vid} slot {j} and handle {hid} are not mutual"
                    )
        for fid, fp in self.fpieces.items():
            if fp.face not in cx.faces:
                raise SurfaceError(f"cellular disc {fid} maps to unknown face")
            if fp.sign not in (1, -1):
                raise SurfaceError(f"cellular disc {fid} has bad sign")
            word = cx.faces[fp.face]
            if len(fp.sides) != len(word):
                raise SurfaceError(
                    f"cellular disc {fid} must have {len(word)} sides"
                )
            for k, (hid, li) in enumerate(fp.sides):
                if hid not in self.hpieces or li not in (0, 1):
                    raise SurfaceError(f"cellular disc {fid} side {k} reference invalid")
                hp = self.hpieces[hid]
                if hp.edge != word[k][0]:
                    raise SurfaceError(
                        f"cellular disc {fid} side {k} glued to a handle over the wrong edge"
                    )
                if hp.longs[li] != ("f", fid, k):
                    raise SurfaceError(
                        f"cellular disc {fid} side {k} and handle {hid} long {li} "
                        "are not mutual"
                    )
                psign = polygon_sign(fp, word, k)
                if required_long_index(psign) != li:
                    raise SurfaceError(
                        f"orientation inconsistency: disc {fid} side {k} "
                        f"(polygon sign {psign}) cannot glue to long {li}"
                    )
        for hid, hp in self.hpieces.items():
            for li, ref in enumerate(hp.longs):
                if ref == FREE:
                    continue
                kind, fid, k = ref
                if kind != "f" or fid not in self.fpieces:
                    raise SurfaceError(f"handle {hid} long {li} references missing disc")
                if self.fpieces[fid].sides[k] != (hid, li):
                    raise SurfaceError(
                        f"handle {hid} long {li} and disc {fid} side {k} are not mutual"
                    )

    def _assemble(self):
        """Build the surface as a TwoComplex with one face per piece."""
        vertices = []
        vertex_ix = {}
        for vid, vp in self.vpieces.items():
            for j in range(len(vp.slots)):
                vertex_ix[(vid, j)] = len(vertices)
                vertices.append((vid, j))

        edges = {}
        edge_names = []
        edge_ix = {}

        def add_edge(name, a, b):
            edge_ix[name] = len(edge_names)
            edges[len(edge_names)] = (vertex_ix[a], vertex_ix[b])
            edge_names.append(name)

        for vid, vp in self.vpieces.items():
            m = len(vp.slots)
            for j in range(m):
                add_edge(("slot", vid, j), (vid, j), (vid, (j + 1) % m))
        for hid, hp in self.hpieces.items():
            dvid, j = hp.src
            m = len(self.vpieces[dvid].slots)
            s0, s1 = (dvid, j), (dvid, (j + 1) % m)
            dvid2, j2 = hp.tgt
            m2 = len(self.vpieces[dvid2].slots)
            t0, t1 = (dvid2, (j2 + 1) % m2), (dvid2, j2)
            add_edge(("long", hid, 0), s0, t0)
            add_edge(("long", hid, 1), s1, t1)

        faces = {}
        face_names = []

        def add_face(name, word):
            faces[len(face_names)] = tuple((edge_ix[e], s) for e, s in word)
            face_names.append(name)

        for vid, vp in self.vpieces.items():
            add_face(("vd", vid), [(("slot", vid, j), 1) for j in range(len(vp.slots))])
        for hid, hp in self.hpieces.items():
            svp, sj = hp.src
            tvp, tj = hp.tgt
            add_face(
                ("hd", hid),
                [
                    (("long", hid, 0), 1),
                    (("slot", tvp, tj), -1),
                    (("long", hid, 1), -1),
                    (("slot", svp, sj), -1),
                ],
            )
        for fid, fp in self.fpieces.items():
            word = self.target.faces[fp.face]
            letters = []
            for k in polygon_order(fp, len(word)):
                hid, li = fp.sides[k]
                letters.append((("long", hid, li), polygon_sign(fp, word, k)))
            add_face(("cd", fid), letters)

        names = {}
        for (vid, j), ix in vertex_ix.items():
            names[("v", ix)] = f"p.{vid}.{j}"
        for name, ix in edge_ix.items():
            names[("e", ix)] = ".".join(str(x) for x in name)
        for i, name in enumerate(face_names):
            names[("f", i)] = ".".join(str(x) for x in name)

        try:
            self.complex = TwoComplex(range(len(vertices)), edges, faces, names)
        except ComplexError as exc:
            raise SurfaceError(f"pieces do not assemble: {exc}") from exc
        self._edge_ix = edge_ix
        self._face_names = face_names
        self._vertex_ix = vertex_ix

    def _validate_surface(self):
        cxs = self.complex
        report = surface_check(cxs)
        if not report.is_surface:
            raise SurfaceError(f"assembled complex is not a surface: {report.witnesses}")
        # coherent orientation: the all-ones 2-chain must be a relative cycle
        totals = {}
        for _f, word in cxs.faces.items():
            for e, sign in word:
                totals[e] = totals.get(e, 0) + sign
        free_items = set()
        for vid, vp in self.vpieces.items():
            for j, slot in enumerate(vp.slots):
                if slot == FREE:
                    free_items.add(("slot", vid, j))
        for hid, hp in self.hpieces.items():
            for li, ref in enumerate(hp.longs):
                if ref == FREE:
                    free_items.add(("long", hid, li))
        self._free_items = free_items
        self._bdry_dir = {}
        for name, ix in self._edge_ix.items():
            total = totals.get(ix, 0)
            if name in free_items:
                if total not in (1, -1):
                    raise SurfaceError(
                        f"orientation inconsistency at free item {name}"
                    )
                self._bdry_dir[name] = total
            elif total != 0:
                raise SurfaceError(f"orientation inconsistency at glued item {name}")
        bset = boundary_subcomplex(cxs).edge_set
        expected = {self._edge_ix[name] for name in free_items}
        if bset != expected:
            raise SurfaceError("boundary does not match the free items")

    def _extract_circuits(self):
        """Walk the induced boundary orientation into circuits."""
        cxs = self.complex
        start_of = {}
        for name, direction in self._bdry_dir.items():
            ix = self._edge_ix[name]
            s, t = cxs.edges[ix]
            tail = s if direction == 1 else t
            if tail in start_of:
                raise SurfaceError("boundary is not a union of circles")
            start_of[tail] = (name, direction)
        circuits = []
        used = set()
        for name in sorted(self._bdry_dir, key=str):
            if name in used:
                continue
            items = []
            word = []
            cur = name
            while cur not in used:
                used.add(cur)
                direction = self._bdry_dir[cur]
                items.append((*cur, direction))
                if cur[0] == "long":
                    hid = cur[1]
                    word.append((self.hpieces[hid].edge, direction))
                ix = self._edge_ix[cur]
                s, t = cxs.edges[ix]
                head = t if direction == 1 else s
                cur = start_of[head][0]
            circuits.append((tuple(items), tuple(word)))
        circuits.sort(key=lambda c: min(c[0]))
        self._raw_circuits = circuits

    def _resolve_assignments(self, assignments):
        circle_words = self.chain.circle_words()
        resolved = []
        if assignments is None:
            for items, word in self._raw_circuits:
                if not word:
                    resolved.append(Circuit(items, word, None, 0))
                    continue
                if self.relaxed:
                    raise SurfaceError(
                        "homotoped boundaries need explicit circuit assignments"
                    )
                match = _match_circle(word, circle_words)
                if match is None:
                    raise SurfaceError(
                        f"boundary word {word} matches no circle of the chain"
                    )
                resolved.append(Circuit(items, word, match[0], match[1]))
        else:
            by_anchor = {}
            for anchor, circle, degree in assignments:
                by_anchor[tuple(anchor)] = (circle, degree)
            for items, word in self._raw_circuits:
                found = None
                for item in items:
                    if item[:-1] in by_anchor:
                        if found is not None and found != by_anchor[item[:-1]]:
                            raise SurfaceError("conflicting assignments on one circuit")
                        found = by_anchor[item[:-1]]
                if found is None:
                    if word:
                        raise SurfaceError(f"circuit {items[0]} has no assignment")
                    resolved.append(Circuit(items, word, None, 0))
                else:
                    circle, degree = found
                    if word and degree == 0 and not self.relaxed:
                        # without a homotopy certificate a lettered circuit
                        # must wind at least once around its circle
                        raise SurfaceError("lettered circuit assigned degree 0")
                    resolved.append(Circuit(items, word, circle, degree))
        for circ in resolved:
            if circ.circle is not None and not (
                0 <= circ.circle < len(circle_words)
            ):
                raise SurfaceError(f"assignment to unknown circle {circ.circle}")
        self.circuits = tuple(resolved)

    def _validate_boundary_words(self):
        circle_words = self.chain.circle_words()
        if not self.relaxed:
            for circ in self.circuits:
                if not circ.word:
                    self._check_constant_circuit(circ)
                    continue
                u = circle_words[circ.circle]
                if not _word_is_power(circ.word, u, circ.degree):
                    raise SurfaceError(
                        f"boundary word mismatch with chain: {circ.word} is not "
                        f"circle {circ.circle} to the power {circ.degree}"
                    )
        # global identity: total boundary chain = degrees . circles + d(homotopy)
        lhs = {}
        for circ in self.circuits:
            for e, sign in circ.word:
                lhs[e] = lhs.get(e, 0) + sign
            if circ.circle is not None:
                u = circle_words[circ.circle]
                for e, sign in u:
                    lhs[e] = lhs.get(e, 0) - circ.degree * sign
        for f, c in self.homotopy.items():
            if f not in self.target.faces:
                raise SurfaceError("homotopy certificate uses an unknown face")
            for e, sign in self.target.faces[f]:
                lhs[e] = lhs.get(e, 0) - c * sign
        if any(v != 0 for v in lhs.values()):
            raise SurfaceError(
                "boundary words do not match the chain, even up to the "
                "homotopy certificate"
            )

    def _check_constant_circuit(self, circ):
        vertices = {self.vpieces[item[1]].vertex for item in circ.items}
        if len(vertices) != 1:
            raise SurfaceError("letterless circuit touching several vertices")
        v = vertices.pop()
        if not self.chain.terms:
            return
        for _coeff, loop in self.chain.terms:
            for k in range(len(loop)):
                if self.target.endpoint(loop[k], 0) == v:
                    return
        raise SurfaceError(
            "constant boundary circuit at a vertex not visited by the chain"
        )

    def _cross_checks(self):
        chi_pieces = len(self.vpieces) - len(self.hpieces) + len(self.fpieces)
        if chi_pieces != self.complex.euler_characteristic():
            raise SurfaceError("piece count and assembled Euler characteristic differ")
        # pushforward boundary agrees with the circuit words
        dz = {}
        for fp in self.fpieces.values():
            for e, sign in self.target.faces[fp.face]:
                dz[e] = dz.get(e, 0) + fp.sign * sign
        words = {}
        for circ in self.circuits:
            for e, sign in circ.word:
                words[e] = words.get(e, 0) + sign
        for e in set(dz) | set(words):
            if dz.get(e, 0) != words.get(e, 0):
                raise SurfaceError("pushforward boundary disagrees with circuit words")

    # -- analyses ----------------------------------------------------------

    def euler_characteristic(self):
        return self.complex.euler_characteristic()

    def piece_components(self):
        """Connected components as sets of piece keys ('v'|'h'|'f', id)."""
        comps = self.complex.connected_components()
        out = []
        for comp in comps:
            pieces = set()
            for kind, ident in comp:
                if kind != "f":
                    continue
                tag, pid = self._face_names[ident][0], self._face_names[ident][1]
                pieces.add(({"vd": "v", "hd": "h", "cd": "f"}[tag], pid))
            out.append(pieces)
        return out

    def component_euler(self):
        """Euler characteristic per component, in piece_components order."""
        out = []
        for comp in self.piece_components():
            v = sum(1 for kind, _ in comp if kind == "v")
            h = sum(1 for kind, _ in comp if kind == "h")
            f = sum(1 for kind, _ in comp if kind == "f")
            out.append(v - h + f)
        return out

    def reduced_euler(self):
        return sum(min(0, chi) for chi in self.component_euler())

    def degree_vector(self):
        degs = [0] * len(self.chain.terms)
        for circ in self.circuits:
            if circ.circle is not None:
                degs[circ.circle] += circ.degree
        return degs

    def uniform_degree(self):
        """The common circle degree n, or None when degrees differ."""
        degs = self.degree_vector()
        if not degs:
            return None
        return degs[0] if all(d == degs[0] for d in degs) else None

    def two_chain(self):
        out = {}
        for fp in self.fpieces.values():
            out[fp.face] = out.get(fp.face, 0) + fp.sign
        return {f: c for f, c in out.items() if c}

    def pushforward_class(self):
        """(two-chain, class coordinates in H2(S, c), cone) of the surface."""
        cone = cone_complex(self.target, self.chain.terms)
        x = self.two_chain()
        for f, c in self.homotopy.items():
            x[f] = x.get(f, 0) - c
        x = {f: c for f, c in x.items() if c}
        coords = cone.class_coords(self.degree_vector(), x)
        if coords is None:
            raise SurfaceError("boundary data inconsistent: no relative cycle")
        return self.two_chain(), coords, cone

    def reduced_class(self):
        """Exact fingerprint of the class in H2(S, c).

        A 2-complex target means the cone has no 3-chains, so the class of
        the surface is literally its cone cycle: the circle winding vector
        together with the 2-chain minus the homotopy certificate.  Two
        surfaces over the same target and chain represent the same class
        iff these agree.
        """
        x = self.two_chain()
        for f, c in self.homotopy.items():
            x[f] = x.get(f, 0) - c
        x = {f: c for f, c in x.items() if c}
        return tuple(self.degree_vector()), tuple(sorted(x.items()))

    def collapse(self):
        """Collapse vertex discs to vertices and handles to edges.

        Returns (bar complex, cell map to the target): vertices are vertex
        discs, edges are handles, faces are cellular discs.
        """
        if getattr(self, "_collapse_cache", None) is not None:
            return self._collapse_cache
        vids = sorted(self.vpieces)
        vix = {vid: i for i, vid in enumerate(vids)}
        hids = sorted(self.hpieces)
        hix = {hid: i for i, hid in enumerate(hids)}
        edges = {}
        for hid in hids:
            hp = self.hpieces[hid]
            edges[hix[hid]] = (vix[hp.src[0]], vix[hp.tgt[0]])
        faces = {}
        fids = sorted(self.fpieces)
        for i, fid in enumerate(fids):
            fp = self.fpieces[fid]
            word = self.target.faces[fp.face]
            letters = []
            for k in polygon_order(fp, len(word)):
                hid, _li = fp.sides[k]
                letters.append((hix[hid], polygon_sign(fp, word, k)))
            faces[i] = tuple(letters)
        names = {}
        for vid, i in vix.items():
            names[("v", i)] = f"vd{vid}"
        for hid, i in hix.items():
            names[("e", i)] = f"hd{hid}"
        for i, fid in enumerate(fids):
            names[("f", i)] = f"cd{fid}"
        bar = TwoComplex(range(len(vids)), edges, faces, names)
        cell_map = {
            ("v", vix[vid]): ("v", self.vpieces[vid].vertex) for vid in vids
        }
        cell_map.update(
            {("e", hix[hid]): ("e", self.hpieces[hid].edge) for hid in hids}
        )
        cell_map.update(
            {("f", i): ("f", self.fpieces[fid].face) for i, fid in enumerate(fids)}
        )
        self._collapse_cache = (bar, cell_map)
        return bar, cell_map

    def bar_link_components(self, vid):
        """Number of link components of a vertex disc in the collapsed complex."""
        cache = getattr(self, "_bar_links_cache", None)
        if cache is None:
            bar, _ = self.collapse()
            vids = sorted(self.vpieces)
            cache = {
                v: len(link_graph(bar, ix).components())
                for ix, v in enumerate(vids)
            }
            self._bar_links_cache = cache
        return cache[vid]

    def standard_form_report(self) -> StandardFormReport:
        witnesses = {}
        comps = self.piece_components()
        chis = self.component_euler()
        bad = [i for i, chi in enumerate(chis) if chi > 0]
        disc_sphere_free = not bad
        if bad:
            witnesses["disc_sphere"] = [sorted(comps[i]) for i in bad]

        per_circle = {}
        for circ in self.circuits:
            if circ.circle is not None and circ.degree:
                per_circle.setdefault(circ.circle, []).append(circ.degree)
        monotone = True
        for circle, degs in per_circle.items():
            if any(d > 0 for d in degs) and any(d < 0 for d in degs):
                monotone = False
                witnesses.setdefault("monotone", []).append(circle)

        bar, _ = self.collapse()
        vids = sorted(self.vpieces)
        connected_links = True
        for ix, vid in enumerate(vids):
            ncomp = len(link_graph(bar, ix).components())
            if ncomp > 1:
                connected_links = False
                witnesses.setdefault("disconnected_link", []).append(vid)

        non_folded = True
        for comp in comps:
            signs = {self.fpieces[pid].sign for kind, pid in comp if kind == "f"}
            if len(signs) > 1:
                non_folded = False
                witnesses.setdefault("folded_component", []).append(sorted(comp))

        by_face = {}
        for fid, fp in self.fpieces.items():
            by_face.setdefault(fp.face, set()).add(fp.sign)
        orientation_perfect = True
        for face, signs in by_face.items():
            if len(signs) > 1:
                orientation_perfect = False
                witnesses.setdefault("orientation_mixed_face", []).append(face)

        report = StandardFormReport(
            transverse=True,
            disc_sphere_free=disc_sphere_free,
            monotone=monotone,
            connected_links=connected_links,
            non_folded=non_folded,
            orientation_perfect=orientation_perfect,
            incompressible=self.incompressible,
            witnesses=witnesses,
        )
        # orientation-perfect surfaces with connected links cannot be folded:
        # adjacent discs of opposite sign share a target face
        if report.orientation_perfect and report.connected_links:
            assert report.non_folded, "perfect orientation with connected links must be non-folded"
        return report

    def image_cells(self):
        """Cells of the target hit by the surface, closed under boundaries."""
        cells = set()
        for vp in self.vpieces.values():
            cells.add(("v", vp.vertex))
        for hp in self.hpieces.values():
            cells.add(("e", hp.edge))
        for fp in self.fpieces.values():
            cells.add(("f", fp.face))
        return cells

    def assignment_list(self):
        """Anchor-based assignment entries reproducing self.circuits."""
        out = []
        for circ in self.circuits:
            if circ.circle is not None:
                out.append((circ.items[0][:-1], circ.circle, circ.degree))
        return out

    def with_pieces(
        self,
        vpieces=None,
        hpieces=None,
        fpieces=None,
        chain=None,
        assignments=None,
        homotopy=None,
        target=None,
    ) -> "AdmissibleSurface":
        """Rebuild (and fully revalidate) with some parts replaced."""
        return AdmissibleSurface(
            target if target is not None else self.target,
            chain if chain is not None else self.chain,
            vpieces if vpieces is not None else self.vpieces,
            hpieces if hpieces is not None else self.hpieces,
            fpieces if fpieces is not None else self.fpieces,
            assignments=assignments,
            homotopy=homotopy if homotopy is not None else self.homotopy,
            incompressible=self.incompressible,
            relaxed_boundary=self.relaxed,
        )

    def __repr__(self):
        return (
            f"AdmissibleSurface({len(self.vpieces)} vertex discs, "
            f"{len(self.hpieces)} handles, {len(self.fpieces)} cellular discs, "
            f"chi={self.euler_characteristic()})"
        )


def _match_circle(word, circle_words):
    for i, u in enumerate(circle_words):
        if not u or len(word) % len(u):
            continue
        d = len(word) // len(u)
        if _word_is_power(word, u, d):
            return i, d
        if _word_is_power(word, u, -d):
            return i, -d
    return None


def _word_is_power(word, u, degree):
    if degree == 0 or not u:
        return False
    if degree > 0:
        target = tuple(u) * degree
    else:
        target = word_inverse(tuple(u)) * (-degree)
    if len(word) != len(target):
        return False
    return tuple(word) in cyclic_rotations(target)


# -- canonical decomposition of an embedded subsurface ----------------------


def subsurface_as_admissible(
    target: TwoComplex,
    cells,
    chain: EdgeChain,
    sign=1,
    incompressible=True,
) -> AdmissibleSurface:
    """The inclusion of a subsurface as a transverse admissible surface.

    cells: the cell set of the subsurface (must be closed and a surface).
    Every face is covered by one cellular disc carrying ``sign``; for
    sign = -1 the mirror surface traverses the chain backwards.
    """
    if sign not in (1, -1):
        raise SurfaceError("sign must be +1 or -1")
    sub_vertices = sorted(i for k, i in cells if k == "v")
    sub_edges = sorted(i for k, i in cells if k == "e")
    sub_faces = sorted(i for k, i in cells if k == "f")
    sub_cx = TwoComplex(
        sub_vertices,
        {e: target.edges[e] for e in sub_edges},
        {f: target.faces[f] for f in sub_faces},
    )
    report = surface_check(sub_cx)
    if not report.is_surface:
        raise SurfaceError("the chosen cells do not form a surface")

    hid_of_edge = {e: i for i, e in enumerate(sub_edges)}
    vid_of_vertex = {v: i for i, v in enumerate(sub_vertices)}

    # slot order around each vertex = the link walk; the forward walk steps
    # from a half-edge h to the other endpoint of the corner leaving along h
    vp_slots = {}
    slot_index = {}
    for v in sub_vertices:
        lk = link_graph(sub_cx, v)
        succ = {}
        pred = {}
        for (h1, h2), _prov in lk.links:
            # corner (s_i, s_{i+1}): h1 = inverse of the incoming side,
            # h2 = the outgoing side; the walk visits h2 then h1
            key, val = (h2, h1) if sign == 1 else (h1, h2)
            if key in succ:
                raise SurfaceError("branched link in subsurface")
            succ[key] = val
            pred[val] = key
        nodes = sorted(lk.nodes)
        starts = [h for h in nodes if h not in pred]
        order = []
        if starts:
            if len(starts) != 1:
                raise SurfaceError("link walk with several starts")
            cur = starts[0]
        else:
            cur = nodes[0]
        seen = set()
        while cur not in seen:
            order.append(cur)
            seen.add(cur)
            if cur not in succ:
                break
            cur = succ[cur]
        if len(order) != len(nodes):
            raise SurfaceError("link walk does not cover the link")
        slots = []
        for h in order:
            e, s = h
            which = "s" if s == 1 else "t"
            slot_index[(hid_of_edge[e], which)] = (vid_of_vertex[v], len(slots))
            slots.append(("h", hid_of_edge[e], which))
        if starts:
            slots.append(FREE)
        vp_slots[vid_of_vertex[v]] = slots

    vpieces = {
        vid_of_vertex[v]: VPiece(v, tuple(vp_slots[vid_of_vertex[v]]))
        for v in sub_vertices
    }

    # cellular discs and the handle gluing they dictate
    fpieces = {}
    long_refs = {hid_of_edge[e]: [FREE, FREE] for e in sub_edges}
    for i, f in enumerate(sub_faces):
        word = target.faces[f]
        sides = []
        for k, (e, eps) in enumerate(word):
            psign = sign * eps
            li = required_long_index(psign)
            hid = hid_of_edge[e]
            if long_refs[hid][li] != FREE:
                raise SurfaceError("edge side over-glued; cells are not a surface")
            long_refs[hid][li] = ("f", i, k)
            sides.append((hid, li))
        fpieces[i] = FPiece(f, sign, tuple(sides))

    hpieces = {}
    for e in sub_edges:
        hid = hid_of_edge[e]
        hpieces[hid] = HPiece(
            edge=e,
            longs=tuple(long_refs[hid]),
            src=slot_index[(hid, "s")],
            tgt=slot_index[(hid, "t")],
        )

    return AdmissibleSurface(
        target,
        chain,
        vpieces,
        hpieces,
        fpieces,
        incompressible=incompressible,
    )


def disjoint_union(*surfaces) -> AdmissibleSurface:
    """Disjoint union over a common target and chain."""
    first = surfaces[0]
    for s in surfaces[1:]:
        if s.target is not first.target and s.target.faces != first.target.faces:
            raise SurfaceError("disjoint union needs a common target")
        if s.chain != first.chain:
            raise SurfaceError("disjoint union needs a common chain")
    vpieces, hpieces, fpieces = {}, {}, {}
    assignments = []
    homotopy = {}
    voff = hoff = foff = 0
    for s in surfaces:
        vmap = {vid: vid + voff for vid in s.vpieces}
        hmap = {hid: hid + hoff for hid in s.hpieces}
        fmap = {fid: fid + foff for fid in s.fpieces}
        for vid, vp in s.vpieces.items():
            slots = tuple(
                FREE if slot == FREE else ("h", hmap[slot[1]], slot[2])
                for slot in vp.slots
            )
            vpieces[vmap[vid]] = VPiece(vp.vertex, slots)
        for hid, hp in s.hpieces.items():
            longs = tuple(
                FREE if ref == FREE else ("f", fmap[ref[1]], ref[2])
                for ref in hp.longs
            )
            hpieces[hmap[hid]] = HPiece(
                hp.edge,
                longs,
                (vmap[hp.src[0]], hp.src[1]),
                (vmap[hp.tgt[0]], hp.tgt[1]),
            )
        for fid, fp in s.fpieces.items():
            sides = tuple((hmap[hid], li) for hid, li in fp.sides)
            fpieces[fmap[fid]] = FPiece(fp.face, fp.sign, sides)
        for circ in s.circuits:
            if circ.circle is None:
                continue
            kind, ident, rest = circ.items[0][0], circ.items[0][1], circ.items[0][2]
            if kind == "long":
                anchor = ("long", hmap[ident], rest)
            else:
                anchor = ("arc", vmap[ident], rest)
            assignments.append((anchor, circ.circle, circ.degree))
        for f, c in s.homotopy.items():
            homotopy[f] = homotopy.get(f, 0) + c
        voff = max(vpieces, default=-1) + 1
        hoff = max(hpieces, default=-1) + 1
        foff = max(fpieces, default=-1) + 1
    return AdmissibleSurface(
        first.target,
        first.chain,
        vpieces,
        hpieces,
        fpieces,
        assignments=assignments,
        homotopy=homotopy,
        incompressible=all(s.incompressible for s in surfaces),
        relaxed_boundary=any(s.relaxed for s in surfaces),
    )


def infer_chain(target, vpieces, hpieces, fpieces, homotopy=None):
    """Derive a chain and assignments matching a piece description's boundary.

    Builds the assembly, reads the boundary circuit words, merges them into
    chain terms by cyclic equality (a circuit reading the inverse of an
    existing term is assigned degree -1).  Useful for constructing fixtures
    whose boundary words are easier to trace than to write down.
    """
    probe = AdmissibleSurface.__new__(AdmissibleSurface)
    probe.target = target
    probe.chain = EdgeChain(())
    probe.vpieces = {k: vpieces[k] for k in sorted(vpieces)}
    probe.hpieces = {k: hpieces[k] for k in sorted(hpieces)}
    probe.fpieces = {k: fpieces[k] for k in sorted(fpieces)}
    probe.homotopy = dict(homotopy or {})
    probe.incompressible = True
    probe._validate_target()
    probe._validate_pieces()
    probe._assemble()
    probe._validate_surface()
    probe._extract_circuits()
    terms = []
    assignments = []
    for items, word in probe._raw_circuits:
        if not word:
            continue
        for i, loop in enumerate(terms):
            if cyclically_equal(loop, word):
                assignments.append((items[0][:-1], i, 1))
                break
            if cyclically_equal(word_inverse(loop), word):
                assignments.append((items[0][:-1], i, -1))
                break
        else:
            terms.append(tuple(word))
            assignments.append((items[0][:-1], len(terms) - 1, 1))
    chain = EdgeChain.make(target, [(1, w) for w in terms])
    return chain, assignments


def build_with_inferred_chain(target, vpieces, hpieces, fpieces, incompressible=True):
    chain, assignments = infer_chain(target, vpieces, hpieces, fpieces)
    return AdmissibleSurface(
        target,
        chain,
        vpieces,
        hpieces,
        fpieces,
        assignments=assignments,
        incompressible=incompressible,
    )


def derive_vpieces(target, hpieces, fpieces):
    """Vertex discs implied by the cellular discs' corner adjacencies.

    Every polygon corner forces one slot to follow another around a vertex
    disc; the chains and cycles of that successor relation are the vertex
    discs, with one free arc closing each open chain.  Handle ends touching
    no corner become their own two-slot discs (end plus free arc).  Returns
    (vpieces, placement) with placement mapping (handle id, end) to
    (vertex disc id, slot index).
    """
    succ = {}
    pred = {}
    for fid, fp in fpieces.items():
        word = target.faces[fp.face]
        order = polygon_order(fp, len(word))
        for i in range(len(order)):
            hx, lix = fp.sides[order[i]]
            hy, liy = fp.sides[order[(i + 1) % len(order)]]
            start = (hy, "t" if liy == 0 else "s")
            end = (hx, "s" if lix == 0 else "t")
            if start in succ or end in pred:
                raise SurfaceError("conflicting corner adjacencies")
            succ[start] = end
            pred[end] = start
    tokens = [(hid, end) for hid in sorted(hpieces) for end in ("s", "t")]
    vertex_of = {}
    for hid, end in tokens:
        s, t = target.edges[hpieces[hid].edge]
        vertex_of[(hid, end)] = s if end == "s" else t
    vpieces = {}
    placement = {}
    seen = set()
    vid = 0
    for tok in tokens:
        if tok in seen or tok in pred:
            continue
        chain = [tok]
        seen.add(tok)
        while chain[-1] in succ:
            nxt = succ[chain[-1]]
            if nxt in seen:
                raise SurfaceError("corner adjacency chain crosses itself")
            chain.append(nxt)
            seen.add(nxt)
        slots = [("h", h, e) for h, e in chain] + [FREE]
        _register_vpiece(vpieces, placement, vertex_of, vid, chain, slots)
        vid += 1
    for tok in tokens:
        if tok in seen:
            continue
        cyc = [tok]
        seen.add(tok)
        while succ[cyc[-1]] != tok:
            cyc.append(succ[cyc[-1]])
            seen.add(cyc[-1])
        slots = [("h", h, e) for h, e in cyc]
        _register_vpiece(vpieces, placement, vertex_of, vid, cyc, slots)
        vid += 1
    return vpieces, placement


def _register_vpiece(vpieces, placement, vertex_of, vid, chain, slots):
    verts = {vertex_of[t] for t in chain}
    if len(verts) != 1:
        raise SurfaceError("corner chain mixes vertices")
    for j, tok in enumerate(chain):
        placement[tok] = (vid, j)
    vpieces[vid] = VPiece(verts.pop(), tuple(slots))
