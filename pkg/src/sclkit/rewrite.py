"""Rewriting moves on transverse admissible surfaces.

All moves return new surfaces (full revalidation included) plus log
entries.  The surgery engine works on a global successor map over slot
tokens: every vertex disc contributes a cyclic list of tokens (handle ends
and free arcs); gluing two mirrored polygon corners is the cross-splice

    succ(t1), succ(t2)  :=  succ(t2), succ(t1)

and vertex discs are recovered as the cycles of the final map.  Handle
pairs whose freed long sides become glued to each other fuse end to end
into single handles.

Boundary words are only changed by the link-connection move; it records a
2-chain certificate (the faces the boundary was pushed across) so that the
class in H2(S, c) is computed from an honest relative cycle and can be
asserted unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .complexes import (
    ComplexError,
    TwoComplex,
    boundary_subcomplex,
    link_graph,
    surface_check,
)
from .exactlin import solve_q
from .homology import boundary_matrices, homology
from .surfaces import (
    FREE,
    AdmissibleSurface,
    FPiece,
    HPiece,
    SurfaceError,
    VPiece,
    polygon_order,
    polygon_sign,
    required_long_index,
)
from .words import EdgeChain, canonical_rotation, word_inverse


class MoveError(RuntimeError):
    pass


# -- move log ----------------------------------------------------------------


def _metrics(surface: AdmissibleSurface):
    pos = sum(1 for fp in surface.fpieces.values() if fp.sign == 1)
    neg = sum(1 for fp in surface.fpieces.values() if fp.sign == -1)
    links = sum(
        surface.bar_link_components(vid) - 1 for vid in surface.vpieces
    )
    return {
        "chi_minus": surface.reduced_euler(),
        "degrees": tuple(surface.degree_vector()),
        "pos": pos,
        "neg": neg,
        "link_excess": links,
    }


@dataclass
class MoveEntry:
    move: str
    args: str
    before: dict
    after: dict
    note: str = ""

    def line(self):
        b, a = self.before, self.after
        out = (
            f"move {self.move} {self.args} ; "
            f"chi_minus {b['chi_minus']} -> {a['chi_minus']} ; "
            f"n {list(b['degrees'])} -> {list(a['degrees'])} ; "
            f"fpieces +{b['pos']}/-{b['neg']} -> +{a['pos']}/-{a['neg']} ; "
            f"link_excess {b['link_excess']} -> {a['link_excess']}"
        )
        if self.note:
            out += f" ; {self.note}"
        return out


@dataclass
class MoveLog:
    entries: list = field(default_factory=list)

    def record(self, move, args, before, after, note=""):
        self.entries.append(MoveEntry(move, args, before, after, note))

    def text(self):
        return "\n".join(e.line() for e in self.entries) + ("\n" if self.entries else "")


def _carry_assignments(old: AdmissibleSurface, new_raw_words, old_circuits=None):
    """Match new circuit words against old circuits to carry (circle, degree).

    Both moves that use this keep every boundary word intact, so matching by
    cyclic word classes is faithful; ties are resolved in order.
    """
    circuits = list(old_circuits if old_circuits is not None else old.circuits)
    pool = [(canonical_rotation(c.word), c.circle, c.degree) for c in circuits]
    out = []
    for items, word in new_raw_words:
        if not word:
            out.append(None)
            continue
        key = canonical_rotation(word)
        for i, (k, circle, degree) in enumerate(pool):
            if k == key:
                out.append((circle, degree))
                pool.pop(i)
                break
        else:
            raise MoveError("cannot carry a circuit assignment across the move")
    return out


# -- the token surgery engine ------------------------------------------------


class _Tokens:
    """Cyclic slot structure of all vertex discs as one successor map."""

    def __init__(self, surface: AdmissibleSurface):
        self.succ = {}
        self.vertex = {}
        self.kind = {}  # token -> ("h", hid, end) | ("free",)
        self.free_n = 0
        for vid, vp in surface.vpieces.items():
            toks = []
            for j, slot in enumerate(vp.slots):
                if slot == FREE:
                    tok = ("free", vid, j)
                    self.kind[tok] = FREE
                else:
                    tok = ("h", slot[1], slot[2])
                    self.kind[tok] = slot
                self.vertex[tok] = vp.vertex
                toks.append(tok)
            for j, tok in enumerate(toks):
                self.succ[tok] = toks[(j + 1) % len(toks)]

    def handle_token(self, hid, end):
        return ("h", hid, end)

    def new_free(self, vertex):
        tok = ("free+", self.free_n)
        self.free_n += 1
        self.kind[tok] = FREE
        self.vertex[tok] = vertex
        self.succ[tok] = tok
        return tok

    def add_handle_token(self, hid, end, vertex):
        tok = ("h", hid, end)
        self.kind[tok] = ("h", hid, end)
        self.vertex[tok] = vertex
        return tok

    def cross_splice(self, t1, t2):
        self.succ[t1], self.succ[t2] = self.succ[t2], self.succ[t1]

    def delete(self, tok):
        # only valid on self-looped or chained-out tokens
        del self.succ[tok]
        del self.kind[tok]
        del self.vertex[tok]

    def fuse(self, a, b, new_tok):
        """Replace the consecutive pair a -> b by a single token."""
        if self.succ.get(a) != b:
            raise MoveError("tokens to fuse are not adjacent")
        nxt = self.succ[b]
        prev = next(t for t, s in self.succ.items() if s == a)
        self.kind[new_tok] = new_tok
        self.vertex[new_tok] = self.vertex[a]
        for t in (a, b):
            del self.succ[t]
            del self.kind[t]
            del self.vertex[t]
        if prev == b:
            # the pair was a whole two-slot disc boundary
            self.succ[new_tok] = new_tok
        else:
            self.succ[prev] = new_tok
            self.succ[new_tok] = nxt

    def cycles(self):
        seen = set()
        out = []
        for tok in sorted(self.succ, key=str):
            if tok in seen:
                continue
            cyc = []
            cur = tok
            while cur not in seen:
                seen.add(cur)
                cyc.append(cur)
                cur = self.succ[cur]
            out.append(cyc)
        return out

    def rebuild_vpieces(self):
        """Vertex discs from the cycles; returns (vpieces, slot index map)."""
        vpieces = {}
        where = {}
        for vid, cyc in enumerate(self.cycles()):
            verts = {self.vertex[t] for t in cyc}
            if len(verts) != 1:
                raise MoveError("surgery produced a vertex disc over several vertices")
            slots = []
            for j, tok in enumerate(cyc):
                slot = self.kind[tok]
                slots.append(slot)
                if slot != FREE:
                    where[(slot[1], slot[2])] = (vid, j)
            vpieces[vid] = VPiece(verts.pop(), tuple(slots))
        return vpieces, where


def _face_corner_tokens(surface: AdmissibleSurface, fid, k):
    """(gap token, end token) of the disc's corner at face-word corner k.

    The corner between polygon-consecutive sides X then Y satisfies
    succ(start slot of Y) = end slot of X, and the gap after the start slot
    is the corner point.  A side on long0 is traversed negatively (it starts
    at the handle's tgt end), a side on long1 positively, so the start slot
    of Y is its handle's tgt end for long0 and src end for long1, and the
    end slot of X is the src end for long0 and tgt end for long1.  For a
    disc of sign -1 the polygon runs through the word backwards, swapping
    the roles of the two sides at the corner.
    """
    fp = surface.fpieces[fid]
    word = surface.target.faces[fp.face]
    deg = len(word)
    if fp.sign == 1:
        x_pos, y_pos = k, (k + 1) % deg
    else:
        x_pos, y_pos = (k + 1) % deg, k
    hx, lix = fp.sides[x_pos]
    hy, liy = fp.sides[y_pos]
    gap_tok = ("h", hy, "t" if liy == 0 else "s")
    end_tok = ("h", hx, "s" if lix == 0 else "t")
    return gap_tok, end_tok


def _rebuild(
    surface: AdmissibleSurface,
    tokens: _Tokens,
    hpieces,
    fpieces,
    chain=None,
    homotopy=None,
    extra_note=None,
    carry_from=None,
):
    vpieces, where = tokens.rebuild_vpieces()
    fixed = {}
    for hid, hp in hpieces.items():
        if (hid, "s") not in where or (hid, "t") not in where:
            raise MoveError("handle lost an end during surgery")
        fixed[hid] = HPiece(hp.edge, hp.longs, where[(hid, "s")], where[(hid, "t")])
    probe = AdmissibleSurface.__new__(AdmissibleSurface)
    probe.target = surface.target
    probe.chain = chain if chain is not None else surface.chain
    probe.vpieces = vpieces
    probe.hpieces = {k: fixed[k] for k in sorted(fixed)}
    probe.fpieces = {k: fpieces[k] for k in sorted(fpieces)}
    probe.homotopy = {f: c for f, c in (homotopy if homotopy is not None else surface.homotopy).items() if c}
    probe.relaxed = surface.relaxed or bool(probe.homotopy)
    probe.incompressible = surface.incompressible
    probe._validate_target()
    probe._validate_pieces()
    probe._assemble()
    probe._validate_surface()
    probe._extract_circuits()
    carried = _carry_assignments(
        carry_from if carry_from is not None else surface, probe._raw_circuits
    )
    assignments = []
    for (items, word), carry in zip(probe._raw_circuits, carried):
        if carry is not None:
            assignments.append((items[0][:-1], carry[0], carry[1]))
    return AdmissibleSurface(
        probe.target,
        probe.chain,
        probe.vpieces,
        probe.hpieces,
        probe.fpieces,
        assignments=assignments,
        homotopy=probe.homotopy,
        incompressible=probe.incompressible,
        relaxed_boundary=getattr(probe, "relaxed", False),
    )


# -- disc and sphere removal -------------------------------------------------


def _without_components(surface: AdmissibleSurface, dead_indices):
    comps = surface.piece_components()
    dead_pieces = set()
    for i in dead_indices:
        dead_pieces |= comps[i]
    if len(dead_pieces) == sum(len(c) for c in comps):
        raise MoveError("refusing to remove every component")
    vpieces = {k: v for k, v in surface.vpieces.items() if ("v", k) not in dead_pieces}
    hpieces = {k: v for k, v in surface.hpieces.items() if ("h", k) not in dead_pieces}
    fpieces = {k: v for k, v in surface.fpieces.items() if ("f", k) not in dead_pieces}
    assignments = []
    for circ in surface.circuits:
        if circ.circle is None:
            continue
        item = circ.items[0]
        owner = ("h", item[1]) if item[0] == "long" else ("v", item[1])
        if owner in dead_pieces:
            continue
        assignments.append((item[:-1], circ.circle, circ.degree))
    homotopy = surface.homotopy
    if homotopy:
        words = {}
        for circ in surface.circuits:
            item = circ.items[0]
            owner = ("h", item[1]) if item[0] == "long" else ("v", item[1])
            if owner in dead_pieces:
                continue
            for e, sign in circ.word:
                words[e] = words.get(e, 0) + sign
            if circ.circle is not None:
                for e, sign in surface.chain.circle_words()[circ.circle]:
                    words[e] = words.get(e, 0) - circ.degree * sign
        cx = surface.target
        d2, _ = boundary_matrices(cx, "Z")
        sol = solve_q(d2, [words.get(e, 0) for e in cx.edges])
        if sol is None:
            raise MoveError("removal leaves a boundary with no homotopy certificate")
        fs = list(cx.faces)
        homotopy = {fs[j]: sol[j] for j in range(len(fs)) if sol[j]}
    return AdmissibleSurface(
        surface.target,
        surface.chain,
        vpieces,
        hpieces,
        fpieces,
        assignments=assignments,
        homotopy=homotopy,
        incompressible=surface.incompressible,
        relaxed_boundary=surface.relaxed,
    )


def remove_trivial_components(
    surface: AdmissibleSurface, log: MoveLog | None = None, only_null_class=False
):
    """Drop components with positive Euler characteristic.

    Dropping never changes -chi^-.  A disc or sphere carrying a nonzero
    class in H2(S, c) cannot be dropped: by default that is an error; with
    only_null_class=True such components are kept instead (they can occur
    over simply connected targets, where essential-looking words bound).
    """
    chis = surface.component_euler()
    dead = [i for i, chi in enumerate(chis) if chi > 0]
    if not dead:
        return surface
    before = _metrics(surface)
    old_coords = surface.reduced_class()
    kept_back = []
    while dead:
        try:
            out = _without_components(surface, dead)
            new_coords = out.reduced_class()
        except (MoveError, SurfaceError):
            new_coords = None
        if new_coords == old_coords:
            break
        if not only_null_class:
            raise MoveError(
                "removal would change the class in H2(S, c); refusing to drop "
                "a homologically visible component"
            )
        kept_back.append(dead.pop())
    if not dead:
        return surface
    if out.reduced_euler() != surface.reduced_euler():
        raise MoveError("trivial-component removal changed chi minus")
    if log is not None:
        log.record(
            "remove_trivial_components",
            f"components={dead}" + (f" kept={kept_back}" if kept_back else ""),
            before,
            _metrics(out),
        )
    return out


# -- fold elimination and opposite-disc gluing --------------------------------


def _mirror_surgery(surface: AdmissibleSurface, fid1, fid2, shared_position):
    """Delete two mirrored discs, splicing their remaining side handles.

    shared_position is the word position of the common handle for a fold,
    or None for the gluing of discs in distinct components.  Handles whose
    freed long sides become glued to each other merge in chains; a chain
    closing onto itself would be a circle bundle over an edge, which the
    transverse model cannot express, and is rejected.
    """
    fp1 = surface.fpieces[fid1]
    fp2 = surface.fpieces[fid2]
    word = surface.target.faces[fp1.face]
    deg = len(word)
    if deg < 2:
        raise MoveError("mirror surgery needs a face of degree at least 2")

    shared = None
    if shared_position is not None:
        shared = fp1.sides[shared_position][0]

    tokens = _Tokens(surface)
    # check the corner registry before mutating, then glue every mirrored pair
    pairs = []
    for k in range(deg):
        t1, e1 = _face_corner_tokens(surface, fid1, k)
        t2, e2 = _face_corner_tokens(surface, fid2, k)
        if tokens.succ.get(t1) != e1 or tokens.succ.get(t2) != e2:
            raise MoveError("corner registry out of step with the slot lists")
        pairs.append((t1, t2))
    for t1, t2 in pairs:
        tokens.cross_splice(t1, t2)

    hpieces = dict(surface.hpieces)
    fpieces = {k: v for k, v in surface.fpieces.items() if k not in (fid1, fid2)}

    if shared is not None:
        for end in ("s", "t"):
            tok = tokens.handle_token(shared, end)
            if tokens.succ.get(tok) != tok:
                raise MoveError("shared handle did not close off during the splice")
            tokens.delete(tok)
        del hpieces[shared]

    # handles freed by the deleted discs merge in chains; group them
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for k in range(deg):
        if shared_position is not None and k == shared_position:
            continue
        a_hid = fp1.sides[k][0]
        b_hid = fp2.sides[k][0]
        if a_hid == shared or b_hid == shared:
            raise MoveError("shared handle reused on another position")
        ra, rb = find(a_hid), find(b_hid)
        if ra == rb:
            raise MoveError(
                "freed handles close into a circle bundle; not supported"
            )
        parent[max(ra, rb)] = min(ra, rb)

    groups = {}
    for hid in parent:
        groups.setdefault(find(hid), []).append(hid)

    next_id = max(hpieces, default=-1) + 1
    side_map = {}
    for root in sorted(groups):
        members = sorted(groups[root])
        edge = surface.hpieces[members[0]].edge
        if any(surface.hpieces[h].edge != edge for h in members):
            raise MoveError("merged handles sit over different edges")
        survivors = []
        for h in members:
            for li, ref in enumerate(surface.hpieces[h].longs):
                if ref == FREE:
                    survivors.append((h, li, FREE))
                elif ref[1] not in (fid1, fid2):
                    survivors.append((h, li, ref))
        if len(survivors) != 2:
            raise MoveError("merged handle chain with unexpected free sides")
        cid = next_id
        next_id += 1
        longs = [None, None]
        taken = set()
        for h, li, ref in survivors:
            if ref == FREE:
                continue
            other = surface.fpieces[ref[1]]
            oword = surface.target.faces[other.face]
            want = required_long_index(polygon_sign(other, oword, ref[2]))
            if want in taken:
                raise MoveError("merged handle cannot host both survivors")
            taken.add(want)
            longs[want] = ref
            side_map[(h, li)] = (cid, want)
        for h, li, ref in survivors:
            if ref != FREE:
                continue
            want = next(i for i in (0, 1) if longs[i] is None)
            taken.add(want)
            longs[want] = FREE
        hpieces[cid] = HPiece(edge, tuple(longs), None, None)
        for h in members:
            del hpieces[h]
        # fuse the members' end tokens, one run per end label
        for label in ("s", "t"):
            toks = {("h", h, label) for h in members}
            heads = [
                t
                for t in toks
                if all(tokens.succ.get(o) != t for o in toks if o != t)
            ]
            if len(heads) == 1:
                head = heads[0]
            elif not heads and len(toks) > 0:
                head = min(toks)  # the run is a whole disc boundary by itself
            else:
                raise MoveError("merged handle ends are not a single run")
            run = [head]
            while len(run) < len(members):
                nxt = tokens.succ.get(run[-1])
                if nxt not in toks:
                    raise MoveError("merged handle ends are not contiguous")
                run.append(nxt)
            new_tok = ("h", cid, label)
            prev = next(t for t, s in tokens.succ.items() if s == run[0])
            nxt = tokens.succ[run[-1]]
            tokens.kind[new_tok] = new_tok
            tokens.vertex[new_tok] = tokens.vertex[run[0]]
            if prev == run[-1]:
                tokens.succ[new_tok] = new_tok
            else:
                tokens.succ[prev] = new_tok
                tokens.succ[new_tok] = nxt
            for t in run:
                del tokens.succ[t]
                del tokens.kind[t]
                del tokens.vertex[t]

    # rewrite surviving references through the merges
    fpieces = {
        fid: FPiece(
            fp.face,
            fp.sign,
            tuple(side_map.get(side, side) for side in fp.sides),
        )
        for fid, fp in fpieces.items()
    }
    patched = {}
    for hid, hp in hpieces.items():
        longs = []
        for ref in hp.longs:
            if ref == FREE or ref is None:
                longs.append(ref if ref is not None else FREE)
            elif ref[1] in (fid1, fid2):
                raise MoveError("a surviving handle still references a deleted disc")
            else:
                longs.append(ref)
        patched[hid] = HPiece(hp.edge, tuple(longs), hp.src, hp.tgt)
    return tokens, patched, fpieces


def eliminate_fold(surface: AdmissibleSurface, fid1, fid2, log: MoveLog | None = None):
    """Delete two adjacent cellular discs of opposite orientation.

    The discs must map to the same face and share a handle through the same
    word position; the elimination splices their remaining side handles
    pairwise, preserving the Euler characteristic, the pushforward 2-chain
    and the boundary.
    """
    if fid1 not in surface.fpieces or fid2 not in surface.fpieces:
        raise MoveError("unknown cellular disc")
    fp1 = surface.fpieces[fid1]
    fp2 = surface.fpieces[fid2]
    if fp1.face != fp2.face:
        raise MoveError("fold elimination needs discs over the same face")
    if fp1.sign + fp2.sign != 0:
        raise MoveError("fold elimination needs discs of opposite orientation")
    if fp1.sign == -1:
        fid1, fid2, fp1, fp2 = fid2, fid1, fp2, fp1
    shared_positions = [
        k
        for k in range(len(fp1.sides))
        if fp1.sides[k][0] == fp2.sides[k][0]
    ]
    if not shared_positions:
        raise MoveError("discs are not adjacent through a common handle")
    if len(shared_positions) > 1:
        raise MoveError("discs adjacent through several handles; not supported")
    k = shared_positions[0]

    before = _metrics(surface)
    old_chain = surface.two_chain()
    old_words = sorted(canonical_rotation(c.word) for c in surface.circuits)

    tokens, hpieces, fpieces = _mirror_surgery(surface, fid1, fid2, k)
    out = _rebuild(surface, tokens, hpieces, fpieces)

    delta = out.euler_characteristic() - surface.euler_characteristic()
    if delta < 0 or delta % 2:
        raise MoveError("fold elimination changed the Euler characteristic")
    # delta > 0 happens when a corner splice pinches a vertex disc, which
    # the surgery resolves by the compression the pinch makes available;
    # each compression raises the Euler characteristic by 2 and preserves
    # the pushforward class, so the estimate only improves
    if out.two_chain() != old_chain:
        raise MoveError("fold elimination changed the pushforward 2-chain")
    new_words = sorted(canonical_rotation(c.word) for c in out.circuits)
    if new_words != old_words:
        raise MoveError("fold elimination changed the boundary words")
    if log is not None:
        note = f"with {delta // 2} compressions" if delta else ""
        log.record(
            "eliminate_fold",
            f"discs=({fid1},{fid2}) face={fp1.face}",
            before,
            _metrics(out),
            note=note,
        )
    return out


def glue_opposite_discs(surface: AdmissibleSurface, fid1, fid2, log: MoveLog | None = None):
    """Remove opposite-orientation discs in distinct components and glue
    the freed boundary circles; raises -chi^- by exactly 2."""
    fp1 = surface.fpieces[fid1]
    fp2 = surface.fpieces[fid2]
    if fp1.face != fp2.face or fp1.sign + fp2.sign != 0:
        raise MoveError("gluing needs opposite discs over one face")
    if fp1.sign == -1:
        fid1, fid2, fp1, fp2 = fid2, fid1, fp2, fp1
    comps = surface.piece_components()
    where1 = next(i for i, c in enumerate(comps) if ("f", fid1) in c)
    where2 = next(i for i, c in enumerate(comps) if ("f", fid2) in c)
    if where1 == where2:
        raise MoveError("gluing needs discs in distinct components")
    if any(fp1.sides[k][0] == fp2.sides[k][0] for k in range(len(fp1.sides))):
        raise MoveError("discs in distinct components cannot share a handle")

    before = _metrics(surface)
    tokens, hpieces, fpieces = _mirror_surgery(surface, fid1, fid2, None)
    out = _rebuild(surface, tokens, hpieces, fpieces)
    if out.reduced_euler() != surface.reduced_euler() - 2:
        raise MoveError("gluing did not raise -chi^- by exactly 2")
    if log is not None:
        log.record(
            "glue_opposite_discs",
            f"discs=({fid1},{fid2}) face={fp1.face}",
            before,
            _metrics(out),
        )
    return out


# -- link connection -----------------------------------------------------------


def _walk_link_until(surface, v, start_half, role, stop_half):
    """Corners crossed and intermediate half-edges from start to stop.

    Walking with a fixed lookup role is walking the link circle in a fixed
    direction: each crossed corner uses the current half-edge in that role
    and hands over its other endpoint.  Positive-policy walks look up
    corners by their outgoing side (role h2), negative walks by the
    incoming one.
    """
    lk = link_graph(surface.target, v)
    by_role = {"h1": {}, "h2": {}}
    for (h1, h2), prov in lk.links:
        if h1 in by_role["h1"] or h2 in by_role["h2"]:
            raise MoveError("target vertex link is not a simple circle")
        by_role["h1"][h1] = ((h1, h2), prov)
        by_role["h2"][h2] = ((h1, h2), prov)
    corners = []
    halves = []
    cur = start_half
    for _ in range(len(lk.links) + 1):
        entry = by_role[role].get(cur)
        if entry is None:
            raise MoveError("link walk fell off the circle")
        (h1, h2), prov = entry
        corners.append(prov)
        nxt = h1 if role == "h2" else h2
        if nxt == stop_half:
            return corners, halves
        halves.append(nxt)
        cur = nxt
    raise MoveError("link walk did not reach the far handle")


def _carry_by_items(old: AdmissibleSurface, new_raw):
    """Carry (circle, degree) across a move that reroutes boundary arcs.

    Circuits exchange arcs, merge and split, so individual windings are not
    determined by item overlap; only the total winding per overlap cluster
    is.  All circuits in a cluster must sit on one circle; the cluster's
    total degree goes to its longest new circuit and the rest get 0 (the
    honest per-circuit windings are not recoverable once the boundary is
    tracked through a homotopy certificate, and the class computation only
    uses the totals).
    """
    old_all = list(old.circuits)
    old_sets = [frozenset(c.items) for c in old_all]
    new_sets = [frozenset(items) for items, _word in new_raw]
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb, key=str)] = min(ra, rb, key=str)

    item_owner = {}
    for i, s in enumerate(old_sets):
        for item in s:
            item_owner[item] = i
    for j, s in enumerate(new_sets):
        for item in s:
            if item in item_owner:
                union(("old", item_owner[item]), ("new", j))

    clusters = {}
    for i in range(len(old_all)):
        clusters.setdefault(find(("old", i)), [[], []])[0].append(i)
    for j in range(len(new_raw)):
        clusters.setdefault(find(("new", j)), [[], []])[1].append(j)

    out = [None] * len(new_raw)
    spare = []
    for key in sorted(clusters, key=str):
        olds, news = clusters[key]
        lettered_old = [i for i in olds if old_all[i].circle is not None]
        lettered_new = [j for j in news if new_raw[j][1]]
        if not lettered_old and not lettered_new:
            continue
        if not lettered_old:
            spare.extend(lettered_new)
            continue
        circles = {old_all[i].circle for i in lettered_old}
        if len(circles) > 1:
            raise MoveError("move merged circuits of different circles")
        circle = circles.pop()
        total = sum(old_all[i].degree for i in lettered_old)
        if not lettered_new:
            if total:
                raise MoveError("winding lost with its boundary circuits")
            continue
        main = max(lettered_new, key=lambda j: (len(new_raw[j][1]), -j))
        for j in lettered_new:
            out[j] = (circle, total if j == main else 0)
    if spare:
        raise MoveError("new boundary circuits with no ancestry")
    return out


def connect_link(surface: AdmissibleSurface, vid, policy="positive", log: MoveLog | None = None, separator=0):
    """Connect the collapsed link of a vertex disc by pushing the boundary
    across a fan of target faces.

    The vertex disc must map to an interior vertex of the target and have a
    disconnected collapsed link.  A free stretch of its boundary between two
    link components is replaced by a path of new cellular discs, all of the
    orientation chosen by ``policy``, together with the fresh handles and
    vertex discs the crossed faces require.  The boundary is moved by a
    homotopy, so the class in H2(S, c) is unchanged; the faces crossed are
    added to the homotopy certificate.
    """
    if policy not in ("positive", "negative"):
        raise MoveError("policy must be 'positive' or 'negative'")
    s_pol = 1 if policy == "positive" else -1
    if vid not in surface.vpieces:
        raise MoveError("unknown vertex disc")
    vp = surface.vpieces[vid]
    v = vp.vertex
    if surface.bar_link_components(vid) <= 1:
        raise MoveError("vertex disc already has a connected link")
    lk = link_graph(surface.target, v)
    if lk.classify() != "circle":
        raise MoveError(
            "vertex disc maps to a boundary vertex; thicken the target first"
        )

    before = _metrics(surface)
    old_coords = surface.reduced_class()
    old_link_excess = before["link_excess"]

    # covered gaps of the vertex disc: gap after slot j hosts a corner
    covered_after = set()
    for fid, fp in surface.fpieces.items():
        word = surface.target.faces[fp.face]
        for k in range(len(word)):
            covered_after.add(_face_corner_tokens(surface, fid, k)[0])

    slots = vp.slots
    m = len(slots)

    def is_handle(j):
        return slots[j] != FREE

    def gap_covered(j):
        # gap between slot j and slot j+1
        if slots[j] == FREE or slots[(j + 1) % m] == FREE:
            return False
        tok = ("h", slots[j][1], slots[j][2])
        return tok in covered_after

    # separators between bar-link runs: free slots or uncovered gaps
    runs = []
    run = []
    start = None
    for j in range(m):
        if is_handle(j):
            start = j
            break
    if start is None:
        raise MoveError("vertex disc has no handles at all")
    j = start
    for _ in range(m):
        if is_handle(j):
            run.append(j)
            if not gap_covered(j):
                runs.append(run)
                run = []
        j = (j + 1) % m
    if run:
        runs.append(run)
    if len(runs) < 2:
        raise MoveError("could not find two link components to join")

    # the separator after run i joins run i to run i+1
    if not 0 <= separator < len(runs):
        raise MoveError("separator index out of range")
    jE = runs[separator][-1]
    jS = runs[(separator + 1) % len(runs)][0]
    hE_kind, hE_hid, hE_end = slots[jE]
    hS_kind, hS_hid, hS_end = slots[jS]
    hE_h = surface.hpieces[hE_hid]
    hS_h = surface.hpieces[hS_hid]
    half_E = (hE_h.edge, 1 if hE_end == "s" else -1)
    half_S = (hS_h.edge, 1 if hS_end == "s" else -1)
    xE = 1 if hE_end == "s" else 0
    xS = 0 if hS_end == "s" else 1
    if hE_h.longs[xE] != FREE or hS_h.longs[xS] != FREE:
        raise MoveError("separator long sides are unexpectedly glued")

    role = "h2" if s_pol == 1 else "h1"
    corners, halves = _walk_link_until(surface, v, half_E, role, half_S)

    # build the new pieces
    hpieces = dict(surface.hpieces)
    fpieces = dict(surface.fpieces)
    next_h = max(hpieces, default=-1) + 1
    next_f = max(fpieces, default=-1) + 1

    n_handles = []  # intermediate handles over the crossed half-edges
    for half in halves:
        hid = next_h
        next_h += 1
        hpieces[hid] = HPiece(half[0], [None, None], None, None)
        n_handles.append(hid)

    new_fids = []
    new_handle_sides = {}  # hid -> {li: ("f", fid, k)}
    new_faces_crossed = []
    # when the arrival side cannot take the far handle's free long (both ends
    # of one handle flank the stretch, say), the last disc leaves on a fresh
    # handle instead; the link does not reconnect, but the first disc folds
    # against the handle's other side and the next fold elimination makes
    # the progress, as in the alternation that proves termination
    fallback = False
    last = len(corners) - 1
    word_last = surface.target.faces[corners[last][0]]
    if s_pol == 1:
        leave_last = corners[last][1]
    else:
        leave_last = (corners[last][1] + 1) % len(word_last)
    li_last = required_long_index(s_pol * word_last[leave_last][1])
    if li_last != xS or hS_hid == hE_hid:
        fallback = True
    for t, (face, kidx) in enumerate(corners):
        word = surface.target.faces[face]
        deg = len(word)
        fid = next_f
        next_f += 1
        new_fids.append(fid)
        new_faces_crossed.append(face)
        if s_pol == 1:
            enter_pos, leave_pos = (kidx + 1) % deg, kidx
        else:
            enter_pos, leave_pos = kidx, (kidx + 1) % deg
        sides = [None] * deg
        for q in range(deg):
            ps = s_pol * word[q][1]
            li = required_long_index(ps)
            if q == enter_pos:
                hid = hE_hid if t == 0 else n_handles[t - 1]
                if t == 0 and li != xE:
                    raise MoveError("walk direction does not fit the free side")
            elif q == leave_pos:
                if t == len(corners) - 1 and not fallback:
                    hid = hS_hid
                elif t == len(corners) - 1:
                    hid = next_h
                    next_h += 1
                    hpieces[hid] = HPiece(word[q][0], [None, None], None, None)
                else:
                    hid = n_handles[t]
            else:
                hid = next_h
                next_h += 1
                hpieces[hid] = HPiece(word[q][0], [None, None], None, None)
            sides[q] = (hid, li)
            new_handle_sides.setdefault(hid, {})[li] = ("f", fid, q)
        fpieces[fid] = FPiece(face, s_pol, tuple(sides))

    # finalise the long sides of touched handles
    for hid, per_side in new_handle_sides.items():
        if hid in (hE_hid, hS_hid):
            hp = hpieces[hid]
            longs = list(hp.longs)
            for li, ref in per_side.items():
                if longs[li] != FREE:
                    raise MoveError("new disc glued onto an occupied long side")
                longs[li] = ref
            hpieces[hid] = HPiece(hp.edge, tuple(longs), hp.src, hp.tgt)
        else:
            hp = hpieces[hid]
            longs = [per_side.get(0, FREE), per_side.get(1, FREE)]
            hpieces[hid] = HPiece(hp.edge, tuple(longs), None, None)

    # token surgery from the corner equations of the new discs
    tokens = _Tokens(surface)
    target = surface.target
    new_token_set = set()
    for hid in new_handle_sides:
        if hid in (hE_hid, hS_hid):
            continue
        hp = hpieces[hid]
        src_v, tgt_v = target.edges[hp.edge]
        tokens.add_handle_token(hid, "s", src_v)
        tokens.add_handle_token(hid, "t", tgt_v)
        new_token_set.add(("h", hid, "s"))
        new_token_set.add(("h", hid, "t"))

    overrides = {}
    for fid in new_fids:
        fp = fpieces[fid]
        word = target.faces[fp.face]
        order = polygon_order(fp, len(word))
        for i in range(len(order)):
            x_pos = order[i]
            y_pos = order[(i + 1) % len(order)]
            hx, lix = fp.sides[x_pos]
            hy, liy = fp.sides[y_pos]
            x_tok = ("h", hx, "s" if lix == 0 else "t")
            y_tok = ("h", hy, "t" if liy == 0 else "s")
            if y_tok in overrides:
                raise MoveError("conflicting corner equations")
            overrides[y_tok] = x_tok

    incoming = {}
    for x, y in overrides.items():
        if y in incoming:
            raise MoveError("conflicting corner equations")
        incoming[y] = x

    consumed = []
    processed = set()

    def chain_from(head):
        chain = [head]
        while overrides.get(chain[-1]) in new_token_set:
            chain.append(overrides[chain[-1]])
        return chain

    # existing -> existing overrides (a single corner closing the free run)
    for x, y in list(overrides.items()):
        if x not in new_token_set and y not in new_token_set:
            cur = tokens.succ[x]
            guard = 0
            while cur != y:
                if tokens.kind[cur] != FREE:
                    raise MoveError("free run to replace contains glued slots")
                consumed.append(cur)
                nxt = tokens.succ[cur]
                tokens.delete(cur)
                cur = nxt
                guard += 1
                if guard > len(tokens.succ) + 2:
                    raise MoveError("degenerate link connection; unsupported")
            tokens.succ[x] = y

    heads = [
        n
        for n in sorted(new_token_set, key=str)
        if incoming.get(n) not in new_token_set
    ]
    for head in heads:
        if head in processed:
            continue
        chain = chain_from(head)
        processed.update(chain)
        start_anchor = incoming.get(head)
        tail = chain[-1]
        end_anchor = overrides.get(tail)
        for a, b in zip(chain, chain[1:]):
            tokens.succ[a] = b
        if start_anchor is not None and end_anchor is not None:
            cur = tokens.succ[start_anchor]
            guard = 0
            while cur != end_anchor:
                if tokens.kind[cur] != FREE:
                    raise MoveError("free run to replace contains glued slots")
                consumed.append(cur)
                nxt = tokens.succ[cur]
                tokens.delete(cur)
                cur = nxt
                guard += 1
                if guard > len(tokens.succ) + 2:
                    raise MoveError("degenerate link connection; unsupported")
            tokens.succ[start_anchor] = head
            tokens.succ[tail] = end_anchor
        elif end_anchor is not None:
            prev = next(t for t, s in tokens.succ.items() if s == end_anchor)
            tokens.succ[prev] = head
            tokens.succ[tail] = end_anchor
        elif start_anchor is not None:
            w = tokens.succ[start_anchor]
            tokens.succ[start_anchor] = head
            tokens.succ[tail] = w
        else:
            free = tokens.new_free(tokens.vertex[head])
            tokens.succ[tail] = free
            tokens.succ[free] = head

    homotopy = dict(surface.homotopy)
    for face in new_faces_crossed:
        homotopy[face] = homotopy.get(face, 0) + s_pol

    out = _rebuild_with_items(
        surface, tokens, hpieces, fpieces, homotopy=homotopy
    )

    if out.reduced_class() != old_coords:
        raise MoveError("link connection changed the class in H2(S, c)")
    new_excess = _metrics(out)["link_excess"]
    if not fallback and new_excess != old_link_excess - 1:
        raise MoveError("link connection did not lower the link excess by one")
    if fallback and _find_fold_pair(out) is None:
        raise MoveError("fallback link connection did not produce a fold")
    if policy == "positive" and _metrics(out)["neg"] != before["neg"]:
        raise MoveError("positive link connection changed the negative disc count")
    if log is not None:
        log.record(
            "connect_link",
            f"vdisc={vid} policy={policy} faces={new_faces_crossed}",
            before,
            _metrics(out),
        )
    return out


def _rebuild_with_items(surface, tokens, hpieces, fpieces, chain=None, homotopy=None):
    vpieces, where = tokens.rebuild_vpieces()
    fixed = {}
    for hid, hp in hpieces.items():
        if (hid, "s") not in where or (hid, "t") not in where:
            raise MoveError("handle lost an end during surgery")
        fixed[hid] = HPiece(hp.edge, tuple(hp.longs), where[(hid, "s")], where[(hid, "t")])
    probe = AdmissibleSurface.__new__(AdmissibleSurface)
    probe.target = surface.target
    probe.chain = chain if chain is not None else surface.chain
    probe.vpieces = vpieces
    probe.hpieces = {k: fixed[k] for k in sorted(fixed)}
    probe.fpieces = {k: fpieces[k] for k in sorted(fpieces)}
    probe.homotopy = {
        f: c
        for f, c in (homotopy if homotopy is not None else surface.homotopy).items()
        if c
    }
    probe.relaxed = surface.relaxed or bool(probe.homotopy)
    probe.incompressible = surface.incompressible
    probe._validate_target()
    probe._validate_pieces()
    probe._assemble()
    probe._validate_surface()
    probe._extract_circuits()
    carried = _carry_by_items(surface, probe._raw_circuits)
    assignments = []
    for (items, word), carry in zip(probe._raw_circuits, carried):
        if carry is not None:
            assignments.append((items[0][:-1], carry[0], carry[1]))
    return AdmissibleSurface(
        probe.target,
        probe.chain,
        probe.vpieces,
        probe.hpieces,
        probe.fpieces,
        assignments=assignments,
        homotopy=probe.homotopy,
        incompressible=probe.incompressible,
        relaxed_boundary=getattr(probe, "relaxed", False),
    )


# -- boundary thickening -------------------------------------------------------


def thicken_boundary(cx: TwoComplex) -> TwoComplex:
    """Glue a cellulated annulus collar to each boundary circuit.

    The result is homeomorphic to the input (same Euler characteristic and
    homology, asserted); every old boundary vertex becomes interior.  Old
    cells keep their ids, so complexes, chains and surfaces over the old
    cellulation remain valid over the new one.
    """
    report = surface_check(cx)
    if not report.is_surface:
        raise MoveError("thickening needs a cellulated surface")
    bsub = boundary_subcomplex(cx)
    if not bsub.edge_set:
        return cx
    totals = {}
    for _f, word in cx.faces.items():
        for e, sign in word:
            totals[e] = totals.get(e, 0) + sign

    vertices = list(cx.vertices)
    edges = dict(cx.edges)
    faces = dict(cx.faces)
    names = dict(cx.names)

    next_v = max(cx.vertices, default=-1) + 1
    next_e = max(cx.edges, default=-1) + 1
    next_f = max(cx.faces, default=-1) + 1

    v_prime = {}
    rung = {}
    for v in sorted(bsub.vertex_set):
        v_prime[v] = next_v
        names[("v", next_v)] = cx.name("v", v) + "'"
        vertices.append(next_v)
        next_v += 1
    for v in sorted(bsub.vertex_set):
        rung[v] = next_e
        edges[next_e] = (v, v_prime[v])
        names[("e", next_e)] = "|" + cx.name("v", v)
        next_e += 1
    for e in sorted(bsub.edge_set):
        u, w = cx.edges[e]
        e_prime = next_e
        edges[e_prime] = (v_prime[u], v_prime[w])
        names[("e", e_prime)] = cx.name("e", e) + "'"
        next_e += 1
        beta = totals.get(e, 0)
        if beta == 1:
            word = ((e, -1), (rung[u], 1), (e_prime, 1), (rung[w], -1))
        elif beta == -1:
            word = ((e, 1), (rung[w], 1), (e_prime, -1), (rung[u], -1))
        else:
            raise MoveError("boundary edge with unexpected orientation count")
        faces[next_f] = word
        names[("f", next_f)] = "collar_" + cx.name("e", e)
        next_f += 1

    out = TwoComplex(vertices, edges, faces, names)
    rep = surface_check(out)
    assert rep.is_surface, "thickening broke the surface"
    assert out.euler_characteristic() == cx.euler_characteristic()
    assert homology(out, "Q").ranks == homology(cx, "Q").ranks
    for v in bsub.vertex_set:
        assert v not in rep.boundary_vertices, "old boundary vertex still on the boundary"
    return out


def retarget(surface: AdmissibleSurface, new_target: TwoComplex) -> AdmissibleSurface:
    """Re-read a surface over a target whose cellulation was extended."""
    chain = EdgeChain.make(new_target, surface.chain.terms)
    return AdmissibleSurface(
        new_target,
        chain,
        surface.vpieces,
        surface.hpieces,
        surface.fpieces,
        assignments=surface.assignment_list(),
        homotopy=surface.homotopy,
        incompressible=surface.incompressible,
        relaxed_boundary=surface.relaxed,
    )


# -- standard form -------------------------------------------------------------


def _find_fold_pairs(surface: AdmissibleSurface):
    out = []
    for fid1 in sorted(surface.fpieces):
        fp1 = surface.fpieces[fid1]
        for fid2 in sorted(surface.fpieces):
            if fid2 <= fid1:
                continue
            fp2 = surface.fpieces[fid2]
            if fp2.face != fp1.face or fp2.sign + fp1.sign != 0:
                continue
            shared = [
                k
                for k in range(len(fp1.sides))
                if fp1.sides[k][0] == fp2.sides[k][0]
            ]
            if len(shared) == 1:
                out.append((fid1, fid2))
    return out


def _find_fold_pair(surface: AdmissibleSurface):
    pairs = _find_fold_pairs(surface)
    return pairs[0] if pairs else None


def _find_disconnected_vdisc(surface: AdmissibleSurface):
    for vid in sorted(surface.vpieces):
        if surface.bar_link_components(vid) > 1:
            return vid
    return None


def make_standard_form(surface: AdmissibleSurface, log: MoveLog | None = None):
    """Alternate link connection (positive policy) and fold elimination.

    Terminates because the potential (negative discs, total link excess,
    disc count) drops lexicographically at every move; the result is disc-
    and sphere-free, has connected links and is non-folded, with
    -chi^-/n never increased and the class in H2(S, c) preserved.
    """
    log = log if log is not None else MoveLog()
    s = remove_trivial_components(surface, log, only_null_class=True)
    start_ratio = _ratio(s)
    guard = 0
    while True:
        guard += 1
        if guard > 40 + 14 * (len(s.fpieces) + len(s.vpieces) + 2):
            raise MoveError("standard-form loop exceeded its potential bound")
        vids = [v for v in sorted(s.vpieces) if s.bar_link_components(v) > 1]
        if vids:
            if any(
                link_graph(s.target, s.vpieces[v].vertex).classify() != "circle"
                for v in vids
            ):
                before = _metrics(s)
                new_target = thicken_boundary(s.target)
                s = retarget(s, new_target)
                if log is not None:
                    log.record(
                        "thicken_boundary",
                        "",
                        before,
                        _metrics(s),
                        note="target re-cellulated; collar added",
                    )
                continue
            done = False
            last_exc = None
            for vid in vids:
                for sep in range(len(s.vpieces[vid].slots)):
                    try:
                        s = connect_link(s, vid, "positive", log, separator=sep)
                        done = True
                    except MoveError as exc:
                        last_exc = exc
                        continue
                    break
                if done:
                    break
            if not done:
                raise MoveError(f"no link connection applies: {last_exc}")
            continue
        pairs = _find_fold_pairs(s)
        if pairs:
            done = False
            last_exc = None
            for pair in pairs:
                try:
                    s = eliminate_fold(s, pair[0], pair[1], log)
                    done = True
                    break
                except MoveError as exc:
                    last_exc = exc
            if not done:
                raise MoveError(f"no fold elimination applies: {last_exc}")
            s = remove_trivial_components(s, log, only_null_class=True)
            continue
        break
    report = s.standard_form_report()
    if not report.connected_links:
        raise MoveError("standard form loop stalled")
    if not report.disc_sphere_free:
        # class-carrying discs or spheres can survive over simply connected
        # targets; anything removable has been removed already
        chis = s.component_euler()
        assert any(chi > 0 for chi in chis)
    if not report.non_folded:
        # with connected links, a mixed component must contain an adjacent
        # opposite pair over one face; its absence means a fold pair through
        # several handles, which this implementation does not rewrite
        raise MoveError("component remains folded without an eligible fold pair")
    assert _ratio(s) <= start_ratio, "standard form worsened -chi^-/n"
    return s, log


def _ratio(surface: AdmissibleSurface):
    n = surface.uniform_degree()
    if not n:
        return Fraction(0)
    return Fraction(-surface.reduced_euler(), n)


# -- covers and asymptotic promotion -------------------------------------------


def _cover_cocycle(surface: AdmissibleSurface):
    """Integer 1-cocycle on the assembled complex pairing primitively with
    the first homology of every component.

    The cyclic cover of degree N glued along such a cocycle (reduced mod N)
    is connected over each component.  Cocycles are kernel vectors of the
    transposed face incidence matrix; the primitive pairing combination is
    extracted with a Smith normal form of the pairing matrix against a
    spanning-tree loop basis.
    """
    from .exactlin import kernel_z, smith_normal_form

    cxs = surface.complex
    es = list(cxs.edges)
    eix = {e: i for i, e in enumerate(es)}
    rows = []
    for f in cxs.faces:
        row = [0] * len(es)
        for e, sign in cxs.faces[f]:
            row[eix[e]] += sign
        rows.append(row)
    cocycles = kernel_z(rows) if rows else []

    cocycle = [0] * len(es)
    for comp in cxs.connected_components():
        comp_vertices = [i for kind, i in comp if kind == "v"]
        comp_edges = {i for kind, i in comp if kind == "e"}
        if not comp_edges:
            raise MoveError("component without edges cannot be covered")
        # spanning tree and loop basis
        root = min(comp_vertices)
        tree_parent = {root: None}
        order = [root]
        frontier = [root]
        adj = {}
        for e in comp_edges:
            u, w = cxs.edges[e]
            adj.setdefault(u, []).append((e, w, 1))
            adj.setdefault(w, []).append((e, u, -1))
        tree_edges = set()
        while frontier:
            v = frontier.pop(0)
            for e, w, _d in sorted(adj.get(v, []), key=str):
                if w not in tree_parent:
                    tree_parent[w] = (e, v)
                    tree_edges.add(e)
                    order.append(w)
                    frontier.append(w)
        loops = sorted(comp_edges - tree_edges)
        if not loops:
            raise MoveError("component with trivial first homology; a disc slipped through")
        # potentials along the tree for each candidate cocycle
        pairings = []
        for vec in cocycles:
            theta = {root: 0}
            for v in order[1:]:
                e, parent = tree_parent[v]
                u, w = cxs.edges[e]
                val = vec[eix[e]]
                theta[v] = theta[parent] + (val if w == v else -val)
            row = []
            for e in loops:
                u, w = cxs.edges[e]
                row.append(theta[u] + vec[eix[e]] - theta[w])
            pairings.append(row)
        res = smith_normal_form(pairings)
        if not res.invariant_factors or res.invariant_factors[0] != 1:
            raise MoveError("no primitively pairing cocycle; cover unavailable")
        combo = res.U[0]
        for coeff, vec in zip(combo, cocycles):
            if coeff:
                for e in comp_edges:
                    cocycle[eix[e]] += coeff * vec[eix[e]]
    basis = [{e: vec[eix[e]] for e in es} for vec in cocycles]
    return {e: cocycle[eix[e]] for e in es}, basis


def connected_cover(surface: AdmissibleSurface, n, log: MoveLog | None = None, cocycle=None):
    """Degree n cyclic cover with connected preimage of every component.

    The assembled surface is lifted along a cocycle: the copy k of an edge
    (u, w) runs from (u, k) to (w, k + c(e) mod n), faces lift by partial
    sums, and the piece structure is read back off the lifted cells.
    """
    if n < 1:
        raise MoveError("cover degree must be at least 1")
    if n == 1:
        return surface
    before = _metrics(surface)
    c = cocycle if cocycle is not None else _cover_cocycle(surface)[0]
    cxs = surface.complex

    # lifted faces: for base face f starting at sheet k, the lifted word
    # visits edge copies at sheets given by partial sums of the cocycle
    def lifted_word(f, k):
        out = []
        sheet = k
        for e, sign in cxs.faces[f]:
            if sign == 1:
                out.append((e, sheet, 1))
                sheet = (sheet + c[e]) % n
            else:
                sheet = (sheet - c[e]) % n
                out.append((e, sheet, -1))
        return out

    # who uses each lifted interior edge: (base face kind, base id, sheet, position)
    edge_users = {}
    face_kinds = {}
    for ix, name in enumerate(surface._face_names):
        face_kinds[ix] = name
    for f in cxs.faces:
        for k in range(n):
            for pos, (e, sheet, sign) in enumerate(lifted_word(f, k)):
                edge_users.setdefault((e, sheet), []).append((f, k, pos, sign))

    def pid(base, k):
        return base * n + k

    name_of_edge = {}
    for name, ix in surface._edge_ix.items():
        name_of_edge[ix] = name

    vpieces, hpieces, fpieces = {}, {}, {}
    # handles first: identify their slot and long edge copies
    for hid, hp in surface.hpieces.items():
        base_face = next(
            ix for ix, nm in face_kinds.items() if nm == ("hd", hid)
        )
        for k in range(n):
            word = lifted_word(base_face, k)
            # word: long0 +, slot(tgt) -, long1 -, slot(src) -
            hpieces[pid(hid, k)] = {
                "edge": hp.edge,
                "long0": (word[0][0], word[0][1]),
                "long1": (word[2][0], word[2][1]),
                "slot_t": (word[1][0], word[1][1]),
                "slot_s": (word[3][0], word[3][1]),
                "base": hid,
            }
    lift_of_long = {}
    for key, h in hpieces.items():
        lift_of_long[h["long0"]] = (key, 0)
        lift_of_long[h["long1"]] = (key, 1)
    lift_of_slot_end = {}
    for key, h in hpieces.items():
        lift_of_slot_end.setdefault(h["slot_s"], []).append((key, "s"))
        lift_of_slot_end.setdefault(h["slot_t"], []).append((key, "t"))

    new_vp = {}
    slot_place = {}
    for vid, vp in surface.vpieces.items():
        base_face = next(ix for ix, nm in face_kinds.items() if nm == ("vd", vid))
        for k in range(n):
            word = lifted_word(base_face, k)
            slots = []
            for j, (e, sheet, _sign) in enumerate(word):
                base_slot = vp.slots[j]
                if base_slot == FREE:
                    slots.append(FREE)
                    continue
                users = lift_of_slot_end.get((e, sheet), [])
                match = [
                    (hkey, end)
                    for hkey, end in users
                    if hpieces[hkey]["base"] == base_slot[1] and end == base_slot[2]
                ]
                if len(match) != 1:
                    raise MoveError("cover slot identification failed")
                slots.append(("h", match[0][0], match[0][1]))
                slot_place[(match[0][0], match[0][1])] = (pid(vid, k), j)
            new_vp[pid(vid, k)] = VPiece(vp.vertex, tuple(slots))

    new_fp = {}
    side_ref = {}
    for fid, fp in surface.fpieces.items():
        base_face = next(ix for ix, nm in face_kinds.items() if nm == ("cd", fid))
        word = surface.target.faces[fp.face]
        order = polygon_order(fp, len(word))
        for k in range(n):
            lifted = lifted_word(base_face, k)
            sides = [None] * len(word)
            for i, (e, sheet, _sign) in enumerate(lifted):
                pos = order[i]
                if (e, sheet) not in lift_of_long:
                    raise MoveError("cover long identification failed")
                hkey, li = lift_of_long[(e, sheet)]
                sides[pos] = (hkey, li)
                side_ref[(hkey, li)] = ("f", pid(fid, k), pos)
            new_fp[pid(fid, k)] = FPiece(fp.face, fp.sign, tuple(sides))

    new_hp = {}
    for key, h in hpieces.items():
        longs = []
        for li in (0, 1):
            ref = side_ref.get((key, li))
            base_ref = surface.hpieces[h["base"]].longs[li]
            if base_ref == FREE:
                longs.append(FREE)
            elif ref is None:
                raise MoveError("cover lost a long gluing")
            else:
                longs.append(ref)
        new_hp[key] = HPiece(
            h["edge"],
            tuple(longs),
            slot_place[(key, "s")],
            slot_place[(key, "t")],
        )

    homotopy = {f: n * cval for f, cval in surface.homotopy.items()}
    probe = AdmissibleSurface.__new__(AdmissibleSurface)
    probe.target = surface.target
    probe.chain = surface.chain
    probe.vpieces = {k: new_vp[k] for k in sorted(new_vp)}
    probe.hpieces = {k: new_hp[k] for k in sorted(new_hp)}
    probe.fpieces = {k: new_fp[k] for k in sorted(new_fp)}
    probe.homotopy = {f: cv for f, cv in homotopy.items() if cv}
    probe.relaxed = surface.relaxed or bool(probe.homotopy)
    probe.incompressible = surface.incompressible
    probe._validate_target()
    probe._validate_pieces()
    probe._assemble()
    probe._validate_surface()
    probe._extract_circuits()
    base = {}
    for circ in surface.circuits:
        if circ.circle is None:
            continue
        anchor = circ.items[0]
        base[anchor[:-1]] = (circ.circle, circ.degree)
    assignments = []
    for items, word in probe._raw_circuits:
        if not word:
            continue
        hits = {}
        for item in items:
            if item[0] == "long":
                b = ("long", item[1] // n, item[2])
                if b in base:
                    hits[b] = hits.get(b, 0) + 1
        if not hits:
            raise MoveError("cover circuit without a base anchor")
        b, mult = sorted(hits.items(), key=str)[0]
        circle, degree = base[b]
        assignments.append((items[0][:-1], circle, degree * mult))

    out = AdmissibleSurface(
        probe.target,
        probe.chain,
        probe.vpieces,
        probe.hpieces,
        probe.fpieces,
        assignments=assignments,
        homotopy=probe.homotopy,
        incompressible=probe.incompressible,
    )
    if out.euler_characteristic() != n * surface.euler_characteristic():
        raise MoveError("cover has the wrong Euler characteristic")
    if len(out.piece_components()) != len(surface.piece_components()):
        raise MoveError("cover is not connected over some component")
    if log is not None:
        log.record("connected_cover", f"degree={n}", before, _metrics(out))
    return out



def _disc_collision_free(surface, c, n, fid):
    """Will every lift of this cellular disc have pairwise distinct handles?"""
    cxs = surface.complex
    name_to_face = {name: ix for ix, name in enumerate(surface._face_names)}

    def lifted_sheets(face_ix, k):
        sheets = []
        sheet = k
        for e, sign in cxs.faces[face_ix]:
            if sign == 1:
                sheets.append((e, sheet))
                sheet = (sheet + c[e]) % n
            else:
                sheet = (sheet - c[e]) % n
                sheets.append((e, sheet))
        return sheets

    # handle copy owning each lifted long edge, relative offset per handle
    fp = surface.fpieces[fid]
    long_owner_offset = {}
    for hid in {h for h, _li in fp.sides}:
        hd_ix = name_to_face[("hd", hid)]
        for e, sheet in lifted_sheets(hd_ix, 0):
            long_owner_offset[(hid, e)] = sheet
    cd_ix = name_to_face[("cd", fid)]
    word = surface.target.faces[fp.face]
    order = polygon_order(fp, len(word))
    owners = []
    for i, (e, sheet) in enumerate(lifted_sheets(cd_ix, 0)):
        hid, _li = fp.sides[order[i]]
        rel = long_owner_offset[(hid, e)]
        owners.append((hid, (sheet - rel) % n))
    return len(set(owners)) == len(owners)


def _glue_geometry(surface, c, n, fid):
    """(handle owners, corner host vertex-disc copies) of every lift of a disc.

    Both lists are sheet-offset patterns: shifting the lift shifts every
    entry uniformly, so distinctness is independent of the starting sheet.
    """
    cxs = surface.complex
    name_to_face = {name: ix for ix, name in enumerate(surface._face_names)}
    fp = surface.fpieces[fid]
    word = surface.target.faces[fp.face]
    order = polygon_order(fp, len(word))

    def walk(face_ix, k):
        out = []
        sheet = k
        for e, sign in cxs.faces[face_ix]:
            if sign == 1:
                out.append((e, sheet))
                sheet = (sheet + c[e]) % n
            else:
                sheet = (sheet - c[e]) % n
                out.append((e, sheet))
        return out

    # per relevant handle: sheet offsets of its long and slot edge copies
    hd_walks = {}
    for hid in {h for h, _li in fp.sides}:
        hd_walks[hid] = walk(name_to_face[("hd", hid)], 0)
    vd_walks = {}
    for vid, vp in surface.vpieces.items():
        vd_walks[vid] = walk(name_to_face[("vd", vid)], 0)
    slot_host = {}  # slot edge id -> (vpid, offset inside the vd walk)
    for vid, vp in surface.vpieces.items():
        for (e, sheet) in vd_walks[vid]:
            slot_host[e] = (vid, sheet)

    owners = []
    corner_hosts = []
    lifted = walk(name_to_face[("cd", fid)], 0)
    for i, (e, sheet) in enumerate(lifted):
        pos = order[i]
        hid, li = fp.sides[pos]
        hd = hd_walks[hid]
        # hd word: long0 +, slot_t -, long1 -, slot_s -
        long_rel = hd[0][1] if li == 0 else hd[2][1]
        m_h = (sheet - long_rel) % n
        owners.append((hid, m_h))
        # the corner after this polygon side sits on the slot edge that the
        # next side starts from; its host vertex disc copy comes from the
        # slot edge copy's sheet minus its offset in the vd walk
        nxt = order[(i + 1) % len(order)]
        hid2, li2 = fp.sides[nxt]
        hd2 = hd_walks[hid2]
        # start slot of the next side: tgt end for long0, src end for long1
        slot_letter = hd2[1] if li2 == 0 else hd2[3]
        slot_edge, slot_rel = slot_letter
        # sheet of the next side's long edge copy
        e2, sheet2 = lifted[(i + 1) % len(lifted)]
        long2_rel = hd2[0][1] if li2 == 0 else hd2[2][1]
        m_h2 = (sheet2 - long2_rel) % n
        slot_sheet = (m_h2 + slot_rel) % n
        vpid, vd_rel = slot_host[slot_edge]
        corner_hosts.append((vpid, (slot_sheet - vd_rel) % n))
    return owners, corner_hosts


def _glue_pair_clean(surface, c, n, f1, f2):
    """Will gluing lifts of these discs merge distinct pieces at every step?

    Requires pairwise distinct side handles per disc, and the bipartite
    multigraph pairing the corner host vertex-disc copies must be a forest,
    so every corner splice joins two still-separate vertex discs.
    """
    owners1, hosts1 = _glue_geometry(surface, c, n, f1)
    owners2, hosts2 = _glue_geometry(surface, c, n, f2)
    if len(set(owners1)) != len(owners1) or len(set(owners2)) != len(owners2):
        return False
    deg = len(hosts1)
    # corner k of the positive disc is glued to corner k of the mirror,
    # with the mirror's polygon running backwards through the word
    fp1 = surface.fpieces[f1]
    fp2 = surface.fpieces[f2]
    word = surface.target.faces[fp1.face]
    order1 = polygon_order(fp1, len(word))
    order2 = polygon_order(fp2, len(word))
    by_corner1 = {}
    by_corner2 = {}
    for i in range(deg):
        x1 = order1[i]
        by_corner1[min_corner_key(x1, order1[(i + 1) % deg], deg)] = hosts1[i]
        x2 = order2[i]
        by_corner2[min_corner_key(x2, order2[(i + 1) % deg], deg)] = hosts2[i]
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for key in by_corner1:
        a = ("+",) + by_corner1[key]
        b = ("-",) + by_corner2[key]
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[max(ra, rb, key=str)] = min(ra, rb, key=str)
    return True


def min_corner_key(x, y, deg):
    # face corner between word positions x and y = x+1 (mod deg)
    if (x + 1) % deg == y:
        return x
    if (y + 1) % deg == x:
        return y
    raise MoveError("sides are not word-consecutive")


def _cover_params_for_glue(surface: AdmissibleSurface, n_min):
    """A (cocycle, degree) pair whose cover admits a clean gluing.

    Clean means the two chosen opposite discs lift with pairwise distinct
    side handles and pairwise distinct corner host vertex discs, so the
    glue surgery merges distinct pieces at every step and lowers the Euler
    characteristic by exactly 2.  The search perturbs the primitive cocycle
    by seeded random basis combinations; the bad locus is a finite union of
    hyperplanes, so a hit comes quickly and deterministically.
    """
    import random as _random

    base, basis = _cover_cocycle(surface)
    comps = surface.piece_components()
    comp_of = {}
    for i, comp in enumerate(comps):
        for kind, pid in comp:
            if kind == "f":
                comp_of[pid] = i
    mixed_pairs = []
    by_face = {}
    for fid in sorted(surface.fpieces):
        by_face.setdefault(surface.fpieces[fid].face, []).append(fid)
    for _face, fids in sorted(by_face.items()):
        for f1 in fids:
            for f2 in fids:
                if (
                    surface.fpieces[f1].sign == 1
                    and surface.fpieces[f2].sign == -1
                    and comp_of[f1] != comp_of[f2]
                ):
                    mixed_pairs.append((f1, f2))
    if not mixed_pairs:
        raise MoveError("no cross-component opposite pair to glue")
    max_deg = max(
        len(surface.fpieces[f].sides) for pair in mixed_pairs for f in pair
    )
    rng = _random.Random(20259)
    degrees = [max(n_min, 2 * max_deg + 1)]
    degrees += [degrees[0] + 1, degrees[0] + 2, degrees[0] + 5]
    for n in degrees:
        for attempt in range(800):
            if attempt == 0:
                cand = dict(base)
            else:
                cand = dict(base)
                for vec in basis:
                    t = rng.randrange(0, n)
                    if t:
                        for e, v in vec.items():
                            cand[e] = cand.get(e, 0) + t * v
            hit = None
            for f1, f2 in mixed_pairs:
                if _glue_pair_clean(surface, cand, n, f1, f2):
                    hit = (f1, f2)
                    break
            if hit and _cover_pairing_ok(surface, cand, n):
                return cand, n
    raise MoveError("no cover admits a supported opposite-disc gluing")


def _cover_pairing_ok(surface, c, n):
    """Does the cocycle generate Z/n on the loops of every component?"""
    import math

    cxs = surface.complex
    for comp in cxs.connected_components():
        comp_vertices = [i for kind, i in comp if kind == "v"]
        comp_edges = {i for kind, i in comp if kind == "e"}
        root = min(comp_vertices)
        tree_parent = {root: None}
        order = [root]
        frontier = [root]
        adj = {}
        for e in comp_edges:
            u, w = cxs.edges[e]
            adj.setdefault(u, []).append((e, w))
            adj.setdefault(w, []).append((e, u))
        tree_edges = set()
        while frontier:
            v = frontier.pop(0)
            for e, w in sorted(adj.get(v, []), key=str):
                if w not in tree_parent:
                    tree_parent[w] = (e, v)
                    tree_edges.add(e)
                    order.append(w)
                    frontier.append(w)
        theta = {root: 0}
        for v in order[1:]:
            e, parent = tree_parent[v]
            u, w = cxs.edges[e]
            theta[v] = theta[parent] + (c[e] if w == v else -c[e])
        g = n
        for e in sorted(comp_edges - tree_edges):
            u, w = cxs.edges[e]
            g = math.gcd(g, theta[u] + c[e] - theta[w])
        if g != 1:
            return False
    return True


def _glue_pair_supported(surface, f1, f2):
    used = [h for fid in (f1, f2) for h, _li in surface.fpieces[fid].sides]
    return len(set(used)) == len(used)


def _find_opposite_pair_across_components(surface: AdmissibleSurface):
    comps = surface.piece_components()
    comp_of = {}
    for i, comp in enumerate(comps):
        for kind, pid in comp:
            if kind == "f":
                comp_of[pid] = i
    by_face = {}
    for fid in sorted(surface.fpieces):
        fp = surface.fpieces[fid]
        by_face.setdefault(fp.face, []).append(fid)
    for face in sorted(by_face):
        fids = by_face[face]
        for f1 in fids:
            if surface.fpieces[f1].sign != 1:
                continue
            for f2 in fids:
                if (
                    surface.fpieces[f2].sign == -1
                    and comp_of[f1] != comp_of[f2]
                    and _glue_pair_supported(surface, f1, f2)
                ):
                    return f1, f2
    return None


def promote_orientation_perfect(surface: AdmissibleSurface, eps, log: MoveLog | None = None):
    """Trade +2 of -chi^- against a degree-N cover until no target face
    carries cellular discs of both signs.

    Needs a surface in standard form and a positive rational eps; the final
    ratio satisfies  -chi^-/n  <=  original + (number of components) * 2 eps.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise MoveError("eps must be positive")
    report = surface.standard_form_report()
    if not report.in_standard_form():
        raise MoveError("asymptotic promotion needs a surface in standard form")
    log = log if log is not None else MoveLog()
    n_cover = max(1, -(-1 // eps))  # smallest N with 1/N <= eps
    n_cover = int(n_cover)
    while Fraction(1, n_cover) > eps:
        n_cover += 1
    start_ratio = _ratio(surface)
    components0 = len(surface.piece_components())
    s = surface
    rounds = 0
    while not s.standard_form_report().orientation_perfect:
        rounds += 1
        if rounds > components0 + 1:
            raise MoveError("promotion exceeded its component bound")
        cocycle, n_used = _cover_params_for_glue(s, n_cover)
        s = connected_cover(s, n_used, log, cocycle=cocycle)
        pair = _find_opposite_pair_across_components(s)
        if pair is None:
            raise MoveError("mixed face without a cross-component pair")
        before_chi = s.reduced_euler()
        s = glue_opposite_discs(s, pair[0], pair[1], log)
        assert s.reduced_euler() == before_chi - 2
        s, log = make_standard_form(s, log)
    bound = start_ratio + components0 * 2 * eps
    assert _ratio(s) <= bound, "promotion exceeded the advertised ratio bound"
    if log.entries:
        log.entries[-1].note = (
            f"final ratio {_ratio(s)} within bound {bound} (start {start_ratio})"
        )
    return s, log


def best_connected_component(surface: AdmissibleSurface):
    """The component minimising -chi^-/n, for single-circle monotone surfaces."""
    if len(surface.chain.terms) != 1:
        raise MoveError("component selection needs a single-term chain")
    report = surface.standard_form_report()
    if not report.monotone:
        raise MoveError("component selection needs a monotone surface")
    comps = surface.piece_components()
    chis = surface.component_euler()
    owner = {}
    for i, comp in enumerate(comps):
        for kind, pid in comp:
            owner[(kind, pid)] = i
    degs = [0] * len(comps)
    for circ in surface.circuits:
        if circ.circle is None:
            continue
        item = circ.items[0]
        key = ("h", item[1]) if item[0] == "long" else ("v", item[1])
        degs[owner[key]] += circ.degree
    candidates = [
        (Fraction(-min(0, chis[i]), degs[i]), i)
        for i in range(len(comps))
        if degs[i] > 0
    ]
    if not candidates:
        raise MoveError("no component covers the circle")
    best = min(candidates)[1]
    total_n = surface.uniform_degree()
    if total_n:
        assert min(candidates)[0] <= Fraction(-surface.reduced_euler(), total_n)
    return restrict_to_component(surface, best)


def restrict_to_component(surface: AdmissibleSurface, index):
    comp = surface.piece_components()[index]
    vpieces = {k: v for k, v in surface.vpieces.items() if ("v", k) in comp}
    hpieces = {k: v for k, v in surface.hpieces.items() if ("h", k) in comp}
    fpieces = {k: v for k, v in surface.fpieces.items() if ("f", k) in comp}
    assignments = []
    for circ in surface.circuits:
        if circ.circle is None:
            continue
        item = circ.items[0]
        key = ("h", item[1]) if item[0] == "long" else ("v", item[1])
        if key in comp:
            assignments.append((item[:-1], circ.circle, circ.degree))
    homotopy = surface.homotopy
    if homotopy:
        # re-derive a certificate for the restricted boundary
        words = {}
        for circ in surface.circuits:
            item = circ.items[0]
            key = ("h", item[1]) if item[0] == "long" else ("v", item[1])
            if key not in comp:
                continue
            for e, sign in circ.word:
                words[e] = words.get(e, 0) + sign
            if circ.circle is not None:
                for e, sign in surface.chain.circle_words()[circ.circle]:
                    words[e] = words.get(e, 0) - circ.degree * sign
        cx = surface.target
        es = list(cx.edges)
        d2, _ = boundary_matrices(cx, "Z")
        sol = solve_q(d2, [words.get(e, 0) for e in es])
        if sol is None:
            raise MoveError("restricted boundary has no homotopy certificate")
        fs = list(cx.faces)
        homotopy = {fs[j]: sol[j] for j in range(len(fs)) if sol[j]}
    return AdmissibleSurface(
        surface.target,
        surface.chain,
        vpieces,
        hpieces,
        fpieces,
        assignments=assignments,
        homotopy=homotopy,
        incompressible=surface.incompressible,
        relaxed_boundary=surface.relaxed,
    )
