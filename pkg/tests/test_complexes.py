import random

import pytest

from sclkit.complexes import (
    ComplexError,
    TwoComplex,
    boundary_subcomplex,
    full_subcomplex,
    has_small_links,
    induced_subcomplex,
    link_graph,
    parse_complex,
    print_complex,
    reduced_euler,
    surface_check,
)


def torus():
    return TwoComplex.build(
        ["v"],
        [("a", "v", "v"), ("b", "v", "v")],
        [("f", [("a", 1), ("b", 1), ("a", -1), ("b", -1)])],
    )


def rp2():
    return TwoComplex.build(["v"], [("a", "v", "v")], [("f", [("a", 1), ("a", 1)])])


def disc():
    return TwoComplex.build(
        ["p", "q", "r"],
        [("e1", "p", "q"), ("e2", "q", "r"), ("e3", "r", "p")],
        [("f", [("e1", 1), ("e2", 1), ("e3", 1)])],
    )


def one_holed_genus(g):
    """Genus g surface with one boundary edge c; face [a1,b1]...[ag,bg]c-."""
    edges = []
    word = []
    for i in range(1, g + 1):
        edges += [(f"a{i}", "v", "v"), (f"b{i}", "v", "v")]
        word += [(f"a{i}", 1), (f"b{i}", 1), (f"a{i}", -1), (f"b{i}", -1)]
    edges.append(("c", "v", "v"))
    word.append(("c", -1))
    return TwoComplex.build(["v"], edges, [("f", word)])


def disjoint_union(b1, b2):
    verts = [f"1.{b1.name('v', v)}" for v in b1.vertices] + [
        f"2.{b2.name('v', v)}" for v in b2.vertices
    ]
    edges = [
        (f"1.{b1.name('e', e)}", f"1.{b1.name('v', s)}", f"1.{b1.name('v', t)}")
        for e, (s, t) in b1.edges.items()
    ] + [
        (f"2.{b2.name('e', e)}", f"2.{b2.name('v', s)}", f"2.{b2.name('v', t)}")
        for e, (s, t) in b2.edges.items()
    ]
    faces = [
        (f"1.{b1.name('f', f)}", [(f"1.{b1.name('e', e)}", s) for e, s in word])
        for f, word in b1.faces.items()
    ] + [
        (f"2.{b2.name('f', f)}", [(f"2.{b2.name('e', e)}", s) for e, s in word])
        for f, word in b2.faces.items()
    ]
    return TwoComplex.build(verts, edges, faces)


def test_build_torus():
    t2 = torus()
    assert t2.euler_characteristic() == 0
    assert t2.degree(0) == 4


def test_build_rp2():
    p = rp2()
    assert p.degree(0) == 2
    assert p.side_incidence(0) == 2


def test_build_nonclosing_word():
    with pytest.raises(ComplexError, match="close"):
        TwoComplex.build(
            ["p", "q", "r"],
            [("a", "p", "q"), ("b", "r", "p")],
            [("f", [("a", 1), ("b", 1)])],
        )


def test_build_dangling_edge():
    with pytest.raises(ComplexError, match="dangling"):
        TwoComplex.build(["p"], [("a", "p", "zz")], [])


def test_build_empty_face_word():
    with pytest.raises(ComplexError, match="empty"):
        TwoComplex(["v"], {}, {0: ()})


def test_torus_link_is_single_circle():
    t2 = torus()
    lk = link_graph(t2, 0)
    assert len(lk.nodes) == 4
    assert len(lk.links) == 4
    assert lk.classify() == "circle"
    # independent corner enumeration of the square a b a- b-
    word = [(0, 1), (1, 1), (0, -1), (1, -1)]
    expected = set()
    for k in range(4):
        e1, s1 = word[k]
        e2, s2 = word[(k + 1) % 4]
        expected.add(frozenset({(e1, -s1), (e2, s2)}) if (e1, -s1) != (e2, s2) else frozenset({(e1, -s1)}))
    got = {frozenset({h1, h2}) for (h1, h2), _ in lk.links}
    assert got == expected


def test_disc_links_are_arcs():
    d = disc()
    for v in d.vertices:
        lk = link_graph(d, v)
        assert len(lk.nodes) == 2
        assert len(lk.links) == 1
        assert lk.classify() == "arc"


def test_isolated_vertex_link_empty():
    cx = TwoComplex.build(["v", "w"], [("a", "v", "v")], [])
    assert link_graph(cx, 1).classify() == "empty"


def test_unknown_vertex_link():
    with pytest.raises(ComplexError):
        link_graph(torus(), 99)


def test_small_links_torus():
    ok, witness = has_small_links(torus())
    assert ok and witness is None


def test_small_links_three_squares_on_common_edge():
    verts = ["p", "q"]
    edges = [("m", "p", "q")]
    faces = []
    for i in range(3):
        edges += [(f"x{i}", "q", "p")]
        faces.append((f"f{i}", [("m", 1), (f"x{i}", 1)]))
    cx = TwoComplex.build(verts, edges, faces)
    ok, witness = has_small_links(cx)
    assert not ok
    assert cx.name("e", witness) == "m"


def test_small_links_rp2():
    ok, _ = has_small_links(rp2())
    assert ok
    assert rp2().side_incidence(0) == 2


def test_small_links_matches_link_formulation():
    # both formulations agree on a mixed bag of complexes
    samples = [torus(), rp2(), disc(), one_holed_genus(2)]
    verts = ["p", "q"]
    edges = [("m", "p", "q"), ("x0", "q", "p"), ("x1", "q", "p"), ("x2", "q", "p")]
    faces = [(f"f{i}", [("m", 1), (f"x{i}", 1)]) for i in range(3)]
    samples.append(TwoComplex.build(verts, edges, faces))
    for cx in samples:
        ok, _ = has_small_links(cx)
        link_ok = all(
            link_graph(cx, v).classify() in ("circle", "arc", "point", "union", "empty")
            and all(d <= 2 for d in link_graph(cx, v).node_degrees().values())
            for v in cx.vertices
        )
        assert ok == link_ok


def test_surface_check_torus():
    rep = surface_check(torus())
    assert rep.is_surface
    assert rep.boundary_vertices == ()


def test_surface_check_disc():
    rep = surface_check(disc())
    assert rep.is_surface
    assert set(rep.boundary_vertices) == {0, 1, 2}


def test_surface_check_wedge_of_triangles():
    # two triangles sharing exactly one vertex
    cx = TwoComplex.build(
        ["o", "p", "q", "r", "s"],
        [
            ("a1", "o", "p"), ("a2", "p", "q"), ("a3", "q", "o"),
            ("b1", "o", "r"), ("b2", "r", "s"), ("b3", "s", "o"),
        ],
        [
            ("f1", [("a1", 1), ("a2", 1), ("a3", 1)]),
            ("f2", [("b1", 1), ("b2", 1), ("b3", 1)]),
        ],
    )
    rep = surface_check(cx)
    assert not rep.is_surface
    assert rep.witnesses[0][0] == 0  # the shared vertex


def test_surface_implies_small_links():
    for cx in (torus(), disc(), one_holed_genus(3)):
        assert surface_check(cx).is_surface
        ok, _ = has_small_links(cx)
        assert ok


def test_boundary_subcomplex_disc():
    b = boundary_subcomplex(disc())
    assert b.edge_set == {0, 1, 2}
    assert b.vertex_set == {0, 1, 2}


def test_boundary_subcomplex_torus_empty():
    b = boundary_subcomplex(torus())
    assert not b.edge_set and not b.vertex_set


def test_boundary_subcomplex_one_holed_genus2():
    cx = one_holed_genus(2)
    b = boundary_subcomplex(cx)
    assert {cx.name("e", e) for e in b.edge_set} == {"c"}
    assert b.vertex_set == {0}
    # each boundary edge is glued along exactly one face side
    for e in b.edge_set:
        assert cx.side_incidence(e) == 1


def test_euler_one_holed_genus2():
    assert one_holed_genus(2).euler_characteristic() == -3


def test_reduced_euler_sphere():
    sphere = TwoComplex.build(
        ["p", "q", "r"],
        [("a", "p", "q"), ("b", "q", "r"), ("c", "r", "p")],
        [
            ("up", [("a", 1), ("b", 1), ("c", 1)]),
            ("down", [("c", -1), ("b", -1), ("a", -1)]),
        ],
    )
    assert sphere.euler_characteristic() == 2
    assert reduced_euler(sphere) == 0


def test_reduced_euler_discards_disc_component():
    cx = disjoint_union(torus(), disc())
    assert reduced_euler(cx) == 0


def test_reduced_euler_requires_surface():
    verts = ["p", "q"]
    edges = [("m", "p", "q"), ("x0", "q", "p"), ("x1", "q", "p"), ("x2", "q", "p")]
    faces = [(f"f{i}", [("m", 1), (f"x{i}", 1)]) for i in range(3)]
    with pytest.raises(ComplexError):
        reduced_euler(TwoComplex.build(verts, edges, faces))


def test_induced_subcomplex_closure():
    cx = one_holed_genus(2)
    sub = induced_subcomplex(cx, [("f", 0)])
    assert sub.face_set == {0}
    assert sub.edge_set == set(cx.edges)
    assert sub.vertex_set == {0}


def test_induced_subcomplex_all_and_empty():
    cx = torus()
    assert induced_subcomplex(cx, cx.cells()).cells() == full_subcomplex(cx).cells()
    empty = induced_subcomplex(cx, [])
    assert not empty.cells()


def test_induced_subcomplex_unknown_id():
    with pytest.raises(ComplexError):
        induced_subcomplex(torus(), [("f", 9)])


def test_connected_components():
    assert len(torus().connected_components()) == 1
    assert len(disjoint_union(torus(), rp2()).connected_components()) == 2
    assert TwoComplex([], {}, {}).connected_components() == []


def test_corner_accounting():
    # total link edges over all vertices equals total face degree
    for cx in (torus(), rp2(), disc(), one_holed_genus(3)):
        total_links = sum(len(link_graph(cx, v).links) for v in cx.vertices)
        total_degree = sum(cx.degree(f) for f in cx.faces)
        assert total_links == total_degree


def test_subcomplex_stability_of_small_links():
    rng = random.Random(41)
    pool = [torus(), rp2(), one_holed_genus(2), disc()]
    for _ in range(40):
        cx = rng.choice(pool)
        ok, _ = has_small_links(cx)
        assert ok
        cells = [c for c in cx.cells() if rng.random() < 0.6]
        sub = induced_subcomplex(cx, cells).as_complex()
        ok_sub, _ = has_small_links(sub)
        assert ok_sub


def test_text_roundtrip_byte_stable():
    for cx in (torus(), rp2(), disc(), one_holed_genus(2)):
        text = print_complex(cx)
        again = print_complex(parse_complex(text))
        assert text == again


def test_parse_errors():
    with pytest.raises(ComplexError):
        parse_complex("vertex v\nedge a v\n")
    with pytest.raises(ComplexError):
        parse_complex("face f = a\n")
    with pytest.raises(ComplexError):
        parse_complex("widget w\n")
