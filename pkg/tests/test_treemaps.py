from __future__ import annotations

from math import comb

import pytest
from hypothesis import given, settings

from dendroid.broadposet import Tree, broad_closure, corolla, eta, linear
from dendroid.errors import (
    DendroidError,
    NotInnerEdge,
    NotMonotone,
    RelationNotInClosure,
    RootMismatch,
)
from dendroid.treemaps import (
    TreeMap,
    automorphisms,
    classify,
    compose,
    descriptor_from_subtree,
    enumerate_faces,
    enumerate_maps,
    face_descriptor,
    face_minus,
    factorize,
    full_face,
    identity_map,
    inner_face,
    is_monotone,
    is_subface,
    outer_face,
    outer_union_intersection,
    stick_face,
    subfaces,
)

from conftest import trees
from oracles import oracle_inner_face, oracle_outer_face, oracle_subtrees


# -- outer and inner faces ---------------------------------------------------

def test_outer_face_frozen(first_tree):
    w = outer_face(first_tree, ("a", "e", "f"), "r")
    assert w.edges == {"r", "d", "e", "a", "b", "f"}
    assert w.vertices == {"r": ("d", "e", "f"), "d": ("a", "b"), "b": ()}
    assert w.leaves() == ("a", "e", "f")


def test_outer_face_keeps_full_tuples(first_tree):
    # the stump face at b: empty leaf tuple, single stump vertex
    w = outer_face(first_tree, (), "b")
    assert w.edges == {"b"}
    assert w.vertices == {"b": ()}
    # distinct from the stick at b
    s = outer_face(first_tree, ("b",), "b")
    assert s.edges == {"b"} and s.vertices == {}


def test_outer_face_rejects_non_relations(first_tree):
    with pytest.raises(RelationNotInClosure):
        outer_face(first_tree, ("e", "a"), "r")  # wrong planar order
    with pytest.raises(RelationNotInClosure):
        outer_face(first_tree, ("a", "b"), "r")  # not a cut of r


def test_inner_face_frozen(first_tree):
    v = inner_face(first_tree, {"d"})
    assert v.vertices["r"] == ("a", "b", "e", "f")
    v = inner_face(first_tree, {"b"})
    assert v.vertices["d"] == ("a",)
    v = inner_face(first_tree, {"b", "d"})
    assert v.vertices["r"] == ("a", "e", "f")
    with pytest.raises(NotInnerEdge):
        inner_face(first_tree, {"r"})
    with pytest.raises(NotInnerEdge):
        inner_face(first_tree, {"a"})


@given(trees())
@settings(max_examples=80, deadline=None)
def test_outer_face_matches_walk_oracle(t):
    for rel in broad_closure(t):
        root, edges, vertices = oracle_outer_face(t, rel.source, rel.target)
        w = outer_face(t, rel.source, rel.target)
        assert w.root == root
        assert w.edges == set(edges)
        assert w.vertices == vertices
        assert w.leaves() == rel.source  # leaf tuple is exactly the relation


@given(trees())
@settings(max_examples=80, deadline=None)
def test_inner_face_matches_splice_oracle(t):
    inner = sorted(t.inner_edges(), key=repr)
    import itertools

    for k in range(len(inner) + 1):
        for removed in itertools.combinations(inner, min(k, 2)):
            got = inner_face(t, frozenset(removed))
            want = oracle_inner_face(t, removed)
            assert got.literal_key() == want.literal_key()


@given(trees())
@settings(max_examples=60, deadline=None)
def test_inner_faces_are_full(t):
    # a fully-contracted or partially-contracted tree keeps root and leaves
    inner = sorted(t.inner_edges(), key=repr)
    removed = frozenset(inner[: max(1, len(inner) // 2)]) if inner else frozenset()
    v = inner_face(t, removed)
    fd = descriptor_from_subtree(t, v)
    assert fd.root == t.root
    assert fd.leaves == t.leaves()
    assert fd.removed == removed


# -- face enumeration --------------------------------------------------------

def test_first_tree_face_count(first_tree):
    faces = enumerate_faces(first_tree)
    assert len(faces) == 33
    assert len(set(faces)) == 33


def test_faces_match_subtree_oracle(first_tree):
    got = {
        (fd.root, frozenset(fd.as_tree().vertices.items()))
        for fd in enumerate_faces(first_tree)
    }
    assert got == oracle_subtrees(first_tree)


@given(trees(max_degree=3))
@settings(max_examples=50, deadline=None)
def test_faces_match_subtree_oracle_random(t):
    got = {
        (fd.root, frozenset(fd.as_tree().vertices.items()))
        for fd in enumerate_faces(t)
    }
    assert got == oracle_subtrees(t)
    assert len(got) == len(enumerate_faces(t))  # descriptors are a bijection


def test_faces_not_determined_by_edges(first_tree):
    with_b = [f for f in enumerate_faces(first_tree) if f.as_tree().edges == {"b"}]
    assert len(with_b) == 2  # stick at b and the stump face over b
    assert sorted((dict(f.as_tree().vertices) for f in with_b), key=len) == [
        {},
        {"b": ()},
    ]


def test_descriptor_roundtrip(first_tree):
    for fd in enumerate_faces(first_tree):
        back = descriptor_from_subtree(first_tree, fd.as_tree())
        assert back == fd


def test_subface_relation(first_tree):
    full = full_face(first_tree)
    for fd in enumerate_faces(first_tree):
        assert is_subface(fd, full)
    eta_b = stick_face(first_tree, "b")
    stump_b = face_descriptor(first_tree, "b", ())
    assert is_subface(eta_b, stump_b)
    assert not is_subface(stump_b, eta_b)


def test_subfaces_of_corolla():
    c = corolla(2)
    fd = full_face(c)
    assert len(subfaces(fd)) == 4  # itself and three sticks


def test_inner_edge_inheritance(first_tree):
    # E^i(V) = E^i(outer closure of V) minus the removed set
    for fd in enumerate_faces(first_tree):
        v = fd.as_tree()
        w = fd.outer_closure().as_tree()
        assert v.inner_edges() == w.inner_edges() - fd.removed
        assert v.inner_edges() == w.inner_edges() & v.edges


# -- cup / cap ---------------------------------------------------------------

def test_outer_union_intersection(first_tree):
    f1 = face_descriptor(first_tree, "r", ("d", "e", "c"))
    f2 = face_descriptor(first_tree, "r", ("a", "e", "f"))
    union, inter = outer_union_intersection([f1, f2])
    assert union == full_face(first_tree)
    assert inter == face_descriptor(first_tree, "r", ("d", "e", "f"))
    # with b as a leaf entry its stump vertex is absent from the union
    f3 = face_descriptor(first_tree, "r", ("a", "b", "e", "f"))
    union, _ = outer_union_intersection([f1, f3])
    assert union == face_descriptor(first_tree, "r", ("a", "b", "e", "c"))


def test_outer_union_root_mismatch(first_tree):
    f1 = face_descriptor(first_tree, "r", ("d", "e", "f"))
    f2 = face_descriptor(first_tree, "d", ("a", "b"))
    with pytest.raises(RootMismatch):
        outer_union_intersection([f1, f2])


# -- maps --------------------------------------------------------------------

def test_linear_maps_count_like_simplices():
    for m, n in [(1, 1), (2, 1), (1, 2), (2, 2)]:
        maps = enumerate_maps(linear(m), linear(n, prefix="y"))
        assert len(maps) == comb(n + m + 1, m + 1)


def test_classify_basics(first_tree):
    assert classify(identity_map(first_tree)) == "iso"
    c2 = corolla(2)
    swap = TreeMap(c2, c2, {"r": "r", "l1": "l2", "l2": "l1"})
    assert classify(swap) == "iso"
    sigma = TreeMap(linear(2), linear(1, prefix="y"), {"x0": "y0", "x1": "y0", "x2": "y1"})
    assert classify(sigma) == "degeneracy"
    inner_coface = TreeMap(linear(1), linear(2, prefix="x"), {"x0": "x0", "x1": "x2"})
    assert classify(inner_coface) == "inner_face"
    top = TreeMap(linear(1), linear(2, prefix="x"), {"x0": "x1", "x1": "x2"})
    assert classify(top) == "outer_face"
    collapse_all = TreeMap(linear(2), linear(1, prefix="y"), {"x0": "y0", "x1": "y0", "x2": "y0"})
    assert classify(collapse_all) == "general"


def test_classify_stump_faces():
    # dropping a stump keeps every edge but is still an outer face
    stump = corolla(0)
    assert classify(TreeMap(eta("r"), stump, {"r": "r"})) == "outer_face"
    through = TreeMap(corolla(1), stump, {"r": "r", "l1": "r"})
    assert is_monotone(through)
    assert classify(through) == "general"


def test_not_monotone_raises():
    c2 = corolla(2)
    bad = TreeMap(c2, eta("e"), {"r": "e", "l1": "e", "l2": "e"})
    assert not is_monotone(bad)
    with pytest.raises(NotMonotone):
        classify(bad)


@given(trees(max_degree=3), trees(max_degree=2))
@settings(max_examples=30, deadline=None)
def test_factorize_roundtrip(s, t):
    maps = enumerate_maps(s, t)
    for edges in maps[:40]:
        m = TreeMap(s, t, edges)
        d, i, o = factorize(m)
        assert classify_parts_ok(d, i, o)
        assert compose(o, compose(i, d)) == m


def classify_parts_ok(d, i, o):
    # degeneracy part surjective; face parts are literal inclusions
    assert set(d.edges.values()) == set(d.target.edges)
    assert all(i.edges[e] == e for e in i.source.edges)
    assert all(o.edges[e] == e for e in o.source.edges)
    return True


def test_factorize_unique_image(first_tree):
    # image face of a non-planar embedding is planar-sorted
    c2 = corolla(2)
    m = TreeMap(c2, first_tree, {"r": "d", "l1": "b", "l2": "a"})
    assert is_monotone(m)
    d, i, o = factorize(m)
    assert i.source.vertices["d"] == ("a", "b")  # sorted to ambient planar order
    assert classify(m) == "outer_face"


def test_automorphism_counts(first_tree):
    assert len(automorphisms(first_tree)) == 1
    assert len(automorphisms(corolla(2))) == 2
    assert len(automorphisms(corolla(3))) == 6
    assert len(automorphisms(linear(3))) == 1


def test_degree_monotone_along_faces(first_tree):
    for fd in enumerate_faces(first_tree):
        assert len(fd.as_tree().vertices) <= len(first_tree.vertices)


def test_face_minus(first_tree):
    fd = full_face(first_tree)
    v = face_minus(fd, {"d"})
    assert v.removed == {"d"}
    with pytest.raises(NotInnerEdge):
        face_minus(stick_face(first_tree, "b"), {"b"})
