"""Maps of trees: faces, degeneracies, classification and factorization.

A monotone map sends each generating relation of the source to a broad
relation of the target.  Planar faces of a tree ``T`` are in bijection with
descriptors ``(root, leaf tuple, removed inner edges)``: the outer face at a
closure relation ``leaves <= root``, followed by contraction of the removed
edges.  Faces are *not* determined by their edge sets once stumps are present
(the stick at a stump edge and the stump face share theirs), which is why the
descriptor is the canonical face representation everywhere downstream.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from .broadposet import (
    BroadRelation,
    Tree,
    broad_closure,
    closure_sets,
    closure_tuples,
    validate_tree,
)
from .errors import (
    DendroidError,
    NotInnerEdge,
    NotMonotone,
    RelationNotInClosure,
    RootMismatch,
)


# ---------------------------------------------------------------------------
# faces
# ---------------------------------------------------------------------------

def outer_face(t: Tree, leaves: tuple, root) -> Tree:
    """The outer face of ``t`` at the closure relation ``leaves <= root``.

    Its edges are those below ``root`` and not strictly below any entry;
    retained vertices keep their full child tuples, so the leaf tuple of the
    result is exactly ``leaves``.

    Raises :class:`RelationNotInClosure` if ``leaves <= root`` is not a broad
    relation of ``t``.
    """
    leaves = tuple(leaves)
    if (root not in t.edges) or (leaves not in closure_tuples(t).get(root, ())):
        raise RelationNotInClosure(
            f"{leaves!r} <= {root!r} is not in the broad closure", witness=(leaves, root)
        )
    entries = set(leaves)
    edges = []
    vertices = {}
    for s in t.dfs_order():
        if not t.le_d(s, root):
            continue
        chain = t.chain(s)
        if any(e in chain and e != s for e in entries):
            continue  # strictly below an entry
        edges.append(s)
        if s not in entries and s in t.vertices:
            vertices[s] = t.vertices[s]
    return Tree(root, vertices, edges)


def inner_face(t: Tree, removed) -> Tree:
    """Contract the inner edges ``removed``: tuples are expanded in place,
    stump entries vanishing."""
    removed = frozenset(removed)
    bad = removed - t.inner_edges()
    if bad:
        raise NotInnerEdge(f"not inner edges: {sorted(map(str, bad))}", witness=bad)

    def expand(cs):
        out = []
        for c in cs:
            if c in removed:
                out.extend(expand(t.vertices[c]))
            else:
                out.append(c)
        return tuple(out)

    vertices = {e: expand(cs) for e, cs in t.vertices.items() if e not in removed}
    return Tree(t.root, vertices, t.edges - removed)


@dataclass(frozen=True)
class FaceDescriptor:
    """A planar face of ``ambient``: the outer face at ``leaves <= root``
    with the ``removed`` inner edges contracted.

    Equality and hashing ignore the ambient reference; descriptors are only
    ever compared within a fixed ambient tree.
    """

    ambient: Tree = field(compare=False)
    root: object
    leaves: tuple
    removed: frozenset

    def as_tree(self) -> Tree:
        return _face_tree(self)

    def outer_closure(self) -> "FaceDescriptor":
        return FaceDescriptor(self.ambient, self.root, self.leaves, frozenset())

    def is_outer(self) -> bool:
        return not self.removed

    def is_full(self) -> bool:
        t = self.ambient
        return self.root == t.root and self.leaves == t.leaves() and not self.removed

    def sort_key(self):
        idx = self.ambient.dfs_index()
        return (
            idx[self.root],
            tuple(idx[e] for e in self.leaves),
            tuple(sorted(idx[e] for e in self.removed)),
        )

    def __repr__(self):
        rm = "{" + ",".join(sorted(map(str, self.removed))) + "}"
        return f"Face({','.join(map(str, self.leaves))}<={self.root}; -{rm})"


_FACE_TREE_CACHE: dict = {}


def _face_tree(fd: FaceDescriptor) -> Tree:
    key = (fd.ambient.literal_key(), fd.root, fd.leaves, fd.removed)
    hit = _FACE_TREE_CACHE.get(key)
    if hit is None:
        w = outer_face(fd.ambient, fd.leaves, fd.root)
        hit = inner_face(w, fd.removed) if fd.removed else w
        _FACE_TREE_CACHE[key] = hit
    return hit


def face_descriptor(ambient: Tree, root, leaves, removed=()) -> FaceDescriptor:
    """Validated constructor."""
    leaves = tuple(leaves)
    removed = frozenset(removed)
    w = outer_face(ambient, leaves, root)  # raises RelationNotInClosure
    bad = removed - w.inner_edges()
    if bad:
        raise NotInnerEdge(
            f"removed edges not inner in the outer face: {sorted(map(str, bad))}",
            witness=bad,
        )
    return FaceDescriptor(ambient, root, leaves, removed)


def full_face(t: Tree) -> FaceDescriptor:
    return FaceDescriptor(t, t.root, t.leaves(), frozenset())


def stick_face(t: Tree, e) -> FaceDescriptor:
    return FaceDescriptor(t, e, (e,), frozenset())


def descriptor_from_subtree(ambient: Tree, sub: Tree) -> FaceDescriptor:
    """Recover the descriptor of a face given as a literal subtree."""
    leaves = sub.leaves()
    w = outer_face(ambient, leaves, sub.root)
    removed = w.edges - sub.edges
    fd = FaceDescriptor(ambient, sub.root, leaves, frozenset(removed))
    if fd.as_tree().literal_key() != sub.literal_key():
        raise DendroidError(
            "subtree is not a planar face of the ambient tree", witness=sub
        )
    return fd


_FACES_CACHE: dict = {}


def enumerate_faces(t: Tree) -> tuple:
    """All planar faces as descriptors, deterministically ordered.

    One outer face per closure relation, one face per subset of its inner
    edges; the descriptor map is a bijection onto planar faces.
    """
    key = t.literal_key()
    hit = _FACES_CACHE.get(key)
    if hit is not None:
        return hit
    out = []
    for rel in broad_closure(t):
        w = outer_face(t, rel.source, rel.target)
        inner = sorted(w.inner_edges(), key=t.dfs_index().get)
        for mask in range(1 << len(inner)):
            removed = frozenset(inner[i] for i in range(len(inner)) if mask >> i & 1)
            out.append(FaceDescriptor(t, rel.target, rel.source, removed))
    out.sort(key=FaceDescriptor.sort_key)
    hit = tuple(out)
    _FACES_CACHE[key] = hit
    return hit


_SUBFACE_CACHE: dict = {}


def subfaces(fd: FaceDescriptor) -> frozenset:
    """All faces of the face ``fd``, as descriptors of the same ambient."""
    key = (fd.ambient.literal_key(), fd.root, fd.leaves, fd.removed)
    hit = _SUBFACE_CACHE.get(key)
    if hit is None:
        u = fd.as_tree()
        hit = frozenset(
            descriptor_from_subtree(fd.ambient, sub.as_tree()) for sub in enumerate_faces(u)
        )
        _SUBFACE_CACHE[key] = hit
    return hit


def outer_subfaces(fd: FaceDescriptor) -> tuple:
    """The outer faces of the face ``fd`` (one per closure relation of its
    tree), as descriptors of the ambient."""
    u = fd.as_tree()
    return tuple(
        descriptor_from_subtree(fd.ambient, outer_face(u, rel.source, rel.target))
        for rel in broad_closure(u)
    )


def is_subface(v: FaceDescriptor, u: FaceDescriptor) -> bool:
    """``v`` embeds in ``u`` (within the shared ambient)."""
    vt, ut = v.as_tree(), u.as_tree()
    if not vt.edges <= ut.edges:
        return False
    ct = closure_tuples(ut)
    if vt.root not in ut.edges:
        return False
    return all(cs in ct.get(e, ()) for e, cs in vt.vertices.items())


def face_minus(fd: FaceDescriptor, extra) -> FaceDescriptor:
    """Contract further inner edges of the face ``fd`` (of its own tree)."""
    extra = frozenset(extra)
    t = fd.as_tree()
    bad = extra - t.inner_edges()
    if bad:
        raise NotInnerEdge(f"not inner in the face: {sorted(map(str, bad))}", witness=bad)
    return descriptor_from_subtree(fd.ambient, inner_face(t, extra))


# ---------------------------------------------------------------------------
# cup and cap of outer faces
# ---------------------------------------------------------------------------

def outer_union_intersection(faces) -> tuple:
    """Union and intersection of outer faces with a common root; both are
    again outer faces.  Returns ``(union, intersection)`` descriptors."""
    faces = list(faces)
    if not faces:
        raise DendroidError("need at least one outer face")
    ambient = faces[0].ambient
    root = faces[0].root
    for f in faces:
        if f.root != root:
            raise RootMismatch(f"roots differ: {f.root!r} vs {root!r}", witness=(f.root, root))
        if f.removed:
            raise DendroidError("outer faces required", witness=f)
        if f.ambient.literal_key() != ambient.literal_key():
            raise DendroidError("faces of different ambient trees", witness=f)
    trees = [f.as_tree() for f in faces]
    union_edges = set().union(*(t.edges for t in trees))
    union_vs = set().union(*(set(t.vertices) for t in trees))
    inter_edges = set(trees[0].edges)
    inter_vs = set(trees[0].vertices)
    for t in trees[1:]:
        inter_edges &= t.edges
        inter_vs &= set(t.vertices)
    out = []
    for edges, vs in ((union_edges, union_vs), (inter_edges, inter_vs)):
        data = {
            "edges": list(edges),
            "vertices": {e: list(ambient.vertices[e]) for e in vs},
        }
        sub = validate_tree(data)
        fd = descriptor_from_subtree(ambient, sub)
        if fd.removed:
            raise DendroidError("cup/cap produced a non-outer face", witness=fd)
        out.append(fd)
    return tuple(out)


# ---------------------------------------------------------------------------
# monotone maps
# ---------------------------------------------------------------------------

class TreeMap:
    """A map of trees given by its edge function."""

    __slots__ = ("source", "target", "edges")

    def __init__(self, source: Tree, target: Tree, edges: dict):
        self.source = source
        self.target = target
        self.edges = dict(edges)

    def __call__(self, e):
        return self.edges[e]

    def apply_tuple(self, cs) -> tuple:
        return tuple(self.edges[c] for c in cs)

    def __eq__(self, other):
        if not isinstance(other, TreeMap):
            return NotImplemented
        return (
            self.source.literal_key() == other.source.literal_key()
            and self.target.literal_key() == other.target.literal_key()
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash(
            (self.source.literal_key(), self.target.literal_key(), tuple(sorted(self.edges.items(), key=repr)))
        )

    def __repr__(self):
        return f"TreeMap({self.source!r} -> {self.target!r})"


def identity_map(t: Tree) -> TreeMap:
    return TreeMap(t, t, {e: e for e in t.edges})


def compose(g: TreeMap, f: TreeMap) -> TreeMap:
    if g.source.literal_key() != f.target.literal_key():
        raise DendroidError("maps not composable")
    return TreeMap(f.source, g.target, {e: g.edges[v] for e, v in f.edges.items()})


def monotone_failure(m: TreeMap):
    """None if monotone, else a witness (source vertex, image tuple)."""
    if set(m.edges) != set(m.source.edges):
        return ("domain", set(m.source.edges) ^ set(m.edges))
    if not set(m.edges.values()) <= set(m.target.edges):
        return ("codomain", set(m.edges.values()) - set(m.target.edges))
    cs_target = closure_sets(m.target)
    for e, cs in m.source.vertices.items():
        img = m.apply_tuple(cs)
        if len(set(img)) != len(img):
            return (e, img)
        if frozenset(img) not in cs_target.get(m.edges[e], ()):
            return (e, img)
    return None


def is_monotone(m: TreeMap) -> bool:
    return monotone_failure(m) is None


def _require_monotone(m: TreeMap):
    w = monotone_failure(m)
    if w is not None:
        raise NotMonotone(f"generator image not a broad relation: {w!r}", witness=w)


def factorize(m: TreeMap) -> tuple:
    """Factor ``m`` as outer_face o inner_face o degeneracy.

    The middle faces are planar (tuples in target order); the factorization
    with planar face parts is strictly unique, so this triple is canonical.
    Returns ``(degeneracy_part, inner_part, outer_part)`` with
    ``outer o inner o degeneracy == m``.
    """
    _require_monotone(m)
    #  collapse unary vertices identified by the map
    vertices = dict(m.source.vertices)
    val = dict(m.edges)
    rep: dict = {}

    def find(e):
        while e in rep:
            e = rep[e]
        return e

    changed = True
    while changed:
        changed = False
        for e, cs in list(vertices.items()):
            if len(cs) == 1 and val[e] == val[cs[0]]:
                c = cs[0]
                rep[c] = e
                child_vertex = vertices.get(c)
                del vertices[e]
                if c in vertices:
                    del vertices[c]
                if child_vertex is not None:
                    vertices[e] = child_vertex
                changed = True
                break
    kept = set(vertices)
    for cs in vertices.values():
        kept.update(cs)
    kept.add(find(m.source.root))
    v0 = Tree(find(m.source.root), vertices, kept)
    if len({val[e] for e in kept}) != len(kept):
        raise NotMonotone("map does not collapse to an embedding", witness=m)
    # image face, planar-sorted
    tidx = m.target.dfs_index()
    img_vertices = {
        val[e]: tuple(sorted((val[c] for c in cs), key=tidx.get))
        for e, cs in vertices.items()
    }
    v_img = Tree(val[v0.root], img_vertices, [val[e] for e in kept])
    fd = descriptor_from_subtree(m.target, v_img)
    w = outer_face(m.target, fd.leaves, fd.root)
    deg = TreeMap(m.source, v_img, {e: val[find(e)] for e in m.source.edges})
    inn = TreeMap(v_img, w, {e: e for e in v_img.edges})
    out = TreeMap(w, m.target, {e: e for e in w.edges})
    return deg, inn, out


def classify(m: TreeMap) -> str:
    """One of iso / degeneracy / inner_face / outer_face / face / general."""
    deg, inn, out = factorize(m)
    collapsed = len(deg.source.edges) > len(deg.target.edges)
    inner_proper = len(inn.target.edges) > len(inn.source.edges)
    # a face dropping only stumps keeps every edge, so vertices count too
    outer_proper = (
        len(out.target.edges) > len(out.source.edges)
        or len(out.target.vertices) > len(out.source.vertices)
    )
    if collapsed:
        return "general" if (inner_proper or outer_proper) else "degeneracy"
    if inner_proper and outer_proper:
        return "face"
    if inner_proper:
        return "inner_face"
    if outer_proper:
        return "outer_face"
    return "iso"


def enumerate_maps(source: Tree, target: Tree) -> tuple:
    """All monotone maps ``source -> target`` as edge dicts.

    Assignments are built top-down: the root goes anywhere; each vertex tuple
    maps bijectively onto a closure tuple of the right arity (closure tuples
    are duplicate-free, so entry images are pairwise distinct).
    """
    ct = closure_tuples(target)
    svert = source.vertices
    results = []

    def descend(pending, acc):
        if not pending:
            results.append(dict(acc))
            return
        e = pending[-1]
        rest = pending[:-1]
        cs = svert.get(e)
        if cs is None:
            descend(rest, acc)
            return
        k = len(cs)
        for rel_src in ct.get(acc[e], ()):
            if len(rel_src) != k:
                continue
            for perm in permutations(rel_src):
                for c, u in zip(cs, perm):
                    acc[c] = u
                descend(rest + list(cs), acc)
        for c in cs:
            acc.pop(c, None)

    for v in target.edges:
        descend([source.root], {source.root: v})
    return tuple(results)


def tree_isomorphisms(a: Tree, b: Tree) -> tuple:
    """All isomorphisms ``a -> b`` (edge dicts)."""
    # cheap iso-invariant reject; the planar shape key is too strict here,
    # since isomorphic trees may enumerate their children in different orders
    if len(a.edges) != len(b.edges) or sorted(
        map(len, a.vertices.values())
    ) != sorted(map(len, b.vertices.values())):
        return ()
    out = []
    for edges in enumerate_maps(a, b):
        if len(set(edges.values())) == len(edges) and set(edges.values()) == set(b.edges):
            inv = TreeMap(b, a, {v: e for e, v in edges.items()})
            if is_monotone(inv):
                out.append(edges)
    return tuple(out)


def automorphisms(t: Tree) -> tuple:
    return tree_isomorphisms(t, t)
