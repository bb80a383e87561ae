"""Independent reference implementations used to cross-check the library.

Everything here is written against the definitions directly, sharing as
little code as possible with the package: closures by recursive cut
enumeration, faces by growing labeled subtrees, outer faces by a recursive
walk, complex membership by unions over generator faces.
"""
from __future__ import annotations

from itertools import combinations

from dendroid.broadposet import Tree


def oracle_closure(t: Tree) -> set:
    """Broad closure as ``(source, target)`` pairs via cut enumeration:
    cuts(e) = {(e)} u { concatenated cuts of the children }."""
    memo: dict = {}

    def cuts(e):
        if e in memo:
            return memo[e]
        out = {(e,)}
        cs = t.vertices.get(e)
        if cs is not None:
            prods = [()]
            for c in cs:
                prods = [p + q for p in prods for q in cuts(c)]
            out |= set(prods)
        memo[e] = out
        return out

    return {(src, e) for e in t.edges for src in cuts(e)}


def oracle_subtrees(t: Tree) -> set:
    """All faces, grown as labeled subtrees: pick a root, then at every
    reached edge either stop or attach any non-identity closure relation.
    Returns a set of ``(root, frozenset(vertex items))`` signatures."""
    ct: dict = {}
    for src, tgt in oracle_closure(t):
        ct.setdefault(tgt, set()).add(src)
    memo: dict = {}

    def grow(root):
        if root in memo:
            return memo[root]
        options = [{}]
        for src in ct[root]:
            if src == (root,):
                continue
            branches = [{root: src}]
            for c in src:
                subs = grow(c)
                branches = [dict(b, **s) for b in branches for s in subs]
            options.extend(branches)
        memo[root] = options
        return options

    out = set()
    for r in t.edges:
        for vd in grow(r):
            out.add((r, frozenset(vd.items())))
    return out


def oracle_outer_face(t: Tree, leaves, root) -> tuple:
    """Outer face by a recursive walk down from the root."""
    entries = set(leaves)
    edges = []
    vertices = {}

    def walk(e):
        edges.append(e)
        if e in entries:
            return
        cs = t.vertices.get(e)
        if cs is None:
            return
        vertices[e] = cs
        for c in cs:
            walk(c)

    walk(root)
    return root, tuple(edges), vertices


def oracle_inner_face(t: Tree, removed) -> Tree:
    """Contract removed edges one at a time, splicing tuples by hand."""
    cur_vertices = {e: list(cs) for e, cs in t.vertices.items()}
    cur_edges = set(t.edges)
    for r in sorted(removed, key=repr):
        spliced = cur_vertices.pop(r)
        for e, cs in cur_vertices.items():
            if r in cs:
                i = cs.index(r)
                cs[i:i + 1] = spliced
        cur_edges.discard(r)
    return Tree(t.root, {e: tuple(cs) for e, cs in cur_vertices.items()}, cur_edges)


def oracle_face_poset(faces, is_sub) -> set:
    """Hasse (covering) arrows of a face poset given a subface test."""
    arrows = set()
    for a in faces:
        for b in faces:
            if a is b or not is_sub(a, b):
                continue
            if a == b:
                continue
            if any(
                c not in (a, b) and is_sub(a, c) and is_sub(c, b)
                for c in faces
            ):
                continue
            arrows.add((a, b))
    return arrows


def brute_minimal_orbital(fd, candidates, is_sub):
    """Smallest orbital face containing the face ``fd``, by exhaustive search
    over ``candidates`` (frozensets of descriptors).  Minimality is in the
    componentwise-inclusion order; asserts there is a unique minimum."""
    def suborb(a, b):
        return all(any(is_sub(v, u) for u in b) for v in a)

    hits = [orb for orb in candidates if any(is_sub(fd, f) for f in orb)]
    assert hits, "no orbital face contains the given face"
    minima = [o for o in hits if all(suborb(o, p) for p in hits)]
    assert minima, "containing orbital faces have no minimum"
    assert all(m == minima[0] for m in minima), "minimum not unique"
    return minima[0]


def oracle_union_membership(all_faces, generators, is_sub):
    """Membership by the union-of-generators definition: a face is in iff it
    embeds in some generator."""
    return {f for f in all_faces if any(is_sub(f, g) for g in generators)}


def powerset(xs):
    xs = list(xs)
    for k in range(len(xs) + 1):
        yield from (frozenset(c) for c in combinations(xs, k))


def _compositions(total, k):
    if k == 0:
        if total == 0:
            yield ()
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, k - 1):
            yield (first,) + rest


def oracle_unordered_trees(max_degree, max_arity):
    """Isomorphism classes of trees, as canonical forms: a leaf is None, a
    vertex is the sorted tuple of its children's forms."""
    from itertools import product

    by_degree = {0: {None}}
    for d in range(1, max_degree + 1):
        grown = set()
        for k in range(0, max_arity + 1):
            for parts in _compositions(d - 1, k):
                pools = [sorted(by_degree[p], key=repr) for p in parts]
                for kids in product(*pools):
                    grown.add(tuple(sorted(kids, key=repr)))
        by_degree[d] = grown
    out = set()
    for forms in by_degree.values():
        out |= forms
    return out


def canon_form(t, e=None):
    """Canonical unordered form of a tree (for comparing with the oracle)."""
    e = t.root if e is None else e
    if e not in t.vertices:
        return None
    return tuple(sorted((canon_form(t, c) for c in t.vertices[e]), key=repr))


def oracle_broad_maps(s: Tree, t: Tree) -> set:
    """Broad-poset maps ``s -> t`` by filtering all edge functions.

    A function is a map iff every vertex tuple of ``s`` lands on a relation
    of ``t``: either the image entries are pairwise distinct and form the
    source multiset of some closure relation with the right target, or the
    vertex is unary and collapses onto a reflexive relation.  Returned as
    frozensets of ``(edge, image)`` pairs.
    """
    from itertools import product

    rel = {(frozenset(src), tgt) for src, tgt in oracle_closure(t)}
    src_edges = sorted(s.edges, key=repr)
    out = set()
    for images in product(sorted(t.edges, key=repr), repeat=len(src_edges)):
        f = dict(zip(src_edges, images))
        ok = True
        for e, cs in s.vertices.items():
            fc = tuple(f[c] for c in cs)
            if len(cs) == 1 and fc[0] == f[e]:
                continue
            if len(set(fc)) < len(fc) or (frozenset(fc), f[e]) not in rel:
                ok = False
                break
        if ok:
            out.add(frozenset(f.items()))
    return out
