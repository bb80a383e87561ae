"""Subcomplexes of a representable: G-stable, face-closed sets of faces.

A complex is stored by its nondegenerate cells, i.e. a set of face
descriptors of the ambient forest's components.  The constructors build the
representable, its boundary, inner horns, orbital inner horns and the Segal
core; :func:`attach_horn` performs the one step of trust used by the
certificate replayer: gluing a G-orbit of horn fillers onto a complex.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from dendroid.equivariance import (
    GTree,
    OrbitalFace,
    minimal_orbital_face,
)
from dendroid.errors import (
    DendroidError,
    EmptyE,
    NotAPushout,
    NotGStable,
    NotInner,
)
from dendroid.treemaps import (
    FaceDescriptor,
    descriptor_from_subtree,
    enumerate_faces,
    face_minus,
    full_face,
    is_subface,
    stick_face,
    subfaces,
)


def all_faces(gtree: GTree):
    """Every face of every component, in a deterministic order."""
    out = []
    for comp in gtree.forest.trees:
        out.extend(enumerate_faces(comp))
    return out


@dataclass(frozen=True)
class Complex:
    """A G-stable, face-closed set of faces of a fixed ambient G-forest."""

    gtree: GTree = field(compare=False, hash=False)
    members: frozenset = field(default_factory=frozenset)

    def __contains__(self, fd: FaceDescriptor) -> bool:
        return fd in self.members

    def __len__(self) -> int:
        return len(self.members)

    def maximal_members(self):
        out = []
        for v in self.members:
            if not any(
                u is not v and v != u and is_subface(v, u) for u in self.members
            ):
                out.append(v)
        out.sort(key=FaceDescriptor.sort_key)
        return out

    def union(self, cells) -> "Complex":
        return Complex(self.gtree, self.members | frozenset(cells))

    def is_cover(self) -> bool:
        """Contains the Segal core and is closed under outer closures."""
        core = segal_core(self.gtree)
        if not core.members <= self.members:
            return False
        return all(v.outer_closure() in self.members for v in self.members)

    def __repr__(self):
        return f"Complex({len(self.members)} cells)"


def validate_complex(c: Complex) -> None:
    universe = set(all_faces(c.gtree))
    stray = c.members - universe
    if stray:
        raise DendroidError(
            "cells are not faces of the ambient forest", witness=sorted(map(repr, stray))
        )
    for v in c.members:
        missing = subfaces(v) - c.members
        if missing:
            raise DendroidError(
                f"not face-closed below {v!r}", witness=sorted(map(repr, missing))
            )
        for g in c.gtree.group.elements:
            if c.gtree.face_action(g, v) not in c.members:
                raise NotGStable("cells are not closed under the action", witness=(g, v))


# -----------------------------------------------------------------------
# the stock complexes
# -----------------------------------------------------------------------

def representable(gtree: GTree) -> Complex:
    return Complex(gtree, frozenset(all_faces(gtree)))


def boundary(gtree: GTree) -> Complex:
    fulls = {full_face(t) for t in gtree.forest.trees}
    return Complex(gtree, frozenset(set(all_faces(gtree)) - fulls))


def _check_horn_edges(gtree: GTree, edges) -> frozenset:
    edges = frozenset(edges)
    if not edges:
        raise EmptyE("a horn needs at least one inner edge")
    inner: set = set()
    for t in gtree.forest.trees:
        inner |= t.inner_edges()
    if not edges <= inner:
        raise NotInner(
            "horn edges must be inner edges", witness=sorted(edges - inner)
        )
    for g in gtree.group.elements:
        img = {gtree.act(g, e) for e in edges}
        if img != edges:
            raise NotGStable("horn edges must form a G-stable set", witness=g)
    return edges


def is_full_minus(gtree: GTree, fd: FaceDescriptor, edges) -> bool:
    """Is ``fd`` the face ``T_i - D`` of its component, with ``D`` inside ``edges``?"""
    comp = gtree.component(fd.root)
    return (
        fd.root == comp.root
        and fd.leaves == comp.leaves()
        and fd.removed <= frozenset(edges)
    )


def horn(gtree: GTree, edges) -> Complex:
    edges = _check_horn_edges(gtree, edges)
    members = frozenset(
        v for v in all_faces(gtree) if not is_full_minus(gtree, v, edges)
    )
    return Complex(gtree, members)


def is_orbital_full_minus(gtree: GTree, fd: FaceDescriptor, edges) -> bool:
    """Does the smallest orbital face of ``fd`` have the form ``T - E'``
    with ``E'`` inside ``edges``?"""
    gv = minimal_orbital_face(gtree, fd)
    if gv.roots() != {t.root for t in gtree.forest.trees}:
        return False
    return all(is_full_minus(gtree, w, edges) for w in gv.components)


def orbital_horn(gtree: GTree, edges) -> Complex:
    edges = _check_horn_edges(gtree, edges)
    members = frozenset(
        v for v in all_faces(gtree) if not is_orbital_full_minus(gtree, v, edges)
    )
    return Complex(gtree, members)


def segal_core(gtree: GTree) -> Complex:
    """Sticks plus the one-vertex outer faces (stump faces included)."""
    cells: set = set()
    for t in gtree.forest.trees:
        for e in t.edges:
            cells.add(stick_face(t, e))
        for e in t.vertices:
            cells.add(FaceDescriptor(t, e, t.vertices[e], frozenset()))
    return Complex(gtree, frozenset(cells))


def full_minus_orbital(gtree: GTree, edges) -> OrbitalFace:
    """The orbital face ``T - E`` for a G-stable set of inner edges."""
    edges = frozenset(edges)
    return OrbitalFace(
        frozenset(
            face_minus(full_face(t), edges & t.inner_edges())
            for t in gtree.forest.trees
        )
    )


# -----------------------------------------------------------------------
# horn attachment
# -----------------------------------------------------------------------

def _ambient_image(gtree: GTree, w: FaceDescriptor, sub: FaceDescriptor):
    """A face of the face ``w``, re-read as a face of the ambient forest."""
    comp = gtree.component(w.root)
    return descriptor_from_subtree(comp, sub.as_tree())


def attach_horn(a: Complex, w: FaceDescriptor, subgroup, edges) -> Complex:
    """Glue the orbit of fillers of the horn ``Λ^edges[w]`` onto ``a``.

    This is the elementary pushout step: it verifies that the situation
    really is one (the subgroup stabilizes the data, the horn sits inside
    ``a``, the fillers are new, and the orbit is free of the expected size)
    and raises :class:`NotAPushout` otherwise.
    """
    gtree = a.gtree
    group = gtree.group
    k = frozenset(subgroup)
    edges = frozenset(edges)
    if not group.is_subgroup(k):
        raise NotAPushout("attaching data needs a subgroup", witness=sorted(k))
    for g in k:
        if gtree.face_action(g, w) != w:
            raise NotAPushout(f"{g!r} moves the filler face", witness=g)
        if {gtree.act(g, e) for e in edges} != edges:
            raise NotAPushout(f"{g!r} moves the horn edges", witness=g)
    w_tree = w.as_tree()
    if not edges or not edges <= w_tree.inner_edges():
        raise NotAPushout(
            "horn edges must be a nonempty set of inner edges of the face",
            witness=sorted(edges - w_tree.inner_edges()),
        )
    # the horn of the face must already be present
    for v in enumerate_faces(w_tree):
        if v.root == w_tree.root and v.leaves == w_tree.leaves() and v.removed <= edges:
            continue
        img = _ambient_image(gtree, w, v)
        if img not in a.members:
            raise NotAPushout(f"horn cell missing from the base: {img!r}", witness=img)
    # the fillers must all be new, and the orbit free of the expected size
    fillers: set = set()
    for r in range(len(edges) + 1):
        for d in combinations(sorted(edges), r):
            cell = face_minus(w, d)
            for g in group.elements:
                fillers.add(gtree.face_action(g, cell))
    stale = fillers & a.members
    if stale:
        raise NotAPushout(
            "filler cells already present", witness=sorted(map(repr, stale))
        )
    expected = 2 ** len(edges) * (group.order() // len(k))
    if len(fillers) != expected:
        raise NotAPushout(
            f"expected {expected} filler cells, found {len(fillers)}",
            witness=(expected, len(fillers)),
        )
    return a.union(fillers)
