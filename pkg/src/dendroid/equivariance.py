"""Forests with a finite group action, orbital faces, quotients and grafts.

An action permutes the edges of a forest, carrying components isomorphically
onto components and preserving vertices *as unordered data*: planar orderings
are bookkeeping, not structure.  A transitive action on components makes the
forest a G-tree.  Every G-tree is induced from a component together with the
action of that component's stabilizer, which is how examples are built here
(:func:`induce`).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from dendroid.broadposet import Forest, Tree
from dendroid.errors import (
    DendroidError,
    NotAnAction,
    NotEquivariant,
    NotInjective,
    NotInner,
    OrbitMismatch,
)
from dendroid.groups import FiniteGroup
from dendroid.treemaps import (
    FaceDescriptor,
    TreeMap,
    descriptor_from_subtree,
    enumerate_faces,
    enumerate_maps,
    face_descriptor,
    face_minus,
    full_face,
    is_subface,
    monotone_failure,
    outer_union_intersection,
    stick_face,
)


class GTree:
    """A forest together with a left action of a finite group on its edges."""

    __slots__ = ("group", "forest", "action", "_orbits", "_isotropy", "_sig")

    def __init__(self, group, forest, action, check=True):
        self.group = group
        self.forest = forest if isinstance(forest, Forest) else Forest(tuple(forest))
        self.action = {g: dict(perm) for g, perm in action.items()}
        self._orbits = None
        self._isotropy = {}
        self._sig = None
        if check:
            self._validate()

    # -- validation ------------------------------------------------------

    def _validate(self):
        g_elems = set(self.group.elements)
        if set(self.action) != g_elems:
            raise NotAnAction(
                "action must assign a permutation to every group element",
                witness=sorted(g_elems ^ set(self.action)),
            )
        edges = self.forest.edges()
        for g, perm in self.action.items():
            if set(perm) != edges or set(perm.values()) != edges:
                raise NotAnAction(f"{g!r} does not permute the edges", witness=g)
        ident = self.action[self.group.identity]
        for e in edges:
            if ident[e] != e:
                raise NotAnAction("identity must act trivially", witness=e)
        for g in self.group.elements:
            for h in self.group.elements:
                gh = self.group.mul(g, h)
                for e in edges:
                    if self.action[gh][e] != self.action[g][self.action[h][e]]:
                        raise NotAnAction(
                            "action is not a homomorphism", witness=(g, h, e)
                        )
        for g in self.group.elements:
            for t in self.forest.trees:
                for e in t.edges:
                    img = self.action[g][e]
                    t2 = self.component(img)
                    if (e in t.vertices) != (img in t2.vertices):
                        raise NotAnAction(
                            f"{g!r} does not preserve leaves", witness=(g, e)
                        )
                    if e in t.vertices:
                        want = {self.action[g][c] for c in t.vertices[e]}
                        got = set(t2.vertices[img])
                        if want != got or len(t.vertices[e]) != len(t2.vertices[img]):
                            raise NotAnAction(
                                f"{g!r} does not preserve the vertex at {e!r}",
                                witness=(g, e),
                            )

    # -- basic action plumbing --------------------------------------------

    def act(self, g, e):
        return self.action[g][e]

    def act_tuple(self, g, edges):
        return tuple(self.action[g][e] for e in edges)

    def component(self, e) -> Tree:
        return self.forest.trees[self.forest.component_of(e)]

    def orbit(self, e) -> frozenset:
        return frozenset(self.action[g][e] for g in self.group.elements)

    def orbit_rep(self, e):
        """Least member of the edge orbit in forest DFS order."""
        order = {x: i for i, x in enumerate(self.forest.dfs_order())}
        return min(self.orbit(e), key=order.__getitem__)

    def orbit_name(self, e):
        return f"[{self.orbit_rep(e)}]"

    def edge_orbits(self):
        """Edge orbits, ordered by first appearance in forest DFS order."""
        if self._orbits is None:
            seen: set = set()
            out = []
            for e in self.forest.dfs_order():
                if e not in seen:
                    orb = self.orbit(e)
                    out.append(orb)
                    seen |= orb
            self._orbits = out
        return list(self._orbits)

    def isotropy(self, e) -> frozenset:
        if e not in self._isotropy:
            self._isotropy[e] = frozenset(
                g for g in self.group.elements if self.action[g][e] == e
            )
        return self._isotropy[e]

    def setwise_stabilizer(self, edges) -> frozenset:
        edges = frozenset(edges)
        return frozenset(
            g
            for g in self.group.elements
            if {self.action[g][e] for e in edges} == edges
        )

    def is_transitive(self) -> bool:
        roots = {t.root for t in self.forest.trees}
        return self.orbit(next(iter(roots))) == roots

    def component_orbit_reps(self):
        """One component index per orbit of components."""
        reps = []
        seen: set = set()
        for i, t in enumerate(self.forest.trees):
            if i not in seen:
                reps.append(i)
                for g in self.group.elements:
                    seen.add(self.forest.component_of(self.action[g][t.root]))
        return reps

    def base_decomposition(self):
        """``(H, T_*)`` with ``T_*`` the first component and ``H`` its stabilizer.

        For a transitive action the whole G-tree is recovered (up to the
        induced edge names) as the induction of ``T_*`` along ``H <= G``.
        """
        t = self.forest.trees[0]
        h = self.isotropy(t.root)
        return h, t

    # -- faces under the action -------------------------------------------

    def face_action(self, g, fd: FaceDescriptor) -> FaceDescriptor:
        root = self.action[g][fd.root]
        comp = self.component(root)
        leaves = sorted(
            (self.action[g][l] for l in fd.leaves), key=comp.dfs_index().__getitem__
        )
        removed = frozenset(self.action[g][e] for e in fd.removed)
        return face_descriptor(comp, root, tuple(leaves), removed)

    def face_isotropy(self, fd: FaceDescriptor) -> frozenset:
        return frozenset(
            g for g in self.group.elements if self.face_action(g, fd) == fd
        )

    def signature(self):
        if self._sig is None:
            self._sig = _gtree_signature(self)
        return self._sig

    def __repr__(self):
        k = len(self.forest.trees)
        return f"GTree({self.group.name}, components={k}, edges={len(self.forest.edges())})"


# -----------------------------------------------------------------------
# induction
# -----------------------------------------------------------------------

def _rename_tree(t: Tree, prefix: str) -> Tree:
    return Tree(
        f"{prefix}{t.root}",
        {
            f"{prefix}{e}": tuple(f"{prefix}{c}" for c in kids)
            for e, kids in t.vertices.items()
        },
    )


def induce(group: FiniteGroup, subgroup, tree: Tree, subaction) -> GTree:
    """Induce a G-tree from an H-tree along ``H <= G``.

    Components are indexed by the left cosets of ``H``; the component at the
    coset of ``rep`` is a copy of ``tree`` with edges renamed ``"rep.e"``.
    When ``H`` is all of ``G`` the tree is kept as-is, with its given action.
    """
    h = frozenset(subgroup)
    if set(subaction) != h:
        raise NotAnAction(
            "need exactly one permutation per subgroup element",
            witness=sorted(h ^ set(subaction)),
        )
    if h == set(group.elements):
        return GTree(group, Forest((tree,)), subaction)
    cosets = group.left_cosets(h)
    rep_of = {g: rep for rep, coset in cosets for g in coset}
    components = tuple(_rename_tree(tree, f"{rep}.") for rep, _ in cosets)
    action = {}
    for g in group.elements:
        perm = {}
        for rep, _ in cosets:
            gamma = group.mul(g, rep)
            rep2 = rep_of[gamma]
            hh = group.mul(group.inv(rep2), gamma)
            for e in tree.edges:
                perm[f"{rep}.{e}"] = f"{rep2}.{subaction[hh][e]}"
        action[g] = perm
    return GTree(group, Forest(components), action)


def trivial_action(group: FiniteGroup, forest) -> GTree:
    """Every group element fixes every edge; valid for any group."""
    forest = forest if isinstance(forest, Forest) else Forest(tuple(forest))
    ident = {e: e for e in forest.edges()}
    return GTree(group, forest, {g: dict(ident) for g in group.elements})


# -----------------------------------------------------------------------
# orbital faces
# -----------------------------------------------------------------------

@dataclass(frozen=True)
class OrbitalFace:
    """A single orbit of faces whose distinct members are edge-disjoint."""

    components: frozenset

    def edges(self) -> frozenset:
        out: set = set()
        for fd in self.components:
            out |= fd.as_tree().edges
        return frozenset(out)

    def inner_edges(self) -> frozenset:
        out: set = set()
        for fd in self.components:
            out |= fd.as_tree().inner_edges()
        return frozenset(out)

    def roots(self) -> frozenset:
        return frozenset(fd.root for fd in self.components)

    def degree(self) -> int:
        return sum(len(fd.as_tree().vertices) for fd in self.components)

    def is_suborbital(self, other) -> bool:
        return all(
            any(is_subface(v, u) for u in other.components) for v in self.components
        )

    def sort_key(self):
        return tuple(sorted(fd.sort_key() for fd in self.components))

    def __repr__(self):
        parts = ", ".join(sorted(map(repr, self.components)))
        return f"OrbitalFace[{parts}]"


def orbital_face(gtree: GTree, fd: FaceDescriptor) -> OrbitalFace:
    """The orbit of a face; raises if conjugates overlap without agreeing."""
    members = {gtree.face_action(g, fd) for g in gtree.group.elements}
    total = sum(len(m.as_tree().edges) for m in members)
    union: set = set()
    for m in members:
        union |= m.as_tree().edges
    if len(union) != total:
        raise OrbitMismatch(
            "conjugate faces overlap; the orbit is not a subforest", witness=fd
        )
    return OrbitalFace(frozenset(members))


def full_orbital_face(gtree: GTree) -> OrbitalFace:
    if not gtree.is_transitive():
        raise DendroidError("full orbital face needs a transitive action")
    return OrbitalFace(frozenset(full_face(t) for t in gtree.forest.trees))


def stick_orbital_face(gtree: GTree, e) -> OrbitalFace:
    return orbital_face(gtree, stick_face(gtree.component(e), e))


def enumerate_orbital_faces(gtree: GTree):
    """All orbital faces, one orbit of components at a time."""
    out = []
    seen: set = set()
    for i in gtree.component_orbit_reps():
        comp = gtree.forest.trees[i]
        for fd in enumerate_faces(comp):
            members = {gtree.face_action(g, fd) for g in gtree.group.elements}
            key = frozenset(members)
            if key in seen:
                continue
            seen.add(key)
            total = sum(len(m.as_tree().edges) for m in members)
            union: set = set()
            for m in members:
                union |= m.as_tree().edges
            if len(union) == total:
                out.append(OrbitalFace(key))
    out.sort(key=OrbitalFace.sort_key)
    return out


def minimal_orbital_face(gtree: GTree, fd: FaceDescriptor) -> OrbitalFace:
    """The smallest orbital face containing a given face.

    Closes off upward (outer closure), symmetrizes over the root's isotropy,
    takes the orbit, then contracts every inner-edge orbit that misses the
    original face.
    """
    ubar = fd.outer_closure()
    iso = gtree.isotropy(fd.root)
    conjugates = sorted(
        {gtree.face_action(g, ubar) for g in iso}, key=FaceDescriptor.sort_key
    )
    hu, _ = outer_union_intersection(conjugates)
    gu_bar = orbital_face(gtree, hu)
    support = fd.as_tree().edges
    drop: set = set()
    seen: set = set()
    for e in gu_bar.inner_edges():
        if e not in seen:
            orb = gtree.orbit(e)
            seen |= orb
            if not (orb & support):
                drop |= orb
    return OrbitalFace(
        frozenset(
            face_minus(w, drop & w.as_tree().inner_edges()) for w in gu_bar.components
        )
    )


def orbital_inner_face(gtree: GTree, face: OrbitalFace, orbit) -> OrbitalFace:
    """Contract one orbit of inner edges in every component."""
    orbit = frozenset(orbit)
    if not orbit:
        raise NotInner("empty edge orbit", witness=orbit)
    if any(gtree.orbit(e) != orbit for e in orbit):
        raise OrbitMismatch("not a single edge orbit", witness=sorted(orbit))
    if not orbit <= face.inner_edges():
        raise NotInner(
            "orbit contains non-inner edges of the face",
            witness=sorted(orbit - face.inner_edges()),
        )
    return OrbitalFace(
        frozenset(
            face_minus(w, orbit & w.as_tree().inner_edges())
            for w in face.components
        )
    )


def graft(gtree: GTree, lower: OrbitalFace, upper: OrbitalFace, orbit) -> OrbitalFace:
    """Glue ``upper`` onto ``lower`` along a fused orbit of edges.

    The fused orbit must be exactly the set of roots of ``upper`` and must
    sit among the leaves of ``lower``; edge names are preserved, so grafting
    is a union of subtrees of the common ambient forest.
    """
    orbit = frozenset(orbit)
    if upper.roots() != orbit:
        raise OrbitMismatch(
            "roots of the upper face must form the fused orbit",
            witness=sorted(upper.roots() ^ orbit),
        )
    lower_leaves: set = set()
    for w in lower.components:
        lower_leaves |= set(w.leaves)
    if not orbit <= lower_leaves:
        raise OrbitMismatch(
            "fused orbit must consist of leaves of the lower face",
            witness=sorted(orbit - lower_leaves),
        )
    by_root = {w.root: w for w in upper.components}
    out = []
    for w in lower.components:
        tree = w.as_tree()
        edges = set(tree.edges)
        vertices = dict(tree.vertices)
        for leaf in w.leaves:
            if leaf in orbit:
                glued = by_root[leaf].as_tree()
                edges |= glued.edges
                vertices.update(glued.vertices)
        comp = gtree.component(w.root)
        sub = Tree(w.root, vertices)
        if set(sub.edges) != edges:
            raise OrbitMismatch("grafted pieces do not assemble", witness=w.root)
        out.append(descriptor_from_subtree(comp, sub))
    return OrbitalFace(frozenset(out))


# -----------------------------------------------------------------------
# quotients
# -----------------------------------------------------------------------

@dataclass(frozen=True)
class Quotient:
    """The tree of edge orbits of a transitive G-tree."""

    tree: Tree
    to_orbit: tuple  # pairs (edge, orbit name)
    members: tuple  # pairs (orbit name, frozenset of edges)

    def orbit_of(self, e):
        return dict(self.to_orbit)[e]

    def members_of(self, name) -> frozenset:
        return dict(self.members)[name]


def quotient(gtree: GTree) -> Quotient:
    if not gtree.is_transitive():
        raise DendroidError("quotients are only formed for transitive actions")
    order = {e: i for i, e in enumerate(gtree.forest.dfs_order())}
    orbits = gtree.edge_orbits()
    name_of = {}
    members = []
    for orb in orbits:
        rep = min(orb, key=order.__getitem__)
        name = f"[{rep}]"
        members.append((name, orb))
        for e in orb:
            name_of[e] = name
    vertices = {}
    for orb_name, orb in members:
        rep = min(orb, key=order.__getitem__)
        comp = gtree.component(rep)
        if rep in comp.vertices:
            kids = []
            for c in comp.vertices[rep]:
                if name_of[c] not in kids:
                    kids.append(name_of[c])
            vertices[orb_name] = tuple(kids)
    root = name_of[gtree.forest.trees[0].root]
    tree = Tree(root, vertices)
    to_orbit = tuple(sorted(name_of.items(), key=lambda kv: order[kv[0]]))
    return Quotient(tree, to_orbit, tuple(members))


def quotient_face(q: Quotient, gtree: GTree, face: OrbitalFace) -> FaceDescriptor:
    """The face of the quotient tree an orbital face descends to."""
    w = min(face.components, key=FaceDescriptor.sort_key)
    name_of = dict(q.to_orbit)
    root = name_of[w.root]
    leaves = []
    for l in w.leaves:
        if name_of[l] not in leaves:
            leaves.append(name_of[l])
    leaves.sort(key=q.tree.dfs_index().__getitem__)
    removed = frozenset(name_of[e] for e in w.removed)
    return face_descriptor(q.tree, root, tuple(leaves), removed)


def quotient_face_bijection(gtree: GTree):
    """Orbital faces correspond one-to-one with faces of the quotient."""
    q = quotient(gtree)
    orbital = enumerate_orbital_faces(gtree)
    forward = {}
    for r in orbital:
        forward[r] = quotient_face(q, gtree, r)
    downstairs = set(enumerate_faces(q.tree))
    image = set(forward.values())
    if len(image) != len(forward) or image != downstairs:
        raise DendroidError(
            "orbital faces do not match quotient faces",
            witness=(len(forward), len(image), len(downstairs)),
        )
    return q, forward


# -----------------------------------------------------------------------
# equivariant maps
# -----------------------------------------------------------------------

class GTreeMap:
    """An edge map of G-forests: componentwise monotone and equivariant."""

    __slots__ = ("source", "target", "edges")

    def __init__(self, source: GTree, target: GTree, edges, check=True):
        self.source = source
        self.target = target
        self.edges = dict(edges)
        if check:
            self._validate()

    def _validate(self):
        for t in self.source.forest.trees:
            images = {self.edges[e] for e in t.edges}
            comps = {self.target.forest.component_of(i) for i in images}
            if len(comps) != 1:
                raise DendroidError(
                    "a component must land in a single component", witness=t.root
                )
            comp = self.target.forest.trees[comps.pop()]
            sub = {e: self.edges[e] for e in t.edges}
            fail = monotone_failure(TreeMap(t, comp, sub))
            if fail is not None:
                raise DendroidError(f"not monotone: {fail}", witness=fail)
        for g in self.source.group.elements:
            for e in self.source.forest.edges():
                if self.edges[self.source.act(g, e)] != self.target.act(
                    g, self.edges[e]
                ):
                    raise NotEquivariant(
                        "edge map does not commute with the action", witness=(g, e)
                    )

    def is_injective(self):
        vals = list(self.edges.values())
        return len(set(vals)) == len(vals)

    def require_injective(self):
        if not self.is_injective():
            raise NotInjective("edge map identifies edges")

    def __call__(self, e):
        return self.edges[e]

    def __eq__(self, other):
        if not isinstance(other, GTreeMap):
            return NotImplemented
        return self.edges == other.edges

    def __hash__(self):
        return hash(tuple(sorted(self.edges.items())))


def enumerate_equivariant_maps(source: GTree, target: GTree):
    """Brute-force enumeration of equivariant forest maps (small inputs only)."""
    reps = source.component_orbit_reps()
    choices = []
    for i in reps:
        comp = source.forest.trees[i]
        local = []
        for t2 in target.forest.trees:
            for edge_map in enumerate_maps(comp, t2):
                local.append(edge_map)
        choices.append(local)
    out = []
    seen: set = set()
    for picks in itertools.product(*choices):
        edges = {}
        ok = True
        for i, base in zip(reps, picks):
            comp = source.forest.trees[i]
            for g in source.group.elements:
                for e in comp.edges:
                    key = source.act(g, e)
                    val = target.act(g, base[e])
                    if edges.get(key, val) != val:
                        ok = False
                        break
                    edges[key] = val
                if not ok:
                    break
            if not ok:
                break
        if not ok or len(edges) != len(source.forest.edges()):
            continue
        sig = tuple(sorted(edges.items()))
        if sig in seen:
            continue
        seen.add(sig)
        try:
            out.append(GTreeMap(source, target, edges))
        except DendroidError:
            continue
    return out


# -----------------------------------------------------------------------
# isomorphism signatures
# -----------------------------------------------------------------------

def _planarizations(t: Tree):
    """All shape dicts obtained by reordering children at each vertex."""
    edges_with_vertices = sorted(t.vertices, key=t.dfs_index().__getitem__)
    per_vertex = [
        list(itertools.permutations(t.vertices[e])) for e in edges_with_vertices
    ]
    for combo in itertools.product(*per_vertex):
        yield dict(zip(edges_with_vertices, combo))


def _dfs_names(root, vertices):
    order = []

    def walk(e):
        order.append(e)
        for c in vertices.get(e, ()):
            walk(c)

    walk(root)
    return {e: i for i, e in enumerate(order)}


def _gtree_signature(gt: GTree):
    """A canonical encoding, minimized over component orderings and
    replanarizations; equal signatures mean equivariantly isomorphic."""
    trees = gt.forest.trees
    best = None
    for comp_order in itertools.permutations(range(len(trees))):
        for combo in itertools.product(
            *(_planarizations(trees[i]) for i in comp_order)
        ):
            naming = {}
            shapes = []
            offset = 0
            for i, vertices in zip(comp_order, combo):
                t = trees[i]
                local = _dfs_names(t.root, vertices)
                for e, idx in local.items():
                    naming[e] = offset + idx
                shape = tuple(
                    (naming[e], tuple(naming[c] for c in vertices[e]))
                    for e in sorted(vertices, key=local.__getitem__)
                )
                shapes.append((naming[t.root], shape))
                offset += len(t.edges)
            perms = tuple(
                tuple(
                    naming[gt.act(g, e)]
                    for e in sorted(naming, key=naming.__getitem__)
                )
                for g in gt.group.elements
            )
            enc = (tuple(shapes), perms)
            if best is None or enc < best:
                best = enc
    return best


def gtree_isomorphic(a: GTree, b: GTree) -> bool:
    return (
        a.group.elements == b.group.elements
        and a.group.table == b.group.table
        and a.signature() == b.signature()
    )


# -----------------------------------------------------------------------
# enumeration up to isomorphism
# -----------------------------------------------------------------------

def unordered_shape_key(t: Tree):
    best = None
    for vertices in _planarizations(t):
        naming = _dfs_names(t.root, vertices)
        shape = tuple(
            (naming[e], tuple(naming[c] for c in vertices[e]))
            for e in sorted(vertices, key=naming.__getitem__)
        )
        if best is None or shape < best:
            best = shape
    return best


def enumerate_trees(max_degree, max_arity):
    """All trees up to (non-planar) isomorphism within the given bounds."""
    eta = Tree("e0", {})
    layers = {0: [eta]}
    seen = {unordered_shape_key(eta)}
    out = [eta]
    for degree in range(1, max_degree + 1):
        layer = []
        for smaller in layers[degree - 1]:
            frontier = list(smaller.leaves()) or []
            for leaf in frontier:
                for arity in range(0, max_arity + 1):
                    fresh = [f"e{len(smaller.edges) + k}" for k in range(arity)]
                    vertices = dict(smaller.vertices)
                    vertices[leaf] = tuple(fresh)
                    grown = Tree(smaller.root, vertices)
                    key = unordered_shape_key(grown)
                    if key not in seen:
                        seen.add(key)
                        layer.append(grown)
                        out.append(grown)
        layers[degree] = layer
    return out


def _action_homomorphisms(group_elems, mul, identity, autos):
    """All maps subgroup -> Aut(t) that are homomorphisms."""
    elems = sorted(group_elems)
    out = []
    for values in itertools.product(range(len(autos)), repeat=len(elems)):
        phi = dict(zip(elems, values))
        if any(autos[phi[identity]][e] != e for e in autos[0]):
            continue
        ok = True
        for a in elems:
            for b in elems:
                composed = {
                    e: autos[phi[a]][autos[phi[b]][e]] for e in autos[0]
                }
                if composed != autos[phi[mul(a, b)]]:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append({a: dict(autos[v]) for a, v in phi.items()})
    return out


def enumerate_gtrees(group: FiniteGroup, max_degree, max_arity):
    """All G-trees (transitive actions) with component bounds, up to iso."""
    from dendroid.treemaps import automorphisms

    base_trees = enumerate_trees(max_degree, max_arity)
    out = []
    seen: set = set()
    for h in group.subgroups():
        for t in base_trees:
            autos = [dict(m) for m in automorphisms(t)]
            for sub in _action_homomorphisms(
                h, group.mul, group.identity, autos
            ):
                gt = induce(group, h, t, sub)
                sig = gt.signature()
                if sig not in seen:
                    seen.add(sig)
                    out.append(gt)
    out.sort(key=lambda gt: (len(gt.forest.edges()), gt.signature()))
    return out
