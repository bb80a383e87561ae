"""Finite presheaves on truncated tree categories, operad nerves, and
strict-lifting checks.

A :class:`Truncation` fixes a finite window of tree shapes (degree and
arity bounds) and materializes the full subcategories it induces, both
plain and equivariant.  Presheaves carry one finite value set per shape
plus a contravariant action along tree maps; nerves of finite
:class:`SetOperad` tables land in this window.  Strict Segal and horn
lifting conditions are decided honestly, by exhaustive enumeration of
compatible families over the relevant subcomplexes, with the equivariant
value of a presheaf at a G-tree computed by the twisted fixed-point
formula over its base component.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from dendroid.broadposet import Tree, broad_closure
from dendroid.complexes import Complex, all_faces, representable, segal_core, horn, orbital_horn
from dendroid.equivariance import (
    GTree,
    enumerate_equivariant_maps,
    enumerate_gtrees,
    enumerate_trees,
    unordered_shape_key,
)
from dendroid.errors import (
    AxiomViolation,
    DendroidError,
    TruncationTooSmall,
)
from dendroid.treemaps import (
    TreeMap,
    enumerate_maps,
    is_subface,
    subfaces,
    tree_isomorphisms,
)

_UNSET = object()


def _member_key(fd):
    return (
        repr(fd.root),
        tuple(map(repr, fd.leaves)),
        tuple(sorted(map(repr, fd.removed))),
    )


def _invert(edges: dict) -> dict:
    return {v: e for e, v in edges.items()}


# -- truncations ---------------------------------------------------------------


@dataclass(eq=False)
class Truncation:
    """A finite window on tree shapes: all trees with at most ``degree``
    vertices, each of arity at most ``arity``, plus the G-trees whose
    components satisfy the same bounds."""

    group: object
    degree: int
    arity: int
    _objects: tuple = field(default=None, repr=False)
    _gobjects: tuple = field(default=None, repr=False)
    _shape_index: dict = field(default_factory=dict, repr=False)
    _lookup: dict = field(default_factory=dict, repr=False)
    _maps: dict = field(default_factory=dict, repr=False)
    _gmaps: dict = field(default_factory=dict, repr=False)

    @property
    def objects(self) -> tuple:
        if self._objects is None:
            self._objects = enumerate_trees(self.degree, self.arity)
            for i, t in enumerate(self._objects):
                self._shape_index[unordered_shape_key(t)] = i
        return self._objects

    @property
    def gobjects(self) -> tuple:
        if self._gobjects is None:
            self._gobjects = enumerate_gtrees(self.group, self.degree, self.arity)
        return self._gobjects

    def contains_tree(self, t: Tree) -> bool:
        return len(t.vertices) <= self.degree and all(
            len(cs) <= self.arity for cs in t.vertices.values()
        )

    def object_of(self, t: Tree) -> tuple:
        """``(index, iso)`` with ``iso`` an edge bijection from the
        representative object onto ``t``."""
        key = t.literal_key()
        hit = self._lookup.get(key)
        if hit is not None:
            return hit
        self.objects
        idx = self._shape_index.get(unordered_shape_key(t))
        if idx is None:
            raise TruncationTooSmall(
                "tree shape outside the (degree, arity) window",
                witness=(self.degree, self.arity, sorted(map(repr, t.edges))),
            )
        iso = tree_isomorphisms(self._objects[idx], t)[0]
        hit = (idx, iso)
        self._lookup[key] = hit
        return hit

    def maps(self, i: int, j: int) -> tuple:
        """All tree maps ``objects[i] -> objects[j]``, as :class:`TreeMap`."""
        hit = self._maps.get((i, j))
        if hit is None:
            src, tgt = self.objects[i], self.objects[j]
            hit = tuple(TreeMap(src, tgt, d) for d in enumerate_maps(src, tgt))
            self._maps[(i, j)] = hit
        return hit

    def gmaps(self, i: int, j: int) -> tuple:
        hit = self._gmaps.get((i, j))
        if hit is None:
            hit = enumerate_equivariant_maps(self.gobjects[i], self.gobjects[j])
            self._gmaps[(i, j)] = hit
        return hit


def truncation(group, degree: int, arity: int) -> Truncation:
    if degree < 0 or arity < 0:
        raise DendroidError("truncation bounds must be non-negative")
    return Truncation(group, degree, arity)


# -- presheaves ----------------------------------------------------------------


@dataclass(eq=False)
class TruncatedPresheaf:
    """A presheaf on the truncated tree category, with a compatible
    group action on values.

    ``values[i]`` is the value tuple at ``truncation.objects[i]``;
    ``act(f, v)`` restricts ``v`` along a tree map ``f`` between object
    trees (contravariantly); ``g_act(g, i, v)`` is the structural action,
    natural in tree maps.
    """

    truncation: Truncation
    values: dict
    act: object
    g_act: object
    label: str = "presheaf"

    def value_at(self, t: Tree) -> tuple:
        idx, _ = self.truncation.object_of(t)
        return self.values[idx]


def constant_presheaf(tr: Truncation, points=("*",), label="constant") -> TruncatedPresheaf:
    points = tuple(points)
    values = {i: points for i in range(len(tr.objects))}
    return TruncatedPresheaf(tr, values, lambda f, v: v, lambda g, i, v: v, label)


def perturbed_constant(tr: Truncation) -> TruncatedPresheaf:
    """The two-point constant presheaf with a phantom extra value glued in
    at the deepest linear chain: restrictions into the chain collapse the
    phantom, so functoriality survives but unique Segal lifts do not."""
    if tr.degree < 2:
        raise TruncationTooSmall(
            "perturbation needs a linear chain of degree >= 2",
            witness=(tr.degree, tr.arity),
        )
    chain = None
    for i, t in enumerate(tr.objects):
        if len(t.vertices) == tr.degree and all(len(cs) == 1 for cs in t.vertices.values()):
            chain = i
            break
    if chain is None:
        raise TruncationTooSmall("no linear chain in the window", witness=tr.degree)
    marked = tr.objects[chain]

    def act(f: TreeMap, v):
        if f.target is marked or f.target.literal_key() == marked.literal_key():
            if f.edges == {e: e for e in marked.edges}:
                return v
            return 0 if v == 2 else v
        return v

    values = {i: ((0, 1, 2) if i == chain else (0, 1)) for i in range(len(tr.objects))}
    return TruncatedPresheaf(tr, values, act, lambda g, i, v: v, "perturbed-constant")


def validate_presheaf(x: TruncatedPresheaf, limit: int = None) -> None:
    """Brute-force functoriality and equivariance over the truncation.

    Checks identities, all composable pairs of maps, the group law and the
    naturality square of the structural action; an optional ``limit`` caps
    the number of composition checks (taken in deterministic order).
    """
    tr = x.truncation
    group = tr.group
    n = len(tr.objects)
    for i in range(n):
        ident = TreeMap(tr.objects[i], tr.objects[i], {e: e for e in tr.objects[i].edges})
        for v in x.values[i]:
            if x.act(ident, v) != v:
                raise AxiomViolation("identity map must act trivially", witness=(i, v))
            for g in group.elements:
                gv = x.g_act(g, i, v)
                if gv not in x.values[i]:
                    raise AxiomViolation("action leaves the value set", witness=(g, i, v))
                for h in group.elements:
                    if x.g_act(h, i, gv) != x.g_act(group.mul(h, g), i, v):
                        raise AxiomViolation("group law fails on values", witness=(h, g, i, v))
    checked = 0
    for i in range(n):
        for j in range(n):
            for f in tr.maps(i, j):
                for v in x.values[j]:
                    fv = x.act(f, v)
                    if fv not in x.values[i]:
                        raise AxiomViolation(
                            "restriction leaves the value set", witness=(i, j, v)
                        )
                    for g in group.elements:
                        if x.act(f, x.g_act(g, j, v)) != x.g_act(g, i, fv):
                            raise AxiomViolation(
                                "action not natural in tree maps", witness=(g, i, j, v)
                            )
            for k in range(n):
                for f in tr.maps(i, j):
                    for gmap in tr.maps(j, k):
                        comp = TreeMap(
                            tr.objects[i],
                            tr.objects[k],
                            {e: gmap.edges[f.edges[e]] for e in f.edges},
                        )
                        for v in x.values[k]:
                            if x.act(comp, v) != x.act(f, x.act(gmap, v)):
                                raise AxiomViolation(
                                    "functoriality fails on a composable pair",
                                    witness=(i, j, k, v),
                                )
                            checked += 1
                            if limit is not None and checked >= limit:
                                return


# -- finite operads ------------------------------------------------------------


@dataclass(eq=False)
class SetOperad:
    """A finite symmetric colored operad given by tables.

    ``ops`` maps an operation name to its ``(input colors, output color)``
    signature; ``compose_rule(p, qs)`` is full composition (every slot at
    once), ``perm_rule(p, sigma)`` the symmetric action with
    ``result.inputs[i] == p.inputs[sigma[i]]``.  ``action``, when present,
    sends a group element to a ``(color map, operation map)`` pair.
    """

    label: str
    colors: tuple
    ops: dict
    units: dict
    compose_rule: object
    perm_rule: object
    action: dict = None

    def signature(self, name):
        return self.ops[name]

    def arity(self, name) -> int:
        return len(self.ops[name][0])

    def compose(self, p, qs: tuple):
        ins, _ = self.ops[p]
        if len(qs) != len(ins):
            raise AxiomViolation("composition arity mismatch", witness=(p, qs))
        for c, q in zip(ins, qs):
            if self.ops[q][1] != c:
                raise AxiomViolation("composition color mismatch", witness=(p, q, c))
        return self.compose_rule(p, qs)

    def perm(self, p, sigma: tuple):
        k = self.arity(p)
        if sorted(sigma) != list(range(k)):
            raise AxiomViolation("not a permutation of the inputs", witness=(p, sigma))
        if k <= 1:
            return p
        return self.perm_rule(p, sigma)

    def ops_by_signature(self) -> dict:
        by = {}
        for name, (ins, out) in self.ops.items():
            by.setdefault((len(ins), out), []).append(name)
        return {k: tuple(sorted(v, key=repr)) for k, v in by.items()}


def terminal_operad(max_arity: int = 9) -> SetOperad:
    ops = {("u", n): (("*",) * n, "*") for n in range(max_arity + 1)}

    def compose_rule(p, qs):
        total = sum(q[1] for q in qs)
        if total > max_arity:
            raise AxiomViolation("composite exceeds the arity window", witness=(p, qs))
        return ("u", total)

    return SetOperad(
        "terminal", ("*",), ops, {"*": ("u", 1)}, compose_rule, lambda p, s: p
    )


def parity_operad(max_arity: int = 9) -> SetOperad:
    """Operations ``(arity, parity bit)`` of a Z/2 commutative monoid;
    nullary operations make it an example with constants."""
    ops = {("m", n, b): (("*",) * n, "*") for n in range(max_arity + 1) for b in (0, 1)}

    def compose_rule(p, qs):
        total = sum(q[1] for q in qs)
        if total > max_arity:
            raise AxiomViolation("composite exceeds the arity window", witness=(p, qs))
        bit = p[2]
        for q in qs:
            bit ^= q[2]
        return ("m", total, bit)

    return SetOperad(
        "parity", ("*",), ops, {"*": ("m", 1, 0)}, compose_rule, lambda p, s: p
    )


def two_color_iso_operad() -> SetOperad:
    """Two colors and a single invertible unary arrow between them."""
    ops = {
        ("id", "a"): (("a",), "a"),
        ("id", "b"): (("b",), "b"),
        ("f",): (("a",), "b"),
        ("g",): (("b",), "a"),
    }
    table = {
        (("id", "a"), ("id", "a")): ("id", "a"),
        (("id", "b"), ("id", "b")): ("id", "b"),
        (("id", "b"), ("f",)): ("f",),
        (("f",), ("id", "a")): ("f",),
        (("id", "a"), ("g",)): ("g",),
        (("g",), ("id", "b")): ("g",),
        (("f",), ("g",)): ("id", "b"),
        (("g",), ("f",)): ("id", "a"),
    }
    return SetOperad(
        "two-color-iso",
        ("a", "b"),
        ops,
        {"a": ("id", "a"), "b": ("id", "b")},
        lambda p, qs: table[(p, qs[0])],
        lambda p, s: p,
    )


def tree_operad(t: Tree, group=None, action: dict = None) -> SetOperad:
    """The colored operad freely generated by a tree: colors are edges and
    an operation is an ordered listing of a broad relation."""
    idx = t.dfs_index()
    colors = tuple(sorted(t.edges, key=idx.get))
    relations = set()
    for rel in broad_closure(t):
        relations.add((tuple(rel.source), rel.target))
    ops = {}
    for src, tgt in relations:
        for perm in set(permutations(src)):
            ops[(perm, tgt)] = (perm, tgt)
    op_action = None
    if action is not None:
        op_action = {}
        for g, emap in action.items():
            cmap = dict(emap)
            omap = {
                name: (tuple(emap[e] for e in name[0]), emap[name[1]]) for name in ops
            }
            op_action[g] = (cmap, omap)

    def compose_rule(p, qs):
        src = []
        for q in qs:
            src.extend(q[0])
        name = (tuple(src), p[1])
        if name not in ops:
            raise AxiomViolation("composite is not a relation of the tree", witness=name)
        return name

    def perm_rule(p, sigma):
        return (tuple(p[0][i] for i in sigma), p[1])

    return SetOperad(
        "tree-operad", colors, ops, {e: ((e,), e) for e in colors},
        compose_rule, perm_rule, op_action,
    )


def validate_set_operad(o: SetOperad, limit: int = 4000) -> None:
    """Brute-force the operad axioms on the table window: unit shapes and
    unit laws everywhere, symmetric-action composition, and associativity
    on composable pairs in deterministic order up to ``limit`` checks."""
    for c, u in o.units.items():
        if o.ops[u] != ((c,), c):
            raise AxiomViolation("unit has the wrong signature", witness=(c, u))
    by = o.ops_by_signature()
    names = sorted(o.ops, key=repr)
    for p in names:
        ins, out = o.ops[p]
        if any(c not in o.colors for c in ins + (out,)):
            raise AxiomViolation("operation uses an unknown color", witness=p)
        if o.compose(p, tuple(o.units[c] for c in ins)) != p:
            raise AxiomViolation("right unit law fails", witness=p)
        if o.compose(o.units[out], (p,)) != p:
            raise AxiomViolation("left unit law fails", witness=p)
        k = len(ins)
        if k > 1:
            for sigma in list(permutations(range(k)))[:6]:
                q = o.perm(p, sigma)
                if o.ops[q] != (tuple(ins[i] for i in sigma), out):
                    raise AxiomViolation("symmetric action breaks signatures", witness=(p, sigma))
                for tau in list(permutations(range(k)))[:6]:
                    lhs = o.perm(q, tau)
                    rhs = o.perm(p, tuple(sigma[tau[i]] for i in range(k)))
                    if lhs != rhs:
                        raise AxiomViolation("symmetric action is not an action", witness=(p, sigma, tau))
    if o.action is not None:
        for g, (cmap, omap) in o.action.items():
            for p in names:
                ins, out = o.ops[p]
                if o.ops[omap[p]] != (tuple(cmap[c] for c in ins), cmap[out]):
                    raise AxiomViolation("group action breaks signatures", witness=(g, p))
    checked = 0
    for p in names:
        ins, _ = o.ops[p]
        pools = [by.get((1, c), ()) + by.get((0, c), ()) + by.get((2, c), ()) for c in ins]
        stack = [()]
        for pool in pools:
            stack = [s + (q,) for s in stack for q in pool]
        for qs in stack:
            try:
                pq = o.compose(p, qs)
            except AxiomViolation:
                continue
            inner = []
            ok = True
            for q in qs:
                try:
                    inner.append(o.compose(q, tuple(o.units[c] for c in o.ops[q][0])))
                except AxiomViolation:
                    ok = False
                    break
            if ok and o.compose(p, tuple(inner)) != pq:
                raise AxiomViolation("associativity fails against units", witness=(p, qs))
            checked += 1
            if checked >= limit:
                return


# -- nerves ---------------------------------------------------------------------


def _evaluate(o: SetOperad, tree: Tree, coloring: dict, assigned: dict, e, cut: frozenset):
    """Composite of the assigned operations deriving the relation
    ``cut <= e`` inside ``tree``; returns ``(operation, slot labels)``."""
    if e in cut:
        return o.units[coloring[e]], (e,)
    cs = tree.vertices.get(e)
    if cs is None:
        raise AxiomViolation("derivation fell off a leaf", witness=(e, sorted(map(repr, cut))))
    parts = [_evaluate(o, tree, coloring, assigned, c, cut) for c in cs]
    op = o.compose(assigned[e], tuple(p[0] for p in parts))
    labels = []
    for p in parts:
        labels.extend(p[1])
    return op, tuple(labels)


def nerve(o: SetOperad, tr: Truncation) -> TruncatedPresheaf:
    """Color-consistent assignments of operations to vertices, with the
    restriction along a tree map given by composing along derivations."""
    for c in o.colors:
        if c not in o.units:
            raise AxiomViolation("operad has a unitless color", witness=c)
    for c, u in o.units.items():
        if o.ops.get(u) != ((c,), c):
            raise AxiomViolation("unit has the wrong signature", witness=(c, u))
    by = o.ops_by_signature()

    def object_values(t: Tree) -> tuple:
        order = t.dfs_order()
        vertex_order = tuple(e for e in order if e in t.vertices)
        out = []

        def fill(i, coloring, assigned):
            if i == len(order):
                out.append(
                    (
                        tuple(coloring[e] for e in order),
                        tuple(assigned[e] for e in vertex_order),
                    )
                )
                return
            e = order[i]
            cs = t.vertices.get(e)
            if cs is None:
                fill(i + 1, coloring, assigned)
                return
            for op in by.get((len(cs), coloring[e]), ()):
                ins = o.ops[op][0]
                for c, col in zip(cs, ins):
                    coloring[c] = col
                assigned[e] = op
                fill(i + 1, coloring, assigned)
            for c in cs:
                coloring.pop(c, None)
            assigned.pop(e, None)

        for root_color in o.colors:
            fill(0, {order[0]: root_color}, {})
        return tuple(sorted(out))

    values = {i: object_values(t) for i, t in enumerate(tr.objects)}

    def act(f: TreeMap, v):
        src, tgt = f.source, f.target
        t_order = tgt.dfs_order()
        t_vertex = [e for e in t_order if e in tgt.vertices]
        coloring = dict(zip(t_order, v[0]))
        assigned = dict(zip(t_vertex, v[1]))
        s_order = src.dfs_order()
        new_colors = tuple(coloring[f.edges[e]] for e in s_order)
        new_ops = []
        for e in s_order:
            cs = src.vertices.get(e)
            if cs is None:
                continue
            images = tuple(f.edges[c] for c in cs)
            if len(cs) == 1 and images[0] == f.edges[e]:
                new_ops.append(o.units[coloring[images[0]]])
                continue
            op, labels = _evaluate(o, tgt, coloring, assigned, f.edges[e], frozenset(images))
            if labels != images:
                op = o.perm(op, tuple(labels.index(x) for x in images))
            new_ops.append(op)
        return (new_colors, tuple(new_ops))

    if o.action is None:
        g_act = lambda g, i, v: v
    else:

        def g_act(g, i, v):
            cmap, omap = o.action[g]
            return (tuple(cmap[c] for c in v[0]), tuple(omap[p] for p in v[1]))

    return TruncatedPresheaf(tr, values, act, g_act, f"nerve({o.label})")


# -- representables and subcomplex presheaves ------------------------------------


def _image_descriptor(m: TreeMap, factorize):
    """The nondegenerate image of a monotone map into an ambient tree."""
    from dendroid.treemaps import descriptor_from_subtree

    deg, inner, outer = factorize(m)
    mid = inner.source
    comp = {e: outer.edges[inner.edges[e]] for e in mid.edges}
    image = Tree(
        comp[mid.root],
        {comp[e]: tuple(comp[c] for c in cs) for e, cs in mid.vertices.items()},
    )
    return descriptor_from_subtree(m.target, image)


def representable_presheaf(tr: Truncation, gtree: GTree, cx: Complex = None, label=None) -> TruncatedPresheaf:
    """Tree maps into the components of ``gtree``, optionally filtered to
    those whose image face lies in a subcomplex; the structural action is
    postcomposition."""
    from dendroid.treemaps import factorize

    components = tuple(gtree.forest.trees)
    allowed = None
    if cx is not None:
        allowed = set(cx.members)

    def admits(obj: Tree, edges: dict) -> bool:
        if allowed is None:
            return True
        comp = next(c for c in components if edges[obj.root] in c.edges)
        fd = _image_descriptor(TreeMap(obj, comp, edges), factorize)
        return fd in allowed

    values = {}
    for i, obj in enumerate(tr.objects):
        vals = []
        for comp in components:
            for edges in enumerate_maps(obj, comp):
                if admits(obj, edges):
                    vals.append(tuple(edges[e] for e in obj.dfs_order()))
        values[i] = tuple(sorted(vals))

    def act(f: TreeMap, v):
        lut = dict(zip(f.target.dfs_order(), v))
        return tuple(lut[f.edges[e]] for e in f.source.dfs_order())

    def g_act(g, i, v):
        return tuple(gtree.act(g, e) for e in v)

    return TruncatedPresheaf(
        tr, values, act, g_act, label or f"representable({gtree.orbit_name(components[0].root)})"
    )


# -- compatible families over complexes ------------------------------------------


def _transport(x: TruncatedPresheaf, gtree: GTree, g, idx, iso_src: dict, iso_dst: dict):
    """Value transport along a group element carrying one face onto
    another: structural action first, then restriction along the induced
    object self-map."""
    inv_dst = _invert(iso_dst)
    obj = x.truncation.objects[idx]
    edges = {inv_dst[gtree.act(g, v)]: e for e, v in iso_src.items()}
    back = TreeMap(obj, obj, edges)
    cache = {}

    def move(v):
        hit = cache.get(v)
        if hit is None:
            hit = x.act(back, x.g_act(g, idx, v))
            cache[v] = hit
        return hit

    return move


def hom_families(x: TruncatedPresheaf, gtree: GTree, cx: Complex) -> tuple:
    """All equivariant presheaf maps from a subcomplex of the representable
    of ``gtree`` into ``x``, as value tuples aligned with the member list.

    Returns ``(members, families)``: the windowed members in canonical
    order, and every compatible, equivariant assignment of values to them.
    Compatibility is generated by restriction to subfaces of the maximal
    members; equivariance is placed orbitwise and stability is enforced at
    orbit representatives.
    """
    tr = x.truncation
    members = [fd for fd in cx.members if tr.contains_tree(fd.as_tree())]
    members.sort(key=_member_key)
    if not members:
        return (), ((),)
    pos = {fd: i for i, fd in enumerate(members)}
    info = {fd: tr.object_of(fd.as_tree()) for fd in members}
    subs = {fd: subfaces(fd) for fd in members}
    member_set = set(members)
    maximal = [
        fd
        for fd in members
        if not any(other is not fd and fd != other and fd in subs[other] for other in members)
    ]

    elements = tuple(gtree.group.elements)
    ident = gtree.group.identity

    def constraints(fd):
        """Positions and transports of the member subfaces of ``fd``."""
        idx, iso = info[fd]
        inv = _invert(iso)
        out = []
        for sub in subs[fd]:
            if sub == fd or sub not in member_set:
                continue
            s_idx, s_iso = info[sub]
            cmap = TreeMap(
                tr.objects[s_idx],
                tr.objects[idx],
                {e: inv[v] for e, v in s_iso.items()},
            )
            cache = {}

            def move(v, cmap=cmap, cache=cache):
                hit = cache.get(v)
                if hit is None:
                    hit = x.act(cmap, v)
                    cache[v] = hit
                return hit

            out.append((pos[sub], move))
        return out

    seen = set()
    orbits = []
    for fd in maximal:
        if fd in seen:
            continue
        idx, iso = info[fd]
        placements = []
        stabilizers = []
        for g in elements:
            img = gtree.face_action(g, fd)
            # descriptor labels are unique across components, so equality
            # alone identifies a stabilizing element
            if img == fd:
                if g != ident:
                    stabilizers.append(_transport(x, gtree, g, idx, iso, iso))
                continue
            if img not in seen:
                seen.add(img)
                placements.append(
                    (img, _transport(x, gtree, g, idx, iso, info[img][1]))
                )
        seen.add(fd)
        cons = {m: constraints(m) for m, _ in placements}
        cons[fd] = constraints(fd)
        orbits.append((fd, idx, stabilizers, placements, cons))

    store = [_UNSET] * len(members)
    out = []

    def place(p, val, undo):
        cur = store[p]
        if cur is not _UNSET:
            return cur == val
        store[p] = val
        undo.append(p)
        return True

    def settle(fd, val, cons, undo):
        if not place(pos[fd], val, undo):
            return False
        for p, move in cons[fd]:
            if not place(p, move(val), undo):
                return False
        return True

    def search(k):
        if k == len(orbits):
            out.append(tuple(store))
            return
        rep, idx, stabilizers, placements, cons = orbits[k]
        for v in x.values[idx]:
            if any(move(v) != v for move in stabilizers):
                continue
            undo = []
            ok = settle(rep, v, cons, undo)
            if ok:
                for img, move in placements:
                    if not settle(img, move(v), cons, undo):
                        ok = False
                        break
            if ok:
                search(k + 1)
            while undo:
                store[undo.pop()] = _UNSET

    search(0)
    out.sort(key=lambda fam: tuple(map(repr, fam)))
    return tuple(members), tuple(out)


# -- strictness reports -----------------------------------------------------------


@dataclass(frozen=True)
class StrictReport:
    ok: bool
    detail: str = ""

    def __bool__(self):
        return self.ok


def strict_against(x: TruncatedPresheaf, gtree: GTree, cx: Complex, full=None) -> StrictReport:
    """Unique-extension test: restriction from families over the whole
    representable to families over the subcomplex must be a bijection."""
    f_members, f_fams = full if full is not None else hom_families(x, gtree, representable(gtree))
    s_members, s_fams = hom_families(x, gtree, cx)
    take = [f_members.index(fd) for fd in s_members]
    sigs = [tuple(fam[i] for i in take) for fam in f_fams]
    distinct = len(set(sigs)) == len(f_fams)
    if not distinct:
        return StrictReport(False, "two fillers restrict to the same family")
    if len(s_fams) != len(f_fams):
        return StrictReport(
            False,
            "unfillable family: %d over the subcomplex, %d fillers" % (len(s_fams), len(f_fams)),
        )
    return StrictReport(True)


@dataclass(frozen=True)
class SegalReport:
    ok: bool
    witnesses: tuple = ()

    def __bool__(self):
        return self.ok

    def require(self):
        if not self.ok:
            raise DendroidError("strict Segal condition fails", witness=self.witnesses[:3])
        return self


def _require_window(tr: Truncation, gtrees) -> None:
    for gt in gtrees:
        for comp in gt.forest.trees:
            if not tr.contains_tree(comp):
                raise TruncationTooSmall(
                    "G-tree does not fit the truncation window",
                    witness=(comp.literal_key(), tr.degree, tr.arity),
                )


def strict_segal_check(x: TruncatedPresheaf, gtrees=None) -> SegalReport:
    """For each G-tree, compare the full value against compatible families
    over the Segal core (its grafting decomposition into one-vertex faces
    glued along orbit sticks)."""
    if gtrees is None:
        gtrees = x.truncation.gobjects
    else:
        _require_window(x.truncation, gtrees)
    witnesses = []
    for gt in gtrees:
        rep = strict_against(x, gt, segal_core(gt))
        if not rep.ok:
            witnesses.append((gt.signature(), rep.detail))
    return SegalReport(not witnesses, tuple(witnesses))


@dataclass(frozen=True)
class LiftingReport:
    segal_cores: bool
    generating_horns: bool
    all_horns: bool
    orbital_horns: bool
    witnesses: tuple = ()

    def booleans(self) -> tuple:
        return (self.segal_cores, self.generating_horns, self.all_horns, self.orbital_horns)

    def consensus(self) -> bool:
        return len(set(self.booleans())) == 1


def _inner_orbit_unions(gtree: GTree):
    inner = set()
    for comp in gtree.forest.trees:
        inner |= comp.inner_edges()
    orbits = sorted(
        {frozenset(gtree.orbit(e)) for e in inner}, key=lambda o: sorted(map(repr, o))
    )
    singles = [frozenset(o) for o in orbits]
    unions = []
    for mask in range(1, 1 << len(orbits)):
        u = frozenset()
        for i, o in enumerate(orbits):
            if mask >> i & 1:
                u |= o
        unions.append(u)
    return singles, unions


def lifting_equivalence_suite(x: TruncatedPresheaf, gtrees=None) -> LiftingReport:
    """Exhaustive strict-lifting scan against four families of subcomplex
    inclusions; the four verdicts agree for every functorial presheaf."""
    if gtrees is None:
        gtrees = x.truncation.gobjects
    else:
        _require_window(x.truncation, gtrees)
    verdicts = {"segal": True, "generating": True, "all": True, "orbital": True}
    witnesses = []

    def run(kind, gt, cx, full):
        rep = strict_against(x, gt, cx, full)
        if not rep.ok:
            verdicts[kind] = False
            witnesses.append((kind, gt.signature(), rep.detail))

    for gt in gtrees:
        full = hom_families(x, gt, representable(gt))
        run("segal", gt, segal_core(gt), full)
        singles, unions = _inner_orbit_unions(gt)
        part_cache = {}

        def families_for(builder, edges):
            cx = builder(gt, edges)
            key = (builder.__name__, edges)
            if key not in part_cache:
                part_cache[key] = cx
            return part_cache[key]

        for e in singles:
            run("generating", gt, families_for(horn, e), full)
        for e in unions:
            run("all", gt, families_for(horn, e), full)
            run("orbital", gt, families_for(orbital_horn, e), full)
    return LiftingReport(
        verdicts["segal"],
        verdicts["generating"],
        verdicts["all"],
        verdicts["orbital"],
        tuple(witnesses),
    )


# -- genuine values ---------------------------------------------------------------


def upsilon_star(x: TruncatedPresheaf, gtree: GTree) -> tuple:
    """The genuine value at a G-tree: fixed points of the base component's
    value set under the diagonal action (restrict along the automorphism
    induced by the inverse element, then act structurally)."""
    if not gtree.is_transitive():
        raise DendroidError(
            "genuine values need a transitive action on components",
            witness=gtree.signature(),
        )
    h_group, t_star = gtree.base_decomposition()
    idx, iso = x.truncation.object_of(t_star)
    move = {
        h: _transport(x, gtree, h, idx, iso, iso)
        for h in h_group
        if h != gtree.group.identity
    }
    return tuple(v for v in x.values[idx] if all(m(v) == v for m in move.values()))


@dataclass(eq=False)
class UpsilonPresheaf:
    """The genuine presheaf induced on the equivariant truncation: values
    are twisted fixed points, restriction factors through any component
    identification."""

    base: TruncatedPresheaf
    gvalues: dict
    _info: dict = field(repr=False, default_factory=dict)

    @property
    def truncation(self):
        return self.base.truncation

    def act(self, phi, v):
        """Restrict a genuine value along an equivariant map of G-trees."""
        src, tgt = phi.source, phi.target
        s_star = src.forest.trees[0]
        t_star = tgt.forest.trees[0]
        root_img = phi.edges[s_star.root]
        comp = next(c for c in tgt.forest.trees if root_img in c.edges)
        g = next(
            g for g in tgt.group.elements if tgt.act(g, t_star.root) == comp.root
        )
        ginv = tgt.group.inv(g)
        tr = self.base.truncation
        s_idx, s_iso = tr.object_of(s_star)
        t_idx, t_iso = tr.object_of(t_star)
        inv_s = _invert(s_iso)
        cmap = TreeMap(
            tr.objects[s_idx],
            tr.objects[t_idx],
            {
                e: _invert(t_iso)[tgt.act(ginv, phi.edges[s_iso[e]])]
                for e in tr.objects[s_idx].edges
            },
        )
        return self.base.act(cmap, v)


def upsilon_presheaf(x: TruncatedPresheaf) -> UpsilonPresheaf:
    gvalues = {i: upsilon_star(x, gt) for i, gt in enumerate(x.truncation.gobjects)}
    return UpsilonPresheaf(x, gvalues)


# -- natural transformations -------------------------------------------------------


def natural_transformations(x: TruncatedPresheaf, y: TruncatedPresheaf) -> tuple:
    """All equivariant presheaf maps ``x -> y`` over the plain truncation,
    as per-object value functions; exhaustive backtracking."""
    tr = x.truncation
    n = len(tr.objects)
    assigned = [None] * n
    out = []

    def candidates(i):
        dom = x.values[i]
        cod = y.values[i]
        if not dom:
            return ({},)
        pools = [cod] * len(dom)
        combos = [()]
        for pool in pools:
            combos = [c + (w,) for c in combos for w in pool]
        return tuple(dict(zip(dom, c)) for c in combos)

    def consistent(i, fi):
        for g in tr.group.elements:
            for v in x.values[i]:
                if fi[x.g_act(g, i, v)] != y.g_act(g, i, fi[v]):
                    return False
        for j in range(n):
            if assigned[j] is None and j != i:
                continue
            fj = fi if j == i else assigned[j]
            for f in tr.maps(i, j):
                for v in x.values[j]:
                    if fi[x.act(f, v)] != y.act(f, fj[v]):
                        return False
            if j != i:
                for f in tr.maps(j, i):
                    for v in x.values[i]:
                        if fj[x.act(f, v)] != y.act(f, fi[v]):
                            return False
        return True

    def search(i):
        if i == n:
            out.append(tuple(tuple(sorted(f.items(), key=repr)) for f in assigned))
            return
        for fi in candidates(i):
            if consistent(i, fi):
                assigned[i] = fi
                search(i + 1)
                assigned[i] = None

    search(0)
    return tuple(sorted(out))


def genuine_natural_transformations(ux: UpsilonPresheaf, uy: UpsilonPresheaf) -> tuple:
    """All maps between genuine presheaves over the equivariant truncation."""
    tr = ux.truncation
    n = len(tr.gobjects)
    assigned = [None] * n
    out = []

    def candidates(i):
        dom = ux.gvalues[i]
        cod = uy.gvalues[i]
        if not dom:
            return ({},)
        combos = [()]
        for _ in dom:
            combos = [c + (w,) for c in combos for w in cod]
        return tuple(dict(zip(dom, c)) for c in combos)

    def consistent(i, fi):
        for j in range(n):
            if assigned[j] is None and j != i:
                continue
            fj = fi if j == i else assigned[j]
            for phi in tr.gmaps(i, j):
                for v in ux.gvalues[j]:
                    if fi[ux.act(phi, v)] != uy.act(phi, fj[v]):
                        return False
            if j != i:
                for phi in tr.gmaps(j, i):
                    for v in ux.gvalues[i]:
                        if fj[ux.act(phi, v)] != uy.act(phi, fi[v]):
                            return False
        return True

    def search(i):
        if i == n:
            out.append(tuple(tuple(sorted(f.items(), key=repr)) for f in assigned))
            return
        for fi in candidates(i):
            if consistent(i, fi):
                assigned[i] = fi
                search(i + 1)
                assigned[i] = None

    search(0)
    return tuple(sorted(out))


# -- grafting pullbacks -------------------------------------------------------------


@dataclass(frozen=True)
class PullbackReport:
    ok: bool
    total: int
    lower: int
    upper: int
    middle: int
    detail: str = ""

    def __bool__(self):
        return self.ok


def _face_members(gtree: GTree, pieces) -> frozenset:
    members = []
    for fd in all_faces(gtree):
        if any(
            fd.ambient.root == w.ambient.root and is_subface(fd, w)
            for w in pieces
        ):
            members.append(fd)
    return frozenset(members)


def grafting_pullback(x: TruncatedPresheaf, gtree: GTree, lower, upper) -> PullbackReport:
    """Realize the decomposition of the full value along a grafting: the
    restriction to the two orbital pieces is a bijection onto the pairs of
    families agreeing over the fused orbit sticks."""
    low_members = _face_members(gtree, lower.components)
    up_members = _face_members(gtree, upper.components)
    mid_members = low_members & up_members
    f_members, f_fams = hom_families(x, gtree, representable(gtree))
    l_members, l_fams = hom_families(x, gtree, Complex(gtree, low_members))
    u_members, u_fams = hom_families(x, gtree, Complex(gtree, up_members))
    m_members, m_fams = hom_families(x, gtree, Complex(gtree, mid_members))

    l_mid = [l_members.index(fd) for fd in m_members]
    u_mid = [u_members.index(fd) for fd in m_members]
    pairs = {
        (a, b)
        for a in l_fams
        for b in u_fams
        if tuple(a[i] for i in l_mid) == tuple(b[i] for i in u_mid)
    }
    f_low = [f_members.index(fd) for fd in l_members]
    f_up = [f_members.index(fd) for fd in u_members]
    image = [
        (tuple(fam[i] for i in f_low), tuple(fam[i] for i in f_up)) for fam in f_fams
    ]
    ok = len(set(image)) == len(f_fams) == len(pairs) and set(image) <= pairs
    detail = "" if ok else "decomposition map is not a bijection"
    return PullbackReport(ok, len(f_fams), len(l_fams), len(u_fams), len(m_fams), detail)


# -- normality -----------------------------------------------------------------------


def is_normal(sub_values: dict, y: TruncatedPresheaf) -> bool:
    """Levelwise-free complement test: every nontrivial automorphism of an
    object must move every value outside the subpresheaf."""
    tr = y.truncation
    for i, obj in enumerate(tr.objects):
        inside = set(sub_values.get(i, ()))
        if not inside <= set(y.values[i]):
            raise DendroidError("not a levelwise inclusion", witness=i)
        rest = [v for v in y.values[i] if v not in inside]
        if not rest:
            continue
        ident = {e: e for e in obj.edges}
        for edges in tree_isomorphisms(obj, obj):
            if edges == ident:
                continue
            amap = TreeMap(obj, obj, edges)
            for v in rest:
                if y.act(amap, v) == v:
                    return False
    return True
