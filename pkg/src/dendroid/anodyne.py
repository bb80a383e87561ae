"""Horn filtrations driven by characteristic-edge data.

The one trusted move is :func:`dendroid.complexes.attach_horn`.  Everything
here reduces an inclusion of complexes ``A ⊆ B`` to an explicit sequence of
such moves — a *certificate* that can be replayed, and re-checked step by
step, independently of the search that produced it.

The bookkeeping has a fixed shape: a finite poset ``I`` with a compatible
group action, a face ``U_i`` of the ambient forest for every ``i``, and a
set ``Ξ^i`` of characteristic inner edges of each ``U_i``.  When the four
conditions checked by :func:`verify_characteristic` hold, marching through
``I`` in a linear extension, and through the faces of each ``U_i`` in the
order of :func:`face_lex`, meets every missing cell exactly once — as a
filler of a horn attachment.
"""

from dataclasses import dataclass
from itertools import combinations

from .broadposet import Forest
from .complexes import (
    Complex,
    attach_horn,
    horn,
    orbital_horn,
    representable,
    segal_core,
    validate_complex,
)
from .equivariance import GTree
from .errors import (
    DendroidError,
    EmptyE,
    MalformedPoset,
    NotAPushout,
    VerificationFailed,
)
from .treemaps import (
    FaceDescriptor,
    descriptor_from_subtree,
    enumerate_faces,
    face_minus,
    full_face,
    is_subface,
    subfaces,
)

__all__ = [
    "GPoset",
    "CharCollection",
    "CharReport",
    "verify_characteristic",
    "face_lex",
    "FiltrationStep",
    "FiltrationCertificate",
    "build_filtration",
    "replay",
    "Certification",
    "certify",
    "CERTIFY_KINDS",
    "generating_reduction",
]


# -----------------------------------------------------------------------
# finite posets with a group action
# -----------------------------------------------------------------------

class GPoset:
    """A finite poset with an order-preserving action of a finite group.

    ``relation`` is any set of pairs ``(a, b)`` meaning ``a <= b``; the
    reflexive-transitive closure is taken.  Antisymmetry must hold, each
    group element must act by an order isomorphism, and every element is
    required to be incomparable with the other members of its orbit.
    """

    __slots__ = ("group", "elements", "action", "_below")

    def __init__(self, group, elements, relation, action, check=True):
        self.group = group
        self.elements = tuple(elements)
        self.action = {g: dict(action[g]) for g in group.elements}
        below = {x: {x} for x in self.elements}
        for a, b in relation:
            if a not in below or b not in below:
                raise MalformedPoset("relation names a non-element", witness=(a, b))
            below[b].add(a)
        changed = True
        while changed:
            changed = False
            for b in self.elements:
                extra: set = set()
                for a in below[b]:
                    extra |= below[a]
                if not extra <= below[b]:
                    below[b] |= extra
                    changed = True
        self._below = {b: frozenset(s) for b, s in below.items()}
        if check:
            self._validate()

    def _validate(self):
        names = set(self.elements)
        if len(names) != len(self.elements):
            raise MalformedPoset("duplicate elements")
        for a in self.elements:
            for b in self.elements:
                if a != b and self.le(a, b) and self.le(b, a):
                    raise MalformedPoset("antisymmetry fails", witness=(a, b))
        for g in self.group.elements:
            perm = self.action.get(g)
            if perm is None or set(perm) != names or set(perm.values()) != names:
                raise MalformedPoset(f"{g!r} does not permute the elements", witness=g)
        ident = self.group.identity
        for x in self.elements:
            if self.action[ident][x] != x:
                raise MalformedPoset("the identity must act trivially", witness=x)
        for g in self.group.elements:
            for h in self.group.elements:
                gh = self.group.mul(g, h)
                for x in self.elements:
                    if self.action[g][self.action[h][x]] != self.action[gh][x]:
                        raise MalformedPoset(
                            "the action is not a homomorphism", witness=(g, h, x)
                        )
        for g in self.group.elements:
            for a in self.elements:
                ga = self.action[g][a]
                for b in self.elements:
                    if self.le(a, b) and not self.le(ga, self.action[g][b]):
                        raise MalformedPoset(
                            f"{g!r} does not preserve the order", witness=(g, a, b)
                        )
                if ga != a and (self.le(a, ga) or self.le(ga, a)):
                    raise MalformedPoset(
                        "an orbit contains comparable elements", witness=(g, a)
                    )

    def le(self, a, b) -> bool:
        return a in self._below[b]

    def lt(self, a, b) -> bool:
        return a != b and a in self._below[b]

    def act(self, g, x):
        return self.action[g][x]

    def orbit(self, x) -> frozenset:
        return frozenset(self.action[g][x] for g in self.group.elements)

    def isotropy(self, x) -> frozenset:
        return frozenset(g for g in self.group.elements if self.action[g][x] == x)

    def orbits(self):
        """The orbits, each listed in element order, ordered by first member."""
        seen: set = set()
        out = []
        for x in self.elements:
            if x in seen:
                continue
            orb = self.orbit(x)
            seen |= orb
            out.append(tuple(y for y in self.elements if y in orb))
        return tuple(out)

    def orbit_linear_extension(self):
        """The orbits, ordered so that smaller elements come first."""
        orbits = self.orbits()
        idx = {x: n for n, orb in enumerate(orbits) for x in orb}
        preds: dict = {n: set() for n in range(len(orbits))}
        for a in self.elements:
            for b in self.elements:
                if a != b and self.le(a, b) and idx[a] != idx[b]:
                    preds[idx[b]].add(idx[a])
        out = []
        remaining = set(range(len(orbits)))
        while remaining:
            ready = sorted(n for n in remaining if not preds[n] & remaining)
            if not ready:
                raise MalformedPoset("the orbit order contains a cycle")
            out.append(orbits[ready[0]])
            remaining.discard(ready[0])
        return tuple(out)

    def __len__(self):
        return len(self.elements)

    def __repr__(self):
        return f"GPoset({len(self.elements)} elements, {self.group.name})"


# -----------------------------------------------------------------------
# characteristic-edge collections
# -----------------------------------------------------------------------

@dataclass(eq=False)
class CharCollection:
    """A complex ``base`` together with indexed faces and their
    characteristic edges: ``faces[i]`` is a face of one component of the
    ambient forest and ``xi[i]`` a set of inner edges of that face."""

    gtree: GTree
    base: Complex
    poset: GPoset
    faces: dict
    xi: dict


@dataclass(frozen=True)
class CharReport:
    """Outcome of :func:`verify_characteristic`: per-condition failures,
    each a ``(condition, witness)`` pair."""

    ok: bool
    failures: tuple

    def require(self):
        if not self.ok:
            raise VerificationFailed(
                f"{len(self.failures)} characteristic condition(s) fail",
                witness=self.failures[:5],
            )


def _face_key(gtree: GTree, v: FaceDescriptor):
    return (gtree.forest.component_of(v.root),) + v.sort_key()


def verify_characteristic(coll: CharCollection) -> CharReport:
    """Check the four conditions that make the march of
    :func:`build_filtration` succeed.

    * equivariance: the indexed faces and edge sets are permuted the same
      way as the poset, and distinct indices carry distinct faces;
    * outer faces of each ``U_i`` without characteristic edges are already
      present below ``i``;
    * faces of ``U_i`` whose contraction along their characteristic edges
      lies in the base are already present below ``i``;
    * faces of ``U_i`` whose contraction lands in some ``U_j`` with
      ``j ≱ i`` are already present below ``i``.
    """
    gtree, base, poset = coll.gtree, coll.base, coll.poset
    failures = []
    try:
        validate_complex(base)
    except DendroidError as exc:
        failures.append(("base", str(exc)))
    keys = set(poset.elements)
    if set(coll.faces) != keys or set(coll.xi) != keys:
        failures.append(("index", "faces/xi keys do not match the poset"))
        return CharReport(False, tuple(failures))
    for i in poset.elements:
        u = coll.faces[i]
        if coll.xi[i] - u.as_tree().inner_edges():
            failures.append(("xi", (i, sorted(map(str, coll.xi[i])))))
    # equivariance of the indexed data
    for g in gtree.group.elements:
        for i in poset.elements:
            j = poset.act(g, i)
            if coll.faces[j] != gtree.face_action(g, coll.faces[i]):
                failures.append(("Ch0", (g, i, "face")))
            if coll.xi[j] != frozenset(gtree.act(g, e) for e in coll.xi[i]):
                failures.append(("Ch0", (g, i, "edges")))
            if j != i and coll.faces[j] == coll.faces[i]:
                failures.append(("Ch0", (g, i, "faces collide")))
    if failures:
        return CharReport(False, tuple(failures))

    below_cache: dict = {}

    def a_below(i):
        hit = below_cache.get(i)
        if hit is None:
            hit = set(base.members)
            for j in poset.elements:
                if j != i and poset.le(j, i):
                    hit |= subfaces(coll.faces[j])
            below_cache[i] = hit
        return hit

    for i in poset.elements:
        u, xi = coll.faces[i], coll.xi[i]
        comp = gtree.component(u.root)
        u_tree = u.as_tree()
        present = a_below(i)
        for v_local in enumerate_faces(u_tree):
            vt = v_local.as_tree()
            xi_v = xi & vt.inner_edges()
            v_amb = descriptor_from_subtree(comp, vt)
            if v_local.is_outer() and not xi_v and v_amb not in present:
                failures.append(("Ch1", (i, v_amb)))
                continue
            if xi_v:
                w_amb = descriptor_from_subtree(
                    comp, face_minus(v_local, xi_v).as_tree()
                )
            else:
                w_amb = v_amb
            if w_amb in base.members and v_amb not in present:
                failures.append(("Ch2", (i, v_amb)))
                continue
            if v_amb not in present:
                for j in poset.elements:
                    if poset.le(i, j):
                        continue
                    if is_subface(w_amb, coll.faces[j]):
                        failures.append(("Ch3", (i, j, v_amb)))
                        break
    return CharReport(not failures, tuple(failures))


def face_lex(gtree: GTree, u: FaceDescriptor, xi) -> tuple:
    """The faces ``V ⊑ u`` whose characteristic edges are nonempty and
    survive to the outer closure, sorted by the size of the outer closure
    (edges, then vertices — nested outer faces can share their edge set
    when only a bare vertex is dropped), then the size of the face, then
    position.  These are exactly the cells the march visits inside ``u``,
    and the sort key is strictly monotone along face inclusion."""
    xi = frozenset(xi)
    comp = gtree.component(u.root)
    out = []
    for v_local in enumerate_faces(u.as_tree()):
        vt = v_local.as_tree()
        xi_v = xi & vt.inner_edges()
        if not xi_v:
            continue
        vbar_t = v_local.outer_closure().as_tree()
        if xi_v != xi & vbar_t.inner_edges():
            continue
        v = descriptor_from_subtree(comp, vt)
        out.append((len(vbar_t.edges), len(vbar_t.vertices), len(vt.edges), v))
    out.sort(key=lambda kv: kv[:3] + kv[3].sort_key())
    return tuple(kv[3] for kv in out)


# -----------------------------------------------------------------------
# certificates and the march
# -----------------------------------------------------------------------

@dataclass(frozen=True)
class FiltrationStep:
    """One horn attachment: glue ``G ×_K Λ^edges[face]`` fillers."""

    face: FaceDescriptor
    subgroup: tuple
    edges: frozenset

    def __repr__(self):
        names = ",".join(map(str, self.subgroup))
        edges = ",".join(sorted(map(str, self.edges)))
        return f"Step({self.face!r}; K={{{names}}}; Ξ={{{edges}}})"


@dataclass(frozen=True)
class FiltrationCertificate:
    steps: tuple

    def __len__(self):
        return len(self.steps)

    def is_single_orbit(self, gtree: GTree) -> bool:
        """Every step's edge set is a single orbit of its subgroup."""
        for step in self.steps:
            e = next(iter(step.edges))
            if frozenset(gtree.act(h, e) for h in step.subgroup) != step.edges:
                return False
        return True


def replay(base: Complex, certificate: FiltrationCertificate) -> Complex:
    """Re-run a certificate through the elementary attachment alone."""
    current = base
    for step in certificate.steps:
        current = attach_horn(current, step.face, step.subgroup, step.edges)
    return current


def build_filtration(coll: CharCollection) -> FiltrationCertificate:
    """March through the collection and emit one attachment per new orbit
    of cells.

    Poset orbits are visited in a linear extension; inside each indexed
    face the cells of :func:`face_lex` are visited in order, skipped when
    already present, and otherwise attached along the horn of their own
    characteristic edges.  An index with no characteristic edges demands
    its face to be present already.  The result is checked to be exactly
    the base together with all faces of the indexed faces.
    """
    gtree = coll.gtree
    group = gtree.group
    current = Complex(gtree, coll.base.members)
    steps = []
    for orbit in coll.poset.orbit_linear_extension():
        i = orbit[0]
        u, xi = coll.faces[i], coll.xi[i]
        if not xi:
            if u not in current.members:
                raise VerificationFailed(
                    "an index without characteristic edges needs its face present",
                    witness=(i, u),
                )
            continue
        h_orb = coll.poset.isotropy(i)
        done: set = set()
        for v in face_lex(gtree, u, xi):
            if v in done:
                continue
            done |= {gtree.face_action(h, v) for h in h_orb}
            if v in current.members:
                continue
            k = tuple(
                h for h in group.elements
                if h in h_orb and gtree.face_action(h, v) == v
            )
            xi_v = xi & v.as_tree().inner_edges()
            try:
                current = attach_horn(current, v, k, xi_v)
            except NotAPushout as exc:
                raise VerificationFailed(
                    f"march stuck at {v!r}: {exc}", witness=(i, v)
                ) from exc
            steps.append(FiltrationStep(v, k, frozenset(xi_v)))
    expected = set(coll.base.members)
    for i in coll.poset.elements:
        expected |= subfaces(coll.faces[i])
    if current.members != frozenset(expected):
        raise VerificationFailed(
            "the march did not produce the union of the indexed faces",
            witness=(len(current.members), len(expected)),
        )
    return FiltrationCertificate(tuple(steps))


# -----------------------------------------------------------------------
# stock collections
# -----------------------------------------------------------------------

@dataclass(eq=False)
class Certification:
    """A verified inclusion ``base ⊆ target``: the collection that proves
    it, the per-condition report, and the replayed certificate."""

    kind: str
    collection: CharCollection
    report: CharReport
    certificate: FiltrationCertificate
    base: Complex
    target: Complex


def _component_roots_poset(gtree: GTree) -> GPoset:
    roots = tuple(t.root for t in gtree.forest.trees)
    action = {
        g: {r: gtree.act(g, r) for r in roots} for g in gtree.group.elements
    }
    return GPoset(gtree.group, roots, (), action)


def _segal_core_collection(gtree: GTree):
    poset = _component_roots_poset(gtree)
    faces = {t.root: full_face(t) for t in gtree.forest.trees}
    xi = {t.root: frozenset(t.inner_edges()) for t in gtree.forest.trees}
    coll = CharCollection(gtree, segal_core(gtree), poset, faces, xi)
    return coll, representable(gtree)


def _orbital_to_full_collection(gtree: GTree, edges):
    base = orbital_horn(gtree, edges)
    edges = frozenset(edges)
    poset = _component_roots_poset(gtree)
    faces = {t.root: full_face(t) for t in gtree.forest.trees}
    xi = {t.root: edges & t.edges for t in gtree.forest.trees}
    coll = CharCollection(gtree, base, poset, faces, xi)
    return coll, representable(gtree)


def _edge_sort(tree):
    return tree.dfs_index().__getitem__


def _horn_to_horn_collection(gtree: GTree, edges, to_edges, variant):
    edges = frozenset(edges)
    to_edges = frozenset(to_edges)
    if not to_edges:
        raise EmptyE("the target horn needs at least one inner edge")
    if not to_edges <= edges:
        raise DendroidError(
            "target edges must be a subset of the source edges",
            witness=sorted(to_edges - edges),
        )
    base = horn(gtree, edges)
    target = horn(gtree, to_edges)
    spare = edges - to_edges
    elements, faces, xi, relation = [], {}, {}, []
    for t in gtree.forest.trees:
        pool = sorted(spare & t.edges, key=_edge_sort(t))
        if variant == "linear":
            for m, e in enumerate(pool):
                elements.append(e)
                u = face_minus(full_face(t), {e})
                faces[e] = u
                xi[e] = to_edges & u.as_tree().inner_edges()
                for earlier in pool[:m]:
                    relation.append((earlier, e))
        elif variant == "subsets":
            for r in range(1, len(pool) + 1):
                for combo in combinations(pool, r):
                    d = frozenset(combo)
                    elements.append(d)
                    u = face_minus(full_face(t), d)
                    faces[d] = u
                    xi[d] = to_edges & u.as_tree().inner_edges()
        else:
            raise DendroidError(f"unknown variant {variant!r}")
    if variant == "subsets":
        # reverse inclusion: contracting more comes earlier
        relation = [(a, b) for a in elements for b in elements if b < a]
    if variant == "linear":
        action = {
            g: {e: gtree.act(g, e) for e in elements}
            for g in gtree.group.elements
        }
    else:
        action = {
            g: {d: frozenset(gtree.act(g, e) for e in d) for d in elements}
            for g in gtree.group.elements
        }
    poset = GPoset(gtree.group, elements, relation, action)
    coll = CharCollection(gtree, base, poset, faces, xi)
    return coll, target


def _orbital_to_orbital_collection(gtree: GTree, edges, to_edges):
    edges = frozenset(edges)
    to_edges = frozenset(to_edges)
    if not to_edges:
        raise EmptyE("the target horn needs at least one inner edge")
    if not to_edges <= edges:
        raise DendroidError(
            "target edges must be a subset of the source edges",
            witness=sorted(to_edges - edges),
        )
    base = orbital_horn(gtree, edges)
    target = orbital_horn(gtree, to_edges)
    spare = edges - to_edges
    forest_pos = {e: n for n, e in enumerate(gtree.forest.dfs_order())}
    orbit_reps = []
    seen: set = set()
    for e in sorted(spare, key=forest_pos.__getitem__):
        if e in seen:
            continue
        orb = gtree.orbit(e)
        seen |= orb
        orbit_reps.append((min(forest_pos[x] for x in orb), orb))
    orbit_reps.sort()
    elements, faces, xi, relation = [], {}, {}, []
    for t in gtree.forest.trees:
        previous = []
        for _, orb in orbit_reps:
            local = frozenset(orb & t.edges)
            if not local:
                continue
            elements.append(local)
            u = face_minus(full_face(t), local)
            faces[local] = u
            xi[local] = to_edges & u.as_tree().inner_edges()
            relation.extend((p, local) for p in previous)
            previous.append(local)
    action = {
        g: {d: frozenset(gtree.act(g, e) for e in d) for d in elements}
        for g in gtree.group.elements
    }
    poset = GPoset(gtree.group, elements, relation, action)
    coll = CharCollection(gtree, base, poset, faces, xi)
    return coll, target


def _cover_inclusion_collection(gtree: GTree, smaller: Complex, larger: Complex):
    literal = [t.literal_key() for t in gtree.forest.trees]
    for name, c in (("smaller", smaller), ("larger", larger)):
        if [t.literal_key() for t in c.gtree.forest.trees] != literal:
            raise DendroidError(f"the {name} complex lives on a different forest")
        if not c.is_cover():
            raise DendroidError(f"the {name} complex is not a cover")
    if not smaller.members <= larger.members:
        raise DendroidError("the smaller cover is not contained in the larger")
    elements = tuple(
        sorted(
            (v for v in larger.members if v.is_outer()),
            key=lambda v: (
                len(v.as_tree().edges),
                len(v.as_tree().vertices),
            )
            + _face_key(gtree, v),
        )
    )
    relation = [
        (a, b) for a in elements for b in elements if a != b and is_subface(a, b)
    ]
    action = {
        g: {v: gtree.face_action(g, v) for v in elements}
        for g in gtree.group.elements
    }
    poset = GPoset(gtree.group, elements, relation, action)
    faces = {v: v for v in elements}
    xi = {v: frozenset(v.as_tree().inner_edges()) for v in elements}
    coll = CharCollection(gtree, smaller, poset, faces, xi)
    return coll, larger


CERTIFY_KINDS = (
    "segal_core",
    "orbital_horn_to_full",
    "orbital_to_orbital",
    "horn_to_horn",
    "cover_inclusion",
)


def certify(
    gtree: GTree,
    kind: str,
    *,
    edges=None,
    to_edges=None,
    smaller=None,
    larger=None,
    variant="subsets",
) -> Certification:
    """Assemble the stock collection for ``kind``, verify its conditions,
    build the filtration, and replay it onto the target.

    Kinds: ``segal_core`` (Segal core to representable),
    ``orbital_horn_to_full`` (orbital horn to representable),
    ``orbital_to_orbital`` and ``horn_to_horn`` (enlarging a horn to the
    horn of a smaller edge set; the latter accepts ``variant="linear"``,
    valid only when the order can ignore the action), and
    ``cover_inclusion`` (between covers).
    """
    if kind == "segal_core":
        coll, target = _segal_core_collection(gtree)
    elif kind == "orbital_horn_to_full":
        coll, target = _orbital_to_full_collection(gtree, edges)
    elif kind == "orbital_to_orbital":
        coll, target = _orbital_to_orbital_collection(gtree, edges, to_edges)
    elif kind == "horn_to_horn":
        coll, target = _horn_to_horn_collection(gtree, edges, to_edges, variant)
    elif kind == "cover_inclusion":
        coll, target = _cover_inclusion_collection(gtree, smaller, larger)
    else:
        raise DendroidError(
            f"unknown certification kind {kind!r}", witness=CERTIFY_KINDS
        )
    report = verify_characteristic(coll)
    report.require()
    certificate = build_filtration(coll)
    final = replay(coll.base, certificate)
    if final.members != target.members:
        raise VerificationFailed(
            "the certificate does not rebuild the target",
            witness=(len(final.members), len(target.members)),
        )
    return Certification(kind, coll, report, certificate, coll.base, target)


# -----------------------------------------------------------------------
# reduction to single-orbit attachments
# -----------------------------------------------------------------------

def _orbit_partition(gtree: GTree, subgroup, edges, key):
    rest = set(edges)
    out = []
    while rest:
        e = min(rest, key=key)
        orb = frozenset(gtree.act(h, e) for h in subgroup)
        out.append(orb)
        rest -= orb
    return out


def _reduce_step(gtree: GTree, step: FiltrationStep):
    comp = gtree.component(step.face.root)
    key = comp.dfs_index().__getitem__
    orbits = _orbit_partition(gtree, step.subgroup, step.edges, key)
    if len(orbits) <= 1:
        return [step]
    group = gtree.group
    sub_group = group.restricted_to(step.subgroup, name=f"{group.name}.K")
    w_tree = step.face.as_tree()
    action = {
        h: {e: gtree.act(h, e) for e in w_tree.edges}
        for h in sub_group.elements
    }
    sub_gt = GTree(sub_group, Forest((w_tree,)), action)
    f = min(orbits, key=lambda orb: min(map(key, orb)))
    sub_cert = certify(
        sub_gt, "horn_to_horn", edges=step.edges, to_edges=f
    ).certificate
    out = []
    for s in sub_cert.steps:
        amb = descriptor_from_subtree(comp, s.face.as_tree())
        out.extend(_reduce_step(gtree, FiltrationStep(amb, s.subgroup, s.edges)))
    out.append(FiltrationStep(step.face, step.subgroup, f))
    return out


def generating_reduction(
    gtree: GTree, certificate: FiltrationCertificate
) -> FiltrationCertificate:
    """Rewrite a certificate so that every step's edge set is a single
    orbit of its subgroup, by splitting each multi-orbit attachment into a
    horn-to-horn filtration followed by the attachment along the smallest
    orbit.  The result replays from the same base to the same complex."""
    steps = []
    for step in certificate.steps:
        steps.extend(_reduce_step(gtree, step))
    return FiltrationCertificate(tuple(steps))
