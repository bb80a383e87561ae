"""Generalized Reedy categories as finite data.

A category is an enumerated arrow set with a composition table; the Reedy
structure is a pair of wide subcategories tagged ``+``/``-`` plus a degree
function.  Every axiom is checked exhaustively, which is viable because all
categories of interest here are truncations.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from dendroid.broadposet import Tree
from dendroid.equivariance import enumerate_trees
from dendroid.errors import AxiomViolation, DendroidError
from dendroid.groups import FiniteGroup
from dendroid.treemaps import TreeMap, enumerate_maps, factorize


@dataclass(eq=False)
class GenReedyCat:
    """A finite category with wide ``plus``/``minus`` subcategories and a
    degree function; see :func:`validate_gen_reedy` for the axioms."""

    objects: tuple
    degrees: dict
    arrows: dict  # name -> (src, tgt)
    compose: dict  # (g, f) -> g . f, for tgt(f) == src(g)
    identities: dict  # object -> identity arrow name
    plus: frozenset
    minus: frozenset
    _iso_cache: dict = field(default_factory=dict, repr=False)

    def src(self, f):
        return self.arrows[f][0]

    def tgt(self, f):
        return self.arrows[f][1]

    def arrows_between(self, a, b):
        return tuple(
            f for f, (s, t) in sorted(self.arrows.items()) if s == a and t == b
        )

    def is_iso(self, f) -> bool:
        hit = self._iso_cache.get(f)
        if hit is None:
            s, t = self.arrows[f]
            hit = any(
                self.compose.get((g, f)) == self.identities[s]
                and self.compose.get((f, g)) == self.identities[t]
                for g in self.arrows_between(t, s)
            )
            self._iso_cache[f] = hit
        return hit

    def inverse(self, f):
        s, t = self.arrows[f]
        for g in self.arrows_between(t, s):
            if (
                self.compose.get((g, f)) == self.identities[s]
                and self.compose.get((f, g)) == self.identities[t]
            ):
                return g
        raise DendroidError("arrow is not invertible", witness=f)

    def automorphisms(self, r) -> tuple:
        return tuple(f for f in self.arrows_between(r, r) if self.is_iso(f))


def _check_category(c: GenReedyCat) -> None:
    for r, i in c.identities.items():
        if c.arrows.get(i) != (r, r):
            raise AxiomViolation("identity arrow has wrong endpoints", witness=r)
    for f, (s, t) in c.arrows.items():
        if s not in c.degrees or t not in c.degrees:
            raise AxiomViolation("arrow endpoint has no degree", witness=f)
        if c.compose.get((f, c.identities[s])) != f or c.compose.get((c.identities[t], f)) != f:
            raise AxiomViolation("identity law fails", witness=f)
    for (g, f), h in c.compose.items():
        if c.tgt(f) != c.src(g):
            raise AxiomViolation("composition of non-composable pair", witness=(g, f))
        if (c.src(h), c.tgt(h)) != (c.src(f), c.tgt(g)):
            raise AxiomViolation("composite has wrong endpoints", witness=(g, f))
    by_src: dict = {}
    for f, (s, _) in c.arrows.items():
        by_src.setdefault(s, []).append(f)
    for f, (_, t) in c.arrows.items():
        for g in by_src.get(t, ()):
            if (g, f) not in c.compose:
                raise AxiomViolation("composition table is incomplete", witness=(g, f))
    for f in c.arrows:
        for g in by_src.get(c.tgt(f), ()):
            gf = c.compose[(g, f)]
            for h in by_src.get(c.tgt(g), ()):
                if c.compose[(c.compose[(h, g)], f)] != c.compose[(h, gf)]:
                    raise AxiomViolation("associativity fails", witness=(h, g, f))


def _check_wide(c: GenReedyCat, names: frozenset, tag: str) -> None:
    for i in c.identities.values():
        if i not in names:
            raise AxiomViolation("wide subcategory is missing an identity", witness=(tag, i))
    for g in names:
        for f in names:
            if c.tgt(f) == c.src(g) and c.compose[(g, f)] not in names:
                raise AxiomViolation(
                    "wide subcategory is not closed under composition", witness=(tag, g, f)
                )


def _factorizations(c: GenReedyCat):
    """All (minus, plus) factorizations, computed in one sweep."""
    table: dict = {f: [] for f in c.arrows}
    for fm in c.minus:
        for fp in c.plus:
            if c.tgt(fm) == c.src(fp):
                table[c.compose[(fp, fm)]].append((fm, fp))
    return table


def validate_gen_reedy(data) -> GenReedyCat:
    """Build and exhaustively check a generalized Reedy category.

    Accepts either a :class:`GenReedyCat` or raw table data (a dict with
    ``objects``/``degrees``/``arrows``/``compose``/``identities``/``plus``/
    ``minus``).  Checks, with witnesses:

    - category laws (identities, totality, endpoints, associativity) and
      wideness of both subcategories;
    - (i) non-invertible ``+`` (resp. ``-``) arrows raise (lower) degree,
      isomorphisms preserve it;
    - (ii) ``+ in -`` exactly the isomorphisms;
    - (iii) every arrow factors as ``plus . minus``, uniquely up to
      isomorphism of the middle object.
    """
    if isinstance(data, GenReedyCat):
        c = data
    else:
        c = GenReedyCat(
            objects=tuple(data["objects"]),
            degrees=dict(data["degrees"]),
            arrows={k: tuple(v) for k, v in data["arrows"].items()},
            compose={tuple(k) if not isinstance(k, str) else k: v for k, v in data["compose"].items()},
            identities=dict(data["identities"]),
            plus=frozenset(data["plus"]),
            minus=frozenset(data["minus"]),
        )
    _check_category(c)
    _check_wide(c, c.plus, "+")
    _check_wide(c, c.minus, "-")

    for f, (s, t) in c.arrows.items():
        if c.is_iso(f):
            if c.degrees[s] != c.degrees[t]:
                raise AxiomViolation("axiom (i): isomorphism changes degree", witness=f)
            continue
        if f in c.plus and not c.degrees[s] < c.degrees[t]:
            raise AxiomViolation("axiom (i): non-invertible + arrow must raise degree", witness=f)
        if f in c.minus and not c.degrees[s] > c.degrees[t]:
            raise AxiomViolation("axiom (i): non-invertible - arrow must lower degree", witness=f)

    for f in c.arrows:
        if (f in c.plus and f in c.minus) != c.is_iso(f):
            raise AxiomViolation(
                "axiom (ii): + and - must meet exactly in the isomorphisms", witness=f
            )

    table = _factorizations(c)
    for f, pairs in table.items():
        if not pairs:
            raise AxiomViolation("axiom (iii): no (+,-) factorization", witness=f)
        fm0, fp0 = pairs[0]
        for fm1, fp1 in pairs[1:]:
            m0, m1 = c.tgt(fm0), c.tgt(fm1)
            if not any(
                c.is_iso(phi)
                and c.compose[(fp1, phi)] == fp0
                and c.compose[(phi, fm0)] == fm1
                for phi in c.arrows_between(m0, m1)
            ):
                raise AxiomViolation(
                    "axiom (iii): factorizations not related by an isomorphism",
                    witness=(f, (fm0, fp0), (fm1, fp1)),
                )
    return c


# -- automorphism machinery -----------------------------------------------------


def arrow_automorphisms(c: GenReedyCat, f) -> tuple:
    """Aut(src -> tgt) in the arrow category: commuting pairs of
    automorphisms."""
    s, t = c.arrows[f]
    return tuple(
        (a, b)
        for a in c.automorphisms(s)
        for b in c.automorphisms(t)
        if c.compose[(f, a)] == c.compose[(b, f)]
    )


def _closure(c: GenReedyCat, r, gens) -> frozenset:
    out = {c.identities[r]}
    frontier = set(gens)
    while frontier:
        x = frontier.pop()
        if x in out:
            continue
        out.add(x)
        frontier.add(c.inverse(x))
        for y in tuple(out):
            frontier.add(c.compose[(x, y)])
            frontier.add(c.compose[(y, x)])
    return frozenset(out)


def subgroups_of_aut(c: GenReedyCat, r) -> tuple:
    """Every subgroup of Aut(r), as frozensets of arrow names."""
    found = {frozenset({c.identities[r]})}
    frontier = list(found)
    while frontier:
        h = frontier.pop()
        for x in c.automorphisms(r):
            bigger = _closure(c, r, h | {x})
            if bigger not in found:
                found.add(bigger)
                frontier.append(bigger)
    return tuple(sorted(found, key=lambda s: (len(s), sorted(s))))


@dataclass(eq=False)
class FamilyCollection:
    """Per object, a family of subgroups of Aut(r), each family closed
    under passing to subgroups and under conjugation."""

    cat: GenReedyCat
    families: dict  # object -> frozenset of frozensets of arrow names


def family_collection(cat: GenReedyCat, families: dict) -> FamilyCollection:
    for r in cat.objects:
        fam = families.get(r, frozenset())
        autos = set(cat.automorphisms(r))
        for h in fam:
            if not h <= autos:
                raise AxiomViolation("family member is not a subgroup of Aut", witness=(r, h))
            if _closure(cat, r, h) != h:
                raise AxiomViolation("family member is not closed", witness=(r, h))
            for g in autos:
                gi = cat.inverse(g)
                conj = frozenset(cat.compose[(cat.compose[(g, x)], gi)] for x in h)
                if conj not in fam:
                    raise AxiomViolation("family not conjugation-closed", witness=(r, h, g))
        for h in fam:
            for sub in subgroups_of_aut(cat, r):
                if sub <= h and sub not in fam:
                    raise AxiomViolation("family not subgroup-closed", witness=(r, h, sub))
    return FamilyCollection(cat, {r: frozenset(families.get(r, frozenset())) for r in cat.objects})


@dataclass(frozen=True)
class AdmissibleReport:
    ok: bool
    witness: tuple = ()

    def __bool__(self):
        return self.ok


def check_admissible(c: GenReedyCat, fams: FamilyCollection) -> AdmissibleReport:
    """Reedy-admissibility: for every ``-`` arrow r -> r' and every H in the
    family at r, the image under the target projection of the preimage of H
    under the source projection must lie in the family at r'."""
    for f in sorted(c.minus):
        r, r2 = c.arrows[f]
        pairs = arrow_automorphisms(c, f)
        for h in sorted(fams.families.get(r, ()), key=sorted):
            pushed = frozenset(b for a, b in pairs if a in h)
            if pushed not in fams.families.get(r2, frozenset()):
                return AdmissibleReport(False, (f, tuple(sorted(h)), tuple(sorted(pushed))))
    return AdmissibleReport(True)


# -- presheaves, latching and matching -------------------------------------------


@dataclass(eq=False)
class ReedyPresheaf:
    """A covariant set-valued diagram on the category: ``values[r]`` is a
    tuple, ``action[f]`` a dict sending values at src(f) to values at
    tgt(f)."""

    cat: GenReedyCat
    values: dict
    action: dict
    label: str = "presheaf"


def validate_reedy_presheaf(x: ReedyPresheaf) -> None:
    c = x.cat
    for r in c.objects:
        i = c.identities[r]
        for v in x.values[r]:
            if x.action[i][v] != v:
                raise AxiomViolation("identity must act trivially", witness=(r, v))
    for (g, f), h in c.compose.items():
        for v in x.values[c.src(f)]:
            if x.action[g][x.action[f][v]] != x.action[h][v]:
                raise AxiomViolation("diagram not functorial", witness=(g, f, v))


def constant_reedy(c: GenReedyCat, points) -> ReedyPresheaf:
    points = tuple(points)
    values = {r: points for r in c.objects}
    action = {f: {v: v for v in points} for f in c.arrows}
    return ReedyPresheaf(c, values, action, label="const")


def representable_reedy(c: GenReedyCat, r) -> ReedyPresheaf:
    values = {u: c.arrows_between(r, u) for u in c.objects}
    action = {
        f: {a: c.compose[(f, a)] for a in values[c.src(f)]} for f in c.arrows
    }
    return ReedyPresheaf(c, values, action, label="R(%s,-)" % (r,))


def latching_matching(x: ReedyPresheaf, r):
    """Set-level latching and matching objects at ``r``.

    The latching object is the colimit over non-invertible ``+`` arrows into
    ``r`` (returned as the tuple of identification classes of pairs
    ``(arrow, value)``); the matching object is the limit over non-invertible
    ``-`` arrows out of ``r`` (the tuple of compatible families).
    """
    c = x.cat
    into = [f for f in sorted(c.plus) if c.tgt(f) == r and not c.is_iso(f)]
    nodes = [(f, v) for f in into for v in x.values[c.src(f)]]
    parent = {n: n for n in nodes}

    def find(n):
        while parent[n] != n:
            parent[n] = parent[parent[n]]
            n = parent[n]
        return n

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for f in into:
        for w in c.plus:
            if c.src(w) != c.src(f):
                continue
            for g in into:
                if c.src(g) == c.tgt(w) and c.compose[(g, w)] == f:
                    for v in x.values[c.src(f)]:
                        union((f, v), (g, x.action[w][v]))
    classes: dict = {}
    for n in nodes:
        classes.setdefault(find(n), []).append(n)
    latching = tuple(
        frozenset(members) for _, members in sorted(classes.items(), key=lambda kv: repr(kv[0]))
    )

    outof = [f for f in sorted(c.minus) if c.src(f) == r and not c.is_iso(f)]
    position = {f: i for i, f in enumerate(outof)}
    constraints: dict = {f: [] for f in outof}
    for f in outof:
        for w in c.minus:
            if c.src(w) != c.tgt(f):
                continue
            g = c.compose[(w, f)]
            if g in position:
                # check the constraint as soon as both entries are chosen
                constraints[max(f, g, key=position.get)].append((f, w, g))
    families = [{}]
    for f in outof:
        grown = []
        for fam in families:
            for v in x.values[c.tgt(f)]:
                fam2 = dict(fam)
                fam2[f] = v
                if all(x.action[w][fam2[a]] == fam2[b] for a, w, b in constraints[f]):
                    grown.append(fam2)
        families = grown
    matching = tuple(tuple(sorted(fam.items())) for fam in families)
    return latching, matching


def latching_map(x: ReedyPresheaf, r) -> dict:
    """The canonical map from the latching classes into the value at r."""
    latching, _ = latching_matching(x, r)
    out = {}
    for cls in latching:
        f, v = next(iter(cls))
        out[cls] = x.action[f][v]
    return out


# -- skeleta, quotients, generating inclusions ------------------------------------


def skeleton_values(x: ReedyPresheaf, n: int) -> dict:
    """The image subdiagram generated by values of degree at most n."""
    c = x.cat
    out = {u: set() for u in c.objects}
    for w in c.objects:
        if c.degrees[w] > n:
            continue
        for f in c.arrows:
            if c.src(f) != w:
                continue
            for v in x.values[w]:
                out[c.tgt(f)].add(x.action[f][v])
    return {u: tuple(v for v in x.values[u] if v in vs) for u, vs in out.items()}


@dataclass(eq=False)
class PresheafMap:
    source: ReedyPresheaf
    target: ReedyPresheaf
    components: dict  # object -> dict value -> value


def validate_presheaf_map(m: PresheafMap) -> None:
    c = m.source.cat
    for f in c.arrows:
        s, t = c.arrows[f]
        for v in m.source.values[s]:
            if m.components[t][m.source.action[f][v]] != m.target.action[f][m.components[s][v]]:
                raise AxiomViolation("map is not natural", witness=(f, v))


def generator_object(c: GenReedyCat, r, h) -> PresheafMap:
    """The generating inclusion at (r, H): the degree-(|r|-1) skeleton of the
    representable at r, with both sides quotiented by H acting by
    precomposition; H must be a subgroup of Aut(r)."""
    h = frozenset(h) | {c.identities[r]}
    if _closure(c, r, h) != h:
        raise AxiomViolation("quotient group is not a subgroup of Aut", witness=(r, h))
    full = representable_reedy(c, r)
    sk = skeleton_values(full, c.degrees[r] - 1)

    def orbit_rep(alpha):
        return min((c.compose[(alpha, t)] for t in h), key=repr)

    def quotient(values):
        qvalues = {u: tuple(sorted({orbit_rep(a) for a in vs}, key=repr)) for u, vs in values.items()}
        qaction = {
            f: {a: orbit_rep(c.compose[(f, a)]) for a in qvalues[c.src(f)]}
            for f in c.arrows
        }
        return qvalues, qaction

    q_full_values, q_full_action = quotient(full.values)
    q_sk_values, q_sk_action = quotient(sk)
    source = ReedyPresheaf(c, q_sk_values, q_sk_action, label="sk/H")
    target = ReedyPresheaf(c, q_full_values, q_full_action, label="R(r,-)/H")
    components = {u: {v: v for v in q_sk_values[u]} for u in c.objects}
    return PresheafMap(source, target, components)


# -- constructors -----------------------------------------------------------------


def delta_truncated(n: int) -> GenReedyCat:
    """The simplex category on [0]..[n]: arrows are monotone maps, ``+`` the
    injections, ``-`` the surjections."""
    objects = tuple(range(n + 1))

    def monotone(a, b):
        return [
            m
            for m in itertools.product(range(b + 1), repeat=a + 1)
            if all(m[i] <= m[i + 1] for i in range(a))
        ]

    arrows = {}
    names = {}
    for a in objects:
        for b in objects:
            for m in monotone(a, b):
                name = "d%d>%d:%s" % (a, b, "".join(map(str, m)))
                arrows[name] = (a, b)
                names[(a, b, m)] = name
    compose = {}
    for g, (b1, cc) in arrows.items():
        gm = tuple(int(ch) for ch in g.split(":")[1])
        for f, (a, b2) in arrows.items():
            if b2 != b1:
                continue
            fm = tuple(int(ch) for ch in f.split(":")[1])
            compose[(g, f)] = names[(a, cc, tuple(gm[i] for i in fm))]
    identities = {a: names[(a, a, tuple(range(a + 1)))] for a in objects}
    plus, minus = set(), set()
    for name, (a, b) in arrows.items():
        m = tuple(int(ch) for ch in name.split(":")[1])
        if len(set(m)) == len(m):
            plus.add(name)
        if set(m) == set(range(b + 1)):
            minus.add(name)
    return GenReedyCat(
        objects, {a: a for a in objects}, arrows, compose, identities,
        frozenset(plus), frozenset(minus),
    )


def op_category(c: GenReedyCat) -> GenReedyCat:
    """The opposite category; the two wide subcategories trade places."""
    arrows = {f: (t, s) for f, (s, t) in c.arrows.items()}
    compose = {(f, g): h for (g, f), h in c.compose.items()}
    return GenReedyCat(
        c.objects, dict(c.degrees), arrows, compose, dict(c.identities),
        plus=frozenset(c.minus), minus=frozenset(c.plus),
    )


def group_category(group: FiniteGroup) -> GenReedyCat:
    """A group as a one-object category in which every arrow is invertible."""
    obj = "*"
    arrows = {g: (obj, obj) for g in group.elements}
    compose = {(g, f): group.mul(g, f) for g in group.elements for f in group.elements}
    return GenReedyCat(
        (obj,), {obj: 0}, arrows, compose, {obj: group.identity},
        plus=frozenset(group.elements), minus=frozenset(group.elements),
    )


def product_category(a: GenReedyCat, b: GenReedyCat) -> GenReedyCat:
    """The product Reedy structure: componentwise arrows and tags, degree
    the sum of degrees."""
    objects = tuple((x, y) for x in a.objects for y in b.objects)
    arrows = {}
    for f, (s1, t1) in a.arrows.items():
        for g, (s2, t2) in b.arrows.items():
            arrows[(f, g)] = ((s1, s2), (t1, t2))
    compose = {}
    for (f1, g1) in arrows:
        for (f2, g2) in arrows:
            if a.tgt(f2) == a.src(f1) and b.tgt(g2) == b.src(g1):
                compose[((f1, g1), (f2, g2))] = (a.compose[(f1, f2)], b.compose[(g1, g2)])
    identities = {(x, y): (a.identities[x], b.identities[y]) for x, y in objects}
    plus = frozenset((f, g) for f in a.plus for g in b.plus)
    minus = frozenset((f, g) for f in a.minus for g in b.minus)
    degrees = {(x, y): a.degrees[x] + b.degrees[y] for x, y in objects}
    return GenReedyCat(objects, degrees, arrows, compose, identities, plus, minus)


def omega_op_truncated(degree: int, arity: int) -> GenReedyCat:
    """The opposite of the truncated tree category: an arrow u -> w is a
    tree map w -> u; ``+`` arrows are (opposites of) degeneracy-only maps,
    ``-`` arrows opposites of monomorphisms."""
    objs = enumerate_trees(degree, arity)
    names = tuple(range(len(objs)))
    maps: dict = {}
    arrows = {}
    plus, minus = set(), set()
    for j, t in enumerate(objs):
        for i, s in enumerate(objs):
            for k, edges in enumerate(enumerate_maps(t, s)):
                name = "w%d>%d#%d" % (i, j, k)
                arrows[name] = (i, j)
                maps[name] = edges
                deg_part, inner, outer = factorize(TreeMap(t, s, edges))
                mono = len(deg_part.source.edges) == len(deg_part.target.edges)
                # an outer face dropping only stump vertices keeps every
                # edge, so isomorphy needs the vertex count as well
                degen = (
                    len(inner.source.edges) == len(inner.target.edges)
                    and len(outer.source.edges) == len(outer.target.edges)
                    and len(outer.source.vertices) == len(outer.target.vertices)
                )
                if degen:
                    plus.add(name)
                if mono:
                    minus.add(name)
    lookup = {}
    for name, (i, j) in arrows.items():
        lookup[(i, j, tuple(sorted(maps[name].items())))] = name
    compose = {}
    for g, (b1, cc) in arrows.items():
        for f, (aa, b2) in arrows.items():
            if b2 != b1:
                continue
            edges = {e: maps[f][v] for e, v in maps[g].items()}
            compose[(g, f)] = lookup[(aa, cc, tuple(sorted(edges.items())))]
    identities = {
        i: lookup[(i, i, tuple(sorted({e: e for e in t.edges}.items())))]
        for i, t in enumerate(objs)
    }
    cat = GenReedyCat(
        names, {i: len(t.vertices) for i, t in enumerate(objs)}, arrows, compose,
        identities, frozenset(plus), frozenset(minus),
    )
    cat.trees = objs
    cat.tree_maps = maps
    return cat


def graph_families(group: FiniteGroup, cat: GenReedyCat, product: GenReedyCat) -> FamilyCollection:
    """All graph-subgroup families on a product ``group x cat``: the
    subgroups of Aut((*, u)) meeting the plain automorphism group trivially."""
    families = {}
    for obj in product.objects:
        _, u = obj
        fam = set()
        pure = {
            (group.identity, a) for a in cat.automorphisms(u)
        }
        for h in subgroups_of_aut(product, obj):
            if all(x not in pure or x == product.identities[obj] for x in h):
                fam.add(h)
        families[obj] = frozenset(fam)
    return family_collection(product, families)
