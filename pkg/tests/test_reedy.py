"""Finite Reedy data: axiom validation, admissible subgroup families,
latching/matching objects, and the generating skeleton inclusions."""
from math import comb

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dendroid.errors import AxiomViolation
from dendroid.groups import cyclic_group, quaternion_group
from dendroid.reedy import (
    check_admissible,
    constant_reedy,
    delta_truncated,
    family_collection,
    generator_object,
    graph_families,
    group_category,
    latching_map,
    latching_matching,
    omega_op_truncated,
    op_category,
    product_category,
    representable_reedy,
    skeleton_values,
    subgroups_of_aut,
    validate_gen_reedy,
    validate_presheaf_map,
    validate_reedy_presheaf,
)
from dendroid.treemaps import TreeMap, factorize

from oracles import oracle_broad_maps

# shared categories; cheap enough to build at import time
DELTA3 = delta_truncated(3)
D3OP = op_category(DELTA3)
OM22 = omega_op_truncated(2, 2)


@pytest.fixture(scope="module")
def z2():
    return cyclic_group(2)


@pytest.fixture(scope="module")
def z2_product(z2):
    return product_category(group_category(z2), OM22)


@pytest.fixture(scope="module")
def z2_graph_families(z2, z2_product):
    return graph_families(z2, OM22, z2_product)


# -- validation ---------------------------------------------------------------

def test_simplex_truncation_validates():
    c = validate_gen_reedy(DELTA3)
    assert len(c.arrows) == 121
    assert all(c.degrees[a] == a for a in c.objects)
    # only identities are invertible, so + meets - in exactly those
    assert c.plus & c.minus == frozenset(c.identities.values())


def test_simplex_opposite_validates():
    c = validate_gen_reedy(D3OP)
    assert c.plus == DELTA3.minus and c.minus == DELTA3.plus


def test_tree_opposite_validates_and_matches_map_oracle():
    c = validate_gen_reedy(OM22)
    assert len(c.objects) == 10
    assert all(c.degrees[i] == len(c.trees[i].vertices) for i in c.objects)
    total = sum(
        len(oracle_broad_maps(c.trees[j], c.trees[i]))
        for i in c.objects
        for j in c.objects
    )
    assert len(c.arrows) == total == 172


def test_group_times_tree_product_validates(z2, z2_product):
    c = validate_gen_reedy(z2_product)
    assert len(c.arrows) == 2 * len(OM22.arrows) == 344
    for (x, u) in c.objects:
        assert c.degrees[(x, u)] == OM22.degrees[u]


def _two_factorization_category():
    arrows = {
        "ia": ("a", "a"), "im1": ("m1", "m1"), "im2": ("m2", "m2"), "ib": ("b", "b"),
        "p1": ("a", "m1"), "p2": ("a", "m2"),
        "q1": ("m1", "b"), "q2": ("m2", "b"),
        "f": ("a", "b"),
    }
    compose = {}
    for g, (gs, gt) in arrows.items():
        for f, (fs, ft) in arrows.items():
            if ft != gs:
                continue
            if g.startswith("i"):
                compose[(g, f)] = f
            elif f.startswith("i"):
                compose[(g, f)] = g
            else:
                compose[(g, f)] = "f"
    return {
        "objects": ("a", "m1", "m2", "b"),
        "degrees": {"a": 1, "m1": 0, "m2": 0, "b": 2},
        "arrows": arrows,
        "compose": compose,
        "identities": {"a": "ia", "m1": "im1", "m2": "im2", "b": "ib"},
        "plus": ("ia", "im1", "im2", "ib", "q1", "q2"),
        "minus": ("ia", "im1", "im2", "ib", "p1", "p2"),
    }


def test_two_nonisomorphic_factorizations_rejected():
    with pytest.raises(AxiomViolation, match="factorizations not related") as exc:
        validate_gen_reedy(_two_factorization_category())
    assert exc.value.witness[0] == "f"


def test_factorizations_related_by_unique_iso():
    for c in (DELTA3, OM22):
        table = {f: [] for f in c.arrows}
        for fm in c.minus:
            for fp in c.plus:
                if c.tgt(fm) == c.src(fp):
                    table[c.compose[(fp, fm)]].append((fm, fp))
        for f, pairs in table.items():
            assert pairs, f
            fm0, fp0 = pairs[0]
            for fm1, fp1 in pairs:
                links = [
                    phi
                    for phi in c.arrows_between(c.tgt(fm0), c.tgt(fm1))
                    if c.is_iso(phi)
                    and c.compose[(fp1, phi)] == fp0
                    and c.compose[(phi, fm0)] == fm1
                ]
                assert len(links) == 1


@given(st.integers(min_value=0, max_value=3), st.integers(min_value=0, max_value=3))
@settings(deadline=None)
def test_simplex_hom_counts_are_binomial(a, b):
    assert len(DELTA3.arrows_between(a, b)) == comb(a + b + 1, a + 1)


def test_subgroup_enumeration_matches_group_oracle():
    q8 = quaternion_group()
    assert len(subgroups_of_aut(group_category(q8), "*")) == len(q8.subgroups()) == 6


# -- admissible families --------------------------------------------------------

def _corolla_index(arity):
    return next(
        i
        for i, t in enumerate(OM22.trees)
        if len(t.vertices) == 1 and len(t.edges) == arity + 1
    )


def test_graph_families_are_admissible(z2_product, z2_graph_families):
    report = check_admissible(z2_product, z2_graph_families)
    assert report.ok and bool(report)
    # at the binary corolla: trivial, free swap graph, and the full-group
    # trivial graph; the plain swap is not a graph subgroup
    c2 = ("*", _corolla_index(2))
    assert len(z2_graph_families.families[c2]) == 3
    eta = ("*", next(i for i, t in enumerate(OM22.trees) if not t.vertices))
    assert len(z2_graph_families.families[eta]) == 2


def test_all_trivial_families_are_admissible(z2_product):
    fams = family_collection(
        z2_product,
        {r: frozenset({frozenset({z2_product.identities[r]})}) for r in z2_product.objects},
    )
    assert check_admissible(z2_product, fams).ok


def _interval_category(direction):
    """The poset 0 -> 1 ('raise') or 1 -> 0 ('lower'), Reedy in one piece."""
    if direction == "raise":
        arrows = {"i0": ("0", "0"), "i1": ("1", "1"), "v": ("0", "1")}
        compose = {("i0", "i0"): "i0", ("i1", "i1"): "i1",
                   ("v", "i0"): "v", ("i1", "v"): "v"}
        plus, minus = ("i0", "i1", "v"), ("i0", "i1")
    else:
        arrows = {"i0": ("0", "0"), "i1": ("1", "1"), "u": ("1", "0")}
        compose = {("i0", "i0"): "i0", ("i1", "i1"): "i1",
                   ("u", "i1"): "u", ("i0", "u"): "u"}
        plus, minus = ("i0", "i1"), ("i0", "i1", "u")
    return validate_gen_reedy({
        "objects": ("0", "1"),
        "degrees": {"0": 0, "1": 1},
        "arrows": arrows,
        "compose": compose,
        "identities": {"0": "i0", "1": "i1"},
        "plus": plus,
        "minus": minus,
    })


def test_admissibility_needs_lower_family_to_dominate(z2):
    prod = product_category(group_category(z2), _interval_category("lower"))
    obj0, obj1 = ("*", "0"), ("*", "1")
    triv = {r: frozenset({prod.identities[r]}) for r in prod.objects}
    full = {r: frozenset(prod.automorphisms(r)) for r in prod.objects}

    bad = family_collection(prod, {obj1: frozenset({triv[obj1], full[obj1]}),
                                   obj0: frozenset({triv[obj0]})})
    report = check_admissible(prod, bad)
    assert not report.ok
    arrow, pulled, pushed = report.witness
    assert prod.arrows[arrow] == (obj1, obj0)
    assert set(pushed) == full[obj0]

    good = family_collection(prod, {obj1: frozenset({triv[obj1], full[obj1]}),
                                    obj0: frozenset({triv[obj0], full[obj0]})})
    assert check_admissible(prod, good).ok

    # only the upper families constrain: shrinking them restores the property
    sparse = family_collection(prod, {obj1: frozenset({triv[obj1]}),
                                      obj0: frozenset({triv[obj0], full[obj0]})})
    assert check_admissible(prod, sparse).ok


# -- latching and matching -------------------------------------------------------

def test_latching_of_simplex_representable_is_its_boundary():
    for n, boundary_count in ((1, 2), (2, 9)):
        rep = representable_reedy(D3OP, n)
        validate_reedy_presheaf(rep)
        latching, _ = latching_matching(rep, n)
        assert len(latching) == boundary_count
        sk = skeleton_values(rep, n - 1)
        assert len(sk[n]) == boundary_count
        assert set(latching_map(rep, n).values()) == set(sk[n])
    latching, _ = latching_matching(representable_reedy(D3OP, 0), 0)
    assert latching == ()


def test_latching_equals_skeleton_level_everywhere():
    cases = [(D3OP, 3), (OM22, _corolla_index(2))]
    for cat, r0 in cases:
        rep = representable_reedy(cat, r0)
        for r in cat.objects:
            latching, _ = latching_matching(rep, r)
            assert len(latching) == len(skeleton_values(rep, cat.degrees[r] - 1)[r])


def test_matching_is_a_point_when_everything_raises():
    cat = _interval_category("raise")
    for r0 in cat.objects:
        rep = representable_reedy(cat, r0)
        for r in cat.objects:
            _, matching = latching_matching(rep, r)
            assert len(matching) == 1


def _undirected_components(arrows, linked):
    seen, count = set(), 0
    for a in arrows:
        if a in seen:
            continue
        count += 1
        stack = [a]
        while stack:
            x = stack.pop()
            if x in seen:
                continue
            seen.add(x)
            stack.extend(y for y in arrows if y not in seen and linked(x, y))
    return count


def test_constant_latching_and_matching_counts():
    points = ("x", "y")
    const = constant_reedy(D3OP, points)
    validate_reedy_presheaf(const)
    c = D3OP
    for r in c.objects:
        into = [f for f in sorted(c.plus) if c.tgt(f) == r and not c.is_iso(f)]
        outof = [f for f in sorted(c.minus) if c.src(f) == r and not c.is_iso(f)]

        def over(a, b):
            # a = b . w for some + arrow w under the slice into r
            return any(c.compose.get((b, w)) == a or c.compose.get((a, w)) == b
                       for w in c.plus)

        def under(a, b):
            # b = w . a for some - arrow w under the slice out of r
            return any(c.compose.get((w, a)) == b or c.compose.get((w, b)) == a
                       for w in c.minus)

        latching, matching = latching_matching(const, r)
        if into:
            assert len(latching) == len(points) * _undirected_components(into, over)
        else:
            assert latching == ()
        assert len(matching) == len(points) ** _undirected_components(outof, under)


def test_constant_counts_at_small_levels():
    const = constant_reedy(D3OP, ("x", "y"))
    lat1, mat1 = latching_matching(const, 1)
    assert (len(lat1), len(mat1)) == (2, 4)
    lat2, mat2 = latching_matching(const, 2)
    assert (len(lat2), len(mat2)) == (2, 2)


# -- generating inclusions --------------------------------------------------------

def test_generator_at_simplex_is_boundary_inclusion():
    expected = {
        1: ([2, 2, 2, 2], [2, 3, 4, 5]),
        2: ([3, 6, 9, 12], [3, 6, 10, 15]),
    }
    for n, (sk_counts, full_counts) in expected.items():
        gmap = generator_object(D3OP, n, {D3OP.identities[n]})
        validate_presheaf_map(gmap)
        validate_reedy_presheaf(gmap.source)
        validate_reedy_presheaf(gmap.target)
        assert [len(gmap.source.values[m]) for m in D3OP.objects] == sk_counts
        assert [len(gmap.target.values[m]) for m in D3OP.objects] == full_counts


def test_generator_at_degree_zero_has_empty_source():
    eta = next(i for i, t in enumerate(OM22.trees) if not t.vertices)
    gmap = generator_object(OM22, eta, {OM22.identities[eta]})
    assert all(not vs for vs in gmap.source.values.values())
    rep = representable_reedy(OM22, eta)
    assert gmap.target.values == rep.values


def _proper_face_part(source, target, edges):
    deg, inner, outer = factorize(TreeMap(source, target, edges))
    return (
        len(inner.source.edges) < len(inner.target.edges)
        or len(outer.source.edges) < len(outer.target.edges)
        or len(outer.source.vertices) < len(outer.target.vertices)
    )


def test_trivial_generators_match_tree_boundaries():
    # the skeleton side of every trivial-subgroup generator counts exactly
    # the maps whose face part is proper
    for r, rtree in enumerate(OM22.trees):
        gmap = generator_object(OM22, r, {OM22.identities[r]})
        validate_presheaf_map(gmap)
        for u, utree in enumerate(OM22.trees):
            maps = [OM22.tree_maps[a] for a in OM22.arrows_between(r, u)]
            boundary = [m for m in maps if _proper_face_part(utree, rtree, m)]
            assert len(gmap.target.values[u]) == len(maps)
            assert len(gmap.source.values[u]) == len(boundary)


def test_swap_graph_generator_is_induced_boundary(z2, z2_product):
    c2 = _corolla_index(2)
    obj = ("*", c2)
    swap = next(
        a for a in OM22.automorphisms(c2) if a != OM22.identities[c2]
    )
    gamma = {z2_product.identities[obj], ("-1", swap)}
    gmap = generator_object(z2_product, obj, gamma)
    validate_presheaf_map(gmap)
    validate_reedy_presheaf(gmap.source)
    validate_reedy_presheaf(gmap.target)
    c2tree = OM22.trees[c2]
    for u, utree in enumerate(OM22.trees):
        maps = [OM22.tree_maps[a] for a in OM22.arrows_between(c2, u)]
        boundary = [m for m in maps if _proper_face_part(utree, c2tree, m)]
        # quotienting the free product copies recovers one copy per plain map
        assert len(gmap.target.values[("*", u)]) == len(maps)
        assert len(gmap.source.values[("*", u)]) == len(boundary)
