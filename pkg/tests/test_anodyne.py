"""Filtration certificates: the verifier, the march, and the replays."""

import pytest
from hypothesis import given, settings

from dendroid.anodyne import (
    CharCollection,
    FiltrationCertificate,
    FiltrationStep,
    GPoset,
    build_filtration,
    certify,
    face_lex,
    generating_reduction,
    replay,
    verify_characteristic,
)
from dendroid.broadposet import Forest, Tree, corolla
from dendroid.complexes import (
    Complex,
    boundary,
    horn,
    orbital_horn,
    representable,
    segal_core,
)
from dendroid.equivariance import induce, trivial_action
from dendroid.errors import (
    DendroidError,
    MalformedPoset,
    NotAPushout,
    VerificationFailed,
)
from dendroid.groups import cyclic_group, trivial_group
from dendroid.treemaps import enumerate_faces, face_descriptor, full_face

from conftest import trees


def _trivial_gtree(tree):
    return trivial_action(trivial_group(), Forest((tree,)))


# -----------------------------------------------------------------------
# G-posets
# -----------------------------------------------------------------------

class TestGPoset:
    def test_closure_and_queries(self, z2_group):
        ident = {g: {x: x for x in "abc"} for g in z2_group.elements}
        p = GPoset(z2_group, "abc", [("a", "b"), ("b", "c")], ident)
        assert p.le("a", "c") and p.lt("a", "c") and not p.le("c", "a")
        assert p.le("b", "b") and not p.lt("b", "b")
        assert p.orbits() == (("a",), ("b",), ("c",))
        assert [o[0] for o in p.orbit_linear_extension()] == ["a", "b", "c"]

    def test_antisymmetry_rejected(self, z2_group):
        ident = {g: {x: x for x in "ab"} for g in z2_group.elements}
        with pytest.raises(MalformedPoset):
            GPoset(z2_group, "ab", [("a", "b"), ("b", "a")], ident)

    def test_action_must_permute_and_fix_identity(self, z2_group):
        with pytest.raises(MalformedPoset):
            GPoset(z2_group, "ab", [], {"1": {"a": "a"}, "-1": {"a": "a", "b": "b"}})
        bad = {"1": {"a": "b", "b": "a"}, "-1": {"a": "a", "b": "b"}}
        with pytest.raises(MalformedPoset):
            GPoset(z2_group, "ab", [], bad)

    def test_comparable_orbit_rejected(self, z2_group):
        swap = {"1": {x: x for x in "ab"}, "-1": {"a": "b", "b": "a"}}
        with pytest.raises(MalformedPoset):
            GPoset(z2_group, "ab", [("a", "b")], swap)

    def test_orbit_extension_respects_action(self, z2_group):
        # a diamond whose middle layer is swapped by the action
        elems = ("bot", "l", "r", "top")
        rel = [("bot", "l"), ("bot", "r"), ("l", "top"), ("r", "top")]
        swap = {x: x for x in elems} | {"l": "r", "r": "l"}
        p = GPoset(z2_group, elems, rel, {"1": {x: x for x in elems}, "-1": swap})
        ext = p.orbit_linear_extension()
        assert ext == (("bot",), ("l", "r"), ("top",))
        assert p.isotropy("l") == frozenset({"1"})
        assert p.isotropy("top") == frozenset({"1", "-1"})


# -----------------------------------------------------------------------
# the lexicographic face listing
# -----------------------------------------------------------------------

def test_face_lex_frozen_order(z2_gtree):
    comp = z2_gtree.forest.trees[0]
    listed = face_lex(z2_gtree, full_face(comp), {"-b", "b"})
    assert [
        (v.root, v.leaves, tuple(sorted(v.removed))) for v in listed
    ] == [
        ("c", ("-b", "a"), ()),
        ("c", ("-a", "b"), ()),
        ("d", ("-b", "a"), ("c",)),
        ("d", ("-a", "b"), ("c",)),
        ("d", ("-b", "a"), ()),
        ("d", ("-a", "b"), ()),
        ("c", ("-a", "a"), ()),
        ("d", ("-a", "a"), ("c",)),
        ("d", ("-a", "a"), ()),
    ]
    # contracting away a characteristic edge drops the face: Ξ must
    # survive to the outer closure (removing c above is fine, b is not)
    assert face_descriptor(comp, "d", ("-a", "a"), {"b"}) not in listed


def test_face_lex_key_is_monotone(first_tree):
    gt = _trivial_gtree(first_tree)
    listed = face_lex(gt, full_face(first_tree), first_tree.inner_edges())
    sizes = [len(v.as_tree().edges) for v in listed]
    assert sizes == sorted(sizes)
    assert all(not v.removed for v in listed)


# -----------------------------------------------------------------------
# verification reports
# -----------------------------------------------------------------------

def _roots_poset(gtree):
    roots = tuple(t.root for t in gtree.forest.trees)
    action = {g: {r: gtree.act(g, r) for r in roots} for g in gtree.group.elements}
    return GPoset(gtree.group, roots, (), action)


def test_verify_flags_unstable_edges(z2_gtree):
    comp = z2_gtree.forest.trees[0]
    coll = CharCollection(
        z2_gtree,
        orbital_horn(z2_gtree, {"-b", "b"}),
        _roots_poset(z2_gtree),
        {"d": full_face(comp)},
        {"d": frozenset({"b"})},
    )
    report = verify_characteristic(coll)
    assert not report.ok
    assert any(code == "Ch0" for code, _ in report.failures)
    with pytest.raises(VerificationFailed):
        report.require()


def test_verify_flags_missing_small_faces(z2_gtree):
    # no characteristic edges at all: every outer face must be present
    comp = z2_gtree.forest.trees[0]
    coll = CharCollection(
        z2_gtree,
        segal_core(z2_gtree),
        _roots_poset(z2_gtree),
        {"d": full_face(comp)},
        {"d": frozenset()},
    )
    report = verify_characteristic(coll)
    assert any(code == "Ch1" for code, _ in report.failures)
    with pytest.raises(VerificationFailed):
        build_filtration(coll)


def test_verify_flags_contraction_into_base(first_tree):
    gt = _trivial_gtree(first_tree)
    coll = CharCollection(
        gt,
        boundary(gt),
        GPoset(gt.group, ("top",), (), {"1": {"top": "top"}}),
        {"top": full_face(first_tree)},
        {"top": frozenset({"b"})},
    )
    report = verify_characteristic(coll)
    assert any(code == "Ch2" for code, _ in report.failures)
    with pytest.raises(VerificationFailed):
        build_filtration(coll)


def test_verify_flags_missing_order(first_tree):
    # the subset indexing needs reverse inclusion; an antichain fails
    gt = _trivial_gtree(first_tree)
    elems = (frozenset({"d"}), frozenset({"f"}), frozenset({"d", "f"}))
    full = full_face(first_tree)
    from dendroid.treemaps import face_minus

    coll = CharCollection(
        gt,
        horn(gt, {"d", "f", "b"}),
        GPoset(gt.group, elems, (), {"1": {e: e for e in elems}}),
        {e: face_minus(full, e) for e in elems},
        {e: frozenset({"b"}) for e in elems},
    )
    report = verify_characteristic(coll)
    assert any(code == "Ch3" for code, _ in report.failures)


def test_certified_collections_report_clean(z2_gtree):
    cert = certify(z2_gtree, "orbital_horn_to_full", edges={"-b", "b"})
    assert cert.report.ok and cert.report.failures == ()


# -----------------------------------------------------------------------
# the frozen two-step filtration
# -----------------------------------------------------------------------

def test_orbital_horn_filtration_two_steps(z2_gtree):
    comp = z2_gtree.forest.trees[0]
    cert = certify(z2_gtree, "orbital_horn_to_full", edges={"-b", "b"})
    steps = cert.certificate.steps
    assert len(steps) == 2
    assert steps[0].face == face_descriptor(comp, "d", ("-b", "a"))
    assert steps[0].subgroup == ("1",)
    assert steps[0].edges == frozenset({"b"})
    assert steps[1].face == face_descriptor(comp, "d", ("-a", "a"))
    assert steps[1].subgroup == ("1", "-1")
    assert steps[1].edges == frozenset({"-b", "b"})
    # four cells per step on top of the eight-cell complement's horn
    assert len(cert.base.members) + 8 == len(representable(z2_gtree).members)


def test_replay_is_independent(z2_gtree):
    cert = certify(z2_gtree, "orbital_horn_to_full", edges={"-b", "b"})
    rebuilt = replay(cert.base, cert.certificate)
    assert rebuilt.members == representable(z2_gtree).members
    # dropping the first step starves the second of its horn
    with pytest.raises(NotAPushout):
        replay(cert.base, FiltrationCertificate(cert.certificate.steps[1:]))
    # replaying onto the wrong base goes stale
    with pytest.raises(NotAPushout):
        replay(rebuilt, cert.certificate)


# -----------------------------------------------------------------------
# certify: the stock kinds
# -----------------------------------------------------------------------

def test_segal_core_first_tree_steps(first_tree):
    gt = _trivial_gtree(first_tree)
    cert = certify(gt, "segal_core")
    got = [
        (s.face.root, s.face.leaves, tuple(sorted(s.edges)))
        for s in cert.certificate.steps
    ]
    assert got == [
        ("d", ("a",), ("b",)),
        ("r", ("d", "e", "c"), ("f",)),
        ("r", ("a", "b", "e", "f"), ("d",)),
        ("r", ("a", "e", "f"), ("b", "d")),
        ("r", ("a", "b", "e", "c"), ("d", "f")),
        ("r", ("a", "e", "c"), ("b", "d", "f")),
    ]
    assert all(s.subgroup == ("1",) for s in cert.certificate.steps)
    assert len(cert.base.members) == 11
    assert replay(cert.base, cert.certificate).members == frozenset(
        representable(gt).members
    )


def test_segal_core_empty_certificates(z2_group):
    swap = {"1": {e: e for e in ("r", "l1", "l2")}, "-1": {"r": "r", "l1": "l2", "l2": "l1"}}
    gt = induce(z2_group, frozenset(z2_group.elements), corolla(2), swap)
    cert = certify(gt, "segal_core")
    assert cert.certificate.steps == ()
    assert cert.base.members == cert.target.members


def test_horn_to_horn_subsets_frozen(z2_gtree):
    comp = z2_gtree.forest.trees[0]
    cert = certify(
        z2_gtree, "horn_to_horn", edges={"-b", "b", "c"}, to_edges={"c"}
    )
    steps = cert.certificate.steps
    assert [s.face for s in steps] == [
        face_descriptor(comp, "d", ("-a", "a"), {"-b", "b"}),
        face_descriptor(comp, "d", ("-a", "a"), {"-b"}),
    ]
    assert [s.subgroup for s in steps] == [("1", "-1"), ("1",)]
    assert all(s.edges == frozenset({"c"}) for s in steps)
    assert replay(cert.base, cert.certificate).members == cert.target.members
    assert cert.target.members == horn(z2_gtree, {"c"}).members


def test_horn_to_horn_identical_edges_is_trivial(z2_gtree):
    cert = certify(
        z2_gtree, "horn_to_horn", edges={"-b", "b"}, to_edges={"-b", "b"}
    )
    assert cert.certificate.steps == ()
    assert cert.base.members == cert.target.members


def test_horn_to_horn_rejects_bad_targets(z2_gtree):
    with pytest.raises(DendroidError):
        certify(z2_gtree, "horn_to_horn", edges={"-b", "b"}, to_edges={"c", "-b", "b"})
    with pytest.raises(DendroidError):
        certify(z2_gtree, "horn_to_horn", edges={"-b", "b"}, to_edges=set())


def test_horn_to_horn_linear_needs_fixed_edges(z2_gtree):
    # the swapped pair cannot be totally ordered equivariantly
    with pytest.raises(MalformedPoset):
        certify(
            z2_gtree,
            "horn_to_horn",
            edges={"-b", "b", "c"},
            to_edges={"c"},
            variant="linear",
        )


@pytest.mark.parametrize("variant", ["subsets", "linear"])
def test_horn_to_horn_variants_agree(first_tree, variant):
    gt = _trivial_gtree(first_tree)
    cert = certify(
        gt, "horn_to_horn", edges={"d", "f", "b"}, to_edges={"b"}, variant=variant
    )
    assert len(cert.certificate.steps) == 3
    assert replay(cert.base, cert.certificate).members == cert.target.members


def test_orbital_to_orbital_frozen(z2_gtree):
    comp = z2_gtree.forest.trees[0]
    cert = certify(
        z2_gtree, "orbital_to_orbital", edges={"-b", "b", "c"}, to_edges={"c"}
    )
    steps = cert.certificate.steps
    assert len(steps) == 1
    assert steps[0].face == face_descriptor(comp, "d", ("-a", "a"), {"-b", "b"})
    assert steps[0].subgroup == ("1", "-1")
    assert steps[0].edges == frozenset({"c"})
    assert cert.target.members == orbital_horn(z2_gtree, {"c"}).members
    assert len(cert.target.members) == len(cert.base.members) + 2


def test_cover_inclusion_recovers_segal_march(first_tree):
    gt = _trivial_gtree(first_tree)
    cert = certify(
        gt, "cover_inclusion", smaller=segal_core(gt), larger=representable(gt)
    )
    assert cert.certificate == certify(gt, "segal_core").certificate
    assert replay(cert.base, cert.certificate).members == cert.target.members


def test_cover_inclusion_partial_target(first_tree):
    from dendroid.treemaps import subfaces

    gt = _trivial_gtree(first_tree)
    mid = Complex(
        gt,
        segal_core(gt).members
        | subfaces(face_descriptor(first_tree, "r", ("a", "e", "f"))),
    )
    cert = certify(gt, "cover_inclusion", smaller=segal_core(gt), larger=mid)
    assert [s.face.leaves for s in cert.certificate.steps] == [
        ("a",),
        ("a", "b", "e", "f"),
        ("a", "e", "f"),
    ]
    assert replay(cert.base, cert.certificate).members == mid.members


def test_cover_inclusion_rejects_non_covers(first_tree):
    gt = _trivial_gtree(first_tree)
    with pytest.raises(DendroidError):
        certify(gt, "cover_inclusion", smaller=boundary(gt), larger=representable(gt))


def test_certify_unknown_kind(z2_gtree):
    with pytest.raises(DendroidError):
        certify(z2_gtree, "no_such_kind")


# -----------------------------------------------------------------------
# reduction to single-orbit attachments
# -----------------------------------------------------------------------

def test_generating_reduction_first_tree(first_tree):
    gt = _trivial_gtree(first_tree)
    cert = certify(gt, "segal_core")
    assert not cert.certificate.is_single_orbit(gt)
    reduced = generating_reduction(gt, cert.certificate)
    assert reduced.is_single_orbit(gt)
    assert len(reduced.steps) == 11
    assert all(len(s.edges) == 1 for s in reduced.steps)
    assert replay(cert.base, reduced).members == representable(gt).members


def test_generating_reduction_keeps_single_orbit_steps(z2_gtree):
    cert = certify(z2_gtree, "orbital_horn_to_full", edges={"-b", "b"})
    assert cert.certificate.is_single_orbit(z2_gtree)
    reduced = generating_reduction(z2_gtree, cert.certificate)
    assert reduced == cert.certificate


def test_generating_reduction_figure(figure_gtree):
    cert = certify(figure_gtree, "segal_core")
    reduced = generating_reduction(figure_gtree, cert.certificate)
    assert reduced.is_single_orbit(figure_gtree)
    assert (
        replay(cert.base, reduced).members == representable(figure_gtree).members
    )


# -----------------------------------------------------------------------
# sweeps
# -----------------------------------------------------------------------

def _stable_inner_subsets(gtree):
    inner = set()
    for t in gtree.forest.trees:
        inner |= t.inner_edges()
    seen, orbits = set(), []
    for e in sorted(inner):
        if e not in seen:
            orb = gtree.orbit(e)
            seen |= orb
            orbits.append(orb)
    from itertools import combinations as combos

    out = []
    for r in range(1, len(orbits) + 1):
        for chosen in combos(range(len(orbits)), r):
            out.append(frozenset().union(*(orbits[n] for n in chosen)))
    return out


@pytest.mark.parametrize("fixture", ["z2_gtree", "figure_gtree"])
def test_horn_pair_sweep(request, fixture):
    gt = request.getfixturevalue(fixture)
    for big in _stable_inner_subsets(gt):
        for small in _stable_inner_subsets(gt):
            if not small <= big:
                continue
            cert = certify(gt, "horn_to_horn", edges=big, to_edges=small)
            assert replay(cert.base, cert.certificate).members == cert.target.members
            ocert = certify(gt, "orbital_to_orbital", edges=big, to_edges=small)
            assert (
                replay(ocert.base, ocert.certificate).members
                == ocert.target.members
            )


def test_q8_segal_core(q8_gtree):
    cert = certify(q8_gtree, "segal_core")
    assert replay(cert.base, cert.certificate).members == representable(q8_gtree).members
    reduced = generating_reduction(q8_gtree, cert.certificate)
    assert reduced.is_single_orbit(q8_gtree)
    assert replay(cert.base, reduced).members == representable(q8_gtree).members


@settings(max_examples=20, deadline=None)
@given(t=trees())
def test_segal_core_random_trees(t):
    gt = _trivial_gtree(t)
    cert = certify(gt, "segal_core")
    wanted = sum(
        1
        for fd in enumerate_faces(t)
        if not fd.removed and fd.as_tree().inner_edges()
    )
    assert len(cert.certificate.steps) == wanted
    assert replay(cert.base, cert.certificate).members == representable(gt).members
