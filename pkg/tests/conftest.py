from __future__ import annotations

import pytest
from hypothesis import strategies as st

from dendroid.broadposet import Tree
from dendroid.equivariance import induce
from dendroid.groups import cyclic_group, quaternion_group


@pytest.fixture
def first_tree() -> Tree:
    """Root vertex (d,e,f), d carrying (a,b) with b a stump, f carrying (c)."""
    return Tree("r", {"r": ("d", "e", "f"), "d": ("a", "b"), "f": ("c",), "b": ()})


@pytest.fixture
def z2_tree() -> Tree:
    """The small swap-symmetric tree: d - c - (-b, b), b - a, -b - -a."""
    return Tree("d", {"d": ("c",), "c": ("-b", "b"), "b": ("a",), "-b": ("-a",)})


@pytest.fixture
def z2_group():
    return cyclic_group(2)


def _identity_on(tree):
    return {e: e for e in tree.edges}


@pytest.fixture
def z2_gtree(z2_group, z2_tree):
    swap = {"d": "d", "c": "c", "b": "-b", "-b": "b", "a": "-a", "-a": "a"}
    return induce(
        z2_group, z2_group.elements, z2_tree, {"1": _identity_on(z2_tree), "-1": swap}
    )


@pytest.fixture
def figure_tree() -> Tree:
    """Root (−c, d, c); stumps above ±c after one edge; d carries (−b, b)."""
    return Tree(
        "r",
        {
            "r": ("-c", "d", "c"),
            "-c": ("-a",),
            "-a": (),
            "d": ("-b", "b"),
            "c": ("a",),
            "a": (),
        },
    )


@pytest.fixture
def figure_gtree(z2_group, figure_tree):
    swap = {
        "r": "r",
        "d": "d",
        "c": "-c",
        "-c": "c",
        "a": "-a",
        "-a": "a",
        "b": "-b",
        "-b": "b",
    }
    return induce(
        z2_group,
        z2_group.elements,
        figure_tree,
        {"1": _identity_on(figure_tree), "-1": swap},
    )


def _compose_perm(p, q):
    return {e: p[q[e]] for e in q}


@pytest.fixture
def q8_gtree():
    group = quaternion_group()
    t = Tree(
        "d",
        {"d": ("c+", "c-"), "c+": ("a1", "a2", "b1"), "c-": ("a3", "a4", "b2")},
    )
    j = {
        "d": "d",
        "c+": "c-",
        "c-": "c+",
        "a1": "a3",
        "a3": "a2",
        "a2": "a4",
        "a4": "a1",
        "b1": "b2",
        "b2": "b1",
    }
    jj = _compose_perm(j, j)
    sub = {"1": _identity_on(t), "j": j, "-1": jj, "-j": _compose_perm(j, jj)}
    return induce(group, sub.keys(), t, sub)


@st.composite
def trees(draw, max_degree=4, max_arity=3, allow_stumps=True):
    """Random planar trees grown vertex by vertex at current leaves."""
    vertices: dict = {}
    frontier = ["t0"]
    fresh = 1
    n = draw(st.integers(min_value=0, max_value=max_degree))
    for _ in range(n):
        if not frontier:
            break
        e = frontier[draw(st.integers(0, len(frontier) - 1))]
        lo = 0 if allow_stumps else 1
        k = draw(st.integers(min_value=lo, max_value=max_arity))
        kids = tuple(f"t{fresh + i}" for i in range(k))
        fresh += k
        vertices[e] = kids
        frontier.remove(e)
        frontier.extend(kids)
    return Tree("t0", vertices)
