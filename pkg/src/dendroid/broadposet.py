"""Trees as broad posets.

A tree is stored the way the broad-poset presentation reads: a set of edges,
a distinguished root edge, and for every non-leaf edge ``e`` a planar tuple
``e^`` of children.  Stumps are edges whose child tuple is empty; leaves are
edges with no child tuple at all.  The broad order is generated by the
relations ``e^ <= e`` under in-place substitution (broad transitivity), where
substituting a stump deletes the entry.

Edge labels are arbitrary hashable values; file formats use strings, the
tensor module uses pairs.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

from .errors import CycleDetected, DuplicateChild, MultipleRoots, OrphanEdge

Edge = Hashable


@dataclass(frozen=True)
class BroadRelation:
    """A single broad relation ``source <= target``.

    ``source`` is a planar tuple of edges with pairwise distinct entries; the
    empty tuple is the relation generated by a stump.
    """

    source: tuple
    target: Edge

    def arity(self) -> int:
        return len(self.source)

    def is_identity(self) -> bool:
        return self.source == (self.target,)


class Tree:
    """An immutable planar tree presented by its broad-poset generators.

    Equality and hashing use the canonical (DFS-renamed) form, i.e. two trees
    are equal exactly when they present the same planar tree.  Code that needs
    to distinguish identically-shaped subtrees with different edge labels must
    compare :meth:`literal_key` instead; all internal caches do so.
    """

    __slots__ = ("root", "vertices", "edges", "_dfs", "_parent", "_shape", "_lit")

    def __init__(self, root: Edge, vertices: Mapping[Edge, Sequence[Edge]], edges: Iterable[Edge] | None = None):
        object.__setattr__(self, "root", root)
        object.__setattr__(self, "vertices", {e: tuple(c) for e, c in vertices.items()})
        if edges is None:
            found = set(self.vertices)
            for cs in self.vertices.values():
                found.update(cs)
            found.add(root)
            object.__setattr__(self, "edges", frozenset(found))
        else:
            object.__setattr__(self, "edges", frozenset(edges))
        object.__setattr__(self, "_dfs", None)
        object.__setattr__(self, "_parent", None)
        object.__setattr__(self, "_shape", None)
        object.__setattr__(self, "_lit", None)

    def __setattr__(self, name, value):  # pragma: no cover - defensive
        raise AttributeError("Tree is immutable")

    # -- structure ----------------------------------------------------------

    def children(self, e: Edge) -> tuple:
        return self.vertices.get(e, ())

    def is_leaf(self, e: Edge) -> bool:
        return e not in self.vertices

    def is_stump(self, e: Edge) -> bool:
        return self.vertices.get(e, None) == ()

    def dfs_order(self) -> tuple:
        """Edges in planar depth-first (preorder) traversal from the root."""
        if self._dfs is None:
            out = []
            stack = [self.root]
            while stack:
                e = stack.pop()
                out.append(e)
                stack.extend(reversed(self.vertices.get(e, ())))
            object.__setattr__(self, "_dfs", tuple(out))
        return self._dfs

    def dfs_index(self) -> dict:
        return {e: i for i, e in enumerate(self.dfs_order())}

    def parent(self) -> dict:
        if self._parent is None:
            par = {}
            for e, cs in self.vertices.items():
                for c in cs:
                    par[c] = e
            object.__setattr__(self, "_parent", par)
        return self._parent

    def chain(self, e: Edge) -> tuple:
        """The path from ``e`` down to the root, inclusive."""
        par = self.parent()
        out = [e]
        while out[-1] != self.root:
            out.append(par[out[-1]])
        return tuple(out)

    def le_d(self, s: Edge, t: Edge) -> bool:
        """Descendancy order: ``s <=_d t`` iff ``t`` lies on the path from
        ``s`` to the root (the root is the unique maximum)."""
        return t in self.chain(s)

    def leaves(self) -> tuple:
        return tuple(e for e in self.dfs_order() if e not in self.vertices)

    def stumps(self) -> frozenset:
        return frozenset(e for e, cs in self.vertices.items() if cs == ())

    def inner_edges(self) -> frozenset:
        """Non-root non-leaf edges (stump edges count as inner)."""
        return frozenset(e for e in self.vertices if e != self.root)

    # -- canonical form -----------------------------------------------------

    def shape_key(self) -> tuple:
        """A canonical invariant: per DFS position, the tuple of child
        positions (or None for a leaf)."""
        if self._shape is None:
            idx = self.dfs_index()
            key = tuple(
                tuple(idx[c] for c in self.vertices[e]) if e in self.vertices else None
                for e in self.dfs_order()
            )
            object.__setattr__(self, "_shape", key)
        return self._shape

    def literal_key(self) -> tuple:
        if self._lit is None:
            key = tuple(
                (e, self.vertices.get(e, None)) for e in self.dfs_order()
            )
            object.__setattr__(self, "_lit", key)
        return self._lit

    def canonical(self) -> tuple["Tree", dict]:
        """The canonical representative (edges renamed ``e0, e1, ...`` in DFS
        order) together with the renaming map ``old -> new``."""
        rename = {e: f"e{i}" for i, e in enumerate(self.dfs_order())}
        vertices = {rename[e]: tuple(rename[c] for c in cs) for e, cs in self.vertices.items()}
        return Tree(rename[self.root], vertices, [rename[e] for e in self.edges]), rename

    def __eq__(self, other):
        if not isinstance(other, Tree):
            return NotImplemented
        return self.shape_key() == other.shape_key()

    def __hash__(self):
        return hash(self.shape_key())

    def __repr__(self):
        return f"Tree(root={self.root!r}, degree={len(self.vertices)}, edges={len(self.edges)})"

    # -- io -----------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "edges": [str(e) for e in self.dfs_order()],
            "root": str(self.root),
            "vertices": {str(e): [str(c) for c in cs] for e, cs in self.vertices.items()},
        }


def validate_tree(data: Mapping) -> Tree:
    """Build a :class:`Tree` from its file form, checking well-formedness.

    Raises
    ------
    OrphanEdge
        a vertex tuple mentions an edge not in ``edges``, or a vertex is
        attached to an unknown edge.
    DuplicateChild
        some edge occurs in more than one child tuple, or twice in one.
    MultipleRoots
        more than one edge has no parent.
    CycleDetected
        no root exists, or part of the structure is unreachable from it.
    """
    edges = list(data["edges"])
    eset = set(edges)
    if len(eset) != len(edges):
        raise DuplicateChild("duplicate edge names in edge list", witness=edges)
    vertices = {e: tuple(cs) for e, cs in data.get("vertices", {}).items()}
    for e, cs in vertices.items():
        if e not in eset:
            raise OrphanEdge(f"vertex attached to unknown edge {e!r}", witness=e)
        for c in cs:
            if c not in eset:
                raise OrphanEdge(f"child {c!r} of {e!r} is not an edge", witness=c)
    seen = {}
    for e, cs in vertices.items():
        for c in cs:
            if c in seen:
                raise DuplicateChild(
                    f"edge {c!r} is a child of both {seen[c]!r} and {e!r}", witness=c
                )
            seen[c] = e
    roots = [e for e in edges if e not in seen]
    declared = data.get("root")
    if not roots:
        raise CycleDetected("every edge is some vertex's child", witness=edges)
    if len(roots) > 1:
        raise MultipleRoots(f"parentless edges: {roots}", witness=roots)
    root = roots[0]
    if declared is not None and declared != root:
        raise MultipleRoots(
            f"declared root {declared!r} but {root!r} is parentless", witness=(declared, root)
        )
    t = Tree(root, vertices, edges)
    reached = set(t.dfs_order())
    if reached != eset:
        raise CycleDetected(
            f"unreachable edges: {sorted(map(str, eset - reached))}", witness=eset - reached
        )
    return t


def degree(t: Tree) -> int:
    """Number of vertices."""
    return len(t.vertices)


def classify_edges(t: Tree) -> dict:
    """Partition-style classification. ``inner`` overlaps ``stumps``: a
    non-root stump edge is both."""
    return {
        "root": t.root,
        "leaves": frozenset(t.leaves()),
        "stumps": t.stumps(),
        "inner": t.inner_edges(),
    }


_CLOSURE_CACHE: dict = {}


def broad_closure(t: Tree) -> tuple:
    """All broad relations of the tree: identities, the generating relations
    ``e^ <= e``, and everything reachable by in-place substitution.

    Returns a deterministically sorted tuple of :class:`BroadRelation`.
    """
    key = t.literal_key()
    hit = _CLOSURE_CACHE.get(key)
    if hit is not None:
        return hit
    idx = t.dfs_index()
    rels: set[tuple] = set()
    for e in t.edges:
        rels.add(((e,), e))
    frontier = []
    for e, cs in t.vertices.items():
        r = (tuple(cs), e)
        if r not in rels:
            rels.add(r)
            frontier.append(r)
    while frontier:
        src, tgt = frontier.pop()
        for i, entry in enumerate(src):
            cs = t.vertices.get(entry)
            if cs is None:
                continue
            new = (src[:i] + cs + src[i + 1:], tgt)
            if new not in rels:
                rels.add(new)
                frontier.append(new)
    out = tuple(
        BroadRelation(src, tgt)
        for src, tgt in sorted(rels, key=lambda r: (idx[r[1]], len(r[0]), tuple(idx[x] for x in r[0])))
    )
    _CLOSURE_CACHE[key] = out
    return out


def closure_tuples(t: Tree) -> dict:
    """Map ``target -> set of source tuples`` over the broad closure."""
    out: dict = {}
    for rel in broad_closure(t):
        out.setdefault(rel.target, set()).add(rel.source)
    return out


def closure_sets(t: Tree) -> dict:
    """Map ``target -> set of frozenset(source)``; the order-insensitive view
    used for monotonicity checks (closure tuples are duplicate-free)."""
    out: dict = {}
    for rel in broad_closure(t):
        out.setdefault(rel.target, set()).add(frozenset(rel.source))
    return out


# -- small constructors (used throughout the tests and examples) ------------

def eta(label: Edge = "e") -> Tree:
    return Tree(label, {})


def corolla(n: int, root: Edge = "r", leaf: str = "l") -> Tree:
    """The ``n``-corolla; ``n = 0`` gives the stump corolla."""
    kids = tuple(f"{leaf}{i}" for i in range(1, n + 1))
    return Tree(root, {root: kids})


def linear(n: int, prefix: str = "x") -> Tree:
    """The linear tree with ``n`` unary vertices and edges ``x0 .. xn``
    (``x0`` the root)."""
    vertices = {f"{prefix}{i}": (f"{prefix}{i+1}",) for i in range(n)}
    return Tree(f"{prefix}0", vertices)


@dataclass(frozen=True)
class Forest:
    """An ordered disjoint union of trees."""

    trees: tuple

    def __post_init__(self):
        seen: set = set()
        for t in self.trees:
            if seen & t.edges:
                raise DuplicateChild(
                    "forest components share edges", witness=seen & t.edges
                )
            seen |= t.edges

    def edges(self) -> frozenset:
        out: set = set()
        for t in self.trees:
            out |= t.edges
        return frozenset(out)

    def component_of(self, e: Edge) -> int:
        for i, t in enumerate(self.trees):
            if e in t.edges:
                return i
        raise OrphanEdge(f"edge {e!r} in no component", witness=e)

    def dfs_order(self) -> tuple:
        out: list = []
        for t in self.trees:
            out.extend(t.dfs_order())
        return tuple(out)
