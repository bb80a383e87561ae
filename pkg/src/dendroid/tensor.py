"""Tensor products of trees and their percolation schemes.

The tensor of two trees lives on the product of their edge sets.  An edge
``(s, t)`` may carry a vertex copied from the first factor, with children
``(s_1, t), ..., (s_k, t)``, and one copied from the second, with children
``(s, t_1), ..., (s, t_m)``; both may coexist, and a stump in either factor
contributes an empty vertex.  The subtrees built by choosing one of the
available vertices at every edge reached from the pair of roots are the
*percolation schemes*; local transpositions that push a first-factor vertex
up through the second-factor vertex above it generate a partial order on
them, compatible with the diagonal group action.

One planarity warning applies throughout: a face shared by two percolation
schemes generally inherits two different orderings of its composite vertex
tuples, so faces of the tensor are identified by the order-free key
:func:`face_key`, never by the planar literal form.

That ordered family of schemes, each decorated with the characteristic
edges lying over a marked orbit of inner edges of the second factor, drives
the decomposition of ``boundary x full  u  full x horn`` into elementary
horn attachments: :func:`verify_tensor_characteristic` checks the condition
list, and :func:`build_tensor_filtration` (experimental) emits and replays
the attachment sequence cell by cell.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

from .anodyne import CharReport, FiltrationCertificate, FiltrationStep, GPoset
from .broadposet import Tree, closure_sets
from .dot import digraph
from .equivariance import GTree
from .errors import (
    DendroidError,
    EmptyE,
    FactorsNotOpen,
    NotGStable,
    NotInner,
    OrderNotAntisymmetric,
    VerificationFailed,
)
from .treemaps import FaceDescriptor, enumerate_faces, face_minus

__all__ = [
    "MODES",
    "TensorBroadPoset",
    "Percolation",
    "PercolationPoset",
    "TensorCertification",
    "tensor",
    "edge_label",
    "term_string",
    "face_key",
    "maximal_subtrees",
    "characteristic_edges",
    "embeds_in_tensor",
    "is_face_tree",
    "verify_tensor_characteristic",
    "build_tensor_filtration",
    "replay_tensor_filtration",
]

MODES = ("open", "left_stumps", "right_stumps")


# ---------------------------------------------------------------------------
# the tensor of two trees
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class TensorBroadPoset:
    """The product structure on ``E(S) x E(T)`` with the diagonal action.

    Each pair edge ``(s, t)`` offers the first-factor vertex
    ``((s_1, t), ..., (s_k, t))`` whenever ``s`` has a vertex in the first
    factor (also when that vertex is a stump, ``k = 0``), and symmetrically
    the second-factor vertex; :meth:`left_vertex` and :meth:`right_vertex`
    return ``None`` where the factor edge is a leaf.
    """

    left: GTree
    right: GTree

    def __post_init__(self):
        if self.left.group != self.right.group:
            raise DendroidError("tensor factors carry different groups")
        for gt in (self.left, self.right):
            if len(gt.forest.trees) != 1:
                raise DendroidError(
                    "tensor factors must be single trees; split components first",
                    witness=len(gt.forest.trees),
                )
        self._act_memo: dict = {}

    @property
    def group(self):
        return self.left.group

    @property
    def left_tree(self) -> Tree:
        return self.left.forest.trees[0]

    @property
    def right_tree(self) -> Tree:
        return self.right.forest.trees[0]

    @property
    def root(self):
        return (self.left_tree.root, self.right_tree.root)

    def edges(self) -> frozenset:
        return frozenset(
            (s, t) for s in self.left_tree.edges for t in self.right_tree.edges
        )

    def left_vertex(self, e):
        s, t = e
        cs = self.left_tree.vertices.get(s)
        if cs is None:
            return None
        return tuple((c, t) for c in cs)

    def right_vertex(self, e):
        s, t = e
        cs = self.right_tree.vertices.get(t)
        if cs is None:
            return None
        return tuple((s, c) for c in cs)

    def act(self, g, e):
        s, t = e
        return (self.left.act(g, s), self.right.act(g, t))

    def act_subtree(self, g, tree: Tree) -> Tree:
        """The diagonal image of a percolation subtree.

        Vertices must be factor vertices (faces, whose vertices may be
        composite, are acted on through their descriptors instead)."""
        key = (g, tree.literal_key())
        hit = self._act_memo.get(key)
        if hit is not None:
            return hit
        vertices = {}
        for e, cs in tree.vertices.items():
            ge = self.act(g, e)
            if cs == self.left_vertex(e):
                vertices[ge] = self.left_vertex(ge)
            elif cs == self.right_vertex(e):
                vertices[ge] = self.right_vertex(ge)
            else:
                raise DendroidError("not a percolation subtree", witness=e)
        out = Tree(self.act(g, tree.root), vertices)
        self._act_memo[key] = out
        return out


def tensor(left: GTree, right: GTree) -> TensorBroadPoset:
    """Pair two single-tree equivariant factors into their tensor."""
    return TensorBroadPoset(left, right)


def edge_label(e) -> str:
    s, t = e
    return f"{s}|{t}"


def term_string(tree: Tree, e=None) -> str:
    """A compact textual form of a subtree with pair edges."""
    if e is None:
        e = tree.root
    lbl = edge_label(e)
    cs = tree.vertices.get(e)
    if cs is None:
        return lbl
    return lbl + "[" + " ".join(term_string(tree, c) for c in cs) + "]"


def face_key(tree: Tree):
    """Identity of a tensor face, insensitive to planar vertex order."""
    return (
        tree.root,
        tree.edges,
        frozenset((e, frozenset(cs)) for e, cs in tree.vertices.items()),
    )


def is_face_tree(v: Tree, u: Tree) -> bool:
    """Whether the labelled tree ``v`` is a face of the labelled tree ``u``
    (vertex tuples compared without planar order)."""
    if not (v.edges <= u.edges and v.root in u.edges):
        return False
    cs = closure_sets(u)
    return all(frozenset(c) in cs.get(e, frozenset()) for e, c in v.vertices.items())


# ---------------------------------------------------------------------------
# percolation schemes
# ---------------------------------------------------------------------------

class Percolation:
    """A maximal subtree of a tensor, compared by :func:`face_key`."""

    __slots__ = ("tree", "key")

    def __init__(self, tree: Tree):
        self.tree = tree
        self.key = face_key(tree)

    def __eq__(self, other):
        return isinstance(other, Percolation) and other.key == self.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Percolation({term_string(self.tree)})"


def _transpose(p: TensorBroadPoset, tree: Tree, e):
    """Push the first-factor vertex at ``e`` up through the second-factor
    vertices carried by all its children; ``None`` where the pattern does
    not apply.  The result differs from ``tree`` in that region only."""
    lv = p.left_vertex(e)
    if lv is None or tree.vertices.get(e) != lv:
        return None
    rv = p.right_vertex(e)
    if rv is None:
        return None
    for c in lv:
        if tree.vertices.get(c) != p.right_vertex(c):
            return None
    vertices = dict(tree.vertices)
    vertices[e] = rv
    for c in lv:
        del vertices[c]
    for m in rv:
        vertices[m] = p.left_vertex(m)
    return Tree(tree.root, vertices)


@dataclass(eq=False)
class PercolationPoset:
    """The percolation schemes of a tensor with the transposition order,
    the generating arrows, and the diagonal group action."""

    tensor: TensorBroadPoset
    poset: GPoset
    generators: tuple
    reverse: bool = False

    @property
    def elements(self) -> tuple:
        return self.poset.elements

    def __len__(self):
        return len(self.poset.elements)

    def __iter__(self):
        return iter(self.poset.elements)

    def le(self, a, b) -> bool:
        return self.poset.le(a, b)

    def names(self) -> dict:
        return {el: f"U{n}" for n, el in enumerate(self.poset.elements, start=1)}

    def to_dot(self) -> str:
        names = self.names()
        nodes = [
            (names[el], {"label": f"{names[el]}: {term_string(el.tree)}"})
            for el in self.elements
        ]
        arrows = [(names[a], names[b]) for a, b in self.generators]
        return digraph("percolations", nodes, arrows, rankdir="BT")

    def adjacency(self) -> dict:
        """A JSON-ready summary: schemes, generating arrows, action."""
        names = self.names()
        return {
            "elements": {names[el]: term_string(el.tree) for el in self.elements},
            "arrows": sorted([names[a], names[b]] for a, b in self.generators),
            "action": {
                str(g): {names[el]: names[self.poset.act(g, el)] for el in self.elements}
                for g in self.poset.group.elements
            },
            "reverse": self.reverse,
        }


def maximal_subtrees(p: TensorBroadPoset, reverse: bool = False) -> PercolationPoset:
    """Enumerate the percolation schemes and their transposition order.

    Enumeration is a memoised recursion on pair edges: at each reached edge
    take the first-factor vertex or the second-factor one, in that order,
    and combine the choices above the children with the last branch varying
    fastest.  The order is the transitive closure of the transpositions —
    or its reverse — and is checked to be antisymmetric, which can fail
    when both factors have stumps.
    """
    root = (p.left_tree.root, p.right_tree.root)
    memo: dict = {}

    def above(e):
        hit = memo.get(e)
        if hit is not None:
            return hit
        choices = [v for v in (p.left_vertex(e), p.right_vertex(e)) if v is not None]
        if len(choices) == 2 and choices[0] == choices[1]:
            choices = choices[:1]  # a stump in both factors caps either way
        if not choices:
            memo[e] = ({},)
            return memo[e]
        out = []
        for vert in choices:
            for combo in product(*(above(c) for c in vert)):
                d = {e: vert}
                for sub in combo:
                    d.update(sub)
                out.append(d)
        memo[e] = tuple(out)
        return memo[e]

    elements = tuple(Percolation(Tree(root, vs)) for vs in above(root))
    index = {el.key: el for el in elements}
    if len(index) != len(elements):
        raise DendroidError("percolation schemes collide")

    gens = []
    for el in elements:
        order = el.tree.dfs_index()
        for e in sorted(el.tree.vertices, key=order.get):
            other = _transpose(p, el.tree, e)
            if other is None:
                continue
            target = index.get(face_key(other))
            if target is None:
                raise DendroidError(
                    "a transposition left the scheme family", witness=e
                )
            if target is not el:
                gens.append((el, target))
    if reverse:
        gens = [(b, a) for a, b in gens]

    succ = {el: [] for el in elements}
    for a, b in gens:
        succ[a].append(b)
    for el in elements:
        stack = list(succ[el])
        seen = set()
        while stack:
            x = stack.pop()
            if x == el:
                raise OrderNotAntisymmetric(
                    "transpositions produce a cycle", witness=el
                )
            if x in seen:
                continue
            seen.add(x)
            stack.extend(succ[x])

    action = {
        g: {el: index[face_key(p.act_subtree(g, el.tree))] for el in elements}
        for g in p.group.elements
    }
    poset = GPoset(p.group, elements, gens, action)
    return PercolationPoset(p, poset, tuple(gens), reverse)


def characteristic_edges(p: TensorBroadPoset, tree: Tree, edges, uppermost: bool = True) -> frozenset:
    """Inner edges of a percolation subtree lying over the marked orbit
    whose neighbouring second-factor vertex sits immediately above the edge
    (``uppermost``) or immediately below it."""
    marked = frozenset(edges)
    out = set()
    if uppermost:
        for e in tree.inner_edges():
            if e[1] in marked and tree.vertices.get(e) == p.right_vertex(e):
                out.add(e)
    else:
        par = tree.parent()
        for e in tree.inner_edges():
            if e[1] in marked and tree.vertices.get(par[e]) == p.right_vertex(par[e]):
                out.add(e)
    return frozenset(out)


# ---------------------------------------------------------------------------
# membership in the glued boundary
# ---------------------------------------------------------------------------

def _outer_hull(tree: Tree, edges) -> Tree:
    """The smallest outer face of ``tree`` whose edge set contains
    ``edges``: rooted at their deepest common ancestor, keeping each vertex
    that still has one of the given edges strictly above it."""
    edges = set(edges)
    chains = [tree.chain(e) for e in edges]
    common = set(chains[0]).intersection(*map(set, chains[1:]))
    root = max(common, key=lambda e: len(tree.chain(e)))
    opened = set()
    for ch in chains:
        opened.update(ch[1:])
    vertices = {}
    stack = [root]
    while stack:
        e = stack.pop()
        if e in opened:
            vertices[e] = tree.vertices[e]
            stack.extend(tree.vertices[e])
    return Tree(root, vertices)


def embeds_in_tensor(tree: Tree, s_tree: Tree, t_tree: Tree) -> bool:
    """Whether a labelled tree with pair edges is a face of the tensor of
    the two factors: every edge must be a pair of factor edges and every
    vertex derivable by expanding factor vertices above its edge."""
    s_edges, t_edges = s_tree.edges, t_tree.edges
    for s, t in tree.edges:
        if s not in s_edges or t not in t_edges:
            return False
    memo: dict = {}

    def derives(e, entries: frozenset) -> bool:
        if entries == frozenset((e,)):
            return True
        key = (e, entries)
        hit = memo.get(key)
        if hit is not None:
            return hit
        result = False
        for coord, factor in ((0, s_tree), (1, t_tree)):
            cs = factor.vertices.get(e[coord])
            if cs is None:
                continue
            children = tuple(
                (c, e[1]) if coord == 0 else (e[0], c) for c in cs
            )
            if not children:
                if not entries:
                    result = True
                    break
                continue
            blocks = {c: set() for c in children}
            good = True
            for x in entries:
                home = None
                for c in children:
                    if factor.le_d(x[coord], c[coord]):
                        home = c
                        break
                if home is None:
                    good = False
                    break
                blocks[home].add(x)
            if good and all(derives(c, frozenset(b)) for c, b in blocks.items()):
                result = True
                break
        memo[key] = result
        return result

    return all(derives(e, frozenset(cs)) for e, cs in tree.vertices.items())


def _outside_open(p: TensorBroadPoset, marked):
    """Membership test for the glued boundary when both factors are open:
    a face lies outside it iff its first-coordinate projection spans the
    whole first factor (outer hull everything, all inner edges hit) and its
    second-coordinate projection misses at most marked inner edges while
    still spanning the second factor."""
    s_tree, t_tree = p.left_tree, p.right_tree
    s_inner = s_tree.inner_edges()
    t_inner = t_tree.inner_edges()

    def outside(tree: Tree) -> bool:
        pi_s = {s for s, _ in tree.edges}
        pi_t = {t for _, t in tree.edges}
        if not (s_inner <= pi_s) or _outer_hull(s_tree, pi_s).edges != s_tree.edges:
            return False
        if not ((t_inner - pi_t) <= marked) or _outer_hull(t_tree, pi_t).edges != t_tree.edges:
            return False
        return True

    return outside


def _outside_brute(p: TensorBroadPoset, marked):
    """Membership test by direct factorization: a face lies in the glued
    boundary iff it embeds in some proper-face x full or full x horn-member
    tensor.  Needed once a factor has stumps."""
    s_tree, t_tree = p.left_tree, p.right_tree

    def outside(tree: Tree) -> bool:
        for fd in enumerate_faces(s_tree):
            if fd.is_full():
                continue
            if embeds_in_tensor(tree, fd.as_tree(), t_tree):
                return False
        for fd in enumerate_faces(t_tree):
            if fd.outer_closure().is_full() and fd.removed <= marked:
                continue
            if embeds_in_tensor(tree, s_tree, fd.as_tree()):
                return False
        return True

    return outside


def _outside(p: TensorBroadPoset, marked, mode):
    if mode == "open":
        return _outside_open(p, frozenset(marked))
    return _outside_brute(p, frozenset(marked))


# ---------------------------------------------------------------------------
# the characteristic conditions
# ---------------------------------------------------------------------------

def _act_face(p: TensorBroadPoset, g, fd: FaceDescriptor) -> FaceDescriptor:
    """The image of a face of a percolation subtree, re-anchored in the
    image subtree (whose planar order the image leaves must follow)."""
    amb = p.act_subtree(g, fd.ambient)
    idx = amb.dfs_index()
    return FaceDescriptor(
        amb,
        p.act(g, fd.root),
        tuple(sorted((p.act(g, l) for l in fd.leaves), key=idx.__getitem__)),
        frozenset(p.act(g, e) for e in fd.removed),
    )


def _is_linear(t: Tree) -> bool:
    return all(len(cs) == 1 for cs in t.vertices.values())


def _require_mode(p: TensorBroadPoset, mode):
    s_stumps, t_stumps = p.left_tree.stumps(), p.right_tree.stumps()
    if mode == "open":
        if s_stumps or t_stumps:
            raise FactorsNotOpen(
                "open mode needs stump-free factors",
                witness=(sorted(map(str, s_stumps)), sorted(map(str, t_stumps))),
            )
    elif mode == "left_stumps":
        if t_stumps or not _is_linear(p.right_tree):
            raise FactorsNotOpen(
                "first-factor stumps need an open linear second factor",
                witness=sorted(map(str, t_stumps)),
            )
    elif mode == "right_stumps":
        if s_stumps or not _is_linear(p.left_tree):
            raise FactorsNotOpen(
                "second-factor stumps need an open linear first factor",
                witness=sorted(map(str, s_stumps)),
            )
    else:
        raise DendroidError(f"unknown mode: {mode!r}")


def _verify(p: TensorBroadPoset, percs: PercolationPoset, xi, marked, mode) -> CharReport:
    poset = percs.poset
    elements = poset.elements
    failures = []
    for n, el in enumerate(elements):
        if xi[el] - el.tree.inner_edges():
            failures.append(("xi", (n, sorted(map(edge_label, xi[el])))))
    for g in poset.group.elements:
        for el in elements:
            img = poset.act(g, el)
            if img.key != face_key(p.act_subtree(g, el.tree)):
                failures.append(("Ch0", (g, el, "face")))
            if xi[img] != frozenset(p.act(g, e) for e in xi[el]):
                failures.append(("Ch0", (g, el, "edges")))
    if failures:
        return CharReport(False, tuple(failures))

    outside = _outside(p, marked, mode)
    a_memo: dict = {}

    def in_base(tree: Tree) -> bool:
        k = face_key(tree)
        hit = a_memo.get(k)
        if hit is None:
            hit = not outside(tree)
            a_memo[k] = hit
        return hit

    csets = {el: closure_sets(el.tree) for el in elements}

    def face_of(tree: Tree, j: Percolation) -> bool:
        jt = j.tree
        if not (tree.edges <= jt.edges and tree.root in jt.edges):
            return False
        cs = csets[j]
        return all(
            frozenset(c) in cs.get(e, frozenset()) for e, c in tree.vertices.items()
        )

    below = {
        el: tuple(j for j in elements if j != el and poset.le(j, el))
        for el in elements
    }

    for el in elements:
        xi_i = xi[el]
        for fd in enumerate_faces(el.tree):
            vt = fd.as_tree()
            xi_v = xi_i & vt.inner_edges()
            present = in_base(vt) or any(face_of(vt, j) for j in below[el])
            if fd.is_outer() and not xi_v and not present:
                failures.append(("Ch1", (el, fd)))
                continue
            wt = face_minus(fd, xi_v).as_tree() if xi_v else vt
            if in_base(wt) and not present:
                failures.append(("Ch2", (el, fd)))
                continue
            if not present:
                for j in elements:
                    if poset.le(el, j):
                        continue
                    if face_of(wt, j):
                        failures.append(("Ch3", (el, j, fd)))
                        break
    return CharReport(not failures, tuple(failures))


@dataclass(eq=False)
class TensorCertification:
    """A verified tensor characteristic collection: the scheme poset, the
    characteristic edges per scheme, the per-condition report, and — when
    the experimental march was requested — the attachment certificate."""

    percolations: PercolationPoset
    xi: dict
    report: CharReport
    certificate: FiltrationCertificate | None = None


def verify_tensor_characteristic(
    left: GTree, right: GTree, edges, mode: str = "open", experimental: bool = False
) -> TensorCertification:
    """Check that the percolation schemes with their characteristic edges
    decompose ``boundary x full  u  full x horn`` into horn attachments.

    ``edges`` must be a single orbit of inner edges of the second factor.
    ``mode`` selects the orientation: ``open`` (no stumps anywhere),
    ``left_stumps`` (first factor arbitrary, second open linear), or
    ``right_stumps`` (first open linear, second arbitrary — the order is
    reversed and the characteristic vertex sits below its edge).  With
    ``experimental`` the attachment sequence is also built and replayed.
    """
    p = tensor(left, right)
    marked = frozenset(edges)
    if not marked:
        raise EmptyE("no characteristic edges given", witness=marked)
    bad = marked - p.right_tree.inner_edges()
    if bad:
        raise NotInner(
            f"not inner in the second factor: {sorted(map(str, bad))}", witness=bad
        )
    for e in marked:
        if frozenset(right.orbit(e)) != marked:
            raise NotGStable(
                "the marked edges must form a single orbit",
                witness=sorted(map(str, marked)),
            )
    _require_mode(p, mode)
    percs = maximal_subtrees(p, reverse=(mode == "right_stumps"))
    xi = {
        el: characteristic_edges(p, el.tree, marked, uppermost=(mode != "right_stumps"))
        for el in percs.elements
    }
    report = _verify(p, percs, xi, marked, mode)
    certificate = None
    if experimental and report.ok:
        certificate = build_tensor_filtration(percs, xi, marked, mode)
    return TensorCertification(percs, xi, report, certificate)


# ---------------------------------------------------------------------------
# the experimental cell-by-cell march
# ---------------------------------------------------------------------------

def _tensor_face_lex(u_tree: Tree, xi) -> tuple:
    """Faces of one percolation subtree whose characteristic edges are
    nonempty and survive to the outer closure, in the monotone march order
    (outer closure size, face size, position)."""
    xi = frozenset(xi)
    out = []
    for fd in enumerate_faces(u_tree):
        vt = fd.as_tree()
        xi_v = xi & vt.inner_edges()
        if not xi_v:
            continue
        vbar = fd.outer_closure().as_tree()
        if xi_v != xi & vbar.inner_edges():
            continue
        key = (len(vbar.edges), len(vbar.vertices), len(vt.edges)) + fd.sort_key()
        out.append((key, fd))
    out.sort(key=lambda kv: kv[0])
    return tuple(fd for _, fd in out)


def _universe(percs: PercolationPoset) -> dict:
    out: dict = {}
    for el in percs.elements:
        for fd in enumerate_faces(el.tree):
            t = fd.as_tree()
            out.setdefault(face_key(t), t)
    return out


def _attach_orbit(p: TensorBroadPoset, current: set, fd: FaceDescriptor, xi_v, group):
    """Glue the group orbit of the horn fillers of one face onto the cell
    set in place, checking the pushout shape: every horn cell present, no
    filler present, no two conjugate fillers equal."""
    seen = set()
    added = set()
    for g in group.elements:
        gfd = _act_face(p, g, fd)
        gt = gfd.as_tree()
        gkey = face_key(gt)
        if gkey in seen:
            continue
        seen.add(gkey)
        g_xi = frozenset(p.act(g, e) for e in xi_v)
        for sub in enumerate_faces(gt):
            st = sub.as_tree()
            skey = face_key(st)
            if sub.outer_closure().is_full() and sub.removed <= g_xi:
                if skey in current:
                    raise VerificationFailed(
                        "filler already attached", witness=(gfd, sub)
                    )
                if skey in added:
                    raise VerificationFailed(
                        "conjugate fillers collide", witness=(gfd, sub)
                    )
                added.add(skey)
            elif skey not in current:
                raise VerificationFailed(
                    f"horn cell missing from the march: {term_string(st)}",
                    witness=(gfd, sub),
                )
    current |= added


def build_tensor_filtration(
    percs: PercolationPoset, xi, marked, mode: str = "open"
) -> FiltrationCertificate:
    """March through the scheme poset and emit one attachment per new orbit
    of cells, exactly filling the complement of the glued boundary.

    Experimental: the attachments are tracked on a plain set of face keys
    rather than through the complex machinery, and each step is a face of
    one percolation subtree together with its isotropy and characteristic
    edges; :func:`replay_tensor_filtration` re-runs them independently.
    """
    p = percs.tensor
    group = p.group
    universe = _universe(percs)
    outside = _outside(p, marked, mode)
    current = {k for k, t in universe.items() if not outside(t)}
    steps = []
    for orbit in percs.poset.orbit_linear_extension():
        el = orbit[0]
        xi_i = xi[el]
        if not xi_i:
            if el.key not in current:
                raise VerificationFailed(
                    "a scheme without characteristic edges needs its subtree present",
                    witness=el,
                )
            continue
        h_orb = percs.poset.isotropy(el)
        done: set = set()
        for fd in _tensor_face_lex(el.tree, xi_i):
            vt = fd.as_tree()
            key = face_key(vt)
            if key in done:
                continue
            done |= {face_key(_act_face(p, h, fd).as_tree()) for h in h_orb}
            if key in current:
                continue
            k_sub = tuple(
                h for h in group.elements
                if h in h_orb and _act_face(p, h, fd) == fd
            )
            xi_v = frozenset(xi_i & vt.inner_edges())
            _attach_orbit(p, current, fd, xi_v, group)
            steps.append(FiltrationStep(fd, k_sub, xi_v))
    if current != set(universe):
        raise VerificationFailed(
            "the march did not fill the tensor",
            witness=sorted(
                term_string(universe[k]) for k in set(universe) - current
            )[:5],
        )
    return FiltrationCertificate(tuple(steps))


def replay_tensor_filtration(
    percs: PercolationPoset, marked, certificate: FiltrationCertificate,
    mode: str = "open",
) -> tuple:
    """Re-run a tensor certificate through the elementary attachment alone;
    returns the base and final cell-key sets after checking the march fills
    everything."""
    p = percs.tensor
    universe = _universe(percs)
    outside = _outside(p, marked, mode)
    current = {k for k, t in universe.items() if not outside(t)}
    base = frozenset(current)
    for step in certificate.steps:
        _attach_orbit(p, current, step.face, step.edges, p.group)
    if current != set(universe):
        raise VerificationFailed(
            "the replay did not fill the tensor",
            witness=len(set(universe) - current),
        )
    return base, frozenset(current)
