"""Finite groups presented by Cayley tables.

Groups here are small (order <= 16 in every shipped example), so all
subgroup/coset computations are unapologetically brute force.
"""

from __future__ import annotations

from dendroid.errors import InvalidGroup


class FiniteGroup:
    """A finite group given by its multiplication table.

    Elements are strings; ``table[(a, b)]`` is the product ``a * b``.  The
    declared element order is significant: coset representatives and quotient
    edge names are always chosen minimal with respect to it.
    """

    __slots__ = ("name", "elements", "table", "identity", "_inv", "_subgroups")

    def __init__(self, elements, table, name="G", check=True):
        self.name = name
        self.elements = tuple(elements)
        self.table = dict(table)
        if check:
            self._validate()
        self.identity = self._find_identity()
        self._inv = {
            a: next(b for b in self.elements if self.mul(a, b) == self.identity)
            for a in self.elements
        }
        self._subgroups = None

    def _validate(self):
        elems = self.elements
        if not elems:
            raise InvalidGroup("group needs at least one element")
        if len(set(elems)) != len(elems):
            raise InvalidGroup("duplicate element names", witness=elems)
        for a in elems:
            for b in elems:
                c = self.table.get((a, b))
                if c is None:
                    raise InvalidGroup(f"table is missing {(a, b)!r}", witness=(a, b))
                if c not in set(elems):
                    raise InvalidGroup(f"product {c!r} is not an element", witness=(a, b, c))
        try:
            self._find_identity()
        except StopIteration:
            raise InvalidGroup("no two-sided identity") from None
        e = self._find_identity()
        for a in elems:
            if not any(self.mul(a, b) == e and self.mul(b, a) == e for b in elems):
                raise InvalidGroup(f"{a!r} has no inverse", witness=a)
        for a in elems:
            for b in elems:
                for c in elems:
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)):
                        raise InvalidGroup("multiplication is not associative", witness=(a, b, c))

    def _find_identity(self):
        return next(
            e
            for e in self.elements
            if all(self.mul(e, a) == a and self.mul(a, e) == a for a in self.elements)
        )

    # -- arithmetic ----------------------------------------------------

    def mul(self, a, b):
        return self.table[(a, b)]

    def inv(self, a):
        return self._inv[a]

    def conjugate(self, g, a):
        """g * a * g^-1."""
        return self.mul(self.mul(g, a), self.inv(g))

    def order(self):
        return len(self.elements)

    def element_order(self, a):
        n, x = 1, a
        while x != self.identity:
            x = self.mul(x, a)
            n += 1
        return n

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, a):
        return a in set(self.elements)

    def __repr__(self):
        return f"FiniteGroup({self.name!r}, order={len(self.elements)})"

    def __eq__(self, other):
        if not isinstance(other, FiniteGroup):
            return NotImplemented
        return self.elements == other.elements and self.table == other.table

    def __hash__(self):
        return hash((self.elements, tuple(sorted(self.table.items()))))

    # -- subgroups and cosets -------------------------------------------

    def generated_subgroup(self, gens):
        members = {self.identity, *gens}
        while True:
            new = {self.mul(a, b) for a in members for b in members} | {
                self.inv(a) for a in members
            }
            if new <= members:
                return frozenset(members)
            members |= new

    def is_subgroup(self, subset):
        subset = frozenset(subset)
        return subset and subset <= set(self.elements) and self.generated_subgroup(subset) == subset

    def subgroups(self):
        """All subgroups, sorted by size then by sorted element names."""
        if self._subgroups is None:
            found = {frozenset({self.identity})}
            frontier = list(found)
            while frontier:
                h = frontier.pop()
                for g in self.elements:
                    if g not in h:
                        bigger = self.generated_subgroup(h | {g})
                        if bigger not in found:
                            found.add(bigger)
                            frontier.append(bigger)
            self._subgroups = sorted(found, key=lambda s: (len(s), sorted(s)))
        return list(self._subgroups)

    def is_normal(self, subset):
        h = frozenset(subset)
        return self.is_subgroup(h) and all(
            self.conjugate(g, a) in h for g in self.elements for a in h
        )

    def conjugate_subgroup(self, g, subset):
        return frozenset(self.conjugate(g, a) for a in subset)

    def left_cosets(self, subset):
        """Left cosets of a subgroup as ``(representative, members)`` pairs.

        Representatives are the first elements (in declared order) not yet
        covered, so the identity always represents the subgroup itself.
        """
        h = frozenset(subset)
        if not self.is_subgroup(h):
            raise InvalidGroup("not a subgroup", witness=sorted(h))
        seen = set()
        cosets = []
        for g in self.elements:
            if g not in seen:
                coset = frozenset(self.mul(g, a) for a in h)
                cosets.append((g, coset))
                seen |= coset
        return cosets

    def coset_rep(self, g, subset):
        for rep, coset in self.left_cosets(subset):
            if g in coset:
                return rep
        raise InvalidGroup(f"{g!r} is not an element", witness=g)

    def restricted_to(self, subset, name=None):
        """The subgroup as a group of its own, keeping element names/order."""
        h = frozenset(subset)
        if not self.is_subgroup(h):
            raise InvalidGroup("not a subgroup", witness=sorted(h))
        elems = tuple(a for a in self.elements if a in h)
        table = {(a, b): self.mul(a, b) for a in elems for b in elems}
        return FiniteGroup(elems, table, name=name or f"{self.name}|sub", check=False)


# -----------------------------------------------------------------------
# stock groups
# -----------------------------------------------------------------------

def trivial_group():
    return FiniteGroup(("1",), {("1", "1"): "1"}, name="1", check=False)


def cyclic_group(n):
    """Z/n.  For n = 2 the elements are named '1' and '-1'."""
    if n < 1:
        raise InvalidGroup("order must be positive", witness=n)
    if n == 1:
        return trivial_group()
    if n == 2:
        names = ["1", "-1"]
    else:
        names = ["1"] + [f"g{k}" for k in range(1, n)]
    table = {
        (names[a], names[b]): names[(a + b) % n] for a in range(n) for b in range(n)
    }
    return FiniteGroup(names, table, name=f"Z/{n}", check=False)


def _quat_mul(a, b):
    # elements modelled as (sign, axis) with axis in "1ijk"
    sa, xa = a
    sb, xb = b
    if xa == "1":
        return (sa * sb, xb)
    if xb == "1":
        return (sa * sb, xa)
    if xa == xb:
        return (-sa * sb, "1")
    rules = {
        ("i", "j"): (1, "k"),
        ("j", "k"): (1, "i"),
        ("k", "i"): (1, "j"),
        ("j", "i"): (-1, "k"),
        ("k", "j"): (-1, "i"),
        ("i", "k"): (-1, "j"),
    }
    s, x = rules[(xa, xb)]
    return (sa * sb * s, x)


def quaternion_group():
    """The quaternion group Q8 with elements 1, -1, i, -i, j, -j, k, -k."""
    pairs = [(s, x) for x in "1ijk" for s in (1, -1)]

    def show(p):
        s, x = p
        return x if s == 1 else f"-{x}"

    table = {(show(a), show(b)): show(_quat_mul(a, b)) for a in pairs for b in pairs}
    return FiniteGroup([show(p) for p in pairs], table, name="Q8", check=False)


_STOCK = {
    "trivial": trivial_group,
    "q8": quaternion_group,
}


def stock_group(name):
    """Look up a group by name: 'trivial', 'z<n>', or 'q8'."""
    key = name.lower()
    if key in _STOCK:
        return _STOCK[key]()
    if key.startswith("z") and key[1:].isdigit():
        return cyclic_group(int(key[1:]))
    raise InvalidGroup(f"unknown group {name!r}", witness=name)


def group_to_dict(g):
    return {
        "name": g.name,
        "elements": list(g.elements),
        "table": [[g.mul(a, b) for b in g.elements] for a in g.elements],
    }


def group_from_dict(data):
    elements = list(data["elements"])
    rows = data["table"]
    if len(rows) != len(elements) or any(len(r) != len(elements) for r in rows):
        raise InvalidGroup("table must be a square matrix over the elements")
    table = {
        (elements[i], elements[j]): rows[i][j]
        for i in range(len(elements))
        for j in range(len(elements))
    }
    return FiniteGroup(elements, table, name=data.get("name", "G"))
